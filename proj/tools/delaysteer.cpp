// Command-line front end: analyze | spectrum | synthesize | simulate | verify.
// Exit codes: 0 success, 1 domain error, 2 input/parse error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "delaysteer/io.hpp"
#include "delaysteer/synthesis.hpp"

namespace {

using namespace delaysteer;

uint64_t seed_from_env() {
  if (const char* s = std::getenv("DELAYSTEER_SEED")) return std::strtoull(s, nullptr, 10);
  return 0x5eed;
}

struct Options {
  std::string command;
  std::string system_path, state_path, control_path, traj_path, out_path;
  std::vector<double> window;
  double horizon = 3.0;
  int truncation = kDefaultTruncation;
  double dt = 1.0 / 512.0;
  double tol = 1e-3;
  std::string format = "json";
};

Window parse_window(const std::vector<double>& w) {
  if (w.size() != 4) throw std::invalid_argument("--window needs re_min,re_max,im_min,im_max");
  Window win{w[0], w[1], w[2], w[3]};
  win.validate();
  return win;
}

json base_report(const Options& opt, uint64_t seed) {
  json j;
  j["tool"] = kVersion;
  j["seed"] = seed;
  j["tolerances"] = {{"rank", kRankTol}, {"kernel", kKernelRankTol}, {"gram_cutoff", kGramCutoff}};
  j["dt"] = opt.dt;
  j["truncation"] = opt.truncation;
  j["horizon"] = opt.horizon;
  return j;
}

void emit(const Options& opt, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (opt.out_path.empty())
    std::cout << text;
  else
    io::write_file(opt.out_path, text);
}

int run_analyze(const Options& opt, uint64_t seed) {
  const DelaySystem sys = io::load_system(opt.system_path);
  const Window w = parse_window(opt.window);
  const ClassificationReport rep = classify(sys, w, seed);
  json j = base_report(opt, seed);
  j["report"] = io::dump_classification(rep);
  emit(opt, j);
  return 0;
}

int run_spectrum(const Options& opt, uint64_t seed) {
  const DelaySystem sys = io::load_system(opt.system_path);
  const Window w = parse_window(opt.window);
  const auto eigs = find_eigenvalues(sys, w);
  json j = base_report(opt, seed);
  j["window"] = {{"re_min", w.re_min}, {"re_max", w.re_max}, {"im_min", w.im_min}, {"im_max", w.im_max}};
  j["eigenvalues"] = io::dump_eigenpoints(eigs);
  emit(opt, j);
  return 0;
}

int run_synthesize(const Options& opt, uint64_t seed) {
  const DelaySystem sys = io::load_system(opt.system_path);
  const M2State x0 = io::load_state(opt.state_path, sys.n);
  const ControlSignal u = synthesize(sys, x0, opt.horizon, opt.truncation);
  json j = base_report(opt, seed);
  j["control"] = io::dump_control(u);
  if (opt.out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_file(opt.out_path + ".json", j.dump(2) + "\n");
    io::write_file(opt.out_path + ".csv", io::control_csv(u));
  }
  return 0;
}

int run_simulate(const Options& opt, uint64_t seed) {
  const DelaySystem sys = io::load_system(opt.system_path);
  const M2State x0 = io::load_state(opt.state_path, sys.n);
  ControlSignal u;
  const bool has_u = !opt.control_path.empty();
  if (has_u) u = io::parse_control(io::load_json_file(opt.control_path));
  Grid grid{opt.dt, opt.horizon};
  const Trajectory traj = simulate(sys, x0, has_u ? &u : nullptr, grid);
  json j = base_report(opt, seed);
  const NullCheck nc = verify_null(traj, opt.horizon, opt.tol);
  j["summary"] = {{"terminal_residual", nc.residual}, {"grid_dt", grid.dt}, {"horizon", grid.horizon}};
  if (opt.out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_file(opt.out_path + ".json", j.dump(2) + "\n");
    io::write_file(opt.out_path + ".csv", io::trajectory_csv(traj));
  }
  return 0;
}

int run_verify(const Options& opt, uint64_t seed) {
  const Trajectory traj = io::load_trajectory_csv(opt.traj_path);
  const NullCheck nc = verify_null(traj, opt.horizon, opt.tol);
  json j = base_report(opt, seed);
  j["verify"] = {{"T", opt.horizon}, {"tol", opt.tol}, {"null", nc.is_null}, {"residual", nc.residual}};
  emit(opt, j);
  std::cerr << (nc.is_null ? "verify: PASS" : "verify: FAIL") << " residual=" << nc.residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delaysteer: controllability analysis and steering-control synthesis for time-delay systems"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool needs_system) {
    if (needs_system) sub->add_option("--system", opt.system_path, "system description JSON")->required();
    sub->add_option("--out", opt.out_path, "output path (stdout if omitted)");
    sub->add_option("--format", opt.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  };

  auto* analyze = app.add_subcommand("analyze", "classification report for a system");
  add_common(analyze, true);
  analyze->add_option("--window", opt.window, "re_min,re_max,im_min,im_max")->delimiter(',')->required();

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues in a window");
  add_common(spectrum, true);
  spectrum->add_option("--window", opt.window, "re_min,re_max,im_min,im_max")->delimiter(',')->required();

  auto* synth = app.add_subcommand("synthesize", "steering control via the moment problem");
  add_common(synth, true);
  synth->add_option("--state", opt.state_path, "initial state JSON")->required();
  synth->add_option("--horizon", opt.horizon, "steering horizon T")->required();
  synth->add_option("--truncation", opt.truncation, "eigenvalues per branch");

  auto* sim = app.add_subcommand("simulate", "integrate the delay equation");
  add_common(sim, true);
  sim->add_option("--state", opt.state_path, "initial state JSON")->required();
  sim->add_option("--control", opt.control_path, "control JSON from synthesize");
  sim->add_option("--horizon", opt.horizon, "simulation horizon")->required();
  sim->add_option("--dt", opt.dt, "grid step (1/dt integer)");
  sim->add_option("--tol", opt.tol, "terminal residual tolerance for the summary");

  auto* verify = app.add_subcommand("verify", "check a trajectory is null on [T-1, T]");
  add_common(verify, false);
  verify->add_option("--traj", opt.traj_path, "trajectory CSV from simulate")->required();
  verify->add_option("--horizon", opt.horizon, "time T")->required();
  verify->add_option("--tol", opt.tol, "residual tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const uint64_t seed = seed_from_env();
  try {
    if (analyze->parsed()) return run_analyze(opt, seed);
    if (spectrum->parsed()) return run_spectrum(opt, seed);
    if (synth->parsed()) return run_synthesize(opt, seed);
    if (sim->parsed()) return run_simulate(opt, seed);
    if (verify->parsed()) return run_verify(opt, seed);
  } catch (const delaysteer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
