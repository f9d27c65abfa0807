#ifndef DELAYSTEER_IO_HPP
#define DELAYSTEER_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaysteer/analysis.hpp"
#include "delaysteer/control_signal.hpp"
#include "delaysteer/model.hpp"
#include "delaysteer/simulator.hpp"

namespace delaysteer {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "delaysteer 0.1.0";

namespace io {

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << text;
}

// Matrices are accepted as nested rows [[...],[...]] or flat row-major [...].
inline Eigen::MatrixXd parse_matrix(const json& j, int n, const std::string& name) {
  Eigen::MatrixXd m(n, n);
  if (!j.is_array() || j.empty()) throw std::invalid_argument(name + ": expected a matrix array");
  if (j[0].is_array()) {
    if (static_cast<int>(j.size()) != n) throw std::invalid_argument(name + ": wrong row count");
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(j[r].size()) != n) throw std::invalid_argument(name + ": wrong column count");
      for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
    }
  } else {
    if (static_cast<int>(j.size()) != n * n) throw std::invalid_argument(name + ": wrong entry count");
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = j[r * n + c].get<double>();
  }
  return m;
}

inline json dump_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline MatrixKernel parse_kernel(const json& j, int n, const std::string& name) {
  MatrixKernel k;
  if (j.is_null()) return k;
  k.support_left = j.value("support_left", 0.0);
  if (j.contains("pieces")) {
    for (const auto& pj : j["pieces"]) {
      KernelPiece p;
      p.left = pj.at("interval")[0].get<double>();
      p.right = pj.at("interval")[1].get<double>();
      for (const auto& cj : pj.at("coeffs")) p.coeffs.push_back(parse_matrix(cj, n, name + ".coeffs"));
      k.pieces.push_back(std::move(p));
    }
  }
  return k;
}

inline json dump_kernel(const MatrixKernel& k) {
  json j;
  j["support_left"] = k.support_left;
  json pieces = json::array();
  for (const auto& p : k.pieces) {
    json pj;
    pj["interval"] = {p.left, p.right};
    json coeffs = json::array();
    for (const auto& c : p.coeffs) coeffs.push_back(dump_matrix(c));
    pj["coeffs"] = coeffs;
    pieces.push_back(pj);
  }
  j["pieces"] = pieces;
  return j;
}

inline DelaySystem parse_system(const json& j) {
  DelaySystem sys;
  sys.n = j.at("n").get<int>();
  const int n = sys.n;
  sys.A_minus1 = j.contains("A_minus1") ? parse_matrix(j["A_minus1"], n, "A_minus1")
                                        : Eigen::MatrixXd::Zero(n, n);
  sys.A1 = j.contains("A1") ? parse_matrix(j["A1"], n, "A1") : Eigen::MatrixXd::Zero(n, n);
  sys.A0 = j.contains("A0") ? parse_matrix(j["A0"], n, "A0") : Eigen::MatrixXd::Zero(n, n);
  sys.A2 = j.contains("A2") ? parse_kernel(j["A2"], n, "A2") : MatrixKernel{};
  sys.A3 = j.contains("A3") ? parse_kernel(j["A3"], n, "A3") : MatrixKernel{};
  sys.b.resize(n);
  const auto& bj = j.at("b");
  if (static_cast<int>(bj.size()) != n) throw std::invalid_argument("b: wrong length");
  for (int i = 0; i < n; ++i) sys.b(i) = bj[i].get<double>();
  sys.validate();
  return sys;
}

inline DelaySystem load_system(const std::string& path) { return parse_system(load_json_file(path)); }

inline M2State parse_state(const json& j, int n) {
  M2State s;
  s.y.resize(n);
  const auto& yj = j.at("y");
  if (static_cast<int>(yj.size()) != n) throw std::invalid_argument("y: wrong length");
  for (int i = 0; i < n; ++i) s.y(i) = yj[i].get<double>();
  if (j.contains("z0_const")) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = j["z0_const"][i].get<double>();
    s = M2State::constant(s.y, c);
  } else {
    const auto& zj = j.at("z0");  // list of n-vectors from τ = -1 to τ = 0
    const int m = static_cast<int>(zj.size());
    s.z0.resize(n, m);
    for (int i = 0; i < m; ++i)
      for (int r = 0; r < n; ++r) s.z0(r, i) = zj[i][r].get<double>();
  }
  s.validate();
  return s;
}

inline M2State load_state(const std::string& path, int n) { return parse_state(load_json_file(path), n); }

inline json dump_complex(cd z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json dump_eigenpoints(const std::vector<EigenPoint>& eigs) {
  json arr = json::array();
  for (const auto& e : eigs) {
    json ej;
    ej["re"] = e.lambda.real();
    ej["im"] = e.lambda.imag();
    ej["multiplicity"] = e.multiplicity;
    ej["branch"] = e.branch_j ? json(*e.branch_j) : json(nullptr);
    ej["index"] = e.index_k ? json(*e.index_k) : json(nullptr);
    ej["residual"] = e.residual;
    arr.push_back(ej);
  }
  return arr;
}

inline json dump_classification(const ClassificationReport& rep) {
  json j;
  j["window"] = {{"re_min", rep.window.re_min},
                 {"re_max", rep.window.re_max},
                 {"im_min", rep.window.im_min},
                 {"im_max", rep.window.im_max}};
  j["spectrally_controllable_in_window"] = rep.spectrally_controllable_in_window;
  j["spectral_witness"] = rep.spectral_witness ? dump_complex(*rep.spectral_witness) : json(nullptr);
  j["cond_A1_all_mu"] = rep.cond_A1_all_mu;
  j["cond_A1_nonzero_mu"] = rep.cond_A1_nonzero_mu;
  j["complete"] = rep.complete;
  j["completable"] = to_string(rep.completable);
  if (rep.completable == TriState::Yes) {
    json p1 = json::array(), pm1 = json::array();
    for (int i = 0; i < rep.completable_p1.size(); ++i) {
      p1.push_back(rep.completable_p1(i));
      pm1.push_back(rep.completable_p_minus1(i));
    }
    j["completable_witness"] = {{"p1", p1}, {"p_minus1", pm1}};
  }
  j["pair_A1_b_controllable"] = rep.pair_A1_b_controllable;
  j["retarded"] = rep.retarded;
  j["support_condition"] = rep.support_condition;
  j["exactly_null_controllable"] = to_string(rep.exactly_null_controllable);
  j["completely_stabilizable"] = to_string(rep.completely_stabilizable);
  j["eigenvalues"] = dump_eigenpoints(rep.eigenvalues);
  return j;
}

inline json dump_control(const ControlSignal& sig) {
  json j;
  j["T"] = sig.T;
  j["residual"] = sig.residual;
  j["imag_defect"] = sig.imag_defect;
  j["effective_rank"] = sig.effective_rank;
  json eigs = json::array();
  for (const auto& e : sig.eigenvalues_used) eigs.push_back({{"re", e.real()}, {"im", e.imag()}});
  j["eigenvalues_used"] = eigs;
  if (sig.has_exps) {
    json terms = json::array();
    for (const auto& t : sig.exps.terms)
      terms.push_back({{"exp_re", t.exponent.real()},
                       {"exp_im", t.exponent.imag()},
                       {"coeff_re", t.coeff.real()},
                       {"coeff_im", t.coeff.imag()}});
    j["exp_terms"] = terms;
  }
  return j;
}

inline ControlSignal parse_control(const json& j) {
  ControlSignal sig;
  sig.T = j.at("T").get<double>();
  sig.residual = j.value("residual", 0.0);
  sig.effective_rank = j.value("effective_rank", 0);
  if (j.contains("exp_terms")) {
    sig.has_exps = true;
    for (const auto& t : j["exp_terms"])
      sig.exps.terms.push_back({cd(t.at("exp_re").get<double>(), t.at("exp_im").get<double>()),
                                cd(t.at("coeff_re").get<double>(), t.at("coeff_im").get<double>())});
    fill_samples(sig);
  }
  return sig;
}

inline std::string control_csv(const ControlSignal& sig) {
  std::ostringstream os;
  os.precision(15);
  os << "t,u\n";
  const int m = static_cast<int>(sig.samples.size());
  for (int i = 0; i < m; ++i)
    os << sig.T * i / static_cast<double>(m - 1) << "," << sig.samples(i) << "\n";
  return os.str();
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(15);
  os << "t";
  for (int r = 0; r < traj.z.rows(); ++r) os << ",z_" << (r + 1);
  os << ",u\n";
  for (int i = 0; i < traj.z.cols(); ++i) {
    os << traj.time_at(i);
    for (int r = 0; r < traj.z.rows(); ++r) os << "," << traj.z(r, i);
    const int ui = i - (traj.history_cols - 1);
    os << "," << (ui >= 0 && ui < traj.u.size() ? traj.u(ui) : 0.0) << "\n";
  }
  return os.str();
}

// Reads the CSV written by trajectory_csv back into a Trajectory.
inline Trajectory load_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trajectory csv: empty file");
  int ncols = 1;
  for (char c : line) ncols += (c == ',');
  const int n = ncols - 2;
  if (n < 1) throw std::invalid_argument("trajectory csv: expected t,z_1..z_n,u header");
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  std::vector<double> us;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != ncols) throw std::invalid_argument("trajectory csv: ragged row");
    times.push_back(vals[0]);
    rows.push_back(std::vector<double>(vals.begin() + 1, vals.begin() + 1 + n));
    us.push_back(vals.back());
  }
  if (times.size() < 3) throw std::invalid_argument("trajectory csv: too few rows");
  Trajectory traj;
  traj.grid.dt = times[1] - times[0];
  traj.grid.horizon = times.back();
  traj.history_cols = traj.grid.steps_per_unit() + 1;
  traj.z.resize(n, static_cast<int>(times.size()));
  for (size_t i = 0; i < times.size(); ++i)
    for (int r = 0; r < n; ++r) traj.z(r, static_cast<int>(i)) = rows[i][static_cast<size_t>(r)];
  const int m = static_cast<int>(times.size()) - (traj.history_cols - 1);
  traj.u.resize(std::max(0, m));
  for (int i = 0; i < traj.u.size(); ++i) traj.u(i) = us[static_cast<size_t>(i) + traj.history_cols - 1];
  return traj;
}

}  // namespace io
}  // namespace delaysteer

#endif  // DELAYSTEER_IO_HPP
