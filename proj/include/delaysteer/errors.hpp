#ifndef DELAYSTEER_ERRORS_HPP
#define DELAYSTEER_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace delaysteer {

// Base class for all domain-level failures.  Input/parse problems use
// std::invalid_argument directly; everything the algorithms can signal
// derives from Error so the CLI can map them to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class KernelEmpty : public Error {
 public:
  using Error::Error;
};

class NotSpectrallyControllableAt : public Error {
 public:
  explicit NotSpectrallyControllableAt(std::complex<double> lambda)
      : Error("system is not spectrally controllable at lambda = (" +
              std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) + ")"),
        lambda(lambda) {}
  std::complex<double> lambda;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class CollidingSeeds : public Error {
 public:
  using Error::Error;
};

class BoundaryZero : public Error {
 public:
  using Error::Error;
};

class NotControllablePair : public Error {
 public:
  using Error::Error;
};

class PlacementIllConditioned : public Error {
 public:
  using Error::Error;
};

class MultipleEigenvalue : public Error {
 public:
  explicit MultipleEigenvalue(std::complex<double> lambda)
      : Error("eigenvalue is not simple: (" + std::to_string(lambda.real()) + ", " +
              std::to_string(lambda.imag()) + ")"),
        lambda(lambda) {}
  std::complex<double> lambda;
};

class SingularPairSystem : public Error {
 public:
  using Error::Error;
};

class HorizonTooShort : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class TruncationDiverging : public Error {
 public:
  using Error::Error;
};

class SimpleSpectrumViolated : public Error {
 public:
  using Error::Error;
};

class IncompatibleGrid : public Error {
 public:
  using Error::Error;
};

class NonSmoothHistory : public Error {
 public:
  using Error::Error;
};

class HorizonShort : public Error {
 public:
  using Error::Error;
};

}  // namespace delaysteer

#endif  // DELAYSTEER_ERRORS_HPP
