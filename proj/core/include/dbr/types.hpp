#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dbr {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Vector-valued analytic function, evaluated pointwise.
using Evaluator = std::function<CVec(Complex)>;

inline bool in_halfplane(Complex mu) { return mu.real() > 0.0; }
inline bool in_disk(Complex z) { return std::abs(z) < 1.0; }

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : Error {
  using Error::Error;
};
struct SingularError : Error {
  using Error::Error;
};
struct PositivityError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct DegenerateNodeError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct StabilityError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IOError : Error {
  using Error::Error;
};

}  // namespace dbr
