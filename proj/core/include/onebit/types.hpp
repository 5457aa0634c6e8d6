#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace onebit {

using cdouble = std::complex<double>;

// Per-antenna / per-user signal grids. Rows index the antenna (or user),
// columns index the time sample m (or subcarrier v). Column v of a
// frequency-domain grid is the K-vector x[v].
using Grid = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Invalid scenario or parameter (bad M, V < L, N0 <= 0, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite input to a special function.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed data file; the message carries the offending line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Dense oracles (exact Hessian, exhaustive ML) refuse instances that are too
// large to enumerate or factor.
class OracleScopeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A per-frame detection failure (rank-deficient subcarrier, indefinite
// Hessian). Detectors catch it and flag the trial instead of aborting a run.
class TrialFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatch between arguments.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace onebit
