#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace varid {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXcd;

inline constexpr cplx kI{0.0, 1.0};

// Base for every numerical failure raised by the library. Argument and
// configuration problems use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public NumericalError {
 public:
  SingularMatrix(const std::string& what, double pivot = 0.0)
      : NumericalError(what), pivot_(pivot) {}
  double pivot() const { return pivot_; }

 private:
  double pivot_;
};

class ConvergenceFailure : public NumericalError {
 public:
  ConvergenceFailure(const std::string& what, int iterations)
      : NumericalError(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

// The variational problem at a given parameter is not uniquely solvable
// (or could not be certified as such).
class WellPosednessFailure : public NumericalError {
 public:
  WellPosednessFailure(const std::string& what, double condition_estimate, int iterate = -1)
      : NumericalError(what), condition_estimate_(condition_estimate), iterate_(iterate) {}
  double condition_estimate() const { return condition_estimate_; }
  int iterate() const { return iterate_; }

 private:
  double condition_estimate_;
  int iterate_;
};

/// Every tolerance used by the library lives here so runs are auditable and
/// overridable from a single place (the CLI exposes these as "policy").
struct NumericPolicy {
  // linsolve
  double pivot_tolerance = 1e-14;     // relative to max|A|
  double residual_tolerance = 1e-10;  // ||Ax-b|| <= tol (||A||_1 ||x|| + ||b||)
  int refinement_steps = 2;

  // generalized Rayleigh extremes
  double eig_tolerance = 1e-10;       // Ritz residual relative to |theta|
  int eig_max_iterations = 10000;
  int eig_krylov_dim = 80;
  double bound_safety = 1e-10;        // relative inflation of computed upper bounds

  // formcore
  int dense_limit = 500;              // dense operators are formed only up to this size
  double kernel_rank_tolerance = 1e-10;

  // Landweber step-size power iteration
  int power_iterations = 60;
};

const NumericPolicy& default_policy();

}  // namespace varid
