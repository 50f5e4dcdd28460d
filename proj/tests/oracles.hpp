#pragma once

// Dense reference computations. Nothing here calls into the library's
// solvers or eigen routines; it is all plain Eigen.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "varid/types.hpp"

namespace oracle {

using varid::cplx;
using varid::DenseMatrix;
using varid::Vector;

inline DenseMatrix chol_lower(const DenseMatrix& g) { return Eigen::LLT<DenseMatrix>(g).matrixL(); }

inline double max_singular(const DenseMatrix& a) {
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues()[0];
}

inline double min_singular(const DenseMatrix& a) {
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

// L^{-1} X L^{-H} style congruences, solved rather than inverted.
inline DenseMatrix whiten(const DenseMatrix& f, const DenseMatrix& left_gram, const DenseMatrix& right_gram) {
  const DenseMatrix lr = chol_lower(right_gram), ll = chol_lower(left_gram);
  const DenseMatrix a = lr.triangularView<Eigen::Lower>().solve(f);                        // Lr^{-1} F
  return ll.triangularView<Eigen::Lower>().solve(a.adjoint()).adjoint();                   // ... Ll^{-H}
}

// sup |w^H F v| / (|v|_left |w|_right)
inline double form_norm(const DenseMatrix& f, const DenseMatrix& left_gram, const DenseMatrix& right_gram) {
  return max_singular(whiten(f, left_gram, right_gram));
}

// min_v max_w |w^H A v| / (|v|_G |w|_G)
inline double inf_sup(const DenseMatrix& a, const DenseMatrix& g) { return min_singular(whiten(a, g, g)); }

// Operator norm of the coefficient map X measured in the G norm on both sides.
inline double operator_norm(const DenseMatrix& x, const DenseMatrix& g) {
  const DenseMatrix l = chol_lower(g);
  const DenseMatrix lhx = l.adjoint() * x;
  return max_singular(l.triangularView<Eigen::Lower>().solve(lhx.adjoint()).adjoint());
}

// All eigenvalues of the pencil (A, B), B positive definite, ascending.
inline Eigen::VectorXd pencil_eigenvalues(const DenseMatrix& a, const DenseMatrix& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(a, b, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double gram_norm(const DenseMatrix& g, const Vector& v) { return std::sqrt(v.dot(g * v).real()); }

// Gauss-Legendre nodes/weights on [0, 1] by Newton on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

// ∫_a^b f(x) dx with an n-point Gauss rule.
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b, int n = 20) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) s += w[i] * f(a + (b - a) * x[i]);
  return (b - a) * s;
}

// Log-log least-squares slope.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double a = std::log(h[i]), b = std::log(err[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
