#pragma once

// Manufactured solutions for -(Δu + k²(1-m)u) = -f in Ω, ∂_ν u - i k u = g on ∂Ω.
// The discrete problem is (A1 + Cmat) u = -∫ f w̄ + ∫_∂Ω g w̄.

#include <cmath>

#include "varid/assembly.hpp"
#include "varid/linsolve.hpp"

namespace manufactured {

using varid::cplx;
using varid::kI;
using varid::Point;

struct Problem {
  double k;
  cplx (*u)(const Point&);
  cplx (*ux)(const Point&);
  cplx (*uy)(const Point&);
  cplx (*lap)(const Point&);
  double (*m)(const Point&);
};

// 1D: u = cos 3x + i x², m = 0.3 x
inline cplx u1(const Point& p) { return std::cos(3 * p[0]) + kI * p[0] * p[0]; }
inline cplx u1x(const Point& p) { return -3.0 * std::sin(3 * p[0]) + 2.0 * kI * p[0]; }
inline cplx zero(const Point&) { return 0.0; }
inline cplx u1xx(const Point& p) { return -9.0 * std::cos(3 * p[0]) + 2.0 * kI; }
inline double m1(const Point& p) { return 0.3 * p[0]; }

// 2D: u = cos(2x + y) + i x² y, m = 0.3 x y
inline cplx u2(const Point& p) { return std::cos(2 * p[0] + p[1]) + kI * p[0] * p[0] * p[1]; }
inline cplx u2x(const Point& p) { return -2.0 * std::sin(2 * p[0] + p[1]) + 2.0 * kI * p[0] * p[1]; }
inline cplx u2y(const Point& p) { return -std::sin(2 * p[0] + p[1]) + kI * p[0] * p[0]; }
inline cplx u2lap(const Point& p) { return -5.0 * std::cos(2 * p[0] + p[1]) + 2.0 * kI * p[1]; }
inline double m2(const Point& p) { return 0.3 * p[0] * p[1]; }

inline Problem problem_1d() { return {2.0, u1, u1x, zero, u1xx, m1}; }
inline Problem problem_2d() { return {2.0, u2, u2x, u2y, u2lap, m2}; }

// Outward normal of the unit interval / unit square at a boundary point.
inline Point outward_normal(const varid::Mesh& mesh, const Point& x) {
  const double tol = 1e-12;
  if (mesh.dim() == 1) return {x[0] < 0.5 ? -1.0 : 1.0, 0.0};
  if (std::abs(x[0]) < tol) return {-1.0, 0.0};
  if (std::abs(x[0] - 1.0) < tol) return {1.0, 0.0};
  if (std::abs(x[1]) < tol) return {0.0, -1.0};
  return {0.0, 1.0};
}

// L2 error of the discrete solution on `mesh` (unit interval or unit square).
inline double l2_error(const varid::Mesh& mesh, const Problem& pb) {
  using namespace varid;
  const double k = pb.k, beta = k * k;
  const Vector mvals = interpolate(mesh, [&](const Point& x) { return cplx(pb.m(x)); });
  const auto K = assemble_stiffness(mesh);
  const auto M = assemble_mass(mesh);
  const auto B = assemble_boundary_mass(mesh);
  const auto A = ComplexSparseMatrix::combine(1.0, K + M, -kI * k, B) +
                 ComplexSparseMatrix::combine(-(1.0 + beta), M, beta, assemble_mass(mesh, mvals));
  const auto f = [&](const Point& x) { return pb.lap(x) + beta * (1.0 - pb.m(x)) * pb.u(x); };
  // Boundary facets in 2D are integrated at interior Gauss points, never at
  // corners, so the normal is unambiguous.
  const auto g = [&](const Point& x) {
    const Point n = outward_normal(mesh, x);
    return n[0] * pb.ux(x) + n[1] * pb.uy(x) - kI * k * pb.u(x);
  };
  const Vector rhs = -assemble_load(mesh, f) + assemble_boundary_load(mesh, g);
  const Vector uh = sparse_solve(A, rhs).solution;
  return varid::l2_error(mesh, uh, [&](const Point& x) { return pb.u(x); });
}

}  // namespace manufactured
