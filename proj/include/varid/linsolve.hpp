#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "varid/sparse.hpp"
#include "varid/types.hpp"

namespace varid {

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity pattern.
/// Returns perm with new_index = perm[old_index].
std::vector<int> reverse_cuthill_mckee(const ComplexSparseMatrix& a);

/// LU factorization with partial pivoting of a sparse square matrix. The
/// matrix is first reordered by reverse Cuthill-McKee and then factored in
/// band storage, so fill stays within the (doubled) bandwidth. The object is
/// immutable once constructed; concurrent solves are safe.
class SparseLU {
 public:
  explicit SparseLU(const ComplexSparseMatrix& a, const NumericPolicy& policy = default_policy());

  int size() const { return n_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  /// x = A^{-1} b
  Vector solve(const Vector& b) const;
  /// x = A^{-H} b
  Vector solve_adjoint(const Vector& b) const;

  double norm1() const { return norm1_; }
  /// One-norm condition estimate ||A||_1 * est(||A^{-1}||_1) (Hager/Higham).
  double condition_estimate() const { return condition_; }

 private:
  cplx& band(int row, int col) { return ab_[static_cast<std::size_t>(col) * ldab_ + (kv_ + row - col)]; }
  cplx band(int row, int col) const { return ab_[static_cast<std::size_t>(col) * ldab_ + (kv_ + row - col)]; }
  void solve_in_place(Vector& x) const;          // permuted coordinates
  void solve_adjoint_in_place(Vector& x) const;  // permuted coordinates
  double estimate_inverse_norm1() const;

  int n_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  int kv_ = 0;
  int ldab_ = 0;
  std::vector<int> perm_;
  std::vector<cplx> ab_;
  std::vector<int> ipiv_;
  double norm1_ = 0.0;
  double condition_ = 0.0;
};

struct SolveReport {
  Vector solution;
  double residual_norm = 0.0;
  double estimated_condition = 0.0;
};

/// Solve with an existing factorization, checking the residual contract
/// ||Ax-b|| <= tol (||A||_1 ||x|| + ||b||) and refining if it is missed.
SolveReport solve_checked(const SparseLU& lu, const ComplexSparseMatrix& a, const Vector& b,
                          const NumericPolicy& policy = default_policy());

SolveReport sparse_solve(const ComplexSparseMatrix& a, const Vector& b,
                         const NumericPolicy& policy = default_policy());

// ---------------------------------------------------------------------------
// Generalized Hermitian Rayleigh quotients
// ---------------------------------------------------------------------------

enum class Extreme { Max, Min };

/// A linear operator self-adjoint with respect to the inner product
/// <x, y> = y^H G x, where G = gram is Hermitian positive definite.
struct SelfAdjointOperator {
  int n = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> gram;
};

struct RayleighResult {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
  double residual = 0.0;
};

/// Extreme eigenvalue of a G-self-adjoint operator by restarted Lanczos with
/// full G-reorthogonalization (a Krylov-accelerated power iteration).
RayleighResult extreme_eigenvalue(const SelfAdjointOperator& op, Extreme which,
                                  const NumericPolicy& policy = default_policy(),
                                  std::uint64_t seed = 0x5eed);

/// Extreme of (v^H Anum v) / (v^H Aden v) for Hermitian Anum and Hermitian
/// positive definite Aden.
double extreme_rayleigh(const ComplexSparseMatrix& anum, const ComplexSparseMatrix& aden, Extreme which,
                        const NumericPolicy& policy = default_policy());

}  // namespace varid
