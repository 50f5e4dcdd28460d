#pragma once

#include <span>
#include <vector>

#include "varid/types.hpp"

namespace varid {

struct Triplet {
  int row;
  int col;
  cplx value;
};

/// Complex matrix in compressed-row form. Built from coordinate triplets;
/// duplicate (row, col) pairs are summed during consolidation and column
/// indices are sorted within each row.
class ComplexSparseMatrix {
 public:
  ComplexSparseMatrix() = default;
  ComplexSparseMatrix(int rows, int cols, std::span<const Triplet> triplets, bool hermitian = false);

  static ComplexSparseMatrix identity(int n);
  static ComplexSparseMatrix from_dense(const DenseMatrix& a, bool hermitian = false);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<cplx>& values() const { return values_; }

  cplx coeff(int i, int j) const;

  Vector operator*(const Vector& x) const;
  /// y = A^H x
  Vector adjoint_times(const Vector& x) const;

  ComplexSparseMatrix scaled(cplx s) const;
  /// alpha*A + beta*B over the union of both sparsity patterns.
  static ComplexSparseMatrix combine(cplx alpha, const ComplexSparseMatrix& a, cplx beta,
                                     const ComplexSparseMatrix& b);
  ComplexSparseMatrix operator+(const ComplexSparseMatrix& other) const {
    return combine(1.0, *this, 1.0, other);
  }
  ComplexSparseMatrix operator-(const ComplexSparseMatrix& other) const {
    return combine(1.0, *this, -1.0, other);
  }

  /// Symmetric permutation P A P^T with new_index = perm[old_index].
  ComplexSparseMatrix permuted(std::span<const int> perm) const;

  DenseMatrix to_dense() const;
  double max_abs() const;
  double norm1() const;  // max column sum
  /// max |a_ij - conj(a_ji)|
  double hermitian_defect() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  bool hermitian_ = false;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<cplx> values_;
};

}  // namespace varid
