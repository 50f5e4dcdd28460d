#include "varid/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varid {

ComplexSparseMatrix::ComplexSparseMatrix(int rows, int cols, std::span<const Triplet> triplets,
                                         bool hermitian)
    : rows_(rows), cols_(cols), hermitian_(hermitian) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  if (hermitian && rows != cols) throw std::invalid_argument("hermitian matrix must be square");
  std::vector<int> count(rows + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("triplet index out of range");
    ++count[t.row + 1];
  }
  for (int i = 0; i < rows; ++i) count[i + 1] += count[i];
  std::vector<int> cols_raw(triplets.size());
  std::vector<cplx> vals_raw(triplets.size());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (const auto& t : triplets) {
    const int pos = next[t.row]++;
    cols_raw[pos] = t.col;
    vals_raw[pos] = t.value;
  }

  row_ptr_.assign(rows + 1, 0);
  col_idx_.reserve(triplets.size());
  values_.reserve(triplets.size());
  std::vector<int> order;
  for (int i = 0; i < rows; ++i) {
    order.resize(count[i + 1] - count[i]);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = count[i] + static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cols_raw[a] < cols_raw[b]; });
    for (int k : order) {
      if (!col_idx_.empty() && static_cast<int>(col_idx_.size()) > row_ptr_[i] &&
          col_idx_.back() == cols_raw[k]) {
        values_.back() += vals_raw[k];
      } else {
        col_idx_.push_back(cols_raw[k]);
        values_.push_back(vals_raw[k]);
      }
    }
    row_ptr_[i + 1] = static_cast<int>(col_idx_.size());
  }
}

ComplexSparseMatrix ComplexSparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return ComplexSparseMatrix(n, n, t, true);
}

ComplexSparseMatrix ComplexSparseMatrix::from_dense(const DenseMatrix& a, bool hermitian) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != cplx(0.0)) t.push_back({static_cast<int>(i), static_cast<int>(j), a(i, j)});
  return ComplexSparseMatrix(static_cast<int>(a.rows()), static_cast<int>(a.cols()), t, hermitian);
}

cplx ComplexSparseMatrix::coeff(int i, int j) const {
  const auto begin = col_idx_.begin() + row_ptr_[i];
  const auto end = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it != end && *it == j) return values_[it - col_idx_.begin()];
  return 0.0;
}

Vector ComplexSparseMatrix::operator*(const Vector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("matrix-vector size mismatch");
  Vector y = Vector::Zero(rows_);
  for (int i = 0; i < rows_; ++i) {
    cplx acc = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
    y[i] = acc;
  }
  return y;
}

Vector ComplexSparseMatrix::adjoint_times(const Vector& x) const {
  if (x.size() != rows_) throw std::invalid_argument("adjoint matrix-vector size mismatch");
  Vector y = Vector::Zero(cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_idx_[k]] += std::conj(values_[k]) * x[i];
  return y;
}

ComplexSparseMatrix ComplexSparseMatrix::scaled(cplx s) const {
  ComplexSparseMatrix out = *this;
  for (auto& v : out.values_) v *= s;
  out.hermitian_ = hermitian_ && s.imag() == 0.0;
  return out;
}

ComplexSparseMatrix ComplexSparseMatrix::combine(cplx alpha, const ComplexSparseMatrix& a, cplx beta,
                                                 const ComplexSparseMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix sum size mismatch");
  ComplexSparseMatrix out;
  out.rows_ = a.rows_;
  out.cols_ = a.cols_;
  out.hermitian_ = a.hermitian_ && b.hermitian_ && alpha.imag() == 0.0 && beta.imag() == 0.0;
  out.row_ptr_.assign(a.rows_ + 1, 0);
  out.col_idx_.reserve(std::max(a.nonzeros(), b.nonzeros()));
  out.values_.reserve(std::max(a.nonzeros(), b.nonzeros()));
  for (int i = 0; i < a.rows_; ++i) {
    int p = a.row_ptr_[i], q = b.row_ptr_[i];
    const int pe = a.row_ptr_[i + 1], qe = b.row_ptr_[i + 1];
    while (p < pe || q < qe) {
      const int ca = p < pe ? a.col_idx_[p] : a.cols_;
      const int cb = q < qe ? b.col_idx_[q] : b.cols_;
      if (ca == cb) {
        out.col_idx_.push_back(ca);
        out.values_.push_back(alpha * a.values_[p++] + beta * b.values_[q++]);
      } else if (ca < cb) {
        out.col_idx_.push_back(ca);
        out.values_.push_back(alpha * a.values_[p++]);
      } else {
        out.col_idx_.push_back(cb);
        out.values_.push_back(beta * b.values_[q++]);
      }
    }
    out.row_ptr_[i + 1] = static_cast<int>(out.col_idx_.size());
  }
  return out;
}

ComplexSparseMatrix ComplexSparseMatrix::permuted(std::span<const int> perm) const {
  if (rows_ != cols_ || static_cast<int>(perm.size()) != rows_)
    throw std::invalid_argument("permutation requires a square matrix of matching size");
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({perm[i], perm[col_idx_[k]], values_[k]});
  return ComplexSparseMatrix(rows_, cols_, t, hermitian_);
}

DenseMatrix ComplexSparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) += values_[k];
  return d;
}

double ComplexSparseMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexSparseMatrix::norm1() const {
  std::vector<double> colsum(cols_, 0.0);
  for (std::size_t k = 0; k < values_.size(); ++k) colsum[col_idx_[k]] += std::abs(values_[k]);
  double m = 0.0;
  for (double s : colsum) m = std::max(m, s);
  return m;
}

double ComplexSparseMatrix::hermitian_defect() const {
  if (rows_ != cols_) return INFINITY;
  double d = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      d = std::max(d, std::abs(values_[k] - std::conj(coeff(col_idx_[k], i))));
  return d;
}

}  // namespace varid
