#include "varid/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "varid/random.hpp"

namespace varid {

const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

// ---------------------------------------------------------------------------
// Ordering
// ---------------------------------------------------------------------------

namespace {

using Graph = std::vector<std::vector<int>>;

Graph symmetric_graph(const ComplexSparseMatrix& a) {
  const int n = a.rows();
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const int j = a.col_idx()[k];
      if (j == i) continue;
      g[i].push_back(j);
      g[j].push_back(i);
    }
  for (auto& adj : g) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

// Breadth-first level structure rooted at `root`, restricted to nodes with
// done[node] == false. Returns the depth and fills `last_level`.
int level_structure(const Graph& g, const std::vector<char>& done, int root, std::vector<int>& last_level) {
  std::vector<int> level(g.size(), -1);
  std::vector<int> frontier{root};
  level[root] = 0;
  int depth = 0;
  while (true) {
    std::vector<int> next;
    for (int u : frontier)
      for (int v : g[u])
        if (!done[v] && level[v] < 0) {
          level[v] = depth + 1;
          next.push_back(v);
        }
    if (next.empty()) break;
    frontier = std::move(next);
    ++depth;
  }
  last_level = std::move(frontier);
  return depth;
}

int pseudo_peripheral_node(const Graph& g, const std::vector<char>& done, int start) {
  int root = start;
  std::vector<int> last;
  int depth = level_structure(g, done, root, last);
  while (true) {
    int best = last.front();
    for (int v : last)
      if (g[v].size() < g[best].size() || (g[v].size() == g[best].size() && v < best)) best = v;
    std::vector<int> last2;
    const int depth2 = level_structure(g, done, best, last2);
    if (depth2 <= depth) return root;
    root = best;
    depth = depth2;
    last = std::move(last2);
  }
}

}  // namespace

std::vector<int> reverse_cuthill_mckee(const ComplexSparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ordering requires a square matrix");
  const int n = a.rows();
  const Graph g = symmetric_graph(a);
  std::vector<char> done(n, 0);
  std::vector<int> order;
  order.reserve(n);
  const auto by_degree = [&](int u, int v) {
    return g[u].size() != g[v].size() ? g[u].size() < g[v].size() : u < v;
  };
  while (static_cast<int>(order.size()) < n) {
    int start = -1;
    for (int i = 0; i < n; ++i)
      if (!done[i] && (start < 0 || by_degree(i, start))) start = i;
    const int root = pseudo_peripheral_node(g, done, start);
    std::size_t head = order.size();
    order.push_back(root);
    done[root] = 1;
    while (head < order.size()) {
      const int u = order[head++];
      std::vector<int> fresh;
      for (int v : g[u])
        if (!done[v]) {
          done[v] = 1;
          fresh.push_back(v);
        }
      std::sort(fresh.begin(), fresh.end(), by_degree);
      order.insert(order.end(), fresh.begin(), fresh.end());
    }
  }
  std::vector<int> perm(n);
  for (int k = 0; k < n; ++k) perm[order[k]] = n - 1 - k;
  return perm;
}

// ---------------------------------------------------------------------------
// Band LU
// ---------------------------------------------------------------------------

SparseLU::SparseLU(const ComplexSparseMatrix& a, const NumericPolicy& policy) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LU requires a square matrix");
  n_ = a.rows();
  norm1_ = a.norm1();
  if (n_ == 0) return;
  perm_ = reverse_cuthill_mckee(a);

  for (int i = 0; i < n_; ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const int pi = perm_[i], pj = perm_[a.col_idx()[k]];
      kl_ = std::max(kl_, pi - pj);
      ku_ = std::max(ku_, pj - pi);
    }
  kv_ = kl_ + ku_;
  ldab_ = 2 * kl_ + ku_ + 1;
  ab_.assign(static_cast<std::size_t>(ldab_) * n_, cplx(0.0));
  for (int i = 0; i < n_; ++i)
    for (int k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) band(perm_[i], perm_[a.col_idx()[k]]) += a.values()[k];

  const double threshold = policy.pivot_tolerance * a.max_abs();
  ipiv_.resize(n_);
  int ju = 0;
  for (int j = 0; j < n_; ++j) {
    const int km = std::min(kl_, n_ - 1 - j);
    int jp = 0;
    double best = std::abs(band(j, j));
    for (int r = 1; r <= km; ++r) {
      const double v = std::abs(band(j + r, j));
      if (v > best) {
        best = v;
        jp = r;
      }
    }
    ipiv_[j] = j + jp;
    if (!(best > threshold))
      throw SingularMatrix("matrix is singular to working precision (pivot " + std::to_string(best) +
                               " at step " + std::to_string(j) + ")",
                           best);
    ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
    if (jp != 0)
      for (int c = j; c <= ju; ++c) std::swap(band(j, c), band(j + jp, c));
    if (km > 0) {
      const cplx inv = 1.0 / band(j, j);
      for (int r = 1; r <= km; ++r) band(j + r, j) *= inv;
      for (int c = j + 1; c <= ju; ++c) {
        const cplx ujc = band(j, c);
        if (ujc == cplx(0.0)) continue;
        for (int r = 1; r <= km; ++r) band(j + r, c) -= band(j + r, j) * ujc;
      }
    }
  }
  condition_ = norm1_ * estimate_inverse_norm1();
}

void SparseLU::solve_in_place(Vector& x) const {
  for (int j = 0; j < n_ - 1; ++j) {
    const int lm = std::min(kl_, n_ - 1 - j);
    if (ipiv_[j] != j) std::swap(x[ipiv_[j]], x[j]);
    const cplx xj = x[j];
    for (int r = 1; r <= lm; ++r) x[j + r] -= band(j + r, j) * xj;
  }
  for (int j = n_ - 1; j >= 0; --j) {
    x[j] /= band(j, j);
    const cplx xj = x[j];
    for (int i = std::max(0, j - kv_); i < j; ++i) x[i] -= band(i, j) * xj;
  }
}

void SparseLU::solve_adjoint_in_place(Vector& x) const {
  for (int j = 0; j < n_; ++j) {
    cplx acc = x[j];
    for (int i = std::max(0, j - kv_); i < j; ++i) acc -= std::conj(band(i, j)) * x[i];
    x[j] = acc / std::conj(band(j, j));
  }
  for (int j = n_ - 2; j >= 0; --j) {
    const int lm = std::min(kl_, n_ - 1 - j);
    cplx acc = x[j];
    for (int r = 1; r <= lm; ++r) acc -= std::conj(band(j + r, j)) * x[j + r];
    x[j] = acc;
    if (ipiv_[j] != j) std::swap(x[ipiv_[j]], x[j]);
  }
}

Vector SparseLU::solve(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("right-hand side size mismatch");
  Vector x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = b[i];
  solve_in_place(x);
  Vector out(n_);
  for (int i = 0; i < n_; ++i) out[i] = x[perm_[i]];
  return out;
}

Vector SparseLU::solve_adjoint(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("right-hand side size mismatch");
  Vector x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = b[i];
  solve_adjoint_in_place(x);
  Vector out(n_);
  for (int i = 0; i < n_; ++i) out[i] = x[perm_[i]];
  return out;
}

// Hager's estimator with Higham's extra test vector (the algorithm behind
// LAPACK's zlacn2), applied in permuted coordinates: the one-norm is
// invariant under symmetric permutation.
double SparseLU::estimate_inverse_norm1() const {
  const auto sign = [](cplx z) { return std::abs(z) > 0.0 ? z / std::abs(z) : cplx(1.0); };
  Vector x = Vector::Constant(n_, 1.0 / n_);
  double estimate = 0.0;
  int last_j = -1;
  for (int iter = 0; iter < 5; ++iter) {
    Vector y = x;
    solve_in_place(y);
    const double ny = y.lpNorm<1>();
    if (iter > 0 && ny <= estimate) break;
    estimate = ny;
    Vector xi(n_);
    for (int i = 0; i < n_; ++i) xi[i] = sign(y[i]);
    solve_adjoint_in_place(xi);
    int j = 0;
    for (int i = 1; i < n_; ++i)
      if (std::abs(xi[i]) > std::abs(xi[j])) j = i;
    if (j == last_j) break;
    last_j = j;
    x.setZero();
    x[j] = 1.0;
  }
  Vector alt(n_);
  for (int i = 0; i < n_; ++i)
    alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + (n_ > 1 ? static_cast<double>(i) / (n_ - 1) : 0.0));
  solve_in_place(alt);
  const double alt_est = 2.0 * alt.lpNorm<1>() / (3.0 * n_);
  return std::max(estimate, alt_est);
}

SolveReport solve_checked(const SparseLU& lu, const ComplexSparseMatrix& a, const Vector& b,
                          const NumericPolicy& policy) {
  SolveReport report;
  report.solution = lu.solve(b);
  report.estimated_condition = lu.condition_estimate();
  const double anorm = a.norm1();
  const auto contract = [&](const Vector& x) { return policy.residual_tolerance * (anorm * x.norm() + b.norm()); };
  Vector r = b - a * report.solution;
  report.residual_norm = r.norm();
  for (int step = 0; step < policy.refinement_steps && report.residual_norm > contract(report.solution); ++step) {
    report.solution += lu.solve(r);
    r = b - a * report.solution;
    report.residual_norm = r.norm();
  }
  if (!(report.residual_norm <= contract(report.solution)))
    throw SingularMatrix("residual " + std::to_string(report.residual_norm) +
                         " violates the solve contract (condition estimate " +
                         std::to_string(report.estimated_condition) + ")");
  return report;
}

SolveReport sparse_solve(const ComplexSparseMatrix& a, const Vector& b, const NumericPolicy& policy) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sparse_solve requires a square matrix");
  if (b.size() != a.rows()) throw std::invalid_argument("right-hand side size mismatch");
  const SparseLU lu(a, policy);
  return solve_checked(lu, a, b, policy);
}

// ---------------------------------------------------------------------------
// Lanczos
// ---------------------------------------------------------------------------

RayleighResult extreme_eigenvalue(const SelfAdjointOperator& op, Extreme which, const NumericPolicy& policy,
                                  std::uint64_t seed) {
  const int n = op.n;
  if (n <= 0) throw std::invalid_argument("empty operator");
  const int m = std::max(2, std::min(n, policy.eig_krylov_dim));
  Rng rng(seed);
  Vector start = rng.complex_normal_vector(n);

  RayleighResult result;
  std::vector<Vector> q, z;
  q.reserve(m + 1);
  z.reserve(m + 1);
  while (result.iterations < policy.eig_max_iterations) {
    q.clear();
    z.clear();
    Vector gz = op.gram(start);
    double nrm = std::sqrt(std::max(0.0, start.dot(gz).real()));
    if (!(nrm > 0.0)) throw std::invalid_argument("Lanczos start vector has zero norm");
    q.push_back(start / nrm);
    z.push_back(gz / nrm);
    std::vector<double> alpha, beta;
    double theta = 0.0;
    Eigen::VectorXd ritz;
    bool converged = false;
    for (int j = 0; j < m; ++j) {
      Vector w = op.apply(q[j]);
      ++result.iterations;
      alpha.push_back(z[j].dot(w).real());
      w -= alpha[j] * q[j];
      if (j > 0) w -= beta[j - 1] * q[j - 1];
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < q.size(); ++i) w -= z[i].dot(w) * q[i];
      Vector zw = op.gram(w);
      const double b = std::sqrt(std::max(0.0, w.dot(zw).real()));

      const int k = j + 1;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
      Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), k - 1))
                                  : Eigen::VectorXd();
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const int idx = which == Extreme::Max ? k - 1 : 0;
      theta = tri.eigenvalues()[idx];
      ritz = tri.eigenvectors().col(idx);
      const double scale = std::max(std::abs(tri.eigenvalues()[0]), std::abs(tri.eigenvalues()[k - 1]));
      result.residual = b * std::abs(ritz[k - 1]);
      const bool exhausted = k == n || b <= 1e-14 * std::max(scale, 1e-300);
      if (exhausted || result.residual <= policy.eig_tolerance * std::max(std::abs(theta), 1e-3 * scale)) {
        converged = true;
        break;
      }
      if (j + 1 < m) {
        beta.push_back(b);
        q.push_back(w / b);
        z.push_back(zw / b);
      }
    }
    Vector y = Vector::Zero(n);
    for (Eigen::Index i = 0; i < ritz.size(); ++i) y += ritz[i] * q[i];
    result.value = theta;
    result.vector = y;
    if (converged) return result;
    start = y;
  }
  throw ConvergenceFailure("generalized Rayleigh extreme did not converge", result.iterations);
}

double extreme_rayleigh(const ComplexSparseMatrix& anum, const ComplexSparseMatrix& aden, Extreme which,
                        const NumericPolicy& policy) {
  if (anum.rows() != anum.cols() || aden.rows() != aden.cols() || anum.rows() != aden.rows())
    throw std::invalid_argument("extreme_rayleigh requires square matrices of equal size");
  const SparseLU den(aden, policy);
  SelfAdjointOperator op{anum.rows(), [&](const Vector& x) { return den.solve(anum * x); },
                         [&](const Vector& x) { return aden * x; }};
  return extreme_eigenvalue(op, which, policy).value;
}

}  // namespace varid
