#include "doctest.h"

#include <algorithm>

#include "../oracles.hpp"
#include "varid/linsolve.hpp"
#include "varid/random.hpp"

using namespace varid;

namespace {

// Random sparse, diagonally weighted so it is comfortably invertible.
DenseMatrix random_sparse_dense(Rng& rng, int n, double fill) {
  DenseMatrix a = DenseMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i == j || rng.uniform() < fill) a(i, j) = rng.complex_normal();
  a.diagonal().array() += 4.0;
  return a;
}

DenseMatrix random_hpd(Rng& rng, int n) {
  const DenseMatrix b = rng.complex_normal_matrix(n, n);
  DenseMatrix g = b.adjoint() * b + n * DenseMatrix::Identity(n, n);
  return 0.5 * (g + g.adjoint());
}

}  // namespace

TEST_SUITE("linsolve") {
  TEST_CASE("identity") {
    Rng rng(1);
    const Vector b = rng.complex_normal_vector(7);
    const auto r = sparse_solve(ComplexSparseMatrix::identity(7), b);
    CHECK((r.solution - b).norm() == 0.0);
  }

  TEST_CASE("complex diagonal") {
    DenseMatrix d = DenseMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = cplx(0, 4);
    Vector b(2);
    b << 2.0, cplx(0, 4);
    const auto r = sparse_solve(ComplexSparseMatrix::from_dense(d), b);
    CHECK(std::abs(r.solution[0] - 1.0) < 1e-15);
    CHECK(std::abs(r.solution[1] - 1.0) < 1e-15);
  }

  TEST_CASE("random sparse against dense LU") {
    Rng rng(20);
    for (int trial = 0; trial < 5; ++trial) {
      const DenseMatrix a = random_sparse_dense(rng, 20, 0.15);
      const Vector b = rng.complex_normal_vector(20);
      const Vector x_dense = a.partialPivLu().solve(b);
      const auto sa = ComplexSparseMatrix::from_dense(a);
      CHECK((sparse_solve(sa, b).solution - x_dense).norm() <= 1e-10);
      const SparseLU lu(sa);
      const Vector y_dense = a.adjoint().partialPivLu().solve(b);
      CHECK((lu.solve_adjoint(b) - y_dense).norm() <= 1e-10);
      // 1-norm condition estimate is a lower bound on the true value, and usually close.
      const double kappa = a.cwiseAbs().colwise().sum().maxCoeff() * a.inverse().cwiseAbs().colwise().sum().maxCoeff();
      CHECK(lu.condition_estimate() <= kappa * (1 + 1e-12));
      CHECK(lu.condition_estimate() >= 0.1 * kappa);
    }
  }

  TEST_CASE("pivoting is needed and done") {
    DenseMatrix a(3, 3);
    a << 0, 1, 2, 1, 0, 3, 4, 5, 0;
    Vector b(3);
    b << 1, 2, 3;
    const auto r = sparse_solve(ComplexSparseMatrix::from_dense(a), b);
    CHECK((a * r.solution - b).norm() <= 1e-14);
  }

  TEST_CASE("singular matrix is reported") {
    DenseMatrix a(3, 3);
    a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
    CHECK_THROWS_AS(SparseLU{ComplexSparseMatrix::from_dense(a)}, SingularMatrix);
  }

  TEST_CASE("RCM gives a permutation and shrinks a shuffled band") {
    const int n = 40;
    Rng rng(3);
    std::vector<int> shuffle(n);
    for (int i = 0; i < n; ++i) shuffle[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(shuffle[i], shuffle[static_cast<int>(rng.uniform() * (i + 1)) % (i + 1)]);
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
      t.push_back({shuffle[i], shuffle[i], 4.0});
      if (i + 1 < n) {
        t.push_back({shuffle[i], shuffle[i + 1], -1.0});
        t.push_back({shuffle[i + 1], shuffle[i], -1.0});
      }
    }
    const ComplexSparseMatrix a(n, n, t);
    const auto perm = reverse_cuthill_mckee(a);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) CHECK(sorted[i] == i);
    const SparseLU lu(a);
    CHECK(lu.lower_bandwidth() <= 1);
  }

  TEST_CASE("Rayleigh extremes: trivial pencils") {
    Rng rng(4);
    const DenseMatrix g = random_hpd(rng, 12);
    const auto sg = ComplexSparseMatrix::from_dense(g, true);
    CHECK(extreme_rayleigh(sg, sg, Extreme::Max) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(extreme_rayleigh(sg, sg, Extreme::Min) == doctest::Approx(1.0).epsilon(1e-9));
    const auto s2 = ComplexSparseMatrix::from_dense(2.0 * g, true);
    CHECK(extreme_rayleigh(s2, sg, Extreme::Max) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(extreme_rayleigh(s2, sg, Extreme::Min) == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("Rayleigh extremes against the dense pencil") {
    Rng rng(15);
    for (int trial = 0; trial < 4; ++trial) {
      const DenseMatrix b = random_hpd(rng, 15);
      const DenseMatrix x = rng.complex_normal_matrix(15, 15);
      const DenseMatrix a = 0.5 * (x + x.adjoint());  // indefinite Hermitian
      const auto ev = oracle::pencil_eigenvalues(a, b);
      const auto sa = ComplexSparseMatrix::from_dense(a, true), sb = ComplexSparseMatrix::from_dense(b, true);
      CHECK(extreme_rayleigh(sa, sb, Extreme::Max) == doctest::Approx(ev[14]).epsilon(1e-8));
      CHECK(extreme_rayleigh(sa, sb, Extreme::Min) == doctest::Approx(ev[0]).epsilon(1e-8));
    }
  }

  TEST_CASE("residual contract on 100 random systems") {
    Rng rng(100);
    for (int t = 0; t < 100; ++t) {
      const int n = 5 + t % 30;
      const DenseMatrix a = random_sparse_dense(rng, n, 0.2);
      const auto sa = ComplexSparseMatrix::from_dense(a);
      const Vector b = rng.complex_normal_vector(n);
      const auto r = sparse_solve(sa, b);
      const double res = (sa * r.solution - b).norm();
      CHECK(res == doctest::Approx(r.residual_norm).epsilon(1e-6).scale(1e-30));
      CHECK(res <= 1e-10 * (sa.norm1() * r.solution.norm() + b.norm()));
    }
  }

  TEST_CASE("Rayleigh max is never below min") {
    Rng rng(16);
    for (int t = 0; t < 10; ++t) {
      const int n = 3 + 2 * t;
      const DenseMatrix x = rng.complex_normal_matrix(n, n);
      const auto sa = ComplexSparseMatrix::from_dense(0.5 * (x + x.adjoint()), true);
      const auto sb = ComplexSparseMatrix::from_dense(random_hpd(rng, n), true);
      CHECK(extreme_rayleigh(sa, sb, Extreme::Max) >= extreme_rayleigh(sa, sb, Extreme::Min));
    }
  }
}
