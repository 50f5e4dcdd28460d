#include "doctest.h"

#include <sstream>

#include "../manufactured.hpp"
#include "../oracles.hpp"
#include "varid/assembly.hpp"
#include "varid/random.hpp"

using namespace varid;

namespace {

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// P1 hat on a uniform interval mesh.
double hat(const Mesh& mesh, int i, double x) {
  const double h = mesh.node(1)[0] - mesh.node(0)[0];
  return std::max(0.0, 1.0 - std::abs(x - mesh.node(i)[0]) / h);
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("1D stiffness on two elements") {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
    DenseMatrix expect(3, 3);
    expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    expect /= 0.5;
    CHECK(max_abs_diff(assemble_stiffness(mesh).to_dense(), expect) <= 1e-14);
  }

  TEST_CASE("stiffness annihilates constants") {
    for (const Mesh& mesh : {build_interval_mesh(-1.0, 2.0, 7), build_rectangle_mesh(1.0, 1.0, 2, 2),
                             build_rectangle_mesh(2.0, 0.5, 5, 3)}) {
      const Vector one = Vector::Ones(mesh.num_nodes());
      CHECK((assemble_stiffness(mesh) * one).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(assemble_stiffness(mesh).hermitian_defect() == 0.0);
    }
  }

  TEST_CASE("1D mass on two elements") {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
    DenseMatrix expect(3, 3);
    expect << 2, 1, 0, 1, 4, 1, 0, 1, 2;
    expect *= 0.5 / 6.0;
    CHECK(max_abs_diff(assemble_mass(mesh).to_dense(), expect) <= 1e-15);
    const Vector w = Vector::Ones(3);
    CHECK(max_abs_diff(assemble_mass(mesh, w).to_dense(), expect) <= 1e-15);
  }

  TEST_CASE("constant weight scales the mass matrix") {
    const Mesh mesh = build_rectangle_mesh(1.0, 2.0, 3, 4);
    const cplx c(0.7, -0.2);
    const Vector w = Vector::Constant(mesh.num_nodes(), c);
    CHECK(max_abs_diff(assemble_mass(mesh, w).to_dense(), c * assemble_mass(mesh).to_dense()) <= 1e-15);
    // unit mass integrates 1 over the domain
    const Vector one = Vector::Ones(mesh.num_nodes());
    CHECK(std::abs(one.dot(assemble_mass(mesh) * one) - 2.0) <= 1e-13);
  }

  TEST_CASE("weighted mass against Gauss quadrature") {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 4);
    Rng rng(8);
    const Vector w = rng.complex_normal_vector(mesh.num_nodes());
    const DenseMatrix mw = assemble_mass(mesh, w).to_dense();
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        cplx ref = 0.0;
        for (int e = 0; e < 4; ++e)
          ref += oracle::integrate(
              [&](double x) {
                cplx wx = 0.0;
                for (int k = 0; k < 5; ++k) wx += w[k] * hat(mesh, k, x);
                return wx * hat(mesh, i, x) * hat(mesh, j, x);
              },
              mesh.node(e)[0], mesh.node(e + 1)[0], 10);
        CHECK(std::abs(mw(i, j) - ref) <= 1e-12);
      }
  }

  TEST_CASE("triple-product contraction matches the weighted mass") {
    // h^T c(p, u) = u^H M_h p for every h
    for (const Mesh& mesh : {build_interval_mesh(0.0, 1.0, 6), build_rectangle_mesh(1.0, 1.0, 3, 3)}) {
      Rng rng(mesh.dim());
      const int n = mesh.num_nodes();
      const Vector p = rng.complex_normal_vector(n), u = rng.complex_normal_vector(n);
      const Vector c = contract_triple_product(mesh, p, u);
      for (int t = 0; t < 3; ++t) {
        const Vector h = rng.complex_normal_vector(n);
        const cplx lhs = (h.transpose() * c)(0);
        const cplx rhs = u.dot(assemble_mass(mesh, h) * p);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(rhs)));
      }
    }
  }

  TEST_CASE("1D boundary mass") {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
    DenseMatrix expect = DenseMatrix::Zero(3, 3);
    expect(0, 0) = expect(2, 2) = 1.0;
    CHECK(max_abs_diff(assemble_boundary_mass(mesh).to_dense(), expect) == 0.0);
  }

  TEST_CASE("2D boundary mass: perimeter and interior rows") {
    const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 4);
    const DenseMatrix b = assemble_boundary_mass(mesh).to_dense();
    CHECK(std::abs(b.sum() - 4.0) <= 1e-13);
    const auto bn = mesh.boundary_nodes();
    for (int i = 0; i < mesh.num_nodes(); ++i)
      if (!std::binary_search(bn.begin(), bn.end(), i)) CHECK(b.row(i).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("Helmholtz forms: zero contrast and affine structure") {
    const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 4);
    const double k0 = 2.5;
    const ParameterField zero{Vector::Zero(mesh.num_nodes()), 1.0};
    const auto f0 = assemble_helmholtz_forms(mesh, k0, zero, {1.0, 0.0});
    CHECK(f0.rhs.norm() == 0.0);
    CHECK(f0.forms.c_t == 1.0);
    Rng rng(5);
    Vector m(mesh.num_nodes());
    for (int i = 0; i < m.size(); ++i) m[i] = 0.5 * rng.uniform();
    const auto fm = assemble_helmholtz_forms(mesh, k0, {m, 1.0}, {0.6, 0.8});
    const DenseMatrix diff = fm.forms.Cmat.to_dense() - f0.forms.Cmat.to_dense();
    CHECK(max_abs_diff(diff, k0 * k0 * assemble_mass(mesh, m).to_dense()) <= 1e-13);
    CHECK_THROWS_AS(assemble_helmholtz_forms(mesh, k0, zero, {1.0, 1.0}), std::invalid_argument);
  }

  TEST_CASE("load vectors integrate polynomials exactly") {
    const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 3, 2);
    const Vector one = Vector::Ones(mesh.num_nodes());
    // sum_i ∫ f phi_i = ∫ f
    const Vector l = assemble_load(mesh, [](const Point& x) { return cplx(x[0] * x[0] * x[1]); });
    CHECK(std::abs(l.sum() - 1.0 / 6.0) <= 1e-14);
    const Vector g = assemble_boundary_load(mesh, [](const Point& x) { return cplx(x[0] * x[0]); });
    CHECK(std::abs(g.sum() - (1.0 / 3.0 + 1.0 / 3.0 + 1.0)) <= 1e-14);
  }

  TEST_CASE("manufactured solution converges at second order") {
    const auto pb = manufactured::problem_1d();
    const double e1 = manufactured::l2_error(build_interval_mesh(0.0, 1.0, 16), pb);
    const double e2 = manufactured::l2_error(build_interval_mesh(0.0, 1.0, 32), pb);
    CHECK(std::log2(e1 / e2) >= 1.8);
  }

  TEST_CASE("field CSV round trip") {
    const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 2, 3);
    Rng rng(9);
    const Vector v = rng.complex_normal_vector(mesh.num_nodes());
    std::stringstream ss;
    write_field_csv(ss, mesh, v, "abc");
    CHECK(ss.str().rfind("# config_hash: abc\nindex,x,y,re,im\n", 0) == 0);
    CHECK((read_field_csv(ss, mesh) - v).norm() == 0.0);
  }

  TEST_CASE("parameter admissibility") {
    ParameterField m{Vector::Constant(3, 0.5), 0.4};
    CHECK_FALSE(m.admissible());
    CHECK_THROWS_AS(m.validate(3), std::invalid_argument);
    m.sup_bound = 0.5;
    CHECK_NOTHROW(m.validate(3));
    CHECK_THROWS_AS(m.validate(4), std::invalid_argument);
  }
}
