#include "doctest.h"

#include <stdexcept>

#include "varid/mesh.hpp"

using namespace varid;

TEST_SUITE("mesh") {
  TEST_CASE("interval with two elements") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 2);
    CHECK(m.dim() == 1);
    CHECK(m.num_nodes() == 3);
    CHECK(m.num_elements() == 2);
    CHECK(m.boundary_facets().size() == 2);
    CHECK(m.node(0)[0] == 0.0);
    CHECK(m.node(1)[0] == 0.5);
    CHECK(m.node(2)[0] == 1.0);
  }

  TEST_CASE("minimal interval") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 1);
    CHECK(m.num_nodes() == 2);
    CHECK(m.num_elements() == 1);
  }

  TEST_CASE("shifted interval") {
    const Mesh m = build_interval_mesh(-1.0, 1.0, 4);
    for (int i = 0; i < 4; ++i) CHECK(m.node(i + 1)[0] - m.node(i)[0] == doctest::Approx(0.5));
    CHECK(m.node(2)[0] == doctest::Approx(0.0));
    CHECK(m.boundary_facets()[0].normal[0] == -1.0);
  }

  TEST_CASE("single cell rectangle") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 1, 1);
    CHECK(m.num_nodes() == 4);
    CHECK(m.num_elements() == 2);
    CHECK(m.boundary_facets().size() == 4);
  }

  TEST_CASE("2x2 rectangle counts") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 2, 2);
    CHECK(m.num_nodes() == 9);
    CHECK(m.num_elements() == 8);
    CHECK(m.boundary_facets().size() == 8);
    CHECK(m.boundary_nodes().size() == 8);
  }

  TEST_CASE("areas and perimeter add up") {
    const Mesh m = build_rectangle_mesh(2.0, 1.0, 4, 2);
    double area = 0.0, perimeter = 0.0;
    for (int e = 0; e < m.num_elements(); ++e) {
      CHECK(m.element_measure(e) > 0.0);
      area += m.element_measure(e);
    }
    for (const auto& f : m.boundary_facets()) perimeter += m.facet_measure(f);
    CHECK(area == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(perimeter == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(m.domain_measure() == doctest::Approx(2.0));
  }

  TEST_CASE("outward normals point away from the centre") {
    const Mesh m = build_rectangle_mesh(1.0, 1.0, 3, 3);
    for (const auto& f : m.boundary_facets()) {
      const Point a = m.node(f.nodes[0]), b = m.node(f.nodes[1]);
      const double mx = 0.5 * (a[0] + b[0]) - 0.5, my = 0.5 * (a[1] + b[1]) - 0.5;
      CHECK(f.normal[0] * mx + f.normal[1] * my > 0.0);
    }
  }

  TEST_CASE("bad arguments") {
    CHECK_THROWS_AS(build_interval_mesh(1.0, 0.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_rectangle_mesh(1.0, 1.0, 0, 2), std::invalid_argument);
  }
}
