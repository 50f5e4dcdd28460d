#include "varid/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace varid {

Mesh::Mesh(int dim, std::vector<Point> nodes, std::vector<int> connectivity,
           std::vector<BoundaryFacet> boundary, Point box_min, Point box_max)
    : dim_(dim),
      nodes_(std::move(nodes)),
      connectivity_(std::move(connectivity)),
      boundary_(std::move(boundary)),
      box_min_(box_min),
      box_max_(box_max) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("mesh dimension must be 1 or 2");
  if (connectivity_.size() % nodes_per_element() != 0)
    throw std::invalid_argument("connectivity size is not a multiple of the element arity");
  for (int idx : connectivity_)
    if (idx < 0 || idx >= num_nodes()) throw std::invalid_argument("element references missing node");
  for (int e = 0; e < num_elements(); ++e)
    if (!(element_measure(e) > 0.0))
      throw std::invalid_argument("element " + std::to_string(e) + " has non-positive measure");
}

double Mesh::element_measure(int e) const {
  const auto el = element(e);
  if (dim_ == 1) return nodes_[el[1]][0] - nodes_[el[0]][0];
  const Point& p0 = nodes_[el[0]];
  const Point& p1 = nodes_[el[1]];
  const Point& p2 = nodes_[el[2]];
  return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double Mesh::facet_measure(const BoundaryFacet& f) const {
  if (dim_ == 1) return 1.0;
  const Point& p0 = nodes_[f.nodes[0]];
  const Point& p1 = nodes_[f.nodes[1]];
  return std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
}

double Mesh::domain_measure() const {
  double total = 0.0;
  for (int e = 0; e < num_elements(); ++e) total += element_measure(e);
  return total;
}

std::vector<int> Mesh::boundary_nodes() const {
  std::vector<int> out;
  for (const auto& f : boundary_)
    for (int k = 0; k < dim_; ++k) out.push_back(f.nodes[k]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh build_interval_mesh(double a, double b, int n_elems) {
  if (!(a < b)) throw std::invalid_argument("interval mesh requires a < b");
  if (n_elems < 1) throw std::invalid_argument("interval mesh requires n_elems >= 1");
  std::vector<Point> nodes(n_elems + 1);
  const double h = (b - a) / n_elems;
  for (int i = 0; i <= n_elems; ++i) nodes[i] = {i == n_elems ? b : a + i * h, 0.0};
  std::vector<int> conn;
  conn.reserve(2 * n_elems);
  for (int e = 0; e < n_elems; ++e) {
    conn.push_back(e);
    conn.push_back(e + 1);
  }
  std::vector<BoundaryFacet> boundary{{{0, -1}, {-1.0, 0.0}}, {{n_elems, -1}, {1.0, 0.0}}};
  return Mesh(1, std::move(nodes), std::move(conn), std::move(boundary), {a, 0.0}, {b, 0.0});
}

Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("rectangle sides must be positive");
  if (nx < 1 || ny < 1) throw std::invalid_argument("rectangle mesh requires nx, ny >= 1");
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      nodes.push_back({i == nx ? lx : lx * i / nx, j == ny ? ly : ly * j / ny});

  std::vector<int> conn;
  conn.reserve(6 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      conn.insert(conn.end(), {ll, lr, ur});
      conn.insert(conn.end(), {ll, ur, ul});
    }
  }

  // Counter-clockwise walk: bottom, right, top, left.
  std::vector<BoundaryFacet> boundary;
  boundary.reserve(2 * static_cast<std::size_t>(nx + ny));
  for (int i = 0; i < nx; ++i) boundary.push_back({{id(i, 0), id(i + 1, 0)}, {0.0, -1.0}});
  for (int j = 0; j < ny; ++j) boundary.push_back({{id(nx, j), id(nx, j + 1)}, {1.0, 0.0}});
  for (int i = nx; i > 0; --i) boundary.push_back({{id(i, ny), id(i - 1, ny)}, {0.0, 1.0}});
  for (int j = ny; j > 0; --j) boundary.push_back({{id(0, j), id(0, j - 1)}, {-1.0, 0.0}});

  return Mesh(2, std::move(nodes), std::move(conn), std::move(boundary), {0.0, 0.0}, {lx, ly});
}

void write_mesh_nodes_csv(std::ostream& os, const Mesh& mesh) {
  os << "index,x,y\n";
  char buf[96];
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", i, mesh.node(i)[0], mesh.node(i)[1]);
    os << buf;
  }
}

void write_mesh_elements_csv(std::ostream& os, const Mesh& mesh) {
  os << (mesh.dim() == 1 ? "index,n0,n1\n" : "index,n0,n1,n2\n");
  for (int e = 0; e < mesh.num_elements(); ++e) {
    os << e;
    for (int n : mesh.element(e)) os << ',' << n;
    os << '\n';
  }
}

}  // namespace varid
