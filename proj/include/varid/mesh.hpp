#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace varid {

using Point = std::array<double, 2>;

/// Boundary facet: one node in 1D, two nodes in 2D (ordered counter-clockwise
/// around the domain), together with its outward unit normal.
struct BoundaryFacet {
  std::array<int, 2> nodes{-1, -1};
  Point normal{0.0, 0.0};
};

/// Structured simplicial mesh of an interval or a rectangle. Immutable after
/// construction. Nodes are ordered lexicographically with x fastest; in 1D the
/// y coordinate is zero.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> nodes, std::vector<int> connectivity,
       std::vector<BoundaryFacet> boundary, Point box_min, Point box_max);

  int dim() const { return dim_; }
  int nodes_per_element() const { return dim_ + 1; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_elements() const { return static_cast<int>(connectivity_.size()) / nodes_per_element(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const Point& node(int i) const { return nodes_[i]; }
  std::span<const int> element(int e) const {
    return {connectivity_.data() + e * nodes_per_element(),
            static_cast<std::size_t>(nodes_per_element())};
  }
  const std::vector<BoundaryFacet>& boundary_facets() const { return boundary_; }

  /// Length (1D) or signed area (2D, positive for counter-clockwise elements).
  double element_measure(int e) const;
  double facet_measure(const BoundaryFacet& f) const;
  double domain_measure() const;

  const Point& box_min() const { return box_min_; }
  const Point& box_max() const { return box_max_; }

  /// Sorted, duplicate-free list of nodes lying on the boundary.
  std::vector<int> boundary_nodes() const;

 private:
  int dim_;
  std::vector<Point> nodes_;
  std::vector<int> connectivity_;
  std::vector<BoundaryFacet> boundary_;
  Point box_min_;
  Point box_max_;
};

Mesh build_interval_mesh(double a, double b, int n_elems);

/// Rectangle [0,lx] x [0,ly] split into nx*ny cells, each cut along the
/// lower-left to upper-right diagonal.
Mesh build_rectangle_mesh(double lx, double ly, int nx, int ny);

/// Debug export: "index,x,y" rows.
void write_mesh_nodes_csv(std::ostream& os, const Mesh& mesh);
/// Debug export: "index,n0,n1[,n2]" rows.
void write_mesh_elements_csv(std::ostream& os, const Mesh& mesh);

}  // namespace varid
