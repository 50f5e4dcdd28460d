#include "varid/assembly.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace varid {

void ParameterField::validate(int num_nodes) const {
  if (values.size() != num_nodes)
    throw std::invalid_argument("parameter field has " + std::to_string(values.size()) + " values, mesh has " +
                                std::to_string(num_nodes) + " nodes");
  if (!(sup_bound > 0.0)) throw std::invalid_argument("sup_bound must be positive");
  if (!admissible())
    throw std::invalid_argument("parameter sup norm " + std::to_string(sup_norm()) + " exceeds sup_bound " +
                                std::to_string(sup_bound));
}

namespace {

struct QuadPoint {
  std::array<double, 3> bary;  // barycentric coordinates (third unused in 1D)
  double weight;               // fraction of the element measure
};

const std::vector<QuadPoint>& gauss3_interval() {
  static const std::vector<QuadPoint> rule = [] {
    const double s = 0.5 * std::sqrt(0.6);
    return std::vector<QuadPoint>{{{0.5 + s, 0.5 - s, 0.0}, 5.0 / 18.0},
                                  {{0.5, 0.5, 0.0}, 8.0 / 18.0},
                                  {{0.5 - s, 0.5 + s, 0.0}, 5.0 / 18.0}};
  }();
  return rule;
}

// Radon's 7-point rule, exact for degree 5 on triangles.
const std::vector<QuadPoint>& radon7_triangle() {
  static const std::vector<QuadPoint> rule = [] {
    const double r = std::sqrt(15.0);
    const double a = (6.0 - r) / 21.0, wa = (155.0 - r) / 1200.0;
    const double b = (6.0 + r) / 21.0, wb = (155.0 + r) / 1200.0;
    return std::vector<QuadPoint>{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40.0},
                                  {{a, a, 1 - 2 * a}, wa}, {{a, 1 - 2 * a, a}, wa}, {{1 - 2 * a, a, a}, wa},
                                  {{b, b, 1 - 2 * b}, wb}, {{b, 1 - 2 * b, b}, wb}, {{1 - 2 * b, b, b}, wb}};
  }();
  return rule;
}

const std::vector<QuadPoint>& element_rule(int dim) { return dim == 1 ? gauss3_interval() : radon7_triangle(); }

Point map_point(const Mesh& mesh, std::span<const int> nodes, const std::array<double, 3>& bary) {
  Point x{0.0, 0.0};
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    x[0] += bary[a] * mesh.node(nodes[a])[0];
    x[1] += bary[a] * mesh.node(nodes[a])[1];
  }
  return x;
}

// ∫ λa λb λc over an element, divided by its measure.
double triple_weight(int dim, int a, int b, int c) {
  const bool ab = a == b, bc = b == c, ac = a == c;
  if (ab && bc) return dim == 1 ? 1.0 / 4 : 1.0 / 10;
  if (ab || bc || ac) return dim == 1 ? 1.0 / 12 : 1.0 / 30;
  return 1.0 / 60;  // three distinct vertices, 2D only
}

}  // namespace

ComplexSparseMatrix assemble_stiffness(const Mesh& mesh) {
  std::vector<Triplet> t;
  const int k = mesh.nodes_per_element();
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * k * k);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    if (mesh.dim() == 1) {
      const double s = 1.0 / meas;
      t.push_back({el[0], el[0], s});
      t.push_back({el[0], el[1], -s});
      t.push_back({el[1], el[0], -s});
      t.push_back({el[1], el[1], s});
      continue;
    }
    std::array<std::array<double, 2>, 3> grad;
    for (int a = 0; a < 3; ++a) {
      const Point& pj = mesh.node(el[(a + 1) % 3]);
      const Point& pk = mesh.node(el[(a + 2) % 3]);
      grad[a] = {(pj[1] - pk[1]) / (2.0 * meas), (pk[0] - pj[0]) / (2.0 * meas)};
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        t.push_back({el[a], el[b], meas * (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1])});
  }
  return ComplexSparseMatrix(mesh.num_nodes(), mesh.num_nodes(), t, true);
}

ComplexSparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Triplet> t;
  const int k = mesh.nodes_per_element();
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * k * k);
  const double diag = mesh.dim() == 1 ? 1.0 / 3 : 1.0 / 6;
  const double off = mesh.dim() == 1 ? 1.0 / 6 : 1.0 / 12;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) t.push_back({el[a], el[b], meas * (a == b ? diag : off)});
  }
  return ComplexSparseMatrix(mesh.num_nodes(), mesh.num_nodes(), t, true);
}

ComplexSparseMatrix assemble_mass(const Mesh& mesh, const Vector& weight) {
  if (weight.size() != mesh.num_nodes()) throw std::invalid_argument("weight length does not match mesh");
  std::vector<Triplet> t;
  const int k = mesh.nodes_per_element();
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * k * k);
  bool real = true;
  for (Eigen::Index i = 0; i < weight.size(); ++i) real = real && weight[i].imag() == 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        cplx v = 0.0;
        for (int c = 0; c < k; ++c) v += weight[el[c]] * triple_weight(mesh.dim(), a, b, c);
        t.push_back({el[a], el[b], meas * v});
      }
  }
  return ComplexSparseMatrix(mesh.num_nodes(), mesh.num_nodes(), t, real);
}

ComplexSparseMatrix assemble_boundary_mass(const Mesh& mesh) {
  std::vector<Triplet> t;
  for (const auto& f : mesh.boundary_facets()) {
    if (mesh.dim() == 1) {
      t.push_back({f.nodes[0], f.nodes[0], 1.0});
      continue;
    }
    const double len = mesh.facet_measure(f);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) t.push_back({f.nodes[a], f.nodes[b], len * (a == b ? 1.0 / 3 : 1.0 / 6)});
  }
  return ComplexSparseMatrix(mesh.num_nodes(), mesh.num_nodes(), t, true);
}

Vector contract_triple_product(const Mesh& mesh, const Vector& p, const Vector& u) {
  if (p.size() != mesh.num_nodes() || u.size() != mesh.num_nodes())
    throw std::invalid_argument("contraction vectors do not match mesh");
  Vector out = Vector::Zero(mesh.num_nodes());
  const int k = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (int c = 0; c < k; ++c) {
      cplx acc = 0.0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) acc += triple_weight(mesh.dim(), a, b, c) * p[el[a]] * std::conj(u[el[b]]);
      out[el[c]] += meas * acc;
    }
  }
  return out;
}

Vector interpolate(const Mesh& mesh, const ScalarFunction& f) {
  Vector v(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) v[i] = f(mesh.node(i));
  return v;
}

Vector plane_wave(const Mesh& mesh, double k0, const Point& d) {
  return interpolate(mesh, [&](const Point& x) { return std::exp(kI * k0 * (d[0] * x[0] + d[1] * x[1])); });
}

Vector assemble_load(const Mesh& mesh, const ScalarFunction& f) {
  Vector out = Vector::Zero(mesh.num_nodes());
  const int k = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (const auto& q : element_rule(mesh.dim())) {
      const cplx fx = f(map_point(mesh, el, q.bary)) * (q.weight * meas);
      for (int a = 0; a < k; ++a) out[el[a]] += fx * q.bary[a];
    }
  }
  return out;
}

Vector assemble_boundary_load(const Mesh& mesh, const ScalarFunction& g) {
  Vector out = Vector::Zero(mesh.num_nodes());
  for (const auto& f : mesh.boundary_facets()) {
    if (mesh.dim() == 1) {
      out[f.nodes[0]] += g(mesh.node(f.nodes[0]));
      continue;
    }
    const std::array<int, 2> nodes = f.nodes;
    const double len = mesh.facet_measure(f);
    for (const auto& q : gauss3_interval()) {
      const cplx gx = g(map_point(mesh, nodes, q.bary)) * (q.weight * len);
      out[nodes[0]] += gx * q.bary[0];
      out[nodes[1]] += gx * q.bary[1];
    }
  }
  return out;
}

double l2_error(const Mesh& mesh, const Vector& uh, const ScalarFunction& exact) {
  if (uh.size() != mesh.num_nodes()) throw std::invalid_argument("field length does not match mesh");
  double total = 0.0;
  const int k = mesh.nodes_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto el = mesh.element(e);
    const double meas = mesh.element_measure(e);
    for (const auto& q : element_rule(mesh.dim())) {
      cplx v = 0.0;
      for (int a = 0; a < k; ++a) v += q.bary[a] * uh[el[a]];
      total += q.weight * meas * std::norm(v - exact(map_point(mesh, el, q.bary)));
    }
  }
  return std::sqrt(total);
}

void write_field_csv(std::ostream& os, const Mesh& mesh, const Vector& values, const std::string& config_hash) {
  if (values.size() != mesh.num_nodes()) throw std::invalid_argument("field length does not match mesh");
  if (!config_hash.empty()) os << "# config_hash: " << config_hash << '\n';
  os << (mesh.dim() == 1 ? "index,x,re,im\n" : "index,x,y,re,im\n");
  char buf[160];
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Point& p = mesh.node(i);
    if (mesh.dim() == 1)
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", i, p[0], values[i].real(), values[i].imag());
    else
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", i, p[0], p[1], values[i].real(),
                    values[i].imag());
    os << buf;
  }
}

Vector read_field_csv(std::istream& is, const Mesh& mesh) {
  const int cols = mesh.dim() == 1 ? 4 : 5;
  Vector v(mesh.num_nodes());
  std::vector<char> seen(mesh.num_nodes(), 0);
  std::string line;
  bool header = false;
  int count = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double d;
      try {
        d = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("field CSV: malformed number '" + cell + "'");
      }
      row.push_back(d);
    }
    if (static_cast<int>(row.size()) != cols)
      throw std::invalid_argument("field CSV: expected " + std::to_string(cols) + " columns in '" + line + "'");
    const int idx = static_cast<int>(row[0]);
    if (idx < 0 || idx >= mesh.num_nodes() || row[0] != idx || seen[idx])
      throw std::invalid_argument("field CSV: bad or repeated node index in '" + line + "'");
    seen[idx] = 1;
    v[idx] = cplx(row[cols - 2], row[cols - 1]);
    ++count;
  }
  if (count != mesh.num_nodes())
    throw std::invalid_argument("field CSV has " + std::to_string(count) + " rows, mesh has " +
                                std::to_string(mesh.num_nodes()) + " nodes");
  return v;
}

void validate_direction(const Mesh& mesh, const Point& d) {
  if (std::abs(std::hypot(d[0], d[1]) - 1.0) > 1e-12) throw std::invalid_argument("incident direction must be a unit vector");
  if (mesh.dim() == 1 && d[1] != 0.0) throw std::invalid_argument("1D incident direction must be (+-1, 0)");
}

HelmholtzForms assemble_helmholtz_forms(const Mesh& mesh, double k0, const ParameterField& m, const Point& dir,
                                        const NumericPolicy& policy) {
  if (!(k0 > 0.0)) throw std::invalid_argument("k0 must be positive");
  validate_direction(mesh, dir);
  m.validate(mesh.num_nodes());
  const double beta = k0 * k0;
  const auto K = assemble_stiffness(mesh);
  const auto M = assemble_mass(mesh);
  const auto Mm = assemble_mass(mesh, m.values);
  const auto B = assemble_boundary_mass(mesh);

  HelmholtzForms out;
  out.spaces = make_space_pair(K + M, M, policy);
  auto A1 = ComplexSparseMatrix::combine(1.0, K + M, -kI * k0, B);
  auto C = ComplexSparseMatrix::combine(-(1.0 + beta), M, beta, Mm);
  out.forms = make_form_set(std::move(A1), std::move(C), out.spaces, policy, 1.0);
  out.v0 = plane_wave(mesh, k0, dir);
  out.rhs = -beta * (Mm * out.v0);
  return out;
}

}  // namespace varid
