#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "varid/formcore.hpp"
#include "varid/mesh.hpp"
#include "varid/sparse.hpp"
#include "varid/types.hpp"

namespace varid {

// States u, u_sc, v0 are plain nodal coefficient vectors.
using Field = Vector;

/// Nodal contrast m together with the radius of its admissibility ball in
/// the nodal sup norm.
struct ParameterField {
  Vector values;
  double sup_bound = 1.0;

  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  bool admissible() const { return sup_norm() <= sup_bound; }
  /// Throws std::invalid_argument unless the length matches and |m_i| <= sup_bound.
  void validate(int num_nodes) const;
};

using ScalarFunction = std::function<cplx(const Point&)>;

ComplexSparseMatrix assemble_stiffness(const Mesh& mesh);
/// Unit-weight P1 mass matrix.
ComplexSparseMatrix assemble_mass(const Mesh& mesh);
/// Mass matrix weighted by the P1 interpolant of `weight`; cubic products are
/// integrated exactly. Complex symmetric, Hermitian only for real weights.
ComplexSparseMatrix assemble_mass(const Mesh& mesh, const Vector& weight);
/// Trace mass: point evaluation at the endpoints in 1D, P1 edge mass in 2D.
ComplexSparseMatrix assemble_boundary_mass(const Mesh& mesh);

/// out_k = sum_e sum_ij  ∫ phi_k phi_i phi_j * p_i * conj(u_j), the
/// contraction that appears in the adjoint of u -> M_h u.
Vector contract_triple_product(const Mesh& mesh, const Vector& p, const Vector& u);

Vector interpolate(const Mesh& mesh, const ScalarFunction& f);
Vector plane_wave(const Mesh& mesh, double k0, const Point& direction);

/// Functional vectors: entry i is  ∫ f phi_i  (resp. ∫_∂Ω g phi_i).
/// Degree-5 quadrature per element and 3-point Gauss per boundary edge.
Vector assemble_load(const Mesh& mesh, const ScalarFunction& f);
Vector assemble_boundary_load(const Mesh& mesh, const ScalarFunction& g);

/// ||u_h - u||_{L2} with u_h the P1 interpolant of `uh`.
double l2_error(const Mesh& mesh, const Vector& uh, const ScalarFunction& exact);

/// Matrices and vectors of the scattering problem at wavenumber k0:
///   A1 = K + M - i k0 B,  Cmat = -(1 + k0^2) M + k0^2 M_m,  rhs = -k0^2 M_m v0,
/// with V = H^1 (Gram K + M) and H = L^2 (Gram M). c_t = 1 by construction.
struct HelmholtzForms {
  SpacePair spaces;
  FormSet forms;
  Vector rhs;
  Field v0;
};

HelmholtzForms assemble_helmholtz_forms(const Mesh& mesh, double k0, const ParameterField& m, const Point& incident_dir,
                                        const NumericPolicy& policy = default_policy());

/// Unit-length check shared by every consumer of an incident direction (1D
/// directions are (+-1, 0)).
void validate_direction(const Mesh& mesh, const Point& dir);

// Field CSV: "# config_hash: ..." comment line (optional), then a header
// "index,x,re,im" (1D) or "index,x,y,re,im" (2D).
void write_field_csv(std::ostream& os, const Mesh& mesh, const Vector& values, const std::string& config_hash = "");
Vector read_field_csv(std::istream& is, const Mesh& mesh);

}  // namespace varid
