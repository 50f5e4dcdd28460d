#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "varid/assembly.hpp"
#include "varid/formcore.hpp"
#include "varid/linsolve.hpp"
#include "varid/mesh.hpp"

namespace varid {

struct StateResult {
  Field total;
  Field scattered;
  SolveReport solve_report;
};

class Linearization;

/// Helmholtz/Robin scattering on a fixed mesh. The couplings t = (alpha, beta)
/// enter affinely:
///   A(t, m) = K + M - i alpha B - (1 + beta) M + beta M_m,   rhs = -beta M_m v0,
/// and the physical problem sits on alpha = k0, beta = k0^2. The incident
/// field v0 is fixed at construction. Copies share the assembled matrices.
class ScatteringModel {
 public:
  ScatteringModel(Mesh mesh, double k0, const Point& incident_dir, const NumericPolicy& policy = default_policy());

  /// Same model with the volume coefficient frozen at m_ref: the system no
  /// longer depends on m and S becomes affine.
  ScatteringModel frozen_at(const Vector& m_ref) const;
  bool frozen() const { return frozen_ != nullptr; }

  const Mesh& mesh() const { return data_->mesh; }
  int size() const { return data_->mesh.num_nodes(); }
  double k0() const { return data_->k0; }
  const Point& direction() const { return data_->dir; }
  const NumericPolicy& policy() const { return data_->policy; }
  const ComplexSparseMatrix& stiffness() const { return data_->K; }
  const ComplexSparseMatrix& mass() const { return data_->M; }
  const ComplexSparseMatrix& boundary_mass() const { return data_->B; }
  const Field& incident() const { return data_->v0; }
  const SpacePair& spaces() const { return data_->spaces; }

  /// K + M - i alpha B
  ComplexSparseMatrix a1_matrix(double alpha) const;
  ComplexSparseMatrix system_matrix(const Vector& m, double alpha, double beta) const;
  Vector rhs(const Vector& m, double beta) const;
  /// Forms at the physical couplings, c_t = 1 from the coercive split.
  FormSet forms(const ParameterField& m) const;
  OperatorBundle bundle(const ParameterField& m) const;

  Linearization linearize(const ParameterField& m) const;
  Linearization linearize(const ParameterField& m, double alpha, double beta) const;

  StateResult state(const ParameterField& m) const;
  StateResult coupling_state(const ParameterField& m, double alpha, double beta) const;
  Field state_derivative(const ParameterField& m, const Vector& h) const;
  /// g with (dS(m)h | y)_H = g^H h for every h.
  Vector state_derivative_adjoint(const ParameterField& m, const Field& y) const;
  Field coupling_derivative(const ParameterField& m, double alpha, double beta, double dalpha, double dbeta) const;
  Field joint_derivative(const ParameterField& m, double alpha, double beta, double dalpha, double dbeta,
                         const Vector& dm) const;

 private:
  friend class Linearization;
  ScatteringModel() = default;
  struct Data {
    Mesh mesh;
    double k0;
    Point dir;
    NumericPolicy policy;
    ComplexSparseMatrix K, M, B;
    Field v0;
    SpacePair spaces;
  };
  std::shared_ptr<const Data> data_;
  std::shared_ptr<const Vector> frozen_;
};

/// Factorized system at one (m, alpha, beta); derivative and adjoint solves
/// reuse the factorization.
class Linearization {
 public:
  const StateResult& state() const { return state_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double condition_estimate() const { return lu_->condition_estimate(); }
  const SparseLU& factor() const { return *lu_; }
  const ComplexSparseMatrix& system() const { return system_; }

  /// dS[h] = A^{-1}(-beta M_h s), s = total field (v0 for the frozen model).
  Field derivative(const Vector& h) const;
  /// dtau[(da, db)].
  Field coupling_derivative(double dalpha, double dbeta) const;
  /// g with (dS h | y)_H = g^H h.
  Vector adjoint(const Field& y) const;
  /// g with z^H dS h = g^H h  (plain coefficient pairing on the state side).
  Vector adjoint_euclidean(const Vector& z) const;

 private:
  friend class ScatteringModel;
  Linearization() = default;
  ScatteringModel model_{};
  Vector m_;
  double alpha_ = 0.0, beta_ = 0.0;
  ComplexSparseMatrix system_;
  std::shared_ptr<const SparseLU> lu_;
  StateResult state_;
};

struct ReferenceInstance {
  ScatteringModel model;
  ParameterField m;
};

/// (0,1) with 64 elements, k0 = 2, d = +1, m = 0.1 cos^2(pi (x - 0.5)/0.2) on |x - 0.5| < 0.1.
ReferenceInstance reference_instance_1d();
/// Unit square 16x16, k0 = 2, d = (1, 0), m = 0.1 exp(-|x - c|^2 / (2 * 0.15^2)), c = (0.5, 0.5).
ReferenceInstance reference_instance_2d();

struct DerivativeCheck {
  std::string name;
  std::vector<double> epsilons;
  std::vector<double> fd_errors;  // relative, in the supplied norm
  double slope = 0.0;             // least-squares slope of log error vs log epsilon
};

/// Central differences (f(+eps) - f(-eps)) / (2 eps) against `derivative`.
DerivativeCheck finite_difference_check(const std::string& name, const std::function<Field(double)>& f,
                                        const Field& derivative, const std::function<double(const Vector&)>& norm,
                                        const std::vector<double>& epsilons);

nlohmann::json to_json(const DerivativeCheck& check);

}  // namespace varid
