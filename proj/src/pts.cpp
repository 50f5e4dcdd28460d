#include "varid/pts.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace varid {

ScatteringModel::ScatteringModel(Mesh mesh, double k0, const Point& dir, const NumericPolicy& policy) {
  if (!(k0 > 0.0)) throw std::invalid_argument("k0 must be positive");
  validate_direction(mesh, dir);
  auto K = assemble_stiffness(mesh);
  auto M = assemble_mass(mesh);
  auto B = assemble_boundary_mass(mesh);
  auto v0 = plane_wave(mesh, k0, dir);
  auto spaces = make_space_pair(K + M, M, policy);
  data_ = std::make_shared<const Data>(
      Data{std::move(mesh), k0, dir, policy, std::move(K), std::move(M), std::move(B), std::move(v0), std::move(spaces)});
}

ScatteringModel ScatteringModel::frozen_at(const Vector& m_ref) const {
  if (m_ref.size() != size()) throw std::invalid_argument("frozen coefficient length does not match mesh");
  ScatteringModel out = *this;
  out.frozen_ = std::make_shared<const Vector>(m_ref);
  return out;
}

ComplexSparseMatrix ScatteringModel::a1_matrix(double alpha) const {
  return ComplexSparseMatrix::combine(1.0, data_->K + data_->M, -kI * alpha, data_->B);
}

ComplexSparseMatrix ScatteringModel::system_matrix(const Vector& m, double alpha, double beta) const {
  const Vector& coeff = frozen_ ? *frozen_ : m;
  const auto& d = *data_;
  auto a1 = a1_matrix(alpha);
  auto c = ComplexSparseMatrix::combine(-(1.0 + beta), d.M, beta, assemble_mass(d.mesh, coeff));
  return a1 + c;
}

Vector ScatteringModel::rhs(const Vector& m, double beta) const {
  return -beta * (assemble_mass(data_->mesh, m) * data_->v0);
}

FormSet ScatteringModel::forms(const ParameterField& m) const {
  m.validate(size());
  const Vector& coeff = frozen_ ? *frozen_ : m.values;
  const auto& d = *data_;
  const double beta = d.k0 * d.k0;
  auto a1 = a1_matrix(d.k0);
  auto c = ComplexSparseMatrix::combine(-(1.0 + beta), d.M, beta, assemble_mass(d.mesh, coeff));
  return make_form_set(std::move(a1), std::move(c), d.spaces, d.policy, 1.0);
}

OperatorBundle ScatteringModel::bundle(const ParameterField& m) const {
  return OperatorBundle(forms(m), data_->spaces, data_->policy);
}

Linearization ScatteringModel::linearize(const ParameterField& m) const {
  return linearize(m, data_->k0, data_->k0 * data_->k0);
}

Linearization ScatteringModel::linearize(const ParameterField& m, double alpha, double beta) const {
  m.validate(size());
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (beta < 0.0) throw std::invalid_argument("beta must be non-negative");
  const auto& pol = data_->policy;
  Linearization lin;
  lin.model_ = *this;
  lin.m_ = m.values;
  lin.alpha_ = alpha;
  lin.beta_ = beta;
  lin.system_ = system_matrix(m.values, alpha, beta);
  try {
    lin.lu_ = std::make_shared<const SparseLU>(lin.system_, pol);
  } catch (const SingularMatrix& e) {
    throw WellPosednessFailure(std::string("scattering system is singular: ") + e.what(), INFINITY);
  }
  const double cond = lin.lu_->condition_estimate();
  if (!(cond * pol.pivot_tolerance < 1.0))
    throw WellPosednessFailure("scattering system condition estimate " + std::to_string(cond) + " is too large", cond);
  try {
    lin.state_.solve_report = solve_checked(*lin.lu_, lin.system_, rhs(m.values, beta), pol);
  } catch (const SingularMatrix& e) {
    throw WellPosednessFailure(e.what(), cond);
  }
  lin.state_.scattered = lin.state_.solve_report.solution;
  lin.state_.total = lin.state_.scattered + data_->v0;
  return lin;
}

StateResult ScatteringModel::state(const ParameterField& m) const { return linearize(m).state(); }

StateResult ScatteringModel::coupling_state(const ParameterField& m, double alpha, double beta) const {
  return linearize(m, alpha, beta).state();
}

Field ScatteringModel::state_derivative(const ParameterField& m, const Vector& h) const {
  return linearize(m).derivative(h);
}

Vector ScatteringModel::state_derivative_adjoint(const ParameterField& m, const Field& y) const {
  return linearize(m).adjoint(y);
}

Field ScatteringModel::coupling_derivative(const ParameterField& m, double alpha, double beta, double dalpha,
                                           double dbeta) const {
  return linearize(m, alpha, beta).coupling_derivative(dalpha, dbeta);
}

Field ScatteringModel::joint_derivative(const ParameterField& m, double alpha, double beta, double dalpha,
                                        double dbeta, const Vector& dm) const {
  const auto lin = linearize(m, alpha, beta);
  return lin.derivative(dm) + lin.coupling_derivative(dalpha, dbeta);
}

Field Linearization::derivative(const Vector& h) const {
  if (h.size() != m_.size()) throw std::invalid_argument("direction length does not match mesh");
  const auto& d = *model_.data_;
  const Field& source = model_.frozen() ? d.v0 : state_.total;
  return lu_->solve(-beta_ * (assemble_mass(d.mesh, h) * source));
}

Field Linearization::coupling_derivative(double dalpha, double dbeta) const {
  const auto& d = *model_.data_;
  const Vector& coeff = model_.frozen() ? *model_.frozen_ : m_;
  const auto mm = assemble_mass(d.mesh, coeff);
  // rhs'(dt) - (T'(dt) + B'(dt)) u_sc
  const auto dsys = ComplexSparseMatrix::combine(-kI * dalpha, d.B, dbeta, mm - d.M);
  const Vector dphi = -dbeta * (assemble_mass(d.mesh, m_) * d.v0);
  return lu_->solve(dphi - dsys * state_.scattered);
}

Vector Linearization::adjoint_euclidean(const Vector& z) const {
  if (z.size() != m_.size()) throw std::invalid_argument("adjoint argument length does not match mesh");
  const auto& d = *model_.data_;
  const Field& source = model_.frozen() ? d.v0 : state_.total;
  const Vector p = lu_->solve_adjoint(z);
  return -beta_ * contract_triple_product(d.mesh, p, source);
}

Vector Linearization::adjoint(const Field& y) const { return adjoint_euclidean(model_.data_->M * y); }

ReferenceInstance reference_instance_1d() {
  ScatteringModel model(build_interval_mesh(0.0, 1.0, 64), 2.0, {1.0, 0.0});
  const Vector m = interpolate(model.mesh(), [](const Point& x) {
    const double r = x[0] - 0.5;
    if (std::abs(r) >= 0.1) return cplx(0.0);
    const double c = std::cos(std::numbers::pi * r / 0.2);
    return cplx(0.1 * c * c);
  });
  return {std::move(model), {m, 1.0}};
}

ReferenceInstance reference_instance_2d() {
  ScatteringModel model(build_rectangle_mesh(1.0, 1.0, 16, 16), 2.0, {1.0, 0.0});
  const Vector m = interpolate(model.mesh(), [](const Point& x) {
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    return cplx(0.1 * std::exp(-r2 / (2.0 * 0.15 * 0.15)));
  });
  return {std::move(model), {m, 1.0}};
}

DerivativeCheck finite_difference_check(const std::string& name, const std::function<Field(double)>& f,
                                        const Field& derivative, const std::function<double(const Vector&)>& norm,
                                        const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("finite_difference_check needs at least one epsilon");
  DerivativeCheck out;
  out.name = name;
  out.epsilons = epsilons;
  const double scale = norm(derivative);
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const Field fd = (f(eps) - f(-eps)) / (2.0 * eps);
    const double err = norm(fd - derivative);
    out.fd_errors.push_back(scale > 0.0 ? err / scale : err);
  }
  if (epsilons.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(epsilons.size());
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      const double x = std::log(epsilons[i]), y = std::log(std::max(out.fd_errors[i], 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return out;
}

nlohmann::json to_json(const DerivativeCheck& c) {
  return {{"operator", c.name}, {"epsilon", c.epsilons}, {"fd_error", c.fd_errors}, {"slope", c.slope}};
}

}  // namespace varid
