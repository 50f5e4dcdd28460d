#include "varid/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "varid/random.hpp"
#include "varid/tcc.hpp"

namespace varid {

ObservationOperator make_observation(const Mesh& mesh, ObservationKind kind, std::vector<int> nodes) {
  ObservationOperator q;
  q.kind = kind;
  q.num_nodes = mesh.num_nodes();
  switch (kind) {
    case ObservationKind::FullField:
      q.selection.resize(mesh.num_nodes());
      for (int i = 0; i < mesh.num_nodes(); ++i) q.selection[i] = i;
      break;
    case ObservationKind::BoundaryTrace:
      q.selection = mesh.boundary_nodes();
      break;
    case ObservationKind::NodeSubset: {
      if (nodes.empty()) throw std::invalid_argument("node_subset observation needs at least one node");
      std::vector<char> seen(mesh.num_nodes(), 0);
      for (int i : nodes) {
        if (i < 0 || i >= mesh.num_nodes()) throw std::invalid_argument("observation node " + std::to_string(i) + " out of range");
        if (seen[i]) throw std::invalid_argument("observation node " + std::to_string(i) + " repeated");
        seen[i] = 1;
      }
      q.selection = std::move(nodes);
      break;
    }
  }
  return q;
}

ObservationKind parse_observation_kind(const std::string& name) {
  if (name == "full_field") return ObservationKind::FullField;
  if (name == "boundary_trace") return ObservationKind::BoundaryTrace;
  if (name == "node_subset") return ObservationKind::NodeSubset;
  throw std::invalid_argument("unknown observation kind '" + name + "'");
}

std::string to_string(ObservationKind kind) {
  switch (kind) {
    case ObservationKind::FullField: return "full_field";
    case ObservationKind::BoundaryTrace: return "boundary_trace";
    case ObservationKind::NodeSubset: return "node_subset";
  }
  return "?";
}

Vector apply_observation(const ObservationOperator& q, const Field& u) {
  if (u.size() != q.num_nodes) throw std::invalid_argument("field length does not match the observation operator");
  Vector y(q.size());
  for (int k = 0; k < q.size(); ++k) y[k] = u[q.selection[k]];
  return y;
}

Vector apply_observation_adjoint(const ObservationOperator& q, const Vector& r) {
  if (r.size() != q.size()) throw std::invalid_argument("data length does not match the observation operator");
  Vector u = Vector::Zero(q.num_nodes);
  for (int k = 0; k < q.size(); ++k) u[q.selection[k]] += r[k];
  return u;
}

Vector add_noise(const Vector& y, double level, std::uint64_t seed, double& delta) {
  if (level < 0.0) throw std::invalid_argument("noise level must be non-negative");
  delta = level * y.norm();
  if (delta == 0.0) return y;
  Rng rng(seed);
  const Vector xi = rng.complex_normal_vector(y.size());
  return y + (delta / xi.norm()) * xi;
}

double observed_derivative_norm_sq(const ScatteringModel& model, const ObservationOperator& q,
                                   const ParameterField& m, bool real_parameter, int iterations, std::uint64_t seed) {
  const auto lin = model.linearize(m);
  Rng rng(seed);
  Vector x = rng.complex_normal_vector(model.size());
  if (real_parameter) x = x.real().cast<cplx>();
  x /= x.norm();
  double lambda = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    const Vector y = apply_observation(q, lin.derivative(x));
    Vector g = lin.adjoint_euclidean(apply_observation_adjoint(q, y));
    if (real_parameter) g = g.real().cast<cplx>();
    lambda = g.norm();
    if (lambda == 0.0) return 0.0;
    x = g / lambda;
  }
  return lambda;
}

namespace {

void clip(Vector& m, double bound, bool& clipped) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double a = std::abs(m[i]);
    if (a > bound) {
      m[i] *= bound / a;
      clipped = true;
    }
  }
}

}  // namespace

InversionResult landweber(const ScatteringModel& model, const ObservationOperator& q, const Vector& y_obs,
                          const InversionConfig& cfg, const Vector* m_true, const IterationObserver& observer) {
  cfg.init.validate(model.size());
  if (y_obs.size() != q.size()) throw std::invalid_argument("observed data length does not match Q");
  if (q.num_nodes != model.size()) throw std::invalid_argument("observation operator does not match the mesh");
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  if (!(cfg.discrepancy_tau > 1.0)) throw std::invalid_argument("discrepancy_tau must exceed 1");
  if (cfg.noise_delta < 0.0) throw std::invalid_argument("noise_delta must be non-negative");
  if (m_true && m_true->size() != model.size()) throw std::invalid_argument("true parameter length does not match mesh");

  InversionResult out;
  out.lipschitz_sq = observed_derivative_norm_sq(model, q, cfg.init, cfg.real_parameter,
                                                 model.policy().power_iterations, cfg.seed);
  if (cfg.step) {
    if (!(*cfg.step > 0.0)) throw std::invalid_argument("Landweber step must be positive");
    if (*cfg.step * out.lipschitz_sq > 1.0)
      throw std::invalid_argument("Landweber step violates omega * ||Q dS||^2 <= 1 (product " +
                                  std::to_string(*cfg.step * out.lipschitz_sq) + ")");
    out.step = *cfg.step;
  } else {
    if (!(cfg.step_fraction > 0.0 && cfg.step_fraction <= 1.0))
      throw std::invalid_argument("step_fraction must lie in (0, 1]");
    if (!(out.lipschitz_sq > 0.0)) throw std::invalid_argument("Q dS vanishes at the initial guess; no step size");
    out.step = cfg.step_fraction / out.lipschitz_sq;
  }

  const auto& M = model.mass();
  const double true_norm = m_true ? std::sqrt(std::max(0.0, m_true->dot(M * *m_true).real())) : 0.0;
  const auto param_error = [&](const Vector& m) {
    const Vector d = m - *m_true;
    const double e = std::sqrt(std::max(0.0, d.dot(M * d).real()));
    return true_norm > 0.0 ? e / true_norm : e;
  };

  Vector m = cfg.init.values;
  double last_kappa = NAN;
  for (int k = 0;; ++k) {
    const ParameterField mk{m, cfg.init.sup_bound};
    std::optional<Linearization> lin;
    try {
      lin.emplace(model.linearize(mk));
    } catch (const WellPosednessFailure& e) {
      throw WellPosednessFailure(std::string(e.what()) + " (Landweber iterate " + std::to_string(k) + ")",
                                 e.condition_estimate(), k);
    }
    const Vector r = apply_observation(q, lin->state().total) - y_obs;
    IterationRecord rec;
    rec.iter = k;
    rec.residual = r.norm();
    if (m_true) rec.m_error = param_error(m);
    if (cfg.kappa_check_interval > 0 && k % cfg.kappa_check_interval == 0 &&
        mk.sup_norm() + cfg.kappa_check_radius <= mk.sup_bound) {
      const auto rep = estimate_tcc(model, mk, {cfg.kappa_check_radius}, std::max(2, cfg.kappa_check_samples),
                                    cfg.seed + static_cast<std::uint64_t>(k));
      rec.kappa_hat = rep.kappa_hat_H[0];
      last_kappa = rec.kappa_hat;
    }
    if (!out.history.empty()) {
      const double prev = out.history.back().residual;
      if (rec.residual > prev * (1.0 + 1e-12) && !(last_kappa >= 0.5)) ++out.descent_violations;
    }
    out.history.push_back(rec);
    if (observer) observer(rec, mk);

    if (rec.residual <= cfg.discrepancy_tau * cfg.noise_delta) {
      out.stop_reason = "discrepancy";
      break;
    }
    if (k == cfg.max_iters) {
      out.stop_reason = "max_iters";
      break;
    }
    Vector g = lin->adjoint_euclidean(apply_observation_adjoint(q, r));
    if (cfg.real_parameter) g = g.real().cast<cplx>();
    m -= out.step * g;
    bool clipped = false;
    clip(m, cfg.init.sup_bound, clipped);
    if (clipped) ++out.clipped_steps;
  }
  out.final_m = {m, cfg.init.sup_bound};
  return out;
}

void write_history_csv(std::ostream& os, const InversionResult& result, const std::string& config_hash) {
  if (!config_hash.empty()) os << "# config_hash: " << config_hash << '\n';
  os << "iter,residual,m_error,kappa_hat\n";
  char buf[128];
  for (const auto& r : result.history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,", r.iter, r.residual);
    os << buf;
    if (!std::isnan(r.m_error)) {
      std::snprintf(buf, sizeof buf, "%.17g", r.m_error);
      os << buf;
    }
    os << ',';
    if (!std::isnan(r.kappa_hat)) {
      std::snprintf(buf, sizeof buf, "%.17g", r.kappa_hat);
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace varid
