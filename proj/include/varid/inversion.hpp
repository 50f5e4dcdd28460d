#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "varid/pts.hpp"

namespace varid {

enum class ObservationKind { FullField, BoundaryTrace, NodeSubset };

/// Linear sampling of nodal values.
struct ObservationOperator {
  ObservationKind kind = ObservationKind::FullField;
  std::vector<int> selection;  // observed nodes, in output order
  int num_nodes = 0;

  int size() const { return static_cast<int>(selection.size()); }
};

ObservationOperator make_observation(const Mesh& mesh, ObservationKind kind, std::vector<int> nodes = {});
ObservationKind parse_observation_kind(const std::string& name);
std::string to_string(ObservationKind kind);

Vector apply_observation(const ObservationOperator& q, const Field& u);
/// Q^H r: scatter back to nodes, zero elsewhere.
Vector apply_observation_adjoint(const ObservationOperator& q, const Vector& r);

/// y + delta * xi / |xi| with xi complex Gaussian and delta = level * |y|.
/// Returns the noisy data; the absolute delta is written to `delta`.
Vector add_noise(const Vector& y, double relative_level, std::uint64_t seed, double& delta);

struct InversionConfig {
  std::optional<double> step;     // omega; defaults to step_fraction / L^2
  double step_fraction = 0.9;
  int max_iters = 500;
  double discrepancy_tau = 2.0;
  double noise_delta = 0.0;       // absolute
  ParameterField init;
  bool real_parameter = true;
  int kappa_check_interval = 50;  // 0 disables the spot checks
  double kappa_check_radius = 0.01;
  int kappa_check_samples = 4;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iter = 0;
  double residual = 0.0;
  double m_error = NAN;    // relative L2 error when the true parameter is known
  double kappa_hat = NAN;  // spot check, NaN when not evaluated
};

struct InversionResult {
  std::vector<IterationRecord> history;
  ParameterField final_m;
  double step = 0.0;
  double lipschitz_sq = 0.0;  // power-iteration estimate of ||Q dS(m_init)||^2
  std::string stop_reason;    // "discrepancy" | "max_iters"
  int clipped_steps = 0;
  /// Iterations where the residual grew by more than 1e-12 relative while the
  /// latest spot-checked kappa was below 0.5.
  int descent_violations = 0;
};

/// ||Q dS(m)||^2 by power iteration on dS^* Q^H Q dS (real directions when
/// `real_parameter`).
double observed_derivative_norm_sq(const ScatteringModel& model, const ObservationOperator& q,
                                   const ParameterField& m, bool real_parameter, int iterations, std::uint64_t seed);

using IterationObserver = std::function<void(const IterationRecord&, const ParameterField&)>;

/// m_{k+1} = P(m_k - omega dS(m_k)^* Q^H (Q S(m_k) - y)), P the nodal clip to
/// the admissibility ball. WellPosednessFailure is rethrown with the iterate.
InversionResult landweber(const ScatteringModel& model, const ObservationOperator& q, const Vector& y_obs,
                          const InversionConfig& cfg, const Vector* m_true = nullptr,
                          const IterationObserver& observer = {});

/// "iter,residual,m_error,kappa_hat" with empty cells for unknown values.
void write_history_csv(std::ostream& os, const InversionResult& result, const std::string& config_hash = "");

}  // namespace varid
