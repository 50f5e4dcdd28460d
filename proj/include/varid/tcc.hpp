#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "varid/pts.hpp"

namespace varid {

struct TccPair {
  int radius_index = 0;
  int sample = 0;
  double kappa_H = 0.0;
  double kappa_V = 0.0;
  double distance = 0.0;   // ||m1 - m2||_inf
  double lambda_m2 = 0.0;  // Lambda_hat evaluated at m2
  bool skipped = false;    // S(m1) == S(m2)
};

struct TccReport {
  std::vector<double> radii;
  std::vector<double> kappa_hat_H;
  std::vector<double> kappa_hat_V;
  /// Per radius: every sampled pair satisfies kappa_H <= Lambda(m2) ||m1 - m2|| (1 + 1e-6)
  /// and kappa_V likewise.
  std::vector<bool> pair_bound_holds;
  std::vector<int> skipped;
  double lambda_hat_center = 0.0;  // at m0
  double lambda_hat_max = 0.0;     // max over m0 and every sampled m2
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<TccPair> pairs;
};

struct TccOptions {
  int threads = 1;
};

/// Lambda_hat(m) = (gamma / c_t) ||(I + C^V(m))^{-1}||_V ||B'||,  ||B'|| = k0^2 gamma.
double tcc_lambda(const ScatteringModel& model, const ParameterField& m);

/// Samples n_samples pairs per radius in the sup-norm ball around m0. The
/// unit offsets are drawn once from the seed and rescaled by each radius.
TccReport estimate_tcc(const ScatteringModel& model, const ParameterField& m0, const std::vector<double>& radii,
                       int n_samples, std::uint64_t seed, const TccOptions& options = {});

nlohmann::json to_json(const TccReport& report);
/// "radius_index,radius,sample,kappa_H,kappa_V,distance,lambda_m2,skipped"
void write_tcc_pairs_csv(std::ostream& os, const TccReport& report, const std::string& config_hash = "");

}  // namespace varid
