#include "varid/tcc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "varid/random.hpp"

namespace varid {

double tcc_lambda(const ScatteringModel& model, const ParameterField& m) {
  const auto lin = model.linearize(m);
  const auto& sp = model.spaces();
  const double k = model.k0();
  const double inv = inverse_factor_norm(model.a1_matrix(k), lin.factor(), sp, model.policy());
  const double b_prime = k * k * sp.gamma;
  return sp.gamma * inv * b_prime;  // c_t = 1
}

namespace {

template <class F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::max(1, std::min(threads, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

TccReport estimate_tcc(const ScatteringModel& model, const ParameterField& m0, const std::vector<double>& radii,
                       int n_samples, std::uint64_t seed, const TccOptions& options) {
  m0.validate(model.size());
  if (n_samples < 2) throw std::invalid_argument("tcc needs n_samples >= 2");
  if (radii.empty()) throw std::invalid_argument("tcc needs at least one radius");
  for (std::size_t r = 0; r < radii.size(); ++r) {
    if (!(radii[r] > 0.0)) throw std::invalid_argument("tcc radii must be positive");
    if (r > 0 && !(radii[r] < radii[r - 1])) throw std::invalid_argument("tcc radii must be strictly decreasing");
  }
  if (m0.sup_norm() + radii.front() > m0.sup_bound)
    throw std::invalid_argument("largest tcc ball leaves the admissible set");

  const int n = model.size();
  Rng rng(seed);
  std::vector<Vector> z1(n_samples, Vector(n)), z2(n_samples, Vector(n));
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < n; ++i) z1[s][i] = rng.unit_disk();
    for (int i = 0; i < n; ++i) z2[s][i] = rng.unit_disk();
  }

  TccReport rep;
  rep.radii = radii;
  rep.n_samples = n_samples;
  rep.seed = seed;
  rep.lambda_hat_center = tcc_lambda(model, m0);
  const auto& sp = model.spaces();

  const int total = static_cast<int>(radii.size()) * n_samples;
  rep.pairs.resize(total);
  parallel_for(total, options.threads, [&](int idx) {
    const int r = idx / n_samples, s = idx % n_samples;
    const ParameterField m1{m0.values + radii[r] * z1[s], m0.sup_bound};
    const ParameterField m2{m0.values + radii[r] * z2[s], m0.sup_bound};
    const auto lin2 = model.linearize(m2);
    const Field s1 = model.state(m1).scattered;
    const Field diff = s1 - lin2.state().scattered;
    const Field rem = diff - lin2.derivative(m1.values - m2.values);
    TccPair& p = rep.pairs[idx];
    p.radius_index = r;
    p.sample = s;
    p.distance = (m1.values - m2.values).cwiseAbs().maxCoeff();
    p.lambda_m2 = model.frozen() ? 0.0 : tcc_lambda(model, m2);
    const double dh = sp.norm_H(diff), dv = sp.norm_V(diff);
    if (dh == 0.0 || dv == 0.0) {
      p.skipped = true;
      return;
    }
    p.kappa_H = sp.norm_H(rem) / dh;
    p.kappa_V = sp.norm_V(rem) / dv;
  });
  if (model.frozen()) rep.lambda_hat_center = 0.0;

  rep.lambda_hat_max = rep.lambda_hat_center;
  rep.kappa_hat_H.assign(radii.size(), 0.0);
  rep.kappa_hat_V.assign(radii.size(), 0.0);
  rep.pair_bound_holds.assign(radii.size(), true);
  rep.skipped.assign(radii.size(), 0);
  for (const auto& p : rep.pairs) {
    rep.lambda_hat_max = std::max(rep.lambda_hat_max, p.lambda_m2);
    if (p.skipped) {
      ++rep.skipped[p.radius_index];
      continue;
    }
    rep.kappa_hat_H[p.radius_index] = std::max(rep.kappa_hat_H[p.radius_index], p.kappa_H);
    rep.kappa_hat_V[p.radius_index] = std::max(rep.kappa_hat_V[p.radius_index], p.kappa_V);
    if (!model.frozen()) {
      const double bound = p.lambda_m2 * p.distance * (1.0 + 1e-6);
      if (!(p.kappa_H <= bound && p.kappa_V <= bound)) rep.pair_bound_holds[p.radius_index] = false;
    }
  }
  return rep;
}

nlohmann::json to_json(const TccReport& r) {
  nlohmann::json j;
  j["radii"] = r.radii;
  j["kappa_hat_H"] = r.kappa_hat_H;
  j["kappa_hat_V"] = r.kappa_hat_V;
  j["pair_bound_holds"] = r.pair_bound_holds;
  j["skipped"] = r.skipped;
  j["Lambda_hat_center"] = r.lambda_hat_center;
  j["Lambda_hat"] = r.lambda_hat_max;
  j["n_samples"] = r.n_samples;
  j["seed"] = r.seed;
  return j;
}

void write_tcc_pairs_csv(std::ostream& os, const TccReport& r, const std::string& config_hash) {
  if (!config_hash.empty()) os << "# config_hash: " << config_hash << '\n';
  os << "radius_index,radius,sample,kappa_H,kappa_V,distance,lambda_m2,skipped\n";
  char buf[256];
  for (const auto& p : r.pairs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d\n", p.radius_index, r.radii[p.radius_index],
                  p.sample, p.kappa_H, p.kappa_V, p.distance, p.lambda_m2, p.skipped ? 1 : 0);
    os << buf;
  }
}

}  // namespace varid
