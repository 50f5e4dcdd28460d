#include "varid/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "varid/assembly.hpp"
#include "varid/formcore.hpp"
#include "varid/inversion.hpp"
#include "varid/pts.hpp"
#include "varid/randinst.hpp"
#include "varid/random.hpp"
#include "varid/tcc.hpp"

namespace varid::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string config_hash(const std::string& command, const json& config) {
  const std::string text = command + "\n" + config.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

// ---- schema helpers --------------------------------------------------------

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError(path + ": unknown key '" + key + "'");
}

const json* find(const json& j, const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& key, const std::string& path, std::optional<double> fallback = {}) {
  const json* v = find(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(path + ": missing '" + key + "'");
  }
  if (!v->is_number()) throw ConfigError(path + "." + key + ": expected a number");
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + "." + key + ": not finite");
  return x;
}

int integer(const json& j, const std::string& key, const std::string& path, std::optional<int> fallback = {}) {
  const json* v = find(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(path + ": missing '" + key + "'");
  }
  if (!v->is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v->get<int>();
}

bool boolean(const json& j, const std::string& key, const std::string& path, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError(path + "." + key + ": expected true or false");
  return v->get<bool>();
}

std::string string(const json& j, const std::string& key, const std::string& path, std::optional<std::string> fallback = {}) {
  const json* v = find(j, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(path + ": missing '" + key + "'");
  }
  if (!v->is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v->get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& path,
                            std::vector<double> fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_array() || v->empty()) throw ConfigError(path + "." + key + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(path + "." + key + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& section(const json& cfg, const std::string& key) {
  static const json empty = json::object();
  const json* v = find(cfg, key);
  return v ? *v : empty;
}

// ---- problem setup ---------------------------------------------------------

NumericPolicy parse_policy(const json& cfg) {
  NumericPolicy p;
  const json& j = section(cfg, "policy");
  const std::string path = "policy";
  check_keys(j, path,
             {"pivot_tolerance", "residual_tolerance", "refinement_steps", "eig_tolerance", "eig_max_iterations",
              "eig_krylov_dim", "bound_safety", "dense_limit", "kernel_rank_tolerance", "power_iterations"});
  p.pivot_tolerance = number(j, "pivot_tolerance", path, p.pivot_tolerance);
  p.residual_tolerance = number(j, "residual_tolerance", path, p.residual_tolerance);
  p.refinement_steps = integer(j, "refinement_steps", path, p.refinement_steps);
  p.eig_tolerance = number(j, "eig_tolerance", path, p.eig_tolerance);
  p.eig_max_iterations = integer(j, "eig_max_iterations", path, p.eig_max_iterations);
  p.eig_krylov_dim = integer(j, "eig_krylov_dim", path, p.eig_krylov_dim);
  p.bound_safety = number(j, "bound_safety", path, p.bound_safety);
  p.dense_limit = integer(j, "dense_limit", path, p.dense_limit);
  p.kernel_rank_tolerance = number(j, "kernel_rank_tolerance", path, p.kernel_rank_tolerance);
  p.power_iterations = integer(j, "power_iterations", path, p.power_iterations);
  if (!(p.pivot_tolerance > 0) || !(p.residual_tolerance > 0) || !(p.eig_tolerance > 0) || p.refinement_steps < 0 ||
      p.eig_max_iterations < 1 || p.eig_krylov_dim < 2 || p.bound_safety < 0 || p.dense_limit < 0 ||
      !(p.kernel_rank_tolerance > 0) || p.power_iterations < 1)
    throw ConfigError("policy: value out of range");
  return p;
}

Mesh parse_mesh(const json& cfg) {
  const json* j = find(cfg, "mesh");
  if (!j) throw ConfigError("missing 'mesh'");
  if (!j->is_object()) throw ConfigError("mesh: expected an object");
  const std::string type = string(*j, "type", "mesh");
  if (type == "interval") {
    check_keys(*j, "mesh", {"type", "a", "b", "elements"});
    const double a = number(*j, "a", "mesh", 0.0), b = number(*j, "b", "mesh", 1.0);
    const int n = integer(*j, "elements", "mesh");
    if (!(b > a) || n < 1) throw ConfigError("mesh: need b > a and elements >= 1");
    return build_interval_mesh(a, b, n);
  }
  if (type == "rectangle") {
    check_keys(*j, "mesh", {"type", "lx", "ly", "nx", "ny"});
    const double lx = number(*j, "lx", "mesh", 1.0), ly = number(*j, "ly", "mesh", 1.0);
    const int nx = integer(*j, "nx", "mesh"), ny = integer(*j, "ny", "mesh");
    if (!(lx > 0) || !(ly > 0) || nx < 1 || ny < 1) throw ConfigError("mesh: need positive sizes and counts");
    return build_rectangle_mesh(lx, ly, nx, ny);
  }
  throw ConfigError("mesh.type: expected 'interval' or 'rectangle'");
}

Point parse_direction(const json& cfg, const Mesh& mesh) {
  const auto d = numbers(cfg, "incident_dir", "config", mesh.dim() == 1 ? std::vector<double>{1.0}
                                                                       : std::vector<double>{1.0, 0.0});
  if (static_cast<int>(d.size()) != mesh.dim()) throw ConfigError("incident_dir: needs one entry per dimension");
  const Point p{d[0], mesh.dim() == 2 ? d[1] : 0.0};
  try {
    validate_direction(mesh, p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("incident_dir: ") + e.what());
  }
  return p;
}

ParameterField parse_parameter(const json* j, const std::string& path, const Mesh& mesh, const fs::path& base) {
  ParameterField m{Vector::Zero(mesh.num_nodes()), 1.0};
  if (!j) return m;
  if (!j->is_object()) throw ConfigError(path + ": expected an object");
  const std::string kind = string(*j, "kind", path);
  m.sup_bound = number(*j, "sup_bound", path, 1.0);
  auto center = [&]() {
    const auto c = numbers(*j, "center", path, {0.5, 0.5});
    if (static_cast<int>(c.size()) < mesh.dim()) throw ConfigError(path + ".center: needs one entry per dimension");
    return Point{c[0], mesh.dim() == 2 ? c[1] : 0.0};
  };
  auto dist2 = [&](const Point& x, const Point& c) {
    const double dx = x[0] - c[0], dy = mesh.dim() == 2 ? x[1] - c[1] : 0.0;
    return dx * dx + dy * dy;
  };
  if (kind == "zero") {
    check_keys(*j, path, {"kind", "sup_bound"});
  } else if (kind == "constant") {
    check_keys(*j, path, {"kind", "value", "sup_bound"});
    m.values.setConstant(number(*j, "value", path));
  } else if (kind == "bump") {
    // amplitude cos^2(pi r / (2 width)) for r < width
    check_keys(*j, path, {"kind", "amplitude", "center", "width", "sup_bound"});
    const double amp = number(*j, "amplitude", path), w = number(*j, "width", path);
    if (!(w > 0)) throw ConfigError(path + ".width: must be positive");
    const Point c = center();
    m.values = interpolate(mesh, [&](const Point& x) {
      const double r = std::sqrt(dist2(x, c));
      const double s = std::cos(M_PI * r / (2.0 * w));
      return cplx(r < w ? amp * s * s : 0.0);
    });
  } else if (kind == "gaussian") {
    check_keys(*j, path, {"kind", "amplitude", "center", "sigma", "sup_bound"});
    const double amp = number(*j, "amplitude", path), s = number(*j, "sigma", path);
    if (!(s > 0)) throw ConfigError(path + ".sigma: must be positive");
    const Point c = center();
    m.values = interpolate(mesh, [&](const Point& x) { return cplx(amp * std::exp(-dist2(x, c) / (2.0 * s * s))); });
  } else if (kind == "csv") {
    check_keys(*j, path, {"kind", "path", "sup_bound"});
    fs::path file = string(*j, "path", path);
    if (file.is_relative()) file = base / file;
    std::ifstream is(file);
    if (!is) throw ConfigError(path + ".path: cannot read " + file.string());
    try {
      m.values = read_field_csv(is, mesh);
    } catch (const std::exception& e) {
      throw ConfigError(path + ".path: " + e.what());
    }
  } else {
    throw ConfigError(path + ".kind: expected zero, constant, bump, gaussian or csv");
  }
  try {
    m.validate(mesh.num_nodes());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return m;
}

struct Setup {
  json cfg;
  std::string command;
  std::string hash;
  fs::path out;
  fs::path base;  // directory of the config file
  std::uint64_t seed = 0;
  int threads = 1;
  NumericPolicy policy;
};

struct Physics {
  ScatteringModel model;
  ParameterField m;
};

Physics parse_physics(const Setup& s) {
  const Mesh mesh = parse_mesh(s.cfg);
  const double k0 = number(s.cfg, "k0", "config");
  if (!(k0 > 0)) throw ConfigError("k0: must be positive");
  const Point dir = parse_direction(s.cfg, mesh);
  ParameterField m = parse_parameter(find(s.cfg, "parameter"), "parameter", mesh, s.base);
  return {ScatteringModel(mesh, k0, dir, s.policy), std::move(m)};
}

// ---- artifact output -------------------------------------------------------

void write_json(const Setup& s, const std::string& name, json j) {
  j["config_hash"] = s.hash;
  std::ofstream os(s.out / name);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write " + (s.out / name).string());
}

template <class Writer>
void write_file(const Setup& s, const std::string& name, Writer&& w) {
  std::ofstream os(s.out / name);
  w(os);
  if (!os) throw std::runtime_error("cannot write " + (s.out / name).string());
}

// ---- commands --------------------------------------------------------------

int cmd_solve(const Setup& s, std::ostream& out) {
  const auto ph = parse_physics(s);
  const auto& model = ph.model;
  const OperatorBundle bundle = model.bundle(ph.m);
  const Vector phi = model.rhs(ph.m.values, model.k0() * model.k0());
  const auto sol = solve_variational(bundle, phi);
  const Field total = sol.u + model.incident();

  write_file(s, "scattered.csv", [&](std::ostream& os) { write_field_csv(os, model.mesh(), sol.u, s.hash); });
  write_file(s, "total.csv", [&](std::ostream& os) { write_field_csv(os, model.mesh(), total, s.hash); });
  json d = diagnostics_json(bundle);
  d["nodes"] = model.size();
  d["residual_norm"] = sol.report.residual_norm;
  d["scattered_norm_V"] = model.spaces().norm_V(sol.u);
  d["a_priori_bound"] = sol.a_priori_bound ? json(*sol.a_priori_bound) : json(nullptr);
  d["bound_holds"] = sol.bound_holds;
  d["pass"] = sol.bound_holds;
  write_json(s, "diagnostics.json", d);
  out << "solve: " << model.size() << " nodes, |u_sc|_V = " << model.spaces().norm_V(sol.u)
      << (sol.bound_holds ? "" : ", a-priori bound VIOLATED") << "\n";
  return sol.bound_holds ? kOk : kCheckFailed;
}

int cmd_deriv_check(const Setup& s, std::ostream& out) {
  const json& j = section(s.cfg, "deriv_check");
  const std::string path = "deriv_check";
  check_keys(j, path, {"epsilons", "directions", "direction_scale", "max_error", "min_slope"});
  const auto eps = numbers(j, "epsilons", path, {1e-3, 1e-4, 1e-5});
  const int ndir = integer(j, "directions", path, 3);
  const double scale = number(j, "direction_scale", path, 30.0);
  const double max_error = number(j, "max_error", path, 1e-6);
  const double min_slope = number(j, "min_slope", path, 1.9);
  for (double e : eps)
    if (!(e > 0)) throw ConfigError(path + ".epsilons: must be positive");
  if (ndir < 1 || !(scale > 0)) throw ConfigError(path + ": directions >= 1 and direction_scale > 0 required");

  const auto ph = parse_physics(s);
  const auto& model = ph.model;
  const double a = model.k0(), b = a * a;
  const double emax = *std::max_element(eps.begin(), eps.end());
  // Perturbations may leave the configured ball; the derivative does not care.
  const ParameterField m{ph.m.values, ph.m.sup_bound + scale * emax};
  const auto lin = model.linearize(m);
  const auto norm = [&](const Vector& v) { return model.spaces().norm_V(v); };
  Rng rng(s.seed);

  json checks = json::array();
  bool pass = true;
  for (int d = 0; d < ndir; ++d) {
    Vector h(model.size());
    for (int i = 0; i < model.size(); ++i) h[i] = scale * rng.unit_disk();
    const double da = scale * rng.uniform(-1.0, 1.0), db = scale * rng.uniform(-1.0, 1.0);
    const auto shifted = [&](double e) { return ParameterField{m.values + e * h, m.sup_bound}; };
    const DerivativeCheck cs[] = {
        finite_difference_check(
            "dS", [&](double e) { return model.state(shifted(e)).scattered; }, lin.derivative(h), norm, eps),
        finite_difference_check(
            "dtau", [&](double e) { return model.coupling_state(m, a + e * da, b + e * db).scattered; },
            lin.coupling_derivative(da, db), norm, eps),
        finite_difference_check(
            "dTheta", [&](double e) { return model.coupling_state(shifted(e), a + e * da, b + e * db).scattered; },
            model.joint_derivative(m, a, b, da, db, h), norm, eps)};
    for (const auto& c : cs) {
      // error at the smallest epsilon; the slope needs at least two points
      const std::size_t k = std::min_element(c.epsilons.begin(), c.epsilons.end()) - c.epsilons.begin();
      const bool ok = c.fd_errors[k] <= max_error && (eps.size() < 2 || c.slope >= min_slope);
      pass = pass && ok;
      json r = to_json(c);
      r["direction"] = d;
      r["pass"] = ok;
      checks.push_back(r);
      out << c.name << " direction " << d << ": error " << c.fd_errors[k] << ", slope " << c.slope
          << (ok ? "" : "  FAIL") << "\n";
    }
  }
  write_json(s, "deriv_check.json",
             {{"checks", checks}, {"max_error", max_error}, {"min_slope", min_slope}, {"pass", pass}});
  return pass ? kOk : kCheckFailed;
}

int cmd_tcc(const Setup& s, std::ostream& out) {
  const json& j = section(s.cfg, "tcc");
  const std::string path = "tcc";
  check_keys(j, path, {"radii", "samples", "frozen"});
  const auto radii = numbers(j, "radii", path, {0.1, 0.05, 0.025});
  const int samples = integer(j, "samples", path, 8);
  const bool frozen = boolean(j, "frozen", path, false);
  if (samples < 1) throw ConfigError(path + ".samples: must be >= 1");

  const auto ph = parse_physics(s);
  const ScatteringModel model = frozen ? ph.model.frozen_at(ph.m.values) : ph.model;
  TccReport rep;
  try {
    rep = estimate_tcc(model, ph.m, radii, samples, s.seed, TccOptions{s.threads});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  write_file(s, "tcc_pairs.csv", [&](std::ostream& os) { write_tcc_pairs_csv(os, rep, s.hash); });
  bool pass = true;
  for (bool b : rep.pair_bound_holds) pass = pass && b;
  json r = to_json(rep);
  r["frozen"] = frozen;
  r["pass"] = pass;
  write_json(s, "tcc_report.json", r);
  for (std::size_t i = 0; i < radii.size(); ++i)
    out << "rho " << radii[i] << ": kappa_H " << rep.kappa_hat_H[i] << ", kappa_V " << rep.kappa_hat_V[i]
        << (rep.pair_bound_holds[i] ? "" : "  bound FAIL") << "\n";
  out << "Lambda_hat " << rep.lambda_hat_max << "\n";
  return pass ? kOk : kCheckFailed;
}

int cmd_certify(const Setup& s, std::ostream& out) {
  const auto ph = parse_physics(s);
  const auto& model = ph.model;
  const OperatorBundle bundle = model.bundle(ph.m);
  const auto& fsf = bundle.forms();
  const InfSupResult inf_sup = inf_sup_constant(fsf.A1, bundle.spaces(), s.policy);
  json c = diagnostics_json(bundle);
  c["nodes"] = model.size();
  c["inf_sup"] = inf_sup.value;
  c["inf_sup_lower"] = inf_sup.lower;
  c["inverse_factor_norm"] = bundle.inverse_factor_norm();
  bool pass = inf_sup.nondegenerate && fsf.c_t > 0.0;
  if (model.size() <= s.policy.dense_limit) {
    const auto f = factorization_check(bundle, s.policy);
    c["factorization_defect"] = f.relative_defect;
    pass = pass && f.relative_defect <= 1e-10 && !f.singular;
  } else {
    c["factorization_defect"] = nullptr;
  }
  c["pass"] = pass;
  write_json(s, "certificate.json", c);
  out << "certificate " << to_string(bundle.certificate().kind) << ": gamma " << bundle.spaces().gamma << ", c_t "
      << fsf.c_t << ", margin " << bundle.certificate().margin << ", condition "
      << bundle.certificate().condition_estimate << "\n";
  return pass ? kOk : kCheckFailed;
}

int cmd_invert(const Setup& s, std::ostream& out) {
  const json& j = section(s.cfg, "invert");
  const std::string path = "invert";
  check_keys(j, path,
             {"observation", "init", "max_iters", "discrepancy_tau", "noise_level", "step", "step_fraction",
              "real_parameter", "kappa_check_interval", "kappa_check_radius", "kappa_check_samples"});
  const auto ph = parse_physics(s);
  const auto& model = ph.model;
  const auto& mesh = model.mesh();

  ObservationOperator q;
  {
    const json& o = section(j, "observation");
    check_keys(o, path + ".observation", {"kind", "nodes"});
    std::vector<int> nodes;
    if (const json* n = find(o, "nodes")) {
      if (!n->is_array()) throw ConfigError(path + ".observation.nodes: expected an array of integers");
      for (const auto& x : *n) {
        if (!x.is_number_integer()) throw ConfigError(path + ".observation.nodes: expected integers");
        nodes.push_back(x.get<int>());
      }
    }
    try {
      q = make_observation(mesh, parse_observation_kind(string(o, "kind", path + ".observation", "full_field")),
                           nodes);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ".observation: " + e.what());
    }
  }

  InversionConfig cfg;
  cfg.init = parse_parameter(find(j, "init"), path + ".init", mesh, s.base);
  cfg.max_iters = integer(j, "max_iters", path, cfg.max_iters);
  cfg.discrepancy_tau = number(j, "discrepancy_tau", path, cfg.discrepancy_tau);
  if (find(j, "step")) cfg.step = number(j, "step", path);
  cfg.step_fraction = number(j, "step_fraction", path, cfg.step_fraction);
  cfg.real_parameter = boolean(j, "real_parameter", path, cfg.real_parameter);
  cfg.kappa_check_interval = integer(j, "kappa_check_interval", path, cfg.kappa_check_interval);
  cfg.kappa_check_radius = number(j, "kappa_check_radius", path, cfg.kappa_check_radius);
  cfg.kappa_check_samples = integer(j, "kappa_check_samples", path, cfg.kappa_check_samples);
  cfg.seed = s.seed;
  const double noise = number(j, "noise_level", path, 0.0);
  if (cfg.max_iters < 0 || noise < 0 || cfg.kappa_check_interval < 0 || cfg.kappa_check_samples < 1 ||
      !(cfg.step_fraction > 0) || cfg.step_fraction > 1)
    throw ConfigError(path + ": value out of range");

  Vector y = apply_observation(q, model.state(ph.m).total);
  double delta = 0.0;
  if (noise > 0) y = add_noise(y, noise, s.seed, delta);
  cfg.noise_delta = delta;

  InversionResult res;
  try {
    res = landweber(model, q, y, cfg, &ph.m.values);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  write_file(s, "history.csv", [&](std::ostream& os) { write_history_csv(os, res, s.hash); });
  write_file(s, "final_parameter.csv",
             [&](std::ostream& os) { write_field_csv(os, mesh, res.final_m.values, s.hash); });
  const bool pass = res.descent_violations == 0;
  const auto& first = res.history.front();
  const auto& last = res.history.back();
  write_json(s, "inversion.json",
             {{"stop_reason", res.stop_reason},
              {"iterations", last.iter},
              {"step", res.step},
              {"lipschitz_sq", res.lipschitz_sq},
              {"noise_delta", delta},
              {"observation", to_string(q.kind)},
              {"initial_residual", first.residual},
              {"final_residual", last.residual},
              {"initial_m_error", first.m_error},
              {"final_m_error", last.m_error},
              {"clipped_steps", res.clipped_steps},
              {"descent_violations", res.descent_violations},
              {"pass", pass}});
  out << "landweber: " << last.iter << " iterations (" << res.stop_reason << "), residual " << first.residual
      << " -> " << last.residual << ", parameter error " << first.m_error << " -> " << last.m_error << "\n";
  return pass ? kOk : kCheckFailed;
}

// Dense checks for the oracle suite, plain Eigen only.
DenseMatrix whitened(const DenseMatrix& f, const DenseMatrix& left, const DenseMatrix& right) {
  const DenseMatrix lr = Eigen::LLT<DenseMatrix>(right).matrixL(), ll = Eigen::LLT<DenseMatrix>(left).matrixL();
  const DenseMatrix a = lr.triangularView<Eigen::Lower>().solve(f);
  return ll.triangularView<Eigen::Lower>().solve(a.adjoint()).adjoint();
}

double gram_operator_norm(const DenseMatrix& x, const DenseMatrix& g) {
  const DenseMatrix l = Eigen::LLT<DenseMatrix>(g).matrixL();
  const DenseMatrix y = l.triangularView<Eigen::Lower>().solve((l.adjoint() * x).adjoint()).adjoint();
  return Eigen::BDCSVD<DenseMatrix>(y).singularValues()[0];
}

int cmd_oracle_suite(const Setup& s, std::ostream& out) {
  const json& j = section(s.cfg, "oracle_suite");
  const std::string path = "oracle_suite";
  check_keys(j, path, {"instances", "max_n", "tags", "random_vectors"});
  const int count = integer(j, "instances", path, 200);
  const int max_n = integer(j, "max_n", path, 64);
  const int nvec = integer(j, "random_vectors", path, 10);
  std::vector<InstanceTag> tags;
  if (const json* t = find(j, "tags")) {
    if (!t->is_array() || t->empty()) throw ConfigError(path + ".tags: expected a non-empty array");
    for (const auto& x : *t) {
      if (!x.is_string()) throw ConfigError(path + ".tags: expected strings");
      try {
        tags.push_back(parse_instance_tag(x.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".tags: " + e.what());
      }
    }
  } else {
    tags = {InstanceTag::Coercive, InstanceTag::InfSupOnly, InstanceTag::SingularSystem};
  }
  if (count < 1 || max_n < 2 || max_n > 64 || nvec < 0) throw ConfigError(path + ": value out of range");

  json rows = json::array();
  int failed = 0;
  for (int i = 0; i < count; ++i) {
    const InstanceTag tag = tags[i % tags.size()];
    const int n = max_n == 2 ? 2 : 2 + (i * 7) % (max_n - 1);
    const std::uint64_t seed = s.seed + static_cast<std::uint64_t>(i);
    const auto inst = gen_instance(n, tag, seed, s.policy);
    const DenseMatrix gv = inst.sp.gram_V.to_dense(), gh = inst.sp.gram_H.to_dense();
    const DenseMatrix a1 = inst.fs.A1.to_dense(), c = inst.fs.Cmat.to_dense();

    const auto fact = factorization_check(inst.fs, inst.sp, s.policy);
    const auto sv = Eigen::BDCSVD<DenseMatrix>(whitened(a1, gv, gv)).singularValues();
    const double t_norm = sv[0], tinv_norm = 1.0 / sv[n - 1];
    const DenseMatrix cv = a1.partialPivLu().solve(c);
    double c_excess = 0.0;
    Rng rng(seed ^ 0x5bd1e995u);
    const double kc = inst.fs.M_tm / inst.fs.c_t;
    for (int k = 0; k < nvec; ++k) {
      const Vector x = rng.complex_normal_vector(n);
      const double lhs = std::sqrt((cv * x).dot(gv * (cv * x)).real());
      const double rhs = kc * std::sqrt(x.dot(gh * x).real());
      c_excess = std::max(c_excess, (lhs - rhs) / rhs);
    }
    const double margin = neumann_margin(inst.fs, inst.sp);
    json neumann = nullptr;
    bool ok_neumann = true;
    if (margin < 1.0) {
      const DenseMatrix inv = (DenseMatrix::Identity(n, n) + cv).inverse();
      const double h_norm = gram_operator_norm(inv, gh);
      ok_neumann = h_norm <= 1.0 / (1.0 - margin) + 1e-8;
      neumann = h_norm;
    }
    const bool ok = fact.relative_defect <= 1e-10 && t_norm <= inst.fs.C_t + 1e-8 &&
                    tinv_norm <= 1.0 / inst.fs.c_t + 1e-8 && c_excess <= 1e-8 && ok_neumann &&
                    fact.singular == (tag == InstanceTag::SingularSystem) && fact.kernel_angle <= 1e-6;
    if (!ok) ++failed;
    rows.push_back({{"index", i},
                    {"n", n},
                    {"tag", to_string(tag)},
                    {"seed", seed},
                    {"factorization_defect", fact.relative_defect},
                    {"singular", fact.singular},
                    {"kernel_angle", fact.kernel_angle},
                    {"T_norm", t_norm},
                    {"C_t", inst.fs.C_t},
                    {"T_inv_norm", tinv_norm},
                    {"c_t", inst.fs.c_t},
                    {"c_bound_excess", c_excess},
                    {"margin", margin},
                    {"neumann_inverse_norm_H", neumann},
                    {"pass", ok}});
  }
  write_json(s, "oracle_suite.json", {{"instances", rows}, {"failed", failed}, {"pass", failed == 0}});
  out << "oracle-suite: " << count - failed << "/" << count << " instances pass\n";
  return failed == 0 ? kOk : kCheckFailed;
}

json failure_record(const std::exception& e) {
  json r{{"message", e.what()}};
  if (const auto* w = dynamic_cast<const WellPosednessFailure*>(&e)) {
    r["error"] = "well_posedness_failure";
    r["condition_estimate"] = w->condition_estimate();
    r["iterate"] = w->iterate();
  } else if (const auto* p = dynamic_cast<const SingularMatrix*>(&e)) {
    r["error"] = "singular_matrix";
    r["pivot"] = p->pivot();
  } else if (const auto* c = dynamic_cast<const ConvergenceFailure*>(&e)) {
    r["error"] = "convergence_failure";
    r["iterations"] = c->iterations();
  } else {
    r["error"] = "numerical_error";
  }
  return r;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> commands{"solve", "deriv-check", "tcc", "certify", "invert", "oracle-suite"};
  CLI::App app{"Variational parameter identification experiments"};
  std::string command, config_path, out_dir = "varid_out";
  std::optional<std::uint64_t> seed_flag;
  int threads = 1;
  app.add_option("command", command, "solve | deriv-check | tcc | certify | invert | oracle-suite")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "artifact directory");
  app.add_option("--seed", seed_flag, "overrides the config seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kConfigError;
  }

  Setup s;
  s.command = command;
  s.threads = threads;
  s.out = out_dir;
  s.base = fs::path(config_path).parent_path();
  try {
    std::ifstream is(config_path);
    if (!is) throw ConfigError("cannot read " + config_path);
    s.cfg = json::parse(is);
    if (!s.cfg.is_object()) throw ConfigError("config root must be an object");
    const std::set<std::string> physics{"mesh", "k0", "incident_dir", "parameter", "policy", "seed"};
    std::set<std::string> allowed{"policy", "seed"};
    if (command != "oracle-suite") allowed = physics;
    if (command == "deriv-check") allowed.insert("deriv_check");
    if (command == "tcc") allowed.insert("tcc");
    if (command == "invert") allowed.insert("invert");
    if (command == "oracle-suite") allowed.insert("oracle_suite");
    check_keys(s.cfg, "config", allowed);
    if (const json* sd = find(s.cfg, "seed"); sd && !sd->is_number_unsigned())
      throw ConfigError("seed: expected a non-negative integer");
    if (seed_flag) s.cfg["seed"] = *seed_flag;
    s.seed = s.cfg.value("seed", std::uint64_t{0});
    if (!s.cfg.contains("seed")) s.cfg["seed"] = s.seed;
    s.policy = parse_policy(s.cfg);
    s.hash = config_hash(command, s.cfg);
    fs::create_directories(s.out);
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (command == "solve") return cmd_solve(s, out);
    if (command == "deriv-check") return cmd_deriv_check(s, out);
    if (command == "tcc") return cmd_tcc(s, out);
    if (command == "certify") return cmd_certify(s, out);
    if (command == "invert") return cmd_invert(s, out);
    return cmd_oracle_suite(s, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    try {
      write_json(s, "failure.json", failure_record(e));
    } catch (const std::exception&) {
    }
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace varid::cli
