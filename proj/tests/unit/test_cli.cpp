#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "varid/assembly.hpp"
#include "varid/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("varid_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << cfg.dump();
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "varid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return varid::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

const json kSmall1d = {{"mesh", {{"type", "interval"}, {"elements", 32}}}, {"k0", 2.0}};

// Same structure, numbers equal to a relative 1e-12.
void check_close(const json& a, const json& b, const std::string& path = "") {
  INFO(path);
  REQUIRE(a.type() == b.type());
  if (a.is_object()) {
    REQUIRE(a.size() == b.size());
    for (auto it = a.begin(); it != a.end(); ++it) {
      REQUIRE(b.contains(it.key()));
      check_close(*it, b[it.key()], path + "." + it.key());
    }
  } else if (a.is_array()) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) check_close(a[i], b[i], path + "[" + std::to_string(i) + "]");
  } else if (a.is_number_float()) {
    const double x = a.get<double>(), y = b.get<double>();
    CHECK(std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)));
  } else {
    CHECK(a == b);
  }
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("solve with zero contrast writes a zero scattered field") {
    const auto dir = scratch("solve");
    const auto cfg = write_config(dir, kSmall1d);
    REQUIRE(run({"solve", "--config", cfg.string(), "--out", (dir / "out").string()}) == 0);
    const auto mesh = varid::build_interval_mesh(0.0, 1.0, 32);
    std::ifstream is(dir / "out" / "scattered.csv");
    const varid::Vector u = varid::read_field_csv(is, mesh);
    CHECK(u.norm() == 0.0);
    const json d = load(dir / "out" / "diagnostics.json");
    CHECK(d["pass"] == true);
    CHECK(d["config_hash"].get<std::string>().size() == 64);
    CHECK(slurp(dir / "out" / "total.csv").rfind("# config_hash: " + d["config_hash"].get<std::string>(), 0) == 0);
  }

  TEST_CASE("certify on the coercive split reports c_t = 1") {
    const auto dir = scratch("certify");
    json c = kSmall1d;
    c["parameter"] = {{"kind", "bump"}, {"amplitude", 0.1}, {"center", {0.5}}, {"width", 0.1}};
    const auto cfg = write_config(dir, c);
    REQUIRE(run({"certify", "--config", cfg.string(), "--out", dir.string()}) == 0);
    const json r = load(dir / "certificate.json");
    CHECK(std::abs(r["c_t"].get<double>() - 1.0) <= 1e-8);
    CHECK(std::abs(r["gamma"].get<double>() - 1.0) <= 1e-8);
    CHECK(r["inf_sup"].get<double>() >= 1.0 - 1e-8);
    CHECK(r["factorization_defect"].get<double>() <= 1e-10);
  }

  TEST_CASE("tcc reproduces the golden report") {
    const auto dir = scratch("tcc");
    const fs::path golden = VARID_GOLDEN_DIR;
    REQUIRE(run({"tcc", "--config", (golden / "tcc_reference.json").string(), "--out", dir.string(), "--threads",
                 "4"}) == 0);
    check_close(load(dir / "tcc_report.json"), load(golden / "tcc_report.json"));
  }

  TEST_CASE("identical config and seed give identical artifacts") {
    const auto dir = scratch("repeat");
    json c = kSmall1d;
    c["parameter"] = {{"kind", "gaussian"}, {"amplitude", 0.05}, {"center", {0.4}}, {"sigma", 0.1}};
    c["deriv_check"] = {{"directions", 1}};
    const auto cfg = write_config(dir, c);
    REQUIRE(run({"deriv-check", "--config", cfg.string(), "--out", (dir / "a").string(), "--seed", "4"}) == 0);
    REQUIRE(run({"deriv-check", "--config", cfg.string(), "--out", (dir / "b").string(), "--seed", "4"}) == 0);
    REQUIRE(run({"deriv-check", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "5"}) == 0);
    CHECK(slurp(dir / "a" / "deriv_check.json") == slurp(dir / "b" / "deriv_check.json"));
    CHECK(load(dir / "a" / "deriv_check.json")["config_hash"] != load(dir / "c" / "deriv_check.json")["config_hash"]);
  }

  TEST_CASE("invert and oracle-suite artifacts") {
    const auto dir = scratch("invert");
    json c = kSmall1d;
    c["parameter"] = {{"kind", "constant"}, {"value", 0.05}};
    c["invert"] = {{"max_iters", 10}, {"observation", {{"kind", "boundary_trace"}}}, {"kappa_check_interval", 5}};
    REQUIRE(run({"invert", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 0);
    CHECK(slurp(dir / "history.csv").find("iter,residual,m_error,kappa_hat") != std::string::npos);
    CHECK(fs::exists(dir / "final_parameter.csv"));
    CHECK(load(dir / "inversion.json")["iterations"] == 10);

    const auto dir2 = scratch("oracle");
    const json o = {{"seed", 3}, {"oracle_suite", {{"instances", 6}, {"max_n", 12}}}};
    REQUIRE(run({"oracle-suite", "--config", write_config(dir2, o).string(), "--out", dir2.string()}) == 0);
    CHECK(load(dir2 / "oracle_suite.json")["instances"].size() == 6);
  }

  TEST_CASE("config errors exit 2") {
    const auto dir = scratch("bad");
    json c = kSmall1d;
    c["unknown"] = 1;
    CHECK(run({"solve", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 2);
    c = kSmall1d;
    c["mesh"]["nx"] = 3;
    CHECK(run({"solve", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 2);
    c = kSmall1d;
    c["tcc"] = {{"radii", {0.1}}};  // section belongs to another command
    CHECK(run({"solve", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 2);
    c = kSmall1d;
    c["parameter"] = {{"kind", "constant"}, {"value", 2.0}};  // outside the ball
    CHECK(run({"solve", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 2);
    c = kSmall1d;
    c["deriv_check"] = {{"epsilons", {1e-3}}, {"extra", true}};
    CHECK(run({"deriv-check", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 2);
    std::ofstream(dir / "broken.json") << "{\"k0\": ";
    CHECK(run({"solve", "--config", (dir / "broken.json").string(), "--out", dir.string()}) == 2);
    CHECK(run({"solve", "--config", (dir / "missing.json").string()}) == 2);
    CHECK(run({"explode", "--config", (dir / "broken.json").string()}) == 2);
  }

  TEST_CASE("numerical failures exit 3 with a failure record") {
    const auto dir = scratch("numerical");
    json c = kSmall1d;
    c["parameter"] = {{"kind", "constant"}, {"value", 0.5}};
    c["policy"] = {{"pivot_tolerance", 0.9}};
    CHECK(run({"solve", "--config", write_config(dir, c).string(), "--out", dir.string()}) == 3);
    const json f = load(dir / "failure.json");
    CHECK(f["error"] == "singular_matrix");
    CHECK(f.contains("config_hash"));
  }
}
