#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "presets.hpp"
#include "thomas.hpp"

using namespace blochlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("blochlab_test_" + tag);
  fs::remove_all(p);
  return p;
}

const char* kThomasFree = R"({
  "experiment": "thomas",
  "lattice": {"d": 2, "N": 6},
  "quasimomentum": {"e": [1.0, 0.0], "beta": 0.5, "rho": [5.0, 10.0, 20.0]},
  "seed": 3,
  "output": {"dir": "PLACEHOLDER"}
})";

}  // namespace

TEST_CASE("config: minimal bands document parses with defaults") {
  ParsedConfig parsed = parse_config(R"({
    "experiment": "bands",
    "lattice": {"d": 1, "N": 8},
    "potential": {"preset": "cos"},
    "k_grid": {"points_per_axis": 33}
  })");
  CHECK(parsed.config.kind == ExperimentKind::bands);
  CHECK(parsed.config.dim == 1);
  CHECK(parsed.config.cutoff == 8);
  CHECK(parsed.config.grid_points == 33);
  CHECK(parsed.config.band_count == 5);
  CHECK(parsed.warnings.empty());
}

TEST_CASE("config: unknown keys are named") {
  try {
    (void)parse_config(R"({
      "experiment": "thomas",
      "lattice": {"d": 1, "N": 4},
      "quasimomentum": {"rho_lost": [1.0]}
    })");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == errc::config);
    CHECK(std::string(e.what()).find("quasimomentum.rho_lost") != std::string::npos);
  }
}

TEST_CASE("config: validation failures") {
  CHECK_THROWS_AS((void)parse_config(R"({"experiment": "nope", "lattice": {"d": 1, "N": 2}})"), Error);
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"experiment": "cover", "lattice": {"d": 2, "N": 4}, "cover": {"delta": 1.5}})"),
      Error);
  CHECK_THROWS_AS(
      (void)parse_config(
          R"({"experiment": "thomas", "lattice": {"d": 2, "N": 4}, "quasimomentum": {"e": [1.0, 1.0]}})"),
      Error);
  CHECK_THROWS_AS((void)parse_config("not json at all"), Error);
  CHECK_THROWS_AS((void)parse_config(R"({"lattice": {"d": 1, "N": 2}})"), Error);
}

TEST_CASE("config: low declared smoothness warns") {
  ParsedConfig parsed = parse_config(R"({
    "experiment": "thomas",
    "lattice": {"d": 2, "N": 4},
    "vector_potential": {"preset": "single-mode-A", "smoothness": 1.0},
    "quasimomentum": {"rho": [5.0]}
  })");
  REQUIRE(parsed.warnings.size() == 1);
  CHECK(parsed.warnings[0].find("3d/2-1") != std::string::npos);
}

TEST_CASE("config: echo round trip") {
  ParsedConfig parsed = parse_config(kThomasFree);
  nlohmann::json echo = config_echo(parsed.config);
  ParsedConfig reparsed = parse_config(echo.dump());
  CHECK(config_echo(reparsed.config) == echo);
}

TEST_CASE("presets") {
  Lattice lat1(1, 4);
  PeriodicField c = preset_field("cos", nlohmann::json{{"amp", 1.0}}, lat1, FieldRank::scalar, 0);
  CHECK(c.coeff_at(0, std::vector<int>{1}) == cplx(0.5, 0));
  CHECK(c.coeff_at(0, std::vector<int>{-1}) == cplx(0.5, 0));

  PeriodicField m = preset_field("mathieu", nlohmann::json{{"c", 1.0}}, lat1, FieldRank::scalar, 0);
  CHECK(m.coeff_at(0, std::vector<int>{1}) == cplx(1, 0));
  CHECK(m.coeff_at(0, std::vector<int>{-1}) == cplx(1, 0));

  Lattice lat2(2, 4);
  PeriodicField g1 = preset_field("gauss-decay", nlohmann::json{{"w", 2.0}}, lat2, FieldRank::scalar, 7);
  PeriodicField g2 = preset_field("gauss-decay", nlohmann::json{{"w", 2.0}}, lat2, FieldRank::scalar, 7);
  for (long long i = 0; i < lat2.size(); ++i) CHECK(g1.coeff(0, i) == g2.coeff(0, i));
  CHECK(g1.real_flagged());
  CHECK_FALSE(g1.is_zero());

  PeriodicField a = preset_field("single-mode-A", nlohmann::json{{"amp", 0.3}}, lat2, FieldRank::vector, 0);
  CHECK(a.coeff_at(1, std::vector<int>{1, 0}) == cplx(0.15, 0));
  CHECK(a.coeff_at(0, std::vector<int>{1, 0}) == cplx(0, 0));  // transverse default

  CHECK_THROWS_AS((void)preset_field("wombat", {}, lat1, FieldRank::scalar, 0), Error);
  CHECK_THROWS_AS((void)preset_field("cos", nlohmann::json{{"ampp", 1.0}}, lat1, FieldRank::scalar, 0),
                  Error);
}

TEST_CASE("float formatting round-trips doubles") {
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(std::stod(format_double(kPi)) == kPi);
}

TEST_CASE("run: free thomas scan CSV matches the diagonal oracle") {
  fs::path dir = temp_dir("thomas");
  std::string text(kThomasFree);
  text.replace(text.find("PLACEHOLDER"), 11, dir.string());
  RunManifest manifest = run_config_text(text);
  CHECK(fs::exists(dir / "scan.csv"));
  CHECK(fs::exists(dir / "manifest.json"));

  // independent check of the emitted sigma column
  std::istringstream csv(slurp(dir / "scan.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "rho,sigma_min_H,sigma_min_precond,fitted_C,T_rho_norm");
  Lattice lat(2, 6);
  Eigen::Vector2d e(1, 0);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 5);
    const double rho = std::stod(fields[0]);
    const double sh = std::stod(fields[1]);
    Quasimomentum q(e, 0.5, rho);
    AssembledOperator op = assemble(nullptr, nullptr, q, lat, false);
    CHECK(sh == doctest::Approx(sigma_min(op.matrix).value).epsilon(1e-9));
    CHECK(fields[4] == "nan");  // no parametrix stage in the thomas experiment
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(manifest.outputs.size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("run: rerunning an emitted manifest reproduces the bytes") {
  fs::path dir_a = temp_dir("rerun_a"), dir_b = temp_dir("rerun_b");
  std::string text(kThomasFree);
  text.replace(text.find("PLACEHOLDER"), 11, dir_a.string());
  RunManifest first = run_config_text(text);
  RunManifest second = run_manifest_file(first.manifest_path, {.out_dir = dir_b.string()});
  CHECK(slurp(dir_a / "scan.csv") == slurp(dir_b / "scan.csv"));
  CHECK(slurp(dir_a / "scan.json") == slurp(dir_b / "scan.json"));
  CHECK(first.outputs.size() == second.outputs.size());
  for (std::size_t i = 0; i < first.outputs.size(); ++i)
    CHECK(first.outputs[i].checksum == second.outputs[i].checksum);
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("run: obstructed gauge is a result, not a failure") {
  fs::path dir = temp_dir("gauge_obstructed");
  std::ostringstream cfg;
  cfg << R"({
    "experiment": "gauge",
    "lattice": {"d": 2, "N": 6},
    "gauge_input": {"literal": "field rank=scalar real=0 meanzero=0\n0 0 0.25 0.0\n"},
    "output": {"dir": ")"
      << dir.string() << R"("}
  })";
  RunManifest manifest = run_config_text(cfg.str());
  (void)manifest;
  nlohmann::json report = nlohmann::json::parse(slurp(dir / "gauge.json"));
  CHECK(report["verdict"] == "obstructed");
  CHECK(report["obstruction"][0][0][0] == 0.25);
  fs::remove_all(dir);
}

TEST_CASE("run: bands experiment emits one row per (k, n)") {
  fs::path dir = temp_dir("bands");
  std::ostringstream cfg;
  cfg << R"({
    "experiment": "bands",
    "lattice": {"d": 1, "N": 8},
    "potential": {"preset": "mathieu"},
    "k_grid": {"points_per_axis": 9},
    "bands": 3,
    "output": {"dir": ")"
      << dir.string() << R"("}
  })";
  run_config_text(cfg.str());
  std::istringstream csv(slurp(dir / "bands.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "k_1,band,lambda");
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 9 * 3);
  CHECK(fs::exists(dir / "flatband.json"));
  fs::remove_all(dir);
}

TEST_CASE("run: kind guard rejects mismatched subcommands") {
  std::string text(kThomasFree);
  text.replace(text.find("PLACEHOLDER"), 11, temp_dir("guard").string());
  CHECK_THROWS_AS((void)run_config_text(text, {.expected_kind = "bands"}), Error);
}

TEST_CASE("run: seed override changes the echo, not the determinism") {
  fs::path dir_a = temp_dir("seed_a"), dir_b = temp_dir("seed_b");
  std::ostringstream cfg;
  cfg << R"({
    "experiment": "gauge",
    "lattice": {"d": 2, "N": 8},
    "gauge_input": {"preset": "gauss-decay", "params": {"w": 2.0, "amp": 0.05}},
    "output": {"dir": ")"
      << dir_a.string() << R"("}
  })";
  RunManifest a = run_config_text(cfg.str(), {.seed = 9});
  CHECK(a.seed == 9);
  RunManifest b = run_manifest_file(a.manifest_path, {.out_dir = dir_b.string()});
  CHECK(b.seed == 9);
  CHECK(slurp(dir_a / "gauge.json") == slurp(dir_b / "gauge.json"));
  CHECK(slurp(dir_a / "f.field") == slurp(dir_b / "f.field"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("run: golden scan file stays byte-stable") {
  fs::path dir = temp_dir("golden");
  std::ifstream cfg_in(fs::path(BLOCHLAB_TEST_DATA) / "thomas_free.json");
  REQUIRE(cfg_in.good());
  std::ostringstream cfg;
  cfg << cfg_in.rdbuf();
  run_config_text(cfg.str(), {.out_dir = dir.string()});

  const std::string emitted = slurp(dir / "scan.csv");
  const std::string golden = slurp(fs::path(BLOCHLAB_TEST_DATA) / "golden_thomas_free.csv");
  CHECK(emitted == golden);

  // the frozen values themselves stay pinned to the diagonal oracle
  Lattice lat(2, 8);
  Eigen::Vector2d e(1, 0);
  std::istringstream csv(emitted);
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    const double rho = std::stod(line.substr(0, comma));
    const double sh = std::stod(line.substr(comma + 1));
    Quasimomentum q(e, 0.5, rho);
    AssembledOperator op = assemble(nullptr, nullptr, q, lat, false);
    CHECK(sh == doctest::Approx(sigma_min(op.matrix).value).epsilon(1e-12));
  }
  fs::remove_all(dir);
}

TEST_CASE("quasimomentum derives k deterministically") {
  Quasimomentum q(Eigen::Vector2d(0.6, 0.8), 0.25, 3.5);
  Eigen::VectorXcd k1 = q.k(), k2 = q.k();
  for (int j = 0; j < 2; ++j) {
    CHECK(k1(j) == k2(j));
    CHECK(k1(j) == kTwoPi * cplx(0.25, 3.5) * (j == 0 ? 0.6 : 0.8));
  }
  CHECK_THROWS_AS(Quasimomentum(Eigen::Vector2d(1.0, 0.5), 0.0, 1.0), Error);
  CHECK_THROWS_AS(Quasimomentum(Eigen::Vector2d(1.0, 0.0), 0.0, -1.0), Error);
}
