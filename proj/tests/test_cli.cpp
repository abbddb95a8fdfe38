#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "expanse/numeric.hpp"
#include "expanse/runner.hpp"

using namespace expanse;
using namespace expanse::cli;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("expanse_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config_from_string(const std::string& text, const fs::path& base) {
  return ExperimentConfig::from_json(ordered_json::parse(text), base);
}

}  // namespace

TEST_CASE("exponent-map run writes profile and summary") {
  const fs::path dir = fresh_dir("expmap");
  const auto config = config_from_string(R"({
    "name": "dbl",
    "seed": 3,
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 512},
    "operation": "exponent-map"
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  REQUIRE(result.files.size() == 2);
  const auto summary = ordered_json::parse(slurp(dir / "dbl_summary.json"));
  CHECK(summary["estimate"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("epsilon grid below the floor exits with code 3 semantics") {
  const fs::path dir = fresh_dir("floor");
  const auto config = config_from_string(R"({
    "name": "bad",
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 64},
    "operation": "exponent-map",
    "grids": {"epsilon": [0.001, 0.01]}
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  bool threw = false;
  try {
    run(config, opts);
  } catch (const precondition_error& e) {
    threw = true;
    CHECK(std::string(e.what()).find("floor") != std::string::npos);
    CHECK(exit_code_for_exception(e) == kExitPreconditionError);
  }
  CHECK(threw);
}

TEST_CASE("unknown variants are configuration errors") {
  const fs::path dir = fresh_dir("badvariant");
  CHECK_THROWS_AS(config_from_string(R"({
    "name": "bad",
    "space": {"variant": "moebius"},
    "cloud": {"generator": "grid", "n": 64},
    "operation": "exponent-map"
  })",
                                     dir),
                  config_error);
  try {
    config_from_string(R"({"name":"x","space":{"variant":"circle"},
      "cloud":{"generator":"grid","n":64},"operation":"fly"})",
                       dir);
  } catch (const config_error& e) {
    CHECK(exit_code_for_exception(e) == kExitConfigError);
  }
}

TEST_CASE("verify-B on a rotation reports not-applicable with exit 0") {
  const fs::path dir = fresh_dir("vbrot");
  const auto config = config_from_string(R"({
    "name": "rotB",
    "seed": 5,
    "space": {"variant": "circle"},
    "map": {"variant": "rotation", "alpha": 0.25},
    "cloud": {"generator": "grid", "n": 256},
    "measures": [{"name": "u", "generator": "uniform"}],
    "operation": "verify-B",
    "grids": {"n_max": 8, "x_sample_count": 4}
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  const auto report = ordered_json::parse(slurp(dir / "rotB_report.json"));
  CHECK(report["verdict"] == "not-applicable");
}

TEST_CASE("verify-C through the config layer") {
  const fs::path dir = fresh_dir("vcsmall");
  const auto config = config_from_string(R"({
    "name": "vc",
    "seed": 11,
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 2048},
    "measures": [{"name": "lebesgue", "generator": "uniform"}],
    "operation": "verify-C",
    "grids": {
      "beta": {"start": 0.0625, "ratio": 0.5, "count": 5},
      "delta_grid": [0.05, 0.01],
      "gamma": [0.2, 0.1, 0.05],
      "delta": 0.02,
      "n": {"from": 2, "to": 5}
    },
    "assume_invariant": true
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  const auto report = ordered_json::parse(slurp(dir / "vc_report.json"));
  CHECK(report["verdict"] == "pass");
  CHECK(report["margin"].get<double>() >= 0.0);
  CHECK(fs::exists(dir / "vc_capacity.csv"));
  CHECK(fs::exists(dir / "vc_entropy.csv"));
  CHECK(fs::exists(dir / "vc_profile.csv"));
}

TEST_CASE("runs are byte-identical under the same seed") {
  const std::string text = R"({
    "name": "det",
    "seed": 99,
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 1024},
    "measures": [{"name": "u", "generator": "uniform"}],
    "operation": "verify-B",
    "grids": {"n_max": 12, "x_sample_count": 6},
    "assume_invariant": true
  })";
  const fs::path dir_a = fresh_dir("det_a");
  const fs::path dir_b = fresh_dir("det_b");
  RunOptions opts_a;
  opts_a.out_dir = dir_a;
  RunOptions opts_b;
  opts_b.out_dir = dir_b;
  const RunResult a = run(config_from_string(text, dir_a), opts_a);
  const RunResult b = run(config_from_string(text, dir_b), opts_b);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i)
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
}

TEST_CASE("verify-laws over the config layer") {
  const fs::path dir = fresh_dir("laws");
  const auto config = config_from_string(R"({
    "name": "laws",
    "space": {"variant": "circle"},
    "map": {"variant": "rotation", "alpha": 0.25},
    "cloud": {"generator": "grid", "n": 256},
    "measures": [
      {"name": "u", "generator": "uniform"},
      {"name": "d0", "generator": "dirac", "index": 0},
      {"name": "mix", "generator": "combine",
       "terms": [{"t": 0.5, "of": "u"}, {"t": 0.5, "of": "d0"}]}
    ],
    "operation": "verify-laws",
    "mu": "d0",
    "nu": "u",
    "t": 0.25
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  const auto report = ordered_json::parse(slurp(dir / "laws_report.json"));
  REQUIRE(report.contains("reports"));
  CHECK(report["reports"].size() == 4);
  for (const auto& r : report["reports"]) CHECK(r["verdict"] != "fail");
}

TEST_CASE("contraction-chain through the config layer") {
  const fs::path dir = fresh_dir("chain");
  const auto config = config_from_string(R"({
    "name": "chain",
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 1024},
    "measures": [{"name": "u", "generator": "uniform"}],
    "operation": "contraction-chain",
    "grids": {"gamma": [0.1], "n": {"from": 2, "to": 5}}
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  const auto report = ordered_json::parse(slurp(dir / "chain_report.json"));
  CHECK(report["verdict"] == "pass");
  CHECK(report["computed"]["violations"].get<std::int64_t>() == 0);
}

TEST_CASE("batch sweeps tent slopes on a single-branch sample") {
  const fs::path dir = fresh_dir("batch");
  // a cloud clear of the fold keeps every pair on one branch
  {
    std::ofstream csv(dir / "branch.csv");
    csv << "x0,weight\n";
    for (int k = 0; k <= 40; ++k) csv << (0.01 * k) << ",1\n";
  }
  std::vector<ExperimentConfig> configs;
  for (double slope : {1.2, 1.5, 2.0}) {
    ordered_json j;
    j["name"] = "tent-" + std::to_string(slope);
    j["space"] = {{"variant", "interval"}};
    j["map"] = {{"variant", "tent"}, {"slope", slope}};
    j["cloud"] = {{"generator", "csv"}, {"path", "branch.csv"}};
    j["operation"] = "exponent-map";
    configs.push_back(ExperimentConfig::from_json(j, dir));
  }
  const fs::path summary_path = batch(configs, dir / "out");
  const std::string summary = slurp(summary_path);
  // one header plus one row per config
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
  for (double slope : {1.2, 1.5, 2.0}) {
    const std::string key = "E=" + format_real(std::log(slope));
    CHECK(summary.find(key.substr(0, key.size() - 6)) != std::string::npos);
  }
  CHECK(summary.find("error") != std::string::npos);  // header column
}

TEST_CASE("remaining map variants and csv measures build from configs") {
  const fs::path dir = fresh_dir("variants");
  {
    std::ofstream csv(dir / "mu.csv");
    csv << "x0,weight\n0,0.25\n0.25,0.25\n0.5,0.5\n";
  }
  // piecewise_linear spelled with slopes + start (tent of slope 1.5)
  const auto pwl = config_from_string(R"({
    "name": "pwl",
    "space": {"variant": "interval"},
    "map": {"variant": "piecewise_linear", "breakpoints": [0.0, 0.5, 1.0],
            "slopes": [1.5, -1.5], "start": 0.0},
    "cloud": {"generator": "grid", "n": 256},
    "operation": "exponent-map"
  })",
                                      dir);
  RunOptions opts;
  opts.out_dir = dir;
  CHECK(run(pwl, opts).exit_code == kExitOk);

  // constant map with an explicit target, csv measure mapped onto the cloud
  const auto constant = config_from_string(R"({
    "name": "const",
    "space": {"variant": "interval"},
    "map": {"variant": "constant", "target": [0.5]},
    "cloud": {"generator": "grid", "n": 5},
    "measures": [{"name": "m", "generator": "csv", "path": "mu.csv"}],
    "operation": "exponent-measure",
    "grids": {"epsilon": [0.6, 0.9]}
  })",
                                           dir);
  const RunResult result = run(constant, opts);
  CHECK(result.exit_code == kExitOk);
  const auto summary = ordered_json::parse(slurp(dir / "const_summary.json"));
  CHECK(summary["estimates"]["m"] == "-inf");  // constant maps collapse every pair

  // lookup table over the built cloud
  const auto lookup = config_from_string(R"({
    "name": "lut",
    "space": {"variant": "interval"},
    "map": {"variant": "lookup_table", "images": [4, 3, 2, 1, 0]},
    "cloud": {"generator": "grid", "n": 5},
    "operation": "exponent-map",
    "grids": {"epsilon": [0.6, 0.9]}
  })",
                                         dir);
  CHECK(run(lookup, opts).exit_code == kExitOk);

  // a csv measure point missing from the cloud is a config error
  const auto mismatched = config_from_string(R"({
    "name": "mm",
    "space": {"variant": "interval"},
    "map": {"variant": "constant", "target": [0.5]},
    "cloud": {"generator": "grid", "n": 4},
    "measures": [{"name": "m", "generator": "csv", "path": "mu.csv"}],
    "operation": "exponent-measure"
  })",
                                             dir);
  CHECK_THROWS_AS(run(mismatched, opts), config_error);
}

TEST_CASE("validate flags missing pieces before running") {
  const fs::path dir = fresh_dir("validate");
  const auto no_map = config_from_string(R"({
    "name": "nm",
    "space": {"variant": "circle"},
    "cloud": {"generator": "grid", "n": 64},
    "operation": "exponent-map"
  })",
                                         dir);
  CHECK_THROWS_AS(validate_config(no_map), config_error);

  const auto no_gamma = config_from_string(R"({
    "name": "ng",
    "space": {"variant": "circle"},
    "map": {"variant": "times_m", "m": 2},
    "cloud": {"generator": "grid", "n": 512},
    "measures": [{"name": "u", "generator": "uniform"}],
    "operation": "entropy"
  })",
                                           dir);
  CHECK_THROWS_AS(validate_config(no_gamma), precondition_error);

  const auto ok = config_from_string(R"({
    "name": "ok",
    "space": {"variant": "symbol", "alphabet": 2, "length": 8},
    "cloud": {"generator": "all-words"},
    "measures": [{"name": "b", "generator": "bernoulli", "p": 0.25}],
    "operation": "block-entropy",
    "grids": {"n_max": 8}
  })",
                                     dir);
  CHECK_NOTHROW(validate_config(ok));
}

TEST_CASE("real formatting round-trips and keeps the inf literals") {
  for (double v : {0.0, 1.0, 0.1, -0.6931471805599453, 1e-300, 12345.678901234567})
    CHECK(parse_real(format_real(v)) == v);
  CHECK(format_real(kPosInf) == "+inf");
  CHECK(format_real(kNegInf) == "-inf");
  CHECK(parse_real("+inf") == kPosInf);
  CHECK(parse_real("-inf") == kNegInf);
  CHECK(std::isnan(parse_real("nan")));
  CHECK_THROWS(parse_real("not-a-number"));
}

TEST_CASE("extended subtraction cancels equal infinities") {
  CHECK(ext_sub(kNegInf, kNegInf) == 0.0);
  CHECK(ext_sub(kPosInf, kPosInf) == 0.0);
  CHECK(ext_sub(kPosInf, 1.0) == kPosInf);
  CHECK(ext_sub(1.0, kPosInf) == kNegInf);
  CHECK(ext_sub(2.5, 1.0) == 1.5);
}

TEST_CASE("line fit recovers exact lines") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> ys = {1.5, 3.5, 5.5, 7.5};
  const LineFit fit = fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.residual_rms == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(fit_line(std::vector<double>{1.0}, std::vector<double>{2.0}));
}

TEST_CASE("shipped configs stay valid") {
  const fs::path dir = fs::path(EXPANSE_SOURCE_DIR) / "configs";
  REQUIRE(fs::exists(dir));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    if (entry.path().filename() == "suite.json") continue;  // batch list, not a config
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(validate_config(ExperimentConfig::from_file(entry.path())));
    ++seen;
  }
  CHECK(seen >= 8);
}

TEST_CASE("block entropy sweep through the runner") {
  const fs::path dir = fresh_dir("blocks");
  const auto config = config_from_string(R"({
    "name": "bern",
    "space": {"variant": "symbol", "alphabet": 2, "length": 8},
    "cloud": {"generator": "all-words"},
    "measures": [{"name": "b", "generator": "bernoulli", "p": 0.25}],
    "operation": "block-entropy",
    "grids": {"n_max": 8}
  })",
                                         dir);
  RunOptions opts;
  opts.out_dir = dir;
  const RunResult result = run(config, opts);
  CHECK(result.exit_code == kExitOk);
  const auto summary = ordered_json::parse(slurp(dir / "bern_summary.json"));
  const double closed_form = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));
  CHECK(summary["block_entropy"]["b"]["limit_estimate"].get<double>() ==
        doctest::Approx(closed_form).epsilon(1e-9));
}
