#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "expanse/maps.hpp"
#include "expanse/measures.hpp"

namespace expanse::cli {

using ordered_json = nlohmann::ordered_json;

enum class Operation {
  ExponentMap,
  ExponentMeasure,
  Capacity,
  Entropy,
  BlockEntropy,
  VerifyA,
  VerifyB,
  VerifyC,
  VerifyLaws,
  ContractionChain,
};

std::string operation_name(Operation op);
Operation parse_operation(const std::string& name);

struct CloudSpec {
  enum class Kind { Grid, UniformIid, AllWords, Cantor, Csv };
  Kind kind = Kind::Grid;
  std::int64_t n = 0;
  std::int32_t depth = 0;
  std::string path;
};

struct MeasureSpec {
  enum class Kind { Uniform, Dirac, Bernoulli, Combine, Csv };
  std::string name;
  Kind kind = Kind::Uniform;
  std::int32_t index = 0;                            // dirac
  double p = 0.5;                                    // bernoulli
  std::vector<std::pair<double, std::string>> terms; // combine: (t, measure name)
  std::string path;                                  // csv
};

struct GridSpec {
  std::vector<double> epsilon;     // empty = estimator default
  std::vector<double> beta;
  std::vector<double> delta_grid;
  double delta = 0.02;
  std::vector<double> gamma;
  std::int32_t n_from = 2, n_to = 6;
  std::int32_t n_max = 16;
  std::int32_t x_sample_count = 32;
};

struct Tolerances {
  double theorem = 0.1;       // theorem C slack, nats
  double witness_gap = 0.02;  // theorem A attainment
  double floor_factor = 4.0;  // epsilon floor = factor * resolution
  double rate_slack = 0.1;    // theorem B decay-rate slack
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  SpaceModel space;
  ordered_json map_spec;  // parsed against the built cloud (lookup tables)
  CloudSpec cloud;
  std::vector<MeasureSpec> measures;
  Operation operation = Operation::ExponentMap;
  GridSpec grids;
  Tolerances tolerances;
  bool assume_invariant = false;
  std::string measure_name;  // verify-B/C, contraction-chain; empty = first
  std::string mu_name, nu_name;
  double t_combine = 0.5;
  std::string output_prefix;           // empty = name
  std::filesystem::path base_dir;      // resolves relative csv paths

  static ExperimentConfig from_json(const ordered_json& j, std::filesystem::path base_dir);
  static ExperimentConfig from_file(const std::filesystem::path& file);
};

struct BuiltExperiment {
  CloudPtr cloud;
  std::optional<MapModel> map;
  std::vector<std::pair<std::string, AtomicMeasure>> measures;

  const AtomicMeasure& measure_named(const std::string& name) const;
};

// Materializes cloud, map and measures. Throws config_error on semantic
// problems (bad references, mismatched spaces).
BuiltExperiment build_experiment(const ExperimentConfig& config);

// Full validation: builds the experiment and checks every grid against the
// operation's preconditions without running estimators. config_error for
// structural problems, precondition_error for grid/floor violations.
void validate_config(const ExperimentConfig& config);

}  // namespace expanse::cli
