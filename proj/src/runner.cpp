#include "expanse/runner.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>

#include "expanse/capacity.hpp"
#include "expanse/entropy.hpp"
#include "expanse/exponents.hpp"
#include "expanse/numeric.hpp"
#include "expanse/parallel.hpp"
#include "expanse/verify.hpp"

namespace expanse::cli {

namespace {

struct Emitter {
  std::filesystem::path dir;
  std::string prefix;
  std::vector<std::filesystem::path> files;

  std::filesystem::path path_for(const std::string& suffix) const {
    return dir / (prefix + "_" + suffix);
  }
  void write_text(const std::string& suffix, const std::string& body) {
    const auto p = path_for(suffix);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw structural_error("cannot write " + p.string());
    out << body;
    files.push_back(p);
  }
  void write_json(const std::string& suffix, const ordered_json& j) {
    write_text(suffix, j.dump(2) + "\n");
  }
};

ordered_json base_summary(const ExperimentConfig& config, const BuiltExperiment& built) {
  ordered_json j;
  j["name"] = config.name;
  j["operation"] = operation_name(config.operation);
  j["seed"] = config.seed;
  j["space"] = config.space.describe();
  if (built.map) j["map"] = built.map->describe();
  j["cloud_size"] = built.cloud->size();
  j["resolution"] = json_real(built.cloud->resolution);
  return j;
}

std::vector<double> epsilon_grid_for(const ExperimentConfig& config, const PointCloud& cloud) {
  if (!config.grids.epsilon.empty()) return config.grids.epsilon;
  ProfileOptions opts;
  opts.floor_factor = config.tolerances.floor_factor;
  return default_epsilon_grid(cloud, opts);
}

ordered_json capacity_json(const CapacityReport& report) {
  ordered_json j;
  j["estimate"] = json_real(report.estimate);
  ordered_json fits = ordered_json::array();
  for (const DeltaFit& f : report.fits) {
    ordered_json row;
    row["delta"] = json_real(f.delta);
    row["slope"] = json_real(f.fit.slope);
    row["intercept"] = json_real(f.fit.intercept);
    row["residual_rms"] = json_real(f.fit.residual_rms);
    fits.push_back(row);
  }
  j["fits"] = fits;
  j["scale_floor"] = json_real(report.scale_floor);
  j["caveats"] = report.caveats;
  return j;
}

ordered_json entropy_json(const EntropyReport& report) {
  ordered_json j;
  j["estimate"] = json_real(report.estimate);
  j["delta"] = json_real(report.delta);
  ordered_json fits = ordered_json::array();
  for (const GammaFit& f : report.fits) {
    ordered_json row;
    row["gamma"] = json_real(f.gamma);
    row["fitted"] = f.fitted;
    if (f.fitted) {
      row["slope"] = json_real(f.fit.slope);
      row["residual_rms"] = json_real(f.fit.residual_rms);
      row["window"] = ordered_json::array({f.window_lo, f.window_hi});
    }
    fits.push_back(row);
  }
  j["fits"] = fits;
  j["plateau"] = report.plateau;
  j["scale_floor"] = json_real(report.scale_floor);
  j["caveats"] = report.caveats;
  return j;
}

std::string join_estimates(const std::vector<std::pair<std::string, double>>& kv) {
  std::string s;
  for (const auto& [name, v] : kv) {
    if (!s.empty()) s += "|";
    s += name + "=" + format_real(v);
  }
  return s;
}

int exit_for_reports(std::span<const TheoremReport> reports) {
  for (const TheoremReport& r : reports)
    if (r.verdict == Verdict::Fail) return kExitTheoremFailure;
  return kExitOk;
}

ProfileOptions profile_options(const ExperimentConfig& config) {
  ProfileOptions opts;
  opts.floor_factor = config.tolerances.floor_factor;
  return opts;
}

RunResult run_exponent_map(const ExperimentConfig& config, const BuiltExperiment& built,
                           Emitter& emit) {
  const auto grid = epsilon_grid_for(config, *built.cloud);
  const EpsilonProfile profile =
      map_expansion_profile(*built.map, *built.cloud, grid, profile_options(config));
  std::ostringstream csv;
  write_profile_csv(csv, profile);
  emit.write_text("profile.csv", csv.str());

  ordered_json summary = base_summary(config, built);
  summary["resolution_floor"] = json_real(profile.resolution_floor);
  summary["estimate"] = json_real(profile.scalar_estimate());
  emit.write_json("summary.json", summary);

  RunResult result;
  result.key_estimates = join_estimates({{"E", profile.scalar_estimate()}});
  result.verdict = "completed";
  return result;
}

RunResult run_exponent_measure(const ExperimentConfig& config, const BuiltExperiment& built,
                               Emitter& emit) {
  const auto grid = epsilon_grid_for(config, *built.cloud);
  ordered_json summary = base_summary(config, built);
  ordered_json estimates = ordered_json::object();
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& [name, mu] : built.measures) {
    const EpsilonProfile profile =
        measure_expansion_profile(*built.map, *built.cloud, mu, grid, profile_options(config));
    std::ostringstream csv;
    write_profile_csv(csv, profile);
    emit.write_text(name + "_profile.csv", csv.str());
    estimates[name] = json_real(profile.scalar_estimate());
    kv.emplace_back(name, profile.scalar_estimate());
  }
  summary["estimates"] = estimates;
  emit.write_json("summary.json", summary);

  RunResult result;
  result.key_estimates = join_estimates(kv);
  result.verdict = "completed";
  return result;
}

RunResult run_capacity(const ExperimentConfig& config, const BuiltExperiment& built,
                       Emitter& emit) {
  ordered_json summary = base_summary(config, built);
  ordered_json per_measure = ordered_json::object();
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& [name, mu] : built.measures) {
    const CapacityReport report =
        capacity_estimate(*built.cloud, mu, config.grids.beta, config.grids.delta_grid);
    std::ostringstream csv;
    write_capacity_csv(csv, report);
    emit.write_text(name + "_capacity.csv", csv.str());
    per_measure[name] = capacity_json(report);
    kv.emplace_back(name, report.estimate);
  }
  summary["capacity"] = per_measure;
  emit.write_json("summary.json", summary);

  RunResult result;
  result.key_estimates = join_estimates(kv);
  result.verdict = "completed";
  return result;
}

RunResult run_entropy(const ExperimentConfig& config, const BuiltExperiment& built,
                      Emitter& emit) {
  ordered_json summary = base_summary(config, built);
  ordered_json per_measure = ordered_json::object();
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& [name, mu] : built.measures) {
    const EntropyReport report =
        katok_entropy_estimate(*built.map, *built.cloud, mu, config.grids.n_from,
                               config.grids.n_to, config.grids.gamma, config.grids.delta);
    std::ostringstream csv;
    write_entropy_csv(csv, report);
    emit.write_text(name + "_entropy.csv", csv.str());
    per_measure[name] = entropy_json(report);
    kv.emplace_back(name, report.estimate);
  }
  summary["entropy"] = per_measure;
  emit.write_json("summary.json", summary);

  RunResult result;
  result.key_estimates = join_estimates(kv);
  result.verdict = "completed";
  return result;
}

RunResult run_block_entropy(const ExperimentConfig& config, const BuiltExperiment& built,
                            Emitter& emit) {
  ordered_json summary = base_summary(config, built);
  ordered_json per_measure = ordered_json::object();
  std::vector<std::pair<std::string, double>> kv;
  for (const auto& [name, mu] : built.measures) {
    const BlockEntropyReport report =
        block_entropy_sweep(*built.cloud, mu, config.grids.n_max);
    std::ostringstream csv;
    write_block_entropy_csv(csv, report);
    emit.write_text(name + "_block_entropy.csv", csv.str());
    ordered_json row;
    row["limit_estimate"] = json_real(report.limit_estimate);
    row["last_decrement"] = json_real(report.last_decrement);
    per_measure[name] = row;
    kv.emplace_back(name, report.limit_estimate);
  }
  summary["block_entropy"] = per_measure;
  emit.write_json("summary.json", summary);

  RunResult result;
  result.key_estimates = join_estimates(kv);
  result.verdict = "completed";
  return result;
}

RunResult finish_verify(const ExperimentConfig& config, const BuiltExperiment& built,
                        Emitter& emit, std::vector<TheoremReport> reports,
                        std::vector<std::pair<std::string, double>> kv) {
  ordered_json report_json;
  if (reports.size() == 1) {
    report_json = reports[0].to_json();
  } else {
    ordered_json arr = ordered_json::array();
    for (const TheoremReport& r : reports) arr.push_back(r.to_json());
    report_json["reports"] = arr;
  }
  emit.write_json("report.json", report_json);

  ordered_json summary = base_summary(config, built);
  ordered_json verdicts = ordered_json::array();
  double min_margin = kPosInf;
  for (const TheoremReport& r : reports) {
    ordered_json row;
    row["theorem"] = r.theorem;
    row["verdict"] = verdict_name(r.verdict);
    row["margin"] = json_real(r.margin);
    verdicts.push_back(row);
    min_margin = std::min(min_margin, r.margin);
  }
  summary["verdicts"] = verdicts;
  emit.write_json("summary.json", summary);

  RunResult result;
  result.exit_code = exit_for_reports(reports);
  result.key_estimates = join_estimates(kv);
  result.margin = format_real(min_margin);
  result.verdict = reports.size() == 1 ? verdict_name(reports[0].verdict)
                                       : (result.exit_code == kExitOk ? "pass" : "fail");
  return result;
}

RunResult run_verify_a(const ExperimentConfig& config, const BuiltExperiment& built,
                       Emitter& emit) {
  const auto grid = epsilon_grid_for(config, *built.cloud);
  std::vector<AtomicMeasure> family;
  for (const auto& [name, mu] : built.measures) family.push_back(mu);
  TheoremAOptions opts;
  opts.gap_tolerance = config.tolerances.witness_gap;
  opts.profile = profile_options(config);
  TheoremReport report = check_theorem_A(*built.map, built.cloud, family, grid, opts);
  const double gap = report.computed.contains("gap") && report.computed["gap"].is_number()
                         ? report.computed["gap"].get<double>()
                         : 0.0;
  return finish_verify(config, built, emit, {std::move(report)}, {{"gap", gap}});
}

RunResult run_verify_b(const ExperimentConfig& config, const BuiltExperiment& built,
                       Emitter& emit) {
  const AtomicMeasure& mu = built.measure_named(config.measure_name);
  TheoremBOptions opts;
  opts.eps_grid = config.grids.epsilon;
  opts.n_max = config.grids.n_max;
  opts.x_sample_count = config.grids.x_sample_count;
  opts.rate_slack = config.tolerances.rate_slack;
  opts.assume_invariant = config.assume_invariant;
  opts.profile = profile_options(config);
  TheoremBResult result = check_theorem_B(*built.map, built.cloud, mu, config.seed, opts);

  std::ostringstream csv;
  csv << "center_index,n,mass\n";
  for (const PhiMassCurve& curve : result.curves)
    for (std::size_t t = 0; t < curve.masses.size(); ++t)
      csv << curve.center_index << "," << (t + 1) << "," << format_real(curve.masses[t]) << "\n";
  emit.write_text("phi_curves.csv", csv.str());

  return finish_verify(config, built, emit, {std::move(result.report)}, {});
}

RunResult run_verify_c(const ExperimentConfig& config, const BuiltExperiment& built,
                       Emitter& emit) {
  const AtomicMeasure& mu = built.measure_named(config.measure_name);
  TheoremCOptions opts;
  opts.eps_grid = config.grids.epsilon;
  opts.beta_grid = config.grids.beta;
  opts.delta_grid = config.grids.delta_grid;
  opts.gamma_grid = config.grids.gamma;
  opts.n_from = config.grids.n_from;
  opts.n_to = config.grids.n_to;
  opts.katok_delta = config.grids.delta;
  opts.tolerance = config.tolerances.theorem;
  opts.assume_invariant = config.assume_invariant;
  opts.profile = profile_options(config);
  TheoremCResult result = check_theorem_C(*built.map, built.cloud, mu, opts);

  std::ostringstream profile_csv;
  write_profile_csv(profile_csv, result.exponent_profile);
  emit.write_text("profile.csv", profile_csv.str());
  std::ostringstream capacity_csv;
  write_capacity_csv(capacity_csv, result.capacity);
  emit.write_text("capacity.csv", capacity_csv.str());
  std::ostringstream entropy_csv;
  write_entropy_csv(entropy_csv, result.entropy);
  emit.write_text("entropy.csv", entropy_csv.str());

  std::vector<std::pair<std::string, double>> kv = {
      {"h", result.entropy.estimate},
      {"dim", result.capacity.estimate},
      {"E", result.exponent_profile.scalar_estimate()}};
  return finish_verify(config, built, emit, {std::move(result.report)}, std::move(kv));
}

RunResult run_verify_laws(const ExperimentConfig& config, const BuiltExperiment& built,
                          Emitter& emit) {
  if (built.measures.size() < 2 && config.nu_name.empty())
    throw config_error("verify-laws needs two measures", "measures");
  const AtomicMeasure& mu = built.measure_named(config.mu_name);
  const AtomicMeasure& nu = built.measure_named(
      config.nu_name.empty() ? built.measures[1].first : config.nu_name);
  const double t = config.t_combine;
  const auto grid = epsilon_grid_for(config, *built.cloud);
  const ProfileOptions popts = profile_options(config);

  std::vector<TheoremReport> reports;
  reports.push_back(check_convex_law(*built.map, built.cloud, mu, nu, t, grid, popts));
  const std::pair<double, AtomicMeasure> terms[2] = {{t, mu}, {1.0 - t, nu}};
  const AtomicMeasure combined = convex_combine(terms);
  reports.push_back(check_monotone_law(*built.map, built.cloud, mu, combined, grid, popts));
  reports.push_back(check_monotone_law(*built.map, built.cloud, nu, combined, grid, popts));
  reports.push_back(check_isometry_law(*built.map, built.cloud, mu, grid, popts));
  return finish_verify(config, built, emit, std::move(reports), {});
}

RunResult run_contraction_chain(const ExperimentConfig& config, const BuiltExperiment& built,
                                Emitter& emit) {
  const AtomicMeasure& mu = built.measure_named(config.measure_name);
  if (config.grids.gamma.empty())
    throw config_error("contraction-chain needs grids/gamma", "grids/gamma");
  const double gamma = config.grids.gamma.front();
  const auto cert = positive_exponent_certificate(*built.map, *built.cloud, mu,
                                                  config.grids.epsilon, profile_options(config));
  if (!cert) {
    TheoremReport report;
    report.theorem = "contraction-chain";
    report.verdict = Verdict::NotApplicable;
    report.caveats.push_back("no positive-exponent certificate");
    return finish_verify(config, built, emit, {std::move(report)}, {});
  }
  TheoremReport report = check_contraction_chain_range(
      *built.map, *built.cloud, *cert, config.grids.n_from, config.grids.n_to, gamma);
  return finish_verify(config, built, emit, {std::move(report)},
                       {{"k", cert->k}, {"epsilon", cert->epsilon}});
}

}  // namespace

RunResult run(const ExperimentConfig& config_in, const RunOptions& options) {
  ExperimentConfig config = config_in;
  if (options.seed_override) config.seed = *options.seed_override;
  validate_config(config);
  const BuiltExperiment built = build_experiment(config);

  Emitter emit;
  emit.dir = options.out_dir;
  emit.prefix = config.output_prefix.empty() ? config.name : config.output_prefix;
  std::filesystem::create_directories(emit.dir);

  RunResult result;
  switch (config.operation) {
    case Operation::ExponentMap: result = run_exponent_map(config, built, emit); break;
    case Operation::ExponentMeasure: result = run_exponent_measure(config, built, emit); break;
    case Operation::Capacity: result = run_capacity(config, built, emit); break;
    case Operation::Entropy: result = run_entropy(config, built, emit); break;
    case Operation::BlockEntropy: result = run_block_entropy(config, built, emit); break;
    case Operation::VerifyA: result = run_verify_a(config, built, emit); break;
    case Operation::VerifyB: result = run_verify_b(config, built, emit); break;
    case Operation::VerifyC: result = run_verify_c(config, built, emit); break;
    case Operation::VerifyLaws: result = run_verify_laws(config, built, emit); break;
    case Operation::ContractionChain: result = run_contraction_chain(config, built, emit); break;
  }
  result.files = emit.files;
  return result;
}

std::filesystem::path batch(const std::vector<ExperimentConfig>& configs,
                            const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  struct Row {
    std::string name, operation, estimates, margin, verdict, error;
    double wall_seconds = 0.0;
  };
  std::vector<Row> rows(configs.size());

  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next >= configs.size()) return;
        idx = next++;
      }
      const ExperimentConfig& config = configs[idx];
      Row& row = rows[idx];
      row.name = config.name;
      row.operation = operation_name(config.operation);
      RunOptions opts;
      opts.out_dir = out_dir / (std::to_string(idx) + "_" + config.name);
      const auto start = std::chrono::steady_clock::now();
      try {
        const RunResult r = run(config, opts);
        row.estimates = r.key_estimates;
        row.margin = r.margin;
        row.verdict = r.verdict.empty()
                          ? (r.exit_code == kExitOk ? "completed" : "fail")
                          : r.verdict;
      } catch (const std::exception& e) {
        row.error = e.what();
        row.verdict = "error";
      }
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), configs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const std::filesystem::path summary_path = out_dir / "batch_summary.csv";
  std::ofstream out(summary_path, std::ios::binary);
  out << "name,operation,estimates,margin,verdict,wall_seconds,error\n";
  for (const Row& row : rows) {
    auto escape = [](const std::string& s) {
      std::string e = s;
      for (char& c : e)
        if (c == ',' || c == '\n') c = ';';
      return e;
    };
    out << escape(row.name) << "," << row.operation << "," << escape(row.estimates) << ","
        << row.margin << "," << row.verdict << "," << format_real(row.wall_seconds) << ","
        << escape(row.error) << "\n";
  }
  return summary_path;
}

int exit_code_for_exception(const std::exception& e) {
  if (dynamic_cast<const precondition_error*>(&e)) return kExitPreconditionError;
  return kExitConfigError;
}

}  // namespace expanse::cli
