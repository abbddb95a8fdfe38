#include "expanse/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "detail/frame.hpp"
#include "expanse/exponents.hpp"
#include "expanse/numeric.hpp"

namespace expanse::cli {

namespace {

[[noreturn]] void fail(const std::string& what, const std::string& path) {
  throw config_error(what, path);
}

const ordered_json& need(const ordered_json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing required key '") + key + "'", path);
  return j.at(key);
}

double need_number(const ordered_json& j, const char* key, const std::string& path) {
  const ordered_json& v = need(j, key, path);
  if (!v.is_number()) fail(std::string("'") + key + "' must be a number", path);
  return v.get<double>();
}

std::int64_t need_integer(const ordered_json& j, const char* key, const std::string& path) {
  const ordered_json& v = need(j, key, path);
  if (!v.is_number_integer()) fail(std::string("'") + key + "' must be an integer", path);
  return v.get<std::int64_t>();
}

std::string need_string(const ordered_json& j, const char* key, const std::string& path) {
  const ordered_json& v = need(j, key, path);
  if (!v.is_string()) fail(std::string("'") + key + "' must be a string", path);
  return v.get<std::string>();
}

SpaceModel parse_space(const ordered_json& j, const std::string& path) {
  const std::string variant = need_string(j, "variant", path);
  if (variant == "interval") return SpaceModel::unit_interval();
  if (variant == "circle") return SpaceModel::circle();
  if (variant == "symbol")
    return SpaceModel::symbol_space(static_cast<std::int32_t>(need_integer(j, "alphabet", path)),
                                    static_cast<std::int32_t>(need_integer(j, "length", path)));
  if (variant == "product") {
    const ordered_json& factors = need(j, "factors", path);
    if (!factors.is_array() || factors.empty()) fail("'factors' must be a nonempty array", path);
    std::vector<SpaceModel> parts;
    for (std::size_t i = 0; i < factors.size(); ++i)
      parts.push_back(parse_space(factors[i], path + "/factors/" + std::to_string(i)));
    return SpaceModel::product(parts);
  }
  fail("unknown space variant '" + variant + "'", path);
}

std::vector<double> parse_grid(const ordered_json& j, const std::string& path) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number()) fail("grid entries must be numbers", path);
      grid.push_back(v.get<double>());
    }
    return grid;
  }
  if (j.is_object()) {
    const double start = need_number(j, "start", path);
    const auto count = need_integer(j, "count", path);
    if (count < 1 || count > 10000) fail("grid 'count' must be in [1,10000]", path);
    if (j.contains("ratio")) {
      const double ratio = j.at("ratio").get<double>();
      if (!(ratio > 0.0)) fail("grid 'ratio' must be positive", path);
      double v = start;
      for (std::int64_t k = 0; k < count; ++k, v *= ratio) grid.push_back(v);
      return grid;
    }
    if (j.contains("step")) {
      const double step = j.at("step").get<double>();
      for (std::int64_t k = 0; k < count; ++k) grid.push_back(start + step * static_cast<double>(k));
      return grid;
    }
    fail("grid object needs 'ratio' or 'step'", path);
  }
  fail("grid must be an array or a {start, ratio|step, count} object", path);
}

Point parse_point(const ordered_json& j, const SpaceModel& space, const std::string& path) {
  if (!j.is_array()) fail("point must be an array with one entry per axis", path);
  if (j.size() != space.axes().size())
    fail("point has " + std::to_string(j.size()) + " coordinates, space has " +
             std::to_string(space.axes().size()) + " axes",
         path);
  Point p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Axis& axis = space.axes()[i];
    if (axis.kind == AxisKind::Symbol) {
      if (!j[i].is_array()) fail("symbol coordinate must be an array of symbols", path);
      Word w;
      for (const auto& s : j[i]) w.push_back(s.get<std::int32_t>());
      p.coords.emplace_back(std::move(w));
    } else {
      if (!j[i].is_number()) fail("real coordinate must be a number", path);
      p.coords.emplace_back(j[i].get<double>());
    }
  }
  return p;
}

CloudSpec parse_cloud(const ordered_json& j, const std::string& path) {
  CloudSpec spec;
  const std::string gen = need_string(j, "generator", path);
  if (gen == "grid") {
    spec.kind = CloudSpec::Kind::Grid;
    spec.n = need_integer(j, "n", path);
  } else if (gen == "uniform-iid") {
    spec.kind = CloudSpec::Kind::UniformIid;
    spec.n = need_integer(j, "n", path);
  } else if (gen == "all-words") {
    spec.kind = CloudSpec::Kind::AllWords;
  } else if (gen == "cantor") {
    spec.kind = CloudSpec::Kind::Cantor;
    spec.depth = static_cast<std::int32_t>(need_integer(j, "depth", path));
  } else if (gen == "csv") {
    spec.kind = CloudSpec::Kind::Csv;
    spec.path = need_string(j, "path", path);
  } else {
    fail("unknown cloud generator '" + gen + "'", path);
  }
  return spec;
}

MeasureSpec parse_measure(const ordered_json& j, std::size_t index, const std::string& path) {
  MeasureSpec spec;
  spec.name = j.contains("name") ? need_string(j, "name", path)
                                 : "measure" + std::to_string(index);
  const std::string gen = need_string(j, "generator", path);
  if (gen == "uniform") {
    spec.kind = MeasureSpec::Kind::Uniform;
  } else if (gen == "dirac") {
    spec.kind = MeasureSpec::Kind::Dirac;
    spec.index = static_cast<std::int32_t>(need_integer(j, "index", path));
  } else if (gen == "bernoulli") {
    spec.kind = MeasureSpec::Kind::Bernoulli;
    spec.p = need_number(j, "p", path);
  } else if (gen == "combine") {
    spec.kind = MeasureSpec::Kind::Combine;
    const ordered_json& terms = need(j, "terms", path);
    if (!terms.is_array() || terms.empty()) fail("'terms' must be a nonempty array", path);
    for (const auto& term : terms)
      spec.terms.emplace_back(need_number(term, "t", path), need_string(term, "of", path));
  } else if (gen == "csv") {
    spec.kind = MeasureSpec::Kind::Csv;
    spec.path = need_string(j, "path", path);
  } else {
    fail("unknown measure generator '" + gen + "'", path);
  }
  return spec;
}

}  // namespace

std::string operation_name(Operation op) {
  switch (op) {
    case Operation::ExponentMap: return "exponent-map";
    case Operation::ExponentMeasure: return "exponent-measure";
    case Operation::Capacity: return "capacity";
    case Operation::Entropy: return "entropy";
    case Operation::BlockEntropy: return "block-entropy";
    case Operation::VerifyA: return "verify-A";
    case Operation::VerifyB: return "verify-B";
    case Operation::VerifyC: return "verify-C";
    case Operation::VerifyLaws: return "verify-laws";
    case Operation::ContractionChain: return "contraction-chain";
  }
  return "?";
}

Operation parse_operation(const std::string& name) {
  for (Operation op : {Operation::ExponentMap, Operation::ExponentMeasure, Operation::Capacity,
                       Operation::Entropy, Operation::BlockEntropy, Operation::VerifyA,
                       Operation::VerifyB, Operation::VerifyC, Operation::VerifyLaws,
                       Operation::ContractionChain})
    if (operation_name(op) == name) return op;
  throw config_error("unknown operation '" + name + "'", "operation");
}

ExperimentConfig ExperimentConfig::from_json(const ordered_json& j, std::filesystem::path base_dir) {
  if (!j.is_object()) throw config_error("config must be a JSON object", "");
  ExperimentConfig config;
  config.base_dir = std::move(base_dir);
  if (j.contains("name")) config.name = need_string(j, "name", "name");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("'seed' must be an integer", "seed");
    config.seed = j.at("seed").get<std::uint64_t>();
  }
  config.space = parse_space(need(j, "space", "space"), "space");
  if (j.contains("map")) config.map_spec = j.at("map");
  config.cloud = parse_cloud(need(j, "cloud", "cloud"), "cloud");
  if (j.contains("measures")) {
    const ordered_json& ms = j.at("measures");
    if (!ms.is_array()) fail("'measures' must be an array", "measures");
    for (std::size_t i = 0; i < ms.size(); ++i)
      config.measures.push_back(parse_measure(ms[i], i, "measures/" + std::to_string(i)));
  }
  config.operation = parse_operation(need_string(j, "operation", "operation"));
  if (j.contains("grids")) {
    const ordered_json& g = j.at("grids");
    if (g.contains("epsilon")) config.grids.epsilon = parse_grid(g.at("epsilon"), "grids/epsilon");
    if (g.contains("beta")) config.grids.beta = parse_grid(g.at("beta"), "grids/beta");
    if (g.contains("delta_grid"))
      config.grids.delta_grid = parse_grid(g.at("delta_grid"), "grids/delta_grid");
    if (g.contains("delta")) config.grids.delta = g.at("delta").get<double>();
    if (g.contains("gamma")) config.grids.gamma = parse_grid(g.at("gamma"), "grids/gamma");
    if (g.contains("n")) {
      config.grids.n_from = static_cast<std::int32_t>(need_integer(g.at("n"), "from", "grids/n"));
      config.grids.n_to = static_cast<std::int32_t>(need_integer(g.at("n"), "to", "grids/n"));
    }
    if (g.contains("n_max"))
      config.grids.n_max = static_cast<std::int32_t>(g.at("n_max").get<std::int64_t>());
    if (g.contains("x_sample_count"))
      config.grids.x_sample_count = static_cast<std::int32_t>(g.at("x_sample_count").get<std::int64_t>());
  }
  if (j.contains("tolerances")) {
    const ordered_json& t = j.at("tolerances");
    if (t.contains("theorem")) config.tolerances.theorem = t.at("theorem").get<double>();
    if (t.contains("witness_gap")) config.tolerances.witness_gap = t.at("witness_gap").get<double>();
    if (t.contains("floor_factor")) config.tolerances.floor_factor = t.at("floor_factor").get<double>();
    if (t.contains("rate_slack")) config.tolerances.rate_slack = t.at("rate_slack").get<double>();
  }
  if (j.contains("assume_invariant")) config.assume_invariant = j.at("assume_invariant").get<bool>();
  if (j.contains("measure")) config.measure_name = need_string(j, "measure", "measure");
  if (j.contains("mu")) config.mu_name = need_string(j, "mu", "mu");
  if (j.contains("nu")) config.nu_name = need_string(j, "nu", "nu");
  if (j.contains("t")) config.t_combine = j.at("t").get<double>();
  if (j.contains("output") && j.at("output").contains("prefix"))
    config.output_prefix = j.at("output").at("prefix").get<std::string>();
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("cannot open config file " + file.string(), "");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error("config is not valid JSON: " + std::string(e.what()), file.string());
  }
  return from_json(j, file.parent_path());
}

namespace {

MapModel parse_map(const ordered_json& j, const SpaceModel& space, const CloudPtr& cloud) {
  const std::string path = "map";
  const std::string variant = need_string(j, "variant", path);
  try {
    if (variant == "times_m")
      return MapModel::times_m(static_cast<std::int32_t>(need_integer(j, "m", path)));
    if (variant == "rotation") return MapModel::rotation(need_number(j, "alpha", path));
    if (variant == "tent") return MapModel::tent(need_number(j, "slope", path));
    if (variant == "piecewise_linear") {
      std::vector<double> breaks = parse_grid(need(j, "breakpoints", path), path + "/breakpoints");
      std::vector<double> values;
      if (j.contains("values")) {
        values = parse_grid(j.at("values"), path + "/values");
      } else if (j.contains("slopes")) {
        // slopes + start determine the node values
        const std::vector<double> slopes = parse_grid(j.at("slopes"), path + "/slopes");
        if (slopes.size() + 1 != breaks.size())
          fail("piecewise_linear needs one slope per segment", path);
        double v = j.contains("start") ? j.at("start").get<double>() : 0.0;
        values.push_back(v);
        for (std::size_t s = 0; s < slopes.size(); ++s) {
          v += slopes[s] * (breaks[s + 1] - breaks[s]);
          values.push_back(v);
        }
      } else {
        fail("piecewise_linear needs 'values' or 'slopes'", path);
      }
      return MapModel::piecewise_linear(std::move(breaks), std::move(values));
    }
    if (variant == "contraction") return MapModel::contraction(need_number(j, "c", path));
    if (variant == "constant")
      return MapModel::constant(space, parse_point(need(j, "target", path), space, path + "/target"));
    if (variant == "shift") {
      ShiftMode mode = ShiftMode::PadZero;
      if (j.contains("mode")) {
        const std::string m = j.at("mode").get<std::string>();
        if (m == "cyclic")
          mode = ShiftMode::Cyclic;
        else if (m != "pad")
          fail("shift mode must be 'pad' or 'cyclic'", path);
      }
      return MapModel::shift(space, mode);
    }
    if (variant == "lookup_table") {
      if (!cloud) fail("lookup_table needs the experiment cloud", path);
      const ordered_json& images = need(j, "images", path);
      if (!images.is_array()) fail("'images' must be an array of point indices", path);
      std::vector<std::int32_t> idx;
      for (const auto& v : images) idx.push_back(v.get<std::int32_t>());
      return MapModel::lookup_table(cloud, std::move(idx));
    }
  } catch (const structural_error& e) {
    fail(e.what(), path);
  }
  fail("unknown map variant '" + variant + "'", path);
}

CloudPtr build_cloud(const ExperimentConfig& config) {
  const CloudSpec& spec = config.cloud;
  switch (spec.kind) {
    case CloudSpec::Kind::Grid:
      return std::make_shared<PointCloud>(grid_cloud(config.space, spec.n));
    case CloudSpec::Kind::AllWords: {
      if (!config.space.single_symbol_axis())
        throw config_error("all-words clouds need a symbol space", "cloud");
      const Axis& axis = config.space.axis0();
      const double count = std::pow(static_cast<double>(axis.alphabet),
                                    static_cast<double>(axis.word_length));
      return std::make_shared<PointCloud>(
          grid_cloud(config.space, static_cast<std::int64_t>(count + 0.5)));
    }
    case CloudSpec::Kind::UniformIid: {
      SampledMeasure s = sample_measure(config.space, {MeasureGenerator::UniformIid}, spec.n,
                                        config.seed);
      return s.cloud;
    }
    case CloudSpec::Kind::Cantor: {
      GeneratorSpec gen;
      gen.kind = MeasureGenerator::CantorMiddleThirds;
      gen.depth = spec.depth;
      SampledMeasure s = sample_measure(config.space, gen, 0, config.seed);
      return s.cloud;
    }
    case CloudSpec::Kind::Csv: {
      const std::filesystem::path file = config.base_dir / spec.path;
      std::ifstream in(file);
      if (!in) throw config_error("cannot open cloud csv " + file.string(), "cloud/path");
      const AtomicMeasure m = load_measure_csv(in, config.space);
      return m.cloud_ptr();
    }
  }
  throw config_error("unknown cloud generator", "cloud");
}

AtomicMeasure build_measure(const ExperimentConfig& config, const MeasureSpec& spec,
                            const CloudPtr& cloud,
                            const std::vector<std::pair<std::string, AtomicMeasure>>& built) {
  const std::string path = "measures/" + spec.name;
  switch (spec.kind) {
    case MeasureSpec::Kind::Uniform:
      return AtomicMeasure::uniform(cloud);
    case MeasureSpec::Kind::Dirac:
      try {
        return dirac(cloud, spec.index);
      } catch (const structural_error& e) {
        throw config_error(e.what(), path);
      }
    case MeasureSpec::Kind::Bernoulli: {
      if (!cloud->space.single_symbol_axis() || cloud->space.axis0().alphabet != 2)
        throw config_error("bernoulli measures need a 2-symbol space", path);
      const Axis& axis = cloud->space.axis0();
      if (cloud->size() != (std::size_t(1) << axis.word_length))
        throw config_error("bernoulli measures need the all-words cloud", path);
      std::vector<double> w(cloud->size());
      for (std::size_t i = 0; i < cloud->size(); ++i) {
        double prob = 1.0;
        for (std::int32_t sym : cloud->points[i].as_word())
          prob *= sym == 0 ? spec.p : 1.0 - spec.p;
        w[i] = prob;
      }
      return AtomicMeasure::from_weights(cloud, w);
    }
    case MeasureSpec::Kind::Combine: {
      std::vector<std::pair<double, AtomicMeasure>> terms;
      for (const auto& [t, name] : spec.terms) {
        const AtomicMeasure* found = nullptr;
        for (const auto& [n, m] : built)
          if (n == name) found = &m;
        if (!found) throw config_error("combine refers to unknown measure '" + name + "'", path);
        terms.emplace_back(t, *found);
      }
      try {
        return convex_combine(terms);
      } catch (const structural_error& e) {
        throw config_error(e.what(), path);
      }
    }
    case MeasureSpec::Kind::Csv: {
      const std::filesystem::path file = config.base_dir / spec.path;
      std::ifstream in(file);
      if (!in) throw config_error("cannot open measure csv " + file.string(), path);
      const AtomicMeasure raw = load_measure_csv(in, config.space);
      // remap onto the experiment cloud by exact coordinate match
      detail::NearestIndex index(*cloud);
      std::vector<Atom> atoms;
      for (const Atom& a : raw.atoms()) {
        const auto [idx, dist] = index.nearest(raw.cloud().points[static_cast<std::size_t>(a.index)]);
        if (!(dist <= 1e-12))
          throw config_error("measure csv point is not in the experiment cloud", path);
        atoms.push_back(Atom{idx, a.weight});
      }
      return AtomicMeasure::from_atoms_renormalized(cloud, std::move(atoms));
    }
  }
  throw config_error("unknown measure generator", path);
}

}  // namespace

const AtomicMeasure& BuiltExperiment::measure_named(const std::string& name) const {
  if (measures.empty()) throw config_error("config defines no measures", "measures");
  if (name.empty()) return measures.front().second;
  for (const auto& [n, m] : measures)
    if (n == name) return m;
  throw config_error("no measure named '" + name + "'", "measures");
}

BuiltExperiment build_experiment(const ExperimentConfig& config) {
  BuiltExperiment built;
  built.cloud = build_cloud(config);
  if (!(built.cloud->space == config.space))
    throw config_error("cloud space does not match the configured space", "cloud");
  if (!config.map_spec.is_null())
    built.map = parse_map(config.map_spec, config.space, built.cloud);
  if (built.map && !(built.map->space() == config.space))
    throw config_error("map lives on " + built.map->space().describe() +
                           ", config space is " + config.space.describe(),
                       "map");
  for (std::size_t i = 0; i < config.measures.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k)
      if (config.measures[k].name == config.measures[i].name)
        throw config_error("duplicate measure name '" + config.measures[i].name + "'", "measures");
    built.measures.emplace_back(config.measures[i].name,
                                build_measure(config, config.measures[i], built.cloud,
                                              built.measures));
  }
  return built;
}

void validate_config(const ExperimentConfig& config) {
  const BuiltExperiment built = build_experiment(config);
  const PointCloud& cloud = *built.cloud;
  const GridSpec& g = config.grids;

  const bool needs_map = config.operation != Operation::BlockEntropy &&
                         config.operation != Operation::Capacity;
  if (needs_map && !built.map)
    throw config_error("operation " + operation_name(config.operation) + " needs a map", "map");

  const bool needs_measure = config.operation != Operation::ExponentMap;
  if (needs_measure && built.measures.empty())
    throw config_error("operation " + operation_name(config.operation) + " needs measures",
                       "measures");

  auto check_epsilon = [&]() {
    if (g.epsilon.empty()) return;  // estimator default grid
    const double floor = config.tolerances.floor_factor * cloud.resolution;
    for (std::size_t k = 0; k < g.epsilon.size(); ++k) {
      if (!(g.epsilon[k] > 0.0))
        throw precondition_error("grids/epsilon entries must be positive");
      if (k > 0 && !(g.epsilon[k] > g.epsilon[k - 1]))
        throw precondition_error("grids/epsilon must be strictly increasing");
    }
    if (g.epsilon.front() < floor)
      throw precondition_error("grids/epsilon minimum " + format_real(g.epsilon.front()) +
                               " is below the resolution floor " + format_real(floor));
  };
  auto check_beta = [&]() {
    if (g.beta.empty()) throw precondition_error("operation needs grids/beta");
    std::size_t admissible = 0;
    for (double b : g.beta)
      if (b >= 2.0 * cloud.resolution) ++admissible;
    if (admissible < 3)
      throw precondition_error("insufficient scale range: only " + std::to_string(admissible) +
                               " beta values above the scale floor " +
                               format_real(2.0 * cloud.resolution));
    if (g.delta_grid.empty()) throw precondition_error("operation needs grids/delta_grid");
  };
  auto check_gamma = [&]() {
    if (g.gamma.empty()) throw precondition_error("operation needs grids/gamma");
    bool any = false;
    for (double v : g.gamma) any = any || v >= 2.0 * cloud.resolution;
    if (!any)
      throw precondition_error("no gamma above the scale floor " +
                               format_real(2.0 * cloud.resolution));
    if (g.n_from < 1 || g.n_to < g.n_from + 1)
      throw precondition_error("grids/n must satisfy 1 <= from < to");
    if (!(g.delta >= 0.0 && g.delta < 1.0))
      throw precondition_error("grids/delta must lie in [0,1)");
  };

  switch (config.operation) {
    case Operation::ExponentMap:
    case Operation::ExponentMeasure:
    case Operation::VerifyA:
    case Operation::VerifyLaws:
      check_epsilon();
      break;
    case Operation::Capacity:
      check_beta();
      break;
    case Operation::Entropy:
      check_gamma();
      break;
    case Operation::BlockEntropy:
      if (!cloud.space.single_symbol_axis())
        throw config_error("block-entropy needs a symbol space", "space");
      if (g.n_max < 1 || g.n_max > cloud.space.axis0().word_length)
        throw precondition_error("grids/n_max must be in [1, word length]");
      break;
    case Operation::VerifyB:
      check_epsilon();
      if (g.n_max < 1) throw precondition_error("grids/n_max must be >= 1");
      if (g.x_sample_count < 1) throw precondition_error("grids/x_sample_count must be >= 1");
      break;
    case Operation::VerifyC:
      check_epsilon();
      check_beta();
      check_gamma();
      break;
    case Operation::ContractionChain:
      if (g.gamma.empty()) throw precondition_error("contraction-chain needs grids/gamma");
      if (g.n_from < 1 || g.n_to < g.n_from)
        throw precondition_error("grids/n must satisfy 1 <= from <= to");
      break;
  }

  if (config.operation == Operation::VerifyLaws) {
    built.measure_named(config.mu_name);
    built.measure_named(config.nu_name.empty() && built.measures.size() > 1
                            ? built.measures[1].first
                            : config.nu_name);
    if (!(config.t_combine > 0.0 && config.t_combine < 1.0))
      throw precondition_error("verify-laws needs 0 < t < 1");
  }
  if (config.operation == Operation::VerifyB || config.operation == Operation::VerifyC ||
      config.operation == Operation::ContractionChain)
    built.measure_named(config.measure_name);
}

}  // namespace expanse::cli
