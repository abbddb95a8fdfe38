#include "expanse/verify.hpp"

#include <algorithm>
#include <cmath>

#include "detail/frame.hpp"
#include "expanse/rng.hpp"

namespace expanse {

ordered_json json_real(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not-applicable";
  }
  return "?";
}

ordered_json TheoremReport::to_json() const {
  ordered_json j;
  j["theorem"] = theorem;
  j["verdict"] = verdict_name(verdict);
  j["margin"] = json_real(margin);
  j["tolerance"] = tolerance;
  j["inputs"] = inputs;
  j["computed"] = computed;
  j["caveats"] = caveats;
  return j;
}

namespace {

ordered_json inputs_summary(const MapModel& map, const PointCloud& cloud) {
  ordered_json j;
  j["map"] = map.describe();
  j["space"] = cloud.space.describe();
  j["cloud_size"] = cloud.size();
  j["resolution"] = json_real(cloud.resolution);
  return j;
}

ordered_json grid_json(std::span<const double> grid) {
  ordered_json arr = ordered_json::array();
  for (double v : grid) arr.push_back(json_real(v));
  return arr;
}

void require_same_cloud(const CloudPtr& cloud, const AtomicMeasure& mu) {
  if (mu.cloud_ptr().get() != cloud.get())
    throw structural_error("measure does not live on the given cloud");
}

// Invariance handling shared by the B and C checkers: the defect must be
// below tolerance unless the measure is declared invariant by construction,
// in which case the measured value (or the snap failure) becomes a caveat.
double resolve_invariance(const MapModel& map, const AtomicMeasure& mu, bool assume_invariant,
                          double tolerance, std::vector<std::string>& caveats) {
  double defect = kPosInf;
  std::string failure;
  try {
    defect = invariance_defect(map, mu);
  } catch (const precondition_error& e) {
    failure = e.what();
  }
  if (!failure.empty()) {
    if (!assume_invariant)
      throw precondition_error("invariance defect unavailable: " + failure);
    caveats.push_back("invariance assumed by declaration (pushforward not representable)");
    return kPosInf;
  }
  if (defect > tolerance) {
    if (!assume_invariant)
      throw precondition_error("invariance defect " + format_real(defect) +
                               " exceeds tolerance " + format_real(tolerance));
    caveats.push_back("invariance assumed by declaration (measured defect " +
                      format_real(defect) + ")");
  }
  return defect;
}

}  // namespace

PhiMassCurve phi_mass_curve(const MapModel& map, const AtomicMeasure& mu,
                            std::int32_t center_index, double epsilon, std::int32_t n_max) {
  const PointCloud& cloud = mu.cloud();
  if (center_index < 0 || center_index >= static_cast<std::int32_t>(cloud.size()))
    throw structural_error("phi curve: center index outside cloud");
  if (n_max < 1) throw precondition_error("phi curve needs n_max >= 1");
  if (!(epsilon >= 2.0 * cloud.resolution))
    throw precondition_error("phi curve epsilon " + format_real(epsilon) +
                             " is below 2 * resolution = " + format_real(2.0 * cloud.resolution));
  PhiMassCurve curve;
  curve.center_index = center_index;
  curve.epsilon = epsilon;
  curve.masses.reserve(static_cast<std::size_t>(n_max));

  Point cx = cloud.points[static_cast<std::size_t>(center_index)];
  std::vector<Point> ys;
  std::vector<double> ws;
  ys.reserve(mu.atoms().size());
  for (const Atom& a : mu.atoms()) {
    ys.push_back(cloud.points[static_cast<std::size_t>(a.index)]);
    ws.push_back(a.weight);
  }
  std::vector<char> alive(ys.size(), 1);
  for (std::int32_t step = 0; step < n_max; ++step) {
    if (step > 0) {
      cx = map.apply(cx);
      for (std::size_t a = 0; a < ys.size(); ++a)
        if (alive[a]) ys[a] = map.apply(ys[a]);
    }
    KahanSum mass;
    for (std::size_t a = 0; a < ys.size(); ++a) {
      if (!alive[a]) continue;
      if (cloud.space.distance(cx, ys[a]) <= epsilon)
        mass.add(ws[a]);
      else
        alive[a] = 0;
    }
    curve.masses.push_back(mass.value());
  }
  return curve;
}

PhiMassCurve phi_mass_curve(const MapModel& map, const AtomicMeasure& mu, const Point& x,
                            double epsilon, std::int32_t n_max) {
  const PointCloud& cloud = mu.cloud();
  const Point q = cloud.space.normalize_point(x);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.points[i] == q)
      return phi_mass_curve(map, mu, static_cast<std::int32_t>(i), epsilon, n_max);
  throw structural_error("phi curve: x is not a cloud point");
}

TheoremReport check_theorem_A(const MapModel& map, const CloudPtr& cloud,
                              std::span<const AtomicMeasure> family,
                              std::span<const double> eps_grid, const TheoremAOptions& opts) {
  if (!cloud) throw structural_error("theorem A needs a cloud");
  if (family.size() < 1) throw precondition_error("theorem A needs a measure family");
  bool has_full_support = false;
  for (const AtomicMeasure& mu : family) {
    require_same_cloud(cloud, mu);
    has_full_support = has_full_support || mu.full_support();
  }
  if (!has_full_support)
    throw precondition_error("theorem A family must contain a full-support measure");

  TheoremReport report;
  report.theorem = "A";
  report.tolerance = opts.gap_tolerance;
  report.inputs = inputs_summary(map, *cloud);
  report.inputs["family_size"] = family.size();
  report.inputs["eps_grid"] = grid_json(eps_grid);

  const EpsilonProfile map_profile = map_expansion_profile(map, *cloud, eps_grid, opts.profile);
  const double e_map = map_profile.scalar_estimate();

  // witness level: just above the map estimate; a map estimate of -inf
  // (collapsed pairs at every scale) admits any finite level
  std::optional<AtomicMeasure> witness;
  double witness_level = 0.0;
  if (std::isfinite(e_map))
    witness_level = e_map + opts.witness_offset;
  else if (e_map == kNegInf)
    witness_level = 0.0;
  if (e_map != kPosInf) {
    WitnessOptions wopts;
    wopts.truncation = opts.witness_truncation;
    wopts.profile = opts.profile;
    witness = witness_measure(map, cloud, witness_level, wopts);
  } else {
    report.caveats.push_back("map estimate is +inf (no admissible pairs); witness skipped");
  }

  double min_measure = kPosInf;
  ordered_json per_measure = ordered_json::array();
  for (const AtomicMeasure& mu : family) {
    const double e = measure_expansion_profile(map, *cloud, mu, eps_grid, opts.profile)
                         .scalar_estimate();
    per_measure.push_back(json_real(e));
    min_measure = std::min(min_measure, e);
  }
  double e_witness = kPosInf;
  if (witness) {
    e_witness = measure_expansion_profile(map, *cloud, *witness, eps_grid, opts.profile)
                    .scalar_estimate();
    min_measure = std::min(min_measure, e_witness);
  }

  const double gap = ext_sub(min_measure, e_map);  // must be >= 0 exactly
  const double attainment = opts.gap_tolerance - gap;

  report.computed["E_map"] = json_real(e_map);
  report.computed["E_mu"] = per_measure;
  report.computed["E_witness"] = json_real(e_witness);
  report.computed["witness_level"] = json_real(witness ? witness_level : kPosInf);
  report.computed["min_E_mu"] = json_real(min_measure);
  report.computed["gap"] = json_real(gap);
  report.computed["attainment_margin"] = json_real(attainment);
  report.computed["resolution_floor"] = json_real(map_profile.resolution_floor);

  report.margin = std::min(gap, attainment);
  report.verdict = (gap >= 0.0 && attainment >= 0.0) ? Verdict::Pass : Verdict::Fail;
  return report;
}

namespace {

// entrywise comparison helpers on extended values
double entry_gap(double a, double b) {
  // |a - b| with matching infinities treated as equal
  if (a == b) return 0.0;
  if (std::isinf(a) || std::isinf(b)) return kPosInf;
  return std::fabs(a - b);
}

}  // namespace

TheoremReport check_convex_law(const MapModel& map, const CloudPtr& cloud, const AtomicMeasure& mu,
                               const AtomicMeasure& nu, double t,
                               std::span<const double> eps_grid, const ProfileOptions& opts) {
  if (!(t > 0.0 && t < 1.0)) throw precondition_error("convex law needs 0 < t < 1");
  require_same_cloud(cloud, mu);
  require_same_cloud(cloud, nu);
  const std::pair<double, AtomicMeasure> terms[2] = {{t, mu}, {1.0 - t, nu}};
  const AtomicMeasure combined = convex_combine(terms);

  const EpsilonProfile pm = measure_expansion_profile(map, *cloud, mu, eps_grid, opts);
  const EpsilonProfile pn = measure_expansion_profile(map, *cloud, nu, eps_grid, opts);
  const EpsilonProfile pc = measure_expansion_profile(map, *cloud, combined, eps_grid, opts);

  TheoremReport report;
  report.theorem = "law-convex";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, *cloud);
  report.inputs["t"] = t;
  report.inputs["eps_grid"] = grid_json(eps_grid);

  std::int64_t mismatches = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < pc.entries.size(); ++k) {
    const double expected = std::min(pm.entries[k].lambda_hat, pn.entries[k].lambda_hat);
    const double got = pc.entries[k].lambda_hat;
    const double gapv = entry_gap(got, expected);
    if (gapv != 0.0) {
      ++mismatches;
      worst = std::max(worst, gapv);
    }
  }
  report.computed["entries"] = pc.entries.size();
  report.computed["mismatches"] = mismatches;
  report.margin = mismatches == 0 ? 0.0 : -worst;
  report.verdict = mismatches == 0 ? Verdict::Pass : Verdict::Fail;
  return report;
}

TheoremReport check_monotone_law(const MapModel& map, const CloudPtr& cloud,
                                 const AtomicMeasure& mu, const AtomicMeasure& nu,
                                 std::span<const double> eps_grid, const ProfileOptions& opts) {
  require_same_cloud(cloud, mu);
  require_same_cloud(cloud, nu);
  if (!mu.support_subset_of(nu))
    throw precondition_error("monotone law needs supp(mu) inside supp(nu)");

  const EpsilonProfile pm = measure_expansion_profile(map, *cloud, mu, eps_grid, opts);
  const EpsilonProfile pn = measure_expansion_profile(map, *cloud, nu, eps_grid, opts);

  TheoremReport report;
  report.theorem = "law-monotone";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, *cloud);
  report.inputs["eps_grid"] = grid_json(eps_grid);

  double margin = kPosInf;
  for (std::size_t k = 0; k < pm.entries.size(); ++k)
    margin = std::min(margin, ext_sub(pm.entries[k].lambda_hat, pn.entries[k].lambda_hat));
  report.computed["entries"] = pm.entries.size();
  report.margin = margin;
  report.verdict = margin >= 0.0 ? Verdict::Pass : Verdict::Fail;
  return report;
}

TheoremReport check_isometry_law(const MapModel& map, const CloudPtr& cloud,
                                 const AtomicMeasure& mu, std::span<const double> eps_grid,
                                 const ProfileOptions& opts) {
  require_same_cloud(cloud, mu);
  TheoremReport report;
  report.theorem = "law-isometry";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, *cloud);
  report.inputs["eps_grid"] = grid_json(eps_grid);
  if (!map.distance_preserving()) {
    report.verdict = Verdict::NotApplicable;
    report.caveats.push_back("map is not distance-preserving");
    return report;
  }
  const EpsilonProfile p = measure_expansion_profile(map, *cloud, mu, eps_grid, opts);
  double margin = kPosInf;
  std::int64_t nonvacuous = 0;
  for (const ProfileEntry& e : p.entries) {
    if (e.pair_count == 0) continue;
    ++nonvacuous;
    margin = std::min(margin, ext_sub(0.0, e.lambda_hat));
  }
  report.computed["nonvacuous_entries"] = nonvacuous;
  if (nonvacuous == 0) report.caveats.push_back("no admissible pairs; bound is vacuous");
  report.margin = margin;
  report.verdict = margin >= 0.0 ? Verdict::Pass : Verdict::Fail;
  return report;
}

TheoremBResult check_theorem_B(const MapModel& map, const CloudPtr& cloud,
                               const AtomicMeasure& mu, std::uint64_t seed,
                               const TheoremBOptions& opts) {
  if (!cloud) throw structural_error("theorem B needs a cloud");
  require_same_cloud(cloud, mu);

  TheoremBResult result;
  TheoremReport& report = result.report;
  report.theorem = "B";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, *cloud);
  report.inputs["n_max"] = opts.n_max;
  report.inputs["x_sample_count"] = opts.x_sample_count;
  report.inputs["seed"] = seed;

  const double max_atom = mu.max_atom_weight();
  report.computed["max_atom_weight"] = json_real(max_atom);

  const auto cert = positive_exponent_certificate(map, *cloud, mu, opts.eps_grid, opts.profile);
  if (!cert) {
    report.verdict = Verdict::NotApplicable;
    report.margin = 0.0;
    report.caveats.push_back("no positive-exponent certificate; check not applicable");
    return result;
  }
  const double defect =
      resolve_invariance(map, mu, opts.assume_invariant, opts.invariance_tolerance, report.caveats);
  report.computed["invariance_defect"] = json_real(defect);
  report.computed["certificate_k"] = json_real(cert->k);
  report.computed["certificate_epsilon"] = json_real(cert->epsilon);

  const double eps_half = cert->epsilon / 2.0;
  const double floor = 2.0 * max_atom;  // nonatomicity floor of the finite surrogate
  report.computed["phi_epsilon"] = json_real(eps_half);
  report.computed["nonatomicity_floor"] = json_real(floor);

  SplitMix64 rng = seed_stream(seed, "theorem-B/centers");
  const auto centers = rng.sample_indices(static_cast<std::int64_t>(cloud->size()),
                                          std::min<std::int64_t>(opts.x_sample_count,
                                                                 static_cast<std::int64_t>(cloud->size())));

  double margin = kPosInf;
  double min_rate = kPosInf, max_rate = kNegInf;
  std::int32_t max_floor_hit = 0;
  bool all_hit = true;
  for (std::int32_t c : centers) {
    PhiMassCurve curve = phi_mass_curve(map, mu, c, eps_half, opts.n_max);
    // window: from n = 1 to the first n at or below the floor
    std::int32_t floor_hit = -1;
    for (std::size_t t = 0; t < curve.masses.size(); ++t) {
      if (curve.masses[t] <= floor) {
        floor_hit = static_cast<std::int32_t>(t + 1);
        break;
      }
    }
    if (floor_hit < 0) {
      all_hit = false;
      max_floor_hit = opts.n_max;
    } else {
      max_floor_hit = std::max(max_floor_hit, floor_hit);
    }
    const std::size_t window = floor_hit < 0 ? curve.masses.size()
                                             : static_cast<std::size_t>(floor_hit);
    double rate = kPosInf;
    if (window >= 2) {
      std::vector<double> xs, ys;
      for (std::size_t t = 0; t < window; ++t) {
        if (!(curve.masses[t] > 0.0)) break;
        xs.push_back(static_cast<double>(t + 1));
        ys.push_back(std::log(curve.masses[t]));
      }
      if (xs.size() >= 2) rate = -fit_line(xs, ys).slope;
    }
    min_rate = std::min(min_rate, rate);
    max_rate = std::max(max_rate, rate == kPosInf ? kNegInf : rate);
    margin = std::min(margin, floor - curve.masses.back());
    result.curves.push_back(std::move(curve));
  }

  const double required_rate = std::log(cert->k) - opts.rate_slack;
  report.computed["decay_rate_min"] = json_real(min_rate);
  report.computed["decay_rate_max"] = json_real(max_rate);
  report.computed["required_rate"] = json_real(required_rate);
  report.computed["max_floor_hit_n"] = max_floor_hit;
  report.computed["all_curves_reach_floor"] = all_hit;
  report.margin = margin;
  report.verdict =
      (all_hit && margin >= 0.0 && min_rate >= required_rate) ? Verdict::Pass : Verdict::Fail;
  return result;
}

TheoremCResult check_theorem_C(const MapModel& map, const CloudPtr& cloud,
                               const AtomicMeasure& mu, const TheoremCOptions& opts) {
  if (!cloud) throw structural_error("theorem C needs a cloud");
  require_same_cloud(cloud, mu);
  if (!map.continuous_model())
    throw precondition_error("theorem C needs a continuous map model");

  TheoremCResult result;
  TheoremReport& report = result.report;
  report.theorem = "C";
  report.tolerance = opts.tolerance;
  report.inputs = inputs_summary(map, *cloud);
  report.caveats.push_back("ergodicity declared by construction, not verified");

  const double defect =
      resolve_invariance(map, mu, opts.assume_invariant, opts.invariance_tolerance, report.caveats);
  report.computed["invariance_defect"] = json_real(defect);
  report.computed["max_atom_weight"] = json_real(mu.max_atom_weight());

  std::vector<double> eps_grid = opts.eps_grid;
  if (eps_grid.empty()) eps_grid = default_epsilon_grid(*cloud, opts.profile);
  result.exponent_profile = measure_expansion_profile(map, *cloud, mu, eps_grid, opts.profile);
  const double e_mu = result.exponent_profile.scalar_estimate();
  if (!std::isfinite(e_mu))
    throw precondition_error("theorem C needs a finite exponent estimate, got " +
                             format_real(e_mu));

  result.capacity = capacity_estimate(*cloud, mu, opts.beta_grid, opts.delta_grid);
  result.entropy =
      katok_entropy_estimate(map, *cloud, mu, opts.n_from, opts.n_to, opts.gamma_grid,
                             opts.katok_delta);
  for (const std::string& c : result.capacity.caveats) report.caveats.push_back("capacity: " + c);
  for (const std::string& c : result.entropy.caveats) report.caveats.push_back("entropy: " + c);

  const double h_hat = result.entropy.estimate;
  const double dim_hat = result.capacity.estimate;
  const double rhs = dim_hat * std::max(e_mu, 0.0);
  report.computed["E_mu_hat"] = json_real(e_mu);
  report.computed["h_hat"] = json_real(h_hat);
  report.computed["dim_hat"] = json_real(dim_hat);
  report.computed["rhs"] = json_real(rhs);
  if (e_mu <= 0.0)
    report.caveats.push_back("exponent estimate is nonpositive: right-hand side is nonpositive, "
                             "inequality vacuous");
  report.margin = h_hat - rhs + opts.tolerance;
  report.verdict = report.margin >= 0.0 ? Verdict::Pass : Verdict::Fail;
  return result;
}

namespace {

TheoremReport contraction_chain_core(const MapModel& map, const PointCloud& cloud,
                                     const detail::OrbitFrames& frames,
                                     const ExponentCertificate& cert, std::int32_t n,
                                     double gamma) {
  TheoremReport report;
  report.theorem = "contraction-chain";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, cloud);
  report.inputs["n"] = n;
  report.inputs["gamma"] = json_real(gamma);
  report.inputs["k"] = json_real(cert.k);
  report.inputs["certificate_epsilon"] = json_real(cert.epsilon);

  const double bound = std::pow(cert.k, -static_cast<double>(n - 1)) * gamma;
  const std::size_t count = cloud.size();
  std::int64_t qualifying = 0, violations = 0;
  double margin = kPosInf;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      if (!(frames.bowen(i, j, n, gamma) < gamma)) continue;
      bool chain = true;
      for (std::int32_t s = 0; s < n && chain; ++s)
        chain = frames.step(s + 1).dist(i, j) >= cert.k * frames.step(s).dist(i, j);
      if (!chain) continue;
      ++qualifying;
      const double d0 = frames.step(0).dist(i, j);
      margin = std::min(margin, bound - d0);
      if (d0 > bound) ++violations;
    }
  }
  report.computed["bound"] = json_real(bound);
  report.computed["qualifying_pairs"] = qualifying;
  report.computed["violations"] = violations;
  if (qualifying == 0) report.caveats.push_back("no qualifying pairs; assertion is vacuous");
  report.margin = margin;
  report.verdict = (violations == 0 && margin >= 0.0) ? Verdict::Pass : Verdict::Fail;
  return report;
}

}  // namespace

TheoremReport check_contraction_chain(const MapModel& map, const PointCloud& cloud,
                                      const ExponentCertificate& cert, std::int32_t n,
                                      double gamma) {
  if (n < 1) throw precondition_error("contraction chain needs n >= 1");
  if (!(gamma > 0.0 && gamma < cert.epsilon))
    throw precondition_error("contraction chain needs 0 < gamma < certificate epsilon");
  const detail::OrbitFrames frames(map, cloud, n + 1);
  return contraction_chain_core(map, cloud, frames, cert, n, gamma);
}

TheoremReport check_contraction_chain_range(const MapModel& map, const PointCloud& cloud,
                                            const ExponentCertificate& cert, std::int32_t n_from,
                                            std::int32_t n_to, double gamma) {
  if (n_from < 1 || n_to < n_from)
    throw precondition_error("contraction chain range needs 1 <= n_from <= n_to");
  if (!(gamma > 0.0 && gamma < cert.epsilon))
    throw precondition_error("contraction chain needs 0 < gamma < certificate epsilon");
  const detail::OrbitFrames frames(map, cloud, n_to + 1);

  TheoremReport report;
  report.theorem = "contraction-chain";
  report.tolerance = 0.0;
  report.inputs = inputs_summary(map, cloud);
  report.inputs["n_from"] = n_from;
  report.inputs["n_to"] = n_to;
  report.inputs["gamma"] = json_real(gamma);
  report.inputs["k"] = json_real(cert.k);

  double margin = kPosInf;
  std::int64_t violations = 0, qualifying = 0;
  ordered_json per_n = ordered_json::array();
  for (std::int32_t n = n_from; n <= n_to; ++n) {
    TheoremReport sub = contraction_chain_core(map, cloud, frames, cert, n, gamma);
    ordered_json row;
    row["n"] = n;
    row["margin"] = json_real(sub.margin);
    row["qualifying_pairs"] = sub.computed["qualifying_pairs"];
    row["violations"] = sub.computed["violations"];
    per_n.push_back(row);
    margin = std::min(margin, sub.margin);
    violations += sub.computed["violations"].get<std::int64_t>();
    qualifying += sub.computed["qualifying_pairs"].get<std::int64_t>();
  }
  report.computed["per_n"] = per_n;
  report.computed["qualifying_pairs"] = qualifying;
  report.computed["violations"] = violations;
  if (qualifying == 0) report.caveats.push_back("no qualifying pairs; assertion is vacuous");
  report.margin = margin;
  report.verdict = (violations == 0 && margin >= 0.0) ? Verdict::Pass : Verdict::Fail;
  return report;
}

}  // namespace expanse
