#include <doctest.h>

#include <cmath>
#include <memory>

#include "expanse/verify.hpp"
#include "oracles.hpp"

using namespace expanse;

namespace {

CloudPtr circle_grid(std::int64_t n) {
  return std::make_shared<PointCloud>(grid_cloud(SpaceModel::circle(), n));
}

CloudPtr interval_grid(std::int64_t n) {
  return std::make_shared<PointCloud>(grid_cloud(SpaceModel::unit_interval(), n));
}

std::vector<AtomicMeasure> standard_family(const CloudPtr& cloud, std::uint64_t seed) {
  std::vector<AtomicMeasure> family;
  family.push_back(AtomicMeasure::uniform(cloud));
  SplitMix64 rng = seed_stream(seed, "family/diracs");
  for (std::int32_t idx : rng.sample_indices(static_cast<std::int64_t>(cloud->size()), 8))
    family.push_back(dirac(cloud, idx));
  return family;
}

}  // namespace

TEST_CASE("theorem A holds with zero gap for the doubling map") {
  auto cloud = circle_grid(1024);
  const auto grid = default_epsilon_grid(*cloud);
  const TheoremReport report = check_theorem_A(MapModel::times_m(2), cloud,
                                               standard_family(cloud, 1), grid);
  CHECK(report.verdict == Verdict::Pass);
  CHECK(report.computed["gap"].get<double>() == 0.0);
  CHECK(report.computed["E_map"].get<double>() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(report.computed["E_witness"].get<double>() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("theorem A handles the tent fold via collapsed pairs") {
  auto cloud = interval_grid(1024);
  const auto grid = default_epsilon_grid(*cloud);
  const TheoremReport report =
      check_theorem_A(MapModel::tent(2.0), cloud, standard_family(cloud, 2), grid);
  CHECK(report.verdict == Verdict::Pass);
  // mirror pairs across the fold collapse: both sides sit at -inf
  CHECK(report.computed["E_map"] == "-inf");
  CHECK(report.computed["min_E_mu"] == "-inf");
  CHECK(report.computed["gap"].get<double>() == 0.0);
}

TEST_CASE("theorem A on rotations has everything at zero") {
  auto cloud = circle_grid(512);
  const auto grid = default_epsilon_grid(*cloud);
  const TheoremReport report =
      check_theorem_A(MapModel::rotation(0.25), cloud, standard_family(cloud, 3), grid);
  CHECK(report.verdict == Verdict::Pass);
  CHECK(report.computed["E_map"].get<double>() == 0.0);
  CHECK(report.computed["gap"].get<double>() == 0.0);
}

TEST_CASE("theorem A requires a full-support member") {
  auto cloud = circle_grid(64);
  std::vector<AtomicMeasure> family = {dirac(cloud, 0), dirac(cloud, 5)};
  const auto grid = default_epsilon_grid(*cloud);
  CHECK_THROWS_AS(check_theorem_A(MapModel::times_m(2), cloud, family, grid),
                  precondition_error);
}

TEST_CASE("convex law holds exactly on random triples") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 30; ++trial) {
    CloudPtr cloud = oracles::random_cloud(rng, 30);
    const MapModel map = oracles::random_lookup(rng, cloud);
    const AtomicMeasure mu = oracles::random_measure(rng, cloud);
    const AtomicMeasure nu = oracles::random_measure(rng, cloud);
    const double t = 0.01 + 0.98 * rng.next_unit();
    ProfileOptions opts;
    opts.floor_factor = 1.0;
    const auto grid = default_epsilon_grid(*cloud, opts);
    const TheoremReport report = check_convex_law(map, cloud, mu, nu, t, grid, opts);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.margin == 0.0);
  }
}

TEST_CASE("convex law is independent of t") {
  auto cloud = circle_grid(256);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const AtomicMeasure d = dirac(cloud, 0);
  const auto grid = default_epsilon_grid(*cloud);
  const MapModel map = MapModel::times_m(2);
  for (double t : {0.01, 0.5, 0.99}) {
    const TheoremReport report = check_convex_law(map, cloud, d, u, t, grid);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.margin == 0.0);
  }
  CHECK_THROWS_AS(check_convex_law(map, cloud, d, u, 0.0, grid), precondition_error);
}

TEST_CASE("monotone law on nested supports") {
  SplitMix64 rng(808);
  for (int trial = 0; trial < 30; ++trial) {
    CloudPtr cloud = oracles::random_cloud(rng, 30);
    const MapModel map = oracles::random_lookup(rng, cloud);
    const AtomicMeasure nu = oracles::random_measure(rng, cloud);
    std::vector<Atom> sub;
    for (const Atom& a : nu.atoms())
      if (rng.next_below(2) == 0) sub.push_back(a);
    if (sub.empty()) sub.push_back(nu.atoms()[0]);
    const AtomicMeasure mu = AtomicMeasure::from_atoms_renormalized(cloud, sub);
    ProfileOptions opts;
    opts.floor_factor = 1.0;
    const auto grid = default_epsilon_grid(*cloud, opts);
    const TheoremReport report = check_monotone_law(map, cloud, mu, nu, grid, opts);
    CHECK(report.verdict == Verdict::Pass);
    CHECK(report.margin >= 0.0);
  }
}

TEST_CASE("monotone law rejects non-nested supports") {
  auto cloud = circle_grid(64);
  const auto grid = default_epsilon_grid(*cloud);
  CHECK_THROWS_AS(check_monotone_law(MapModel::times_m(2), cloud, dirac(cloud, 0),
                                     dirac(cloud, 5), grid),
                  precondition_error);
}

TEST_CASE("isometry law passes exactly for rotations") {
  auto cloud = circle_grid(256);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const auto grid = default_epsilon_grid(*cloud);
  const TheoremReport rot = check_isometry_law(MapModel::rotation(0.25), cloud, u, grid);
  CHECK(rot.verdict == Verdict::Pass);
  CHECK(rot.margin == 0.0);
  const TheoremReport dbl = check_isometry_law(MapModel::times_m(2), cloud, u, grid);
  CHECK(dbl.verdict == Verdict::NotApplicable);
}

TEST_CASE("phi mass curves against the dyadic pullback oracle") {
  auto cloud = circle_grid(4096);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const MapModel map = MapModel::times_m(2);
  const PhiMassCurve curve = phi_mass_curve(map, u, Point::real(0.0), 0.05, 10);
  REQUIRE(curve.masses.size() == 10);
  for (std::int32_t n = 1; n <= 10; ++n)
    CHECK(curve.masses[static_cast<std::size_t>(n - 1)] ==
          oracles::dyadic_phi_mass(4096, 0.05, n));
  for (std::size_t t = 1; t < curve.masses.size(); ++t)
    CHECK(curve.masses[t] <= curve.masses[t - 1]);

  // nondecreasing in epsilon
  const PhiMassCurve wider = phi_mass_curve(map, u, Point::real(0.0), 0.1, 10);
  for (std::size_t t = 0; t < curve.masses.size(); ++t)
    CHECK(wider.masses[t] >= curve.masses[t]);
}

TEST_CASE("phi mass curve rejects centers outside the cloud") {
  auto cloud = circle_grid(64);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  CHECK_THROWS_AS(phi_mass_curve(MapModel::times_m(2), u, Point::real(0.0001), 0.1, 4),
                  structural_error);
  // epsilon below twice the resolution
  CHECK_THROWS_AS(phi_mass_curve(MapModel::times_m(2), u, Point::real(0.0), 0.001, 4),
                  precondition_error);
}

TEST_CASE("phi mass curve at n = 1 is the closed ball mass") {
  auto cloud = circle_grid(512);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const PhiMassCurve curve = phi_mass_curve(MapModel::rotation(0.25), u, Point::real(0.25), 0.1, 6);
  KahanSum oracle;
  for (const Atom& a : u.atoms())
    if (cloud->space.distance(cloud->points[static_cast<std::size_t>(a.index)],
                              Point::real(0.25)) <= 0.1)
      oracle.add(a.weight);
  CHECK(curve.masses[0] == oracle.value());
  // isometry: constant in n
  for (double m : curve.masses) CHECK(m == curve.masses[0]);
}

TEST_CASE("theorem B passes for the doubling map surrogate") {
  auto cloud = circle_grid(4096);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  TheoremBOptions opts;
  opts.assume_invariant = true;
  opts.n_max = 16;
  opts.x_sample_count = 8;
  const TheoremBResult result = check_theorem_B(MapModel::times_m(2), cloud, u, 42, opts);
  CHECK(result.report.verdict == Verdict::Pass);
  CHECK(result.report.margin >= 0.0);
  const double rate = result.report.computed["decay_rate_min"].get<double>();
  CHECK(std::fabs(rate - std::log(2.0)) < 0.1);
  CHECK(result.curves.size() == 8);

  // tripling decays at log 3
  const TheoremBResult times3 = check_theorem_B(MapModel::times_m(3), cloud, u, 42, opts);
  CHECK(times3.report.verdict == Verdict::Pass);
  CHECK(std::fabs(times3.report.computed["decay_rate_min"].get<double>() - std::log(3.0)) < 0.15);
}

TEST_CASE("theorem B is not applicable without a certificate") {
  auto cloud = circle_grid(512);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const TheoremBResult result = check_theorem_B(MapModel::rotation(0.25), cloud, u, 7, {});
  CHECK(result.report.verdict == Verdict::NotApplicable);
  CHECK(result.curves.empty());
}

TEST_CASE("theorem B demands invariance unless declared") {
  auto cloud = circle_grid(1024);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  TheoremBOptions opts;
  opts.assume_invariant = false;
  // the dyadic uniform surrogate has pushforward defect 1/2 under doubling
  CHECK_THROWS_AS(check_theorem_B(MapModel::times_m(2), cloud, u, 1, opts), precondition_error);
}

TEST_CASE("theorem C equality case for the doubling map") {
  auto cloud = circle_grid(4096);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  TheoremCOptions opts;
  opts.beta_grid = {0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
  opts.delta_grid = {0.05, 0.02, 0.01};
  opts.gamma_grid = {0.2, 0.1, 0.05};
  opts.n_from = 2;
  opts.n_to = 6;
  opts.assume_invariant = true;
  const TheoremCResult result = check_theorem_C(MapModel::times_m(2), cloud, u, opts);
  CHECK(result.report.verdict == Verdict::Pass);
  CHECK(result.report.margin >= 0.0);
  CHECK(result.exponent_profile.scalar_estimate() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(result.capacity.estimate > 0.9);
  CHECK(result.capacity.estimate < 1.1);
  CHECK(result.entropy.estimate > 0.55);
  CHECK(result.entropy.estimate < 0.8);
}

TEST_CASE("theorem C vacuous case for rotations") {
  auto cloud = circle_grid(4096);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  TheoremCOptions opts;
  opts.beta_grid = {0.0625, 0.03125, 0.015625, 0.0078125};
  opts.delta_grid = {0.05, 0.01};
  opts.gamma_grid = {0.2, 0.1};
  opts.n_from = 2;
  opts.n_to = 6;
  // 1024/4096 grid steps: an exact permutation, defect 0, no declaration
  const TheoremCResult result =
      check_theorem_C(MapModel::rotation(1024.0 / 4096.0), cloud, u, opts);
  CHECK(result.report.verdict == Verdict::Pass);
  CHECK(result.entropy.estimate <= 0.05);
  bool vacuous = false;
  for (const auto& c : result.report.caveats)
    vacuous = vacuous || c.find("nonpositive") != std::string::npos;
  CHECK(vacuous);
  CHECK(result.report.computed["invariance_defect"].get<double>() == 0.0);
}

TEST_CASE("theorem C rejects lookup tables and infinite exponents") {
  SplitMix64 rng(5);
  auto cloud = circle_grid(64);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  TheoremCOptions opts;
  opts.assume_invariant = true;
  const MapModel lookup = oracles::random_lookup(rng, cloud);
  CHECK_THROWS_AS(check_theorem_C(lookup, cloud, u, opts), precondition_error);

  auto icloud = interval_grid(256);
  const AtomicMeasure iu = AtomicMeasure::uniform(icloud);
  TheoremCOptions topts;
  topts.assume_invariant = true;
  topts.beta_grid = {0.125, 0.0625, 0.03125, 0.015625};
  topts.delta_grid = {0.05, 0.01};
  topts.gamma_grid = {0.2, 0.1};
  // tent(2) collapses mirror pairs: the exponent estimate is -inf
  CHECK_THROWS_AS(check_theorem_C(MapModel::tent(2.0), icloud, iu, topts), precondition_error);
}

TEST_CASE("contraction chain for the doubling map") {
  auto cloud = circle_grid(2048);
  ExponentCertificate cert;
  cert.k = std::sqrt(2.0);
  cert.epsilon = 0.2;
  const MapModel map = MapModel::times_m(2);

  const TheoremReport single = check_contraction_chain(map, *cloud, cert, 5, 0.1);
  CHECK(single.verdict == Verdict::Pass);
  CHECK(single.computed["violations"].get<std::int64_t>() == 0);
  CHECK(single.computed["qualifying_pairs"].get<std::int64_t>() > 0);
  // actual doubling contracts to 2^-(n-1) gamma, well inside k^-(n-1) gamma
  const double analytic =
      (std::pow(std::sqrt(2.0), -4.0) - std::pow(2.0, -4.0)) * 0.1;
  CHECK(single.margin >= analytic - 1e-12);

  const TheoremReport range = check_contraction_chain_range(map, *cloud, cert, 2, 6, 0.1);
  CHECK(range.verdict == Verdict::Pass);
  CHECK(range.computed["violations"].get<std::int64_t>() == 0);

  // n = 1 reduces to membership in the gamma-ball
  const TheoremReport base = check_contraction_chain(map, *cloud, cert, 1, 0.1);
  CHECK(base.verdict == Verdict::Pass);

  CHECK_THROWS_AS(check_contraction_chain(map, *cloud, cert, 3, 0.3), precondition_error);
}

TEST_CASE("contraction chain is vacuous for rotations") {
  auto cloud = circle_grid(512);
  ExponentCertificate cert;
  cert.k = 1.5;
  cert.epsilon = 0.2;
  const TheoremReport report =
      check_contraction_chain(MapModel::rotation(0.25), *cloud, cert, 4, 0.1);
  CHECK(report.verdict == Verdict::Pass);
  CHECK(report.computed["qualifying_pairs"].get<std::int64_t>() == 0);
  CHECK(report.margin == kPosInf);
}

TEST_CASE("theorem reports serialize with stable field order") {
  auto cloud = circle_grid(128);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const auto grid = default_epsilon_grid(*cloud);
  const TheoremReport report = check_isometry_law(MapModel::rotation(0.25), cloud, u, grid);
  const ordered_json j = report.to_json();
  auto it = j.begin();
  CHECK(it.key() == "theorem");
  ++it;
  CHECK(it.key() == "verdict");
  ++it;
  CHECK(it.key() == "margin");
  CHECK(j["verdict"] == "pass");
}
