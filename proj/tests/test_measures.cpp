#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "expanse/measures.hpp"
#include "expanse/numeric.hpp"
#include "expanse/rng.hpp"

using namespace expanse;

namespace {

CloudPtr interval_grid(std::int64_t n) {
  return std::make_shared<PointCloud>(grid_cloud(SpaceModel::unit_interval(), n));
}

CloudPtr circle_grid(std::int64_t n) {
  return std::make_shared<PointCloud>(grid_cloud(SpaceModel::circle(), n));
}

}  // namespace

TEST_CASE("dirac puts all mass on one point") {
  auto cloud = interval_grid(5);
  const AtomicMeasure d0 = dirac(cloud, 0);
  const std::int32_t zero[] = {0};
  const std::int32_t others[] = {1, 2, 3, 4};
  CHECK(d0.mass_of(zero) == 1.0);
  CHECK(d0.mass_of(others) == 0.0);
  CHECK(d0.max_atom_weight() == 1.0);
  CHECK_THROWS_AS(dirac(cloud, 9), structural_error);

  const MapModel constant = MapModel::constant(SpaceModel::unit_interval(), Point::real(0.5));
  const AtomicMeasure pushed = pushforward(constant, d0);
  REQUIRE(pushed.atoms().size() == 1);
  CHECK(pushed.atoms()[0].index == 2);
  CHECK(pushed.atoms()[0].weight == 1.0);
}

TEST_CASE("convex_combine merges and validates") {
  auto cloud = interval_grid(5);
  const AtomicMeasure a = dirac(cloud, 1);
  const AtomicMeasure b = dirac(cloud, 3);

  const std::pair<double, AtomicMeasure> identity[] = {{1.0, a}};
  CHECK(convex_combine(identity).atoms().size() == 1);

  const std::pair<double, AtomicMeasure> same[] = {{0.5, a}, {0.5, a}};
  const AtomicMeasure merged = convex_combine(same);
  REQUIRE(merged.atoms().size() == 1);
  CHECK(merged.atoms()[0].weight == 1.0);

  const std::pair<double, AtomicMeasure> mix[] = {{0.25, a}, {0.75, b}};
  const AtomicMeasure m = convex_combine(mix);
  REQUIRE(m.atoms().size() == 2);
  CHECK(m.atoms()[0].index == 1);
  CHECK(m.atoms()[0].weight == 0.25);
  CHECK(m.atoms()[1].index == 3);
  CHECK(m.atoms()[1].weight == 0.75);

  const std::pair<double, AtomicMeasure> bad[] = {{0.25, a}, {0.5, b}};
  CHECK_THROWS_AS(convex_combine(bad), structural_error);
  auto other_cloud = interval_grid(5);
  const std::pair<double, AtomicMeasure> mismatched[] = {{0.5, a}, {0.5, dirac(other_cloud, 0)}};
  CHECK_THROWS_AS(convex_combine(mismatched), structural_error);
}

TEST_CASE("mass_of is normalized and additive") {
  auto cloud = interval_grid(4);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const std::int32_t all[] = {0, 1, 2, 3};
  const std::int32_t one[] = {2};
  const std::int32_t left[] = {0, 1};
  const std::int32_t right[] = {2, 3};
  CHECK(u.mass_of(all) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u.mass_of({}) == 0.0);
  CHECK(u.mass_of(one) == 0.25);
  CHECK(u.mass_of(left) + u.mass_of(right) == doctest::Approx(u.mass_of(all)).epsilon(1e-15));
  CHECK(u.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pushforward under a grid rotation permutes the uniform measure") {
  auto cloud = circle_grid(8);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const MapModel rot = MapModel::rotation(0.25);  // 2/8 grid steps
  const AtomicMeasure pushed = pushforward(rot, u);
  REQUIRE(pushed.atoms().size() == 8);
  for (const Atom& a : pushed.atoms()) CHECK(a.weight == 0.125);
  CHECK(invariance_defect(rot, u) == 0.0);
}

TEST_CASE("pushforward of the uniform measure under doubling concentrates on even points") {
  auto cloud = circle_grid(4);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const MapModel dbl = MapModel::times_m(2);
  const AtomicMeasure pushed = pushforward(dbl, u);
  REQUIRE(pushed.atoms().size() == 2);
  CHECK(pushed.atoms()[0].index == 0);  // x = 0
  CHECK(pushed.atoms()[0].weight == 0.5);
  CHECK(pushed.atoms()[1].index == 2);  // x = 0.5
  CHECK(pushed.atoms()[1].weight == 0.5);

  // 2-to-1 image counting: each even grid point receives two preimages of
  // weight 1/n, odd points none, so the total-variation defect is exactly
  // (1/2)(n/2 * 1/n + n/2 * 1/n) = 1/2 on every dyadic grid.
  for (std::int64_t n : {4, 64, 1024}) {
    auto c = circle_grid(n);
    CHECK(invariance_defect(dbl, AtomicMeasure::uniform(c)) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("pushforward rejects images that miss the cloud") {
  auto cloud = circle_grid(64);
  const AtomicMeasure u = AtomicMeasure::uniform(cloud);
  const MapModel rot = MapModel::rotation(0.3183);  // lands between grid points
  CHECK_THROWS_AS(pushforward(rot, u), precondition_error);
}

TEST_CASE("dirac at a moved point has defect 1") {
  auto cloud = circle_grid(8);
  const MapModel rot = MapModel::rotation(0.25);
  CHECK(invariance_defect(rot, dirac(cloud, 0)) == 1.0);
}

TEST_CASE("pushforward preserves total mass") {
  auto cloud = circle_grid(16);
  SplitMix64 rng(23);
  std::vector<Atom> atoms;
  for (std::int32_t i = 0; i < 16; i += 2) atoms.push_back(Atom{i, 0.05 + rng.next_unit()});
  const AtomicMeasure mu = AtomicMeasure::from_atoms_renormalized(cloud, std::move(atoms));
  const AtomicMeasure pushed = pushforward(MapModel::times_m(2), mu);
  CHECK(pushed.total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-14));
}

TEST_CASE("bernoulli sample weights") {
  const SpaceModel sym = SpaceModel::symbol_space(2, 3);
  GeneratorSpec gen;
  gen.kind = MeasureGenerator::Bernoulli;

  gen.p = 0.5;
  const SampledMeasure half = sample_measure(sym, gen, 0, 1);
  REQUIRE(half.cloud->size() == 8);
  REQUIRE(half.measure.atoms().size() == 8);
  for (const Atom& a : half.measure.atoms()) CHECK(a.weight == 0.125);

  gen.p = 1.0;
  const SampledMeasure sure = sample_measure(sym, gen, 0, 1);
  REQUIRE(sure.measure.atoms().size() == 1);
  CHECK(sure.cloud->points[static_cast<std::size_t>(sure.measure.atoms()[0].index)].as_word() ==
        Word{0, 0, 0});

  gen.p = 0.25;
  const SampledMeasure quarter = sample_measure(sym, gen, 0, 1);
  double check = 0.0;
  for (const Atom& a : quarter.measure.atoms()) check += a.weight;
  CHECK(check == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cantor construction places mass on middle-thirds endpoints") {
  GeneratorSpec gen;
  gen.kind = MeasureGenerator::CantorMiddleThirds;
  gen.depth = 2;
  const SampledMeasure s = sample_measure(SpaceModel::unit_interval(), gen, 0, 1);
  REQUIRE(s.cloud->size() == 4);
  CHECK(s.cloud->points[0].as_real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.cloud->points[1].as_real() == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(s.cloud->points[2].as_real() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.cloud->points[3].as_real() == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  for (const Atom& a : s.measure.atoms()) CHECK(a.weight == 0.25);
  CHECK(s.cloud->resolution == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("iid samples are deterministic in the seed") {
  GeneratorSpec gen;
  gen.kind = MeasureGenerator::UniformIid;
  const SampledMeasure a = sample_measure(SpaceModel::circle(), gen, 64, 99);
  const SampledMeasure b = sample_measure(SpaceModel::circle(), gen, 64, 99);
  const SampledMeasure c = sample_measure(SpaceModel::circle(), gen, 64, 100);
  REQUIRE(a.cloud->size() == b.cloud->size());
  for (std::size_t i = 0; i < a.cloud->size(); ++i)
    CHECK(a.cloud->points[i].as_real() == b.cloud->points[i].as_real());
  bool identical = a.cloud->size() == c.cloud->size();
  if (identical)
    for (std::size_t i = 0; i < a.cloud->size(); ++i)
      identical = identical && a.cloud->points[i].as_real() == c.cloud->points[i].as_real();
  CHECK(!identical);
}

TEST_CASE("measure csv round trip") {
  GeneratorSpec gen;
  gen.kind = MeasureGenerator::Bernoulli;
  gen.p = 0.3;
  const SampledMeasure s = sample_measure(SpaceModel::symbol_space(2, 4), gen, 0, 1);
  std::stringstream buffer;
  write_measure_csv(buffer, s.measure);
  const AtomicMeasure loaded = load_measure_csv(buffer, SpaceModel::symbol_space(2, 4));
  REQUIRE(loaded.atoms().size() == s.measure.atoms().size());
  for (std::size_t i = 0; i < loaded.atoms().size(); ++i) {
    const Point& p = loaded.cloud().points[static_cast<std::size_t>(loaded.atoms()[i].index)];
    const Point& q = s.measure.cloud().points[static_cast<std::size_t>(s.measure.atoms()[i].index)];
    CHECK(p == q);
    CHECK(loaded.atoms()[i].weight == doctest::Approx(s.measure.atoms()[i].weight).epsilon(1e-12));
  }
}

TEST_CASE("convex_combine is associative up to merging") {
  auto cloud = interval_grid(8);
  const AtomicMeasure a = dirac(cloud, 1);
  const AtomicMeasure b = dirac(cloud, 3);
  const AtomicMeasure c = dirac(cloud, 5);
  // 0.2 a + 0.3 b + 0.5 c, combined flat and nested
  const std::pair<double, AtomicMeasure> flat[] = {{0.2, a}, {0.3, b}, {0.5, c}};
  const AtomicMeasure direct = convex_combine(flat);
  const std::pair<double, AtomicMeasure> inner[] = {{0.4, a}, {0.6, b}};
  const AtomicMeasure ab = convex_combine(inner);
  const std::pair<double, AtomicMeasure> outer[] = {{0.5, ab}, {0.5, c}};
  const AtomicMeasure nested = convex_combine(outer);
  REQUIRE(direct.atoms().size() == nested.atoms().size());
  for (std::size_t i = 0; i < direct.atoms().size(); ++i) {
    CHECK(direct.atoms()[i].index == nested.atoms()[i].index);
    CHECK(direct.atoms()[i].weight ==
          doctest::Approx(nested.atoms()[i].weight).epsilon(1e-12));
  }
}

TEST_CASE("measure construction rejects bad input") {
  auto cloud = interval_grid(4);
  CHECK_THROWS_AS(AtomicMeasure::from_atoms(cloud, {Atom{0, 0.5}}), structural_error);
  CHECK_THROWS_AS(AtomicMeasure::from_atoms(cloud, {Atom{0, 0.5}, Atom{7, 0.5}}), structural_error);
  CHECK_THROWS_AS(AtomicMeasure::from_atoms(cloud, {Atom{0, -0.5}, Atom{1, 1.5}}), structural_error);
  // duplicate indices merge
  const AtomicMeasure merged = AtomicMeasure::from_atoms(cloud, {Atom{2, 0.5}, Atom{2, 0.5}});
  REQUIRE(merged.atoms().size() == 1);
  CHECK(merged.atoms()[0].weight == 1.0);
}
