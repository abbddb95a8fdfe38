#include <doctest.h>

#include <cmath>
#include <memory>

#include "expanse/maps.hpp"
#include "expanse/rng.hpp"

using namespace expanse;

TEST_CASE("apply on the standard models") {
  CHECK(MapModel::times_m(2).apply(Point::real(0.3)).as_real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(MapModel::rotation(0.25).apply(Point::real(0.9)).as_real() == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(MapModel::tent(2.0).apply(Point::real(0.75)).as_real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(MapModel::contraction(0.5).apply(Point::real(0.8)).as_real() == 0.4);

  const MapModel constant = MapModel::constant(SpaceModel::unit_interval(), Point::real(0.3));
  CHECK(constant.apply(Point::real(0.9)).as_real() == 0.3);

  const SpaceModel sym = SpaceModel::symbol_space(2, 4);
  CHECK(MapModel::shift(sym).apply(Point::word({1, 0, 1, 1})).as_word() == Word{0, 1, 1, 0});
  CHECK(MapModel::shift(sym, ShiftMode::Cyclic).apply(Point::word({1, 0, 1, 1})).as_word() ==
        Word{0, 1, 1, 1});
}

TEST_CASE("piecewise linear interpolation and validation") {
  // tent of slope 2 written as breakpoints/values
  const MapModel pwl = MapModel::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  CHECK(pwl.apply(Point::real(0.25)).as_real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pwl.apply(Point::real(0.75)).as_real() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pwl.apply(Point::real(0.0)).as_real() == 0.0);
  CHECK(pwl.apply(Point::real(1.0)).as_real() == 0.0);

  CHECK_THROWS_AS(MapModel::piecewise_linear({0.0, 0.5}, {0.0, 0.5, 1.0}), structural_error);
  CHECK_THROWS_AS(MapModel::piecewise_linear({0.0, 0.6, 0.5, 1.0}, {0.0, 0.1, 0.2, 0.3}),
                  structural_error);
  CHECK_THROWS_AS(MapModel::piecewise_linear({0.0, 1.0}, {0.0, 1.5}), structural_error);
  CHECK_THROWS_AS(MapModel::piecewise_linear({0.1, 1.0}, {0.0, 1.0}), structural_error);
}

TEST_CASE("tent slopes above 2 are rejected") {
  CHECK_THROWS_AS(MapModel::tent(2.5), structural_error);
  CHECK_THROWS_AS(MapModel::tent(0.0), structural_error);
  CHECK_NOTHROW(MapModel::tent(2.0));
}

TEST_CASE("maps keep their domains") {
  const PointCloud interval = grid_cloud(SpaceModel::unit_interval(), 101);
  for (const MapModel& map :
       {MapModel::tent(1.7), MapModel::contraction(0.9),
        MapModel::piecewise_linear({0.0, 0.3, 1.0}, {0.2, 0.9, 0.1})})
    for (const Point& p : interval.points) CHECK_NOTHROW(map.space().validate_point(map.apply(p)));

  const PointCloud circle = grid_cloud(SpaceModel::circle(), 97);
  for (const MapModel& map : {MapModel::times_m(3), MapModel::rotation(0.731)})
    for (const Point& p : circle.points) CHECK_NOTHROW(map.space().validate_point(map.apply(p)));
}

TEST_CASE("orbits") {
  const auto orbit2 = MapModel::times_m(2).orbit(Point::real(0.1), 3);
  REQUIRE(orbit2.size() == 3);
  CHECK(orbit2[0].as_real() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(orbit2[1].as_real() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(orbit2[2].as_real() == doctest::Approx(0.4).epsilon(1e-15));

  const auto orbit_rot = MapModel::rotation(0.5).orbit(Point::real(0.0), 4);
  CHECK(orbit_rot[0].as_real() == 0.0);
  CHECK(orbit_rot[1].as_real() == 0.5);
  CHECK(orbit_rot[2].as_real() == 0.0);
  CHECK(orbit_rot[3].as_real() == 0.5);

  const MapModel constant = MapModel::constant(SpaceModel::unit_interval(), Point::real(0.3));
  const auto orbit_const = constant.orbit(Point::real(0.9), 3);
  CHECK(orbit_const[0].as_real() == 0.9);
  CHECK(orbit_const[1].as_real() == 0.3);
  CHECK(orbit_const[2].as_real() == 0.3);

  CHECK_THROWS_AS(constant.orbit(Point::real(0.1), 0), precondition_error);
}

TEST_CASE("bowen distance collapses to the metric at n = 1") {
  SplitMix64 rng(17);
  const MapModel map = MapModel::times_m(2);
  for (int i = 0; i < 50; ++i) {
    const Point x = Point::real(rng.next_unit());
    const Point y = Point::real(rng.next_unit());
    CHECK(bowen_distance(map, x, y, 1) == map.space().distance(x, y));
  }
}

TEST_CASE("rotations are isometries for the bowen distance") {
  // dyadic angle on a dyadic grid: exact arithmetic
  const MapModel rot = MapModel::rotation(0.25);
  const PointCloud cloud = grid_cloud(SpaceModel::circle(), 64);
  for (std::size_t i = 0; i < cloud.size(); i += 5)
    for (std::size_t j = i + 1; j < cloud.size(); j += 7) {
      const double d = cloud.space.distance(cloud.points[i], cloud.points[j]);
      for (std::int32_t n : {1, 3, 6})
        CHECK(bowen_distance(rot, cloud.points[i], cloud.points[j], n) ==
              doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("doubling map bowen distance on close pairs") {
  const MapModel map = MapModel::times_m(2);
  // distances 0.01, 0.02, 0.04, 0.08 along the orbit
  CHECK(bowen_distance(map, Point::real(0.0), Point::real(0.01), 4) ==
        doctest::Approx(0.08).epsilon(1e-12));
  // monotone in n
  double prev = 0.0;
  for (std::int32_t n = 1; n <= 6; ++n) {
    const double d = bowen_distance(map, Point::real(0.3), Point::real(0.31), n);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("times_m expands exactly below the safe scale") {
  const MapModel map = MapModel::times_m(2);
  const PointCloud cloud = grid_cloud(SpaceModel::circle(), 512);
  for (std::int32_t n : {2, 3, 4}) {
    const double safe = 1.0 / (2.0 * std::pow(2.0, n));
    for (std::size_t i = 0; i < cloud.size(); i += 3) {
      for (std::size_t j = i + 1; j < cloud.size(); ++j) {
        const double d = cloud.space.distance(cloud.points[i], cloud.points[j]);
        if (!(d > 0.0 && d < safe)) continue;
        const double expected = std::pow(2.0, n - 1) * d;
        CHECK(bowen_distance(map, cloud.points[i], cloud.points[j], n) ==
              doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("lookup tables hit and miss") {
  auto cloud = std::make_shared<PointCloud>(grid_cloud(SpaceModel::unit_interval(), 5));
  const MapModel map = MapModel::lookup_table(cloud, {4, 3, 2, 1, 0});
  CHECK(map.apply(Point::real(0.0)).as_real() == 1.0);
  CHECK(map.apply(Point::real(0.25)).as_real() == 0.75);
  CHECK_THROWS_AS(map.apply(Point::real(0.1)), structural_error);
  CHECK(!map.continuous_model());

  CHECK_THROWS_AS(MapModel::lookup_table(cloud, {0, 1}), structural_error);
  CHECK_THROWS_AS(MapModel::lookup_table(cloud, {0, 1, 2, 3, 9}), structural_error);
}

TEST_CASE("model constructor validation") {
  CHECK_THROWS_AS(MapModel::times_m(1), structural_error);
  CHECK_THROWS_AS(MapModel::rotation(1.0), structural_error);
  CHECK_THROWS_AS(MapModel::contraction(1.0), structural_error);
  CHECK_THROWS_AS(MapModel::shift(SpaceModel::circle()), structural_error);
  CHECK(MapModel::rotation(0.3).distance_preserving());
  CHECK(!MapModel::times_m(2).distance_preserving());
}
