#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "expanse/errors.hpp"

namespace expanse {

using Word = std::vector<std::int32_t>;

// One coordinate per metric axis: a real in [0,1] / [0,1) for interval and
// circle axes, a word for symbol axes.
using Coordinate = std::variant<double, Word>;

struct Point {
  std::vector<Coordinate> coords;

  static Point real(double x) { return Point{{Coordinate{x}}}; }
  static Point word(Word w) { return Point{{Coordinate{std::move(w)}}}; }
  static Point tuple(std::span<const Point> parts);

  double as_real() const;
  const Word& as_word() const;
  bool operator==(const Point& other) const { return coords == other.coords; }
};

// Strict weak order used for deduplication and lookup tables.
bool point_less(const Point& a, const Point& b);

enum class AxisKind { UnitInterval, Circle, Symbol };

struct Axis {
  AxisKind kind = AxisKind::UnitInterval;
  std::int32_t alphabet = 0;     // symbol axes only
  std::int32_t word_length = 0;  // symbol axes only
  bool operator==(const Axis&) const = default;
};

// Compact metric space model: unit interval, circle of unit circumference,
// symbol space with the 2^-j first-difference metric, or a product of those
// under the max metric. Products are flattened into a list of axes.
class SpaceModel {
 public:
  SpaceModel() : axes_{Axis{AxisKind::UnitInterval, 0, 0}} {}

  static SpaceModel unit_interval();
  static SpaceModel circle();
  static SpaceModel symbol_space(std::int32_t alphabet, std::int32_t word_length);
  static SpaceModel product(std::span<const SpaceModel> factors);

  const std::vector<Axis>& axes() const { return axes_; }
  bool single_real_axis() const {
    return axes_.size() == 1 && axes_[0].kind != AxisKind::Symbol;
  }
  bool single_symbol_axis() const {
    return axes_.size() == 1 && axes_[0].kind == AxisKind::Symbol;
  }
  const Axis& axis0() const { return axes_.front(); }

  // structural_error when the point does not fit the model
  void validate_point(const Point& p) const;
  // validates and canonicalizes (-0.0 becomes +0.0)
  Point normalize_point(Point p) const;

  double distance(const Point& x, const Point& y) const;
  double diameter() const;  // sup of pairwise distances
  std::string describe() const;
  bool operator==(const SpaceModel&) const = default;

 private:
  std::vector<Axis> axes_;
};

struct PointCloud {
  SpaceModel space;
  std::vector<Point> points;
  // Covering radius of the sample in its intended domain: analytic for
  // grids, declared by generators, max nearest-neighbour surrogate
  // otherwise. The scale below which the cloud says nothing.
  double resolution = 0.0;

  std::size_t size() const { return points.size(); }
};

// Deduplicates exact duplicates (distance zero), keeping first occurrences.
PointCloud make_cloud(SpaceModel space, std::vector<Point> points,
                      std::optional<double> declared_resolution = std::nullopt);

// Equispaced deterministic sample: n >= 2 points on interval/circle; on a
// symbol space, all m^L words (requires n >= m^L). Products are not
// griddable.
PointCloud grid_cloud(const SpaceModel& space, std::int64_t n);

double distance(const SpaceModel& space, const Point& x, const Point& y);

struct PairEntry {
  std::int32_t i = 0;
  std::int32_t j = 0;
  double dist = 0.0;
};

// All ordered pairs (i, j), i != j, with 0 < d < epsilon (strict, matching
// the open ball), in lexicographic (i, j) order.
std::vector<PairEntry> pairs_within(const PointCloud& cloud, double epsilon);

// Largest nearest-neighbour distance (0 for singleton clouds).
double max_nearest_neighbor_distance(const PointCloud& cloud);
// Smallest positive pairwise distance; +inf when none exists.
double min_positive_distance(const PointCloud& cloud);

}  // namespace expanse
