#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "expanse/spaces.hpp"

namespace expanse {

enum class ShiftMode { PadZero, Cyclic };

// Dynamical map models T : X -> X over a SpaceModel.
class MapModel {
 public:
  enum class Kind {
    TimesM,          // x -> m x mod 1 on the circle
    Rotation,        // x -> x + alpha mod 1 on the circle
    Tent,            // slope s in (0,2], fold at 1/2, on [0,1]
    PiecewiseLinear, // breakpoint/value interpolation on [0,1]
    Contraction,     // x -> c x on [0,1]
    Constant,
    Shift,           // left shift on words, padded or cyclic
    LookupTable,     // explicit point -> point table over a cloud
  };

  static MapModel times_m(std::int32_t m);
  static MapModel rotation(double alpha);
  static MapModel tent(double slope);
  static MapModel piecewise_linear(std::vector<double> breakpoints,
                                   std::vector<double> values);
  static MapModel contraction(double c);
  static MapModel constant(SpaceModel space, Point target);
  static MapModel shift(const SpaceModel& symbol_space, ShiftMode mode = ShiftMode::PadZero);
  static MapModel lookup_table(std::shared_ptr<const PointCloud> cloud,
                               std::vector<std::int32_t> image_indices);

  Kind kind() const { return kind_; }
  const SpaceModel& space() const { return space_; }

  Point apply(const Point& x) const;
  // [x, T(x), ..., T^{n-1}(x)], n >= 1
  std::vector<Point> orbit(const Point& x, std::int32_t n) const;

  // Scalar fast path; only valid when space().single_real_axis().
  double apply_real(double x) const;

  bool distance_preserving() const { return kind_ == Kind::Rotation; }
  // Lookup tables carry no continuity guarantee; every other model is a
  // continuous map of its compact space.
  bool continuous_model() const { return kind_ != Kind::LookupTable; }
  std::string describe() const;

 private:
  MapModel() = default;

  Kind kind_ = Kind::Rotation;
  SpaceModel space_;
  // parameters (only the ones for kind_ are meaningful)
  std::int32_t m_ = 2;
  double alpha_ = 0.0;
  double slope_ = 1.0;
  double c_ = 0.5;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  Point target_;
  ShiftMode shift_mode_ = ShiftMode::PadZero;
  std::shared_ptr<const PointCloud> table_cloud_;
  std::vector<std::int32_t> table_image_;
  std::vector<std::int32_t> table_order_;  // cloud indices sorted by point
};

// max over 0 <= i < n of d(T^i x, T^i y); n = 1 is the ordinary distance.
double bowen_distance(const MapModel& map, const Point& x, const Point& y, std::int32_t n);

}  // namespace expanse
