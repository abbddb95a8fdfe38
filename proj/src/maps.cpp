#include "expanse/maps.hpp"

#include <algorithm>
#include <cmath>

#include "expanse/numeric.hpp"

namespace expanse {

namespace {

// Mod-1 normalization into [0,1). Results within 1e-15 of 1.0 are snapped
// to 0.0 so wrap-around rounding cannot produce a spurious distance-1/2.
double mod1(double x) {
  double m = x - std::floor(x);
  if (m >= 1.0 - 1e-15) m = 0.0;
  if (m < 0.0) m = 0.0;
  return m;
}

}  // namespace

MapModel MapModel::times_m(std::int32_t m) {
  if (m < 2) throw structural_error("times_m needs m >= 2");
  MapModel map;
  map.kind_ = Kind::TimesM;
  map.space_ = SpaceModel::circle();
  map.m_ = m;
  return map;
}

MapModel MapModel::rotation(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw structural_error("rotation needs alpha in [0,1)");
  MapModel map;
  map.kind_ = Kind::Rotation;
  map.space_ = SpaceModel::circle();
  map.alpha_ = alpha;
  return map;
}

MapModel MapModel::tent(double slope) {
  if (!(slope > 0.0)) throw structural_error("tent needs slope > 0");
  if (slope > 2.0)
    throw structural_error("tent slope " + format_real(slope) + " leaves [0,1]; slope <= 2 required");
  MapModel map;
  map.kind_ = Kind::Tent;
  map.space_ = SpaceModel::unit_interval();
  map.slope_ = slope;
  return map;
}

MapModel MapModel::piecewise_linear(std::vector<double> breakpoints, std::vector<double> values) {
  if (breakpoints.size() < 2 || breakpoints.size() != values.size())
    throw structural_error("piecewise_linear needs matching breakpoints/values, length >= 2");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw structural_error("piecewise_linear breakpoints must start at 0 and end at 1");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw structural_error("piecewise_linear breakpoints must be strictly increasing");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw structural_error("piecewise_linear values must lie in [0,1]");
  MapModel map;
  map.kind_ = Kind::PiecewiseLinear;
  map.space_ = SpaceModel::unit_interval();
  map.breakpoints_ = std::move(breakpoints);
  map.values_ = std::move(values);
  return map;
}

MapModel MapModel::contraction(double c) {
  if (!(c > 0.0 && c < 1.0)) throw structural_error("contraction needs c in (0,1)");
  MapModel map;
  map.kind_ = Kind::Contraction;
  map.space_ = SpaceModel::unit_interval();
  map.c_ = c;
  return map;
}

MapModel MapModel::constant(SpaceModel space, Point target) {
  MapModel map;
  map.kind_ = Kind::Constant;
  map.target_ = space.normalize_point(std::move(target));
  map.space_ = std::move(space);
  return map;
}

MapModel MapModel::shift(const SpaceModel& symbol_space, ShiftMode mode) {
  if (!symbol_space.single_symbol_axis())
    throw structural_error("shift is defined on symbol spaces");
  MapModel map;
  map.kind_ = Kind::Shift;
  map.space_ = symbol_space;
  map.shift_mode_ = mode;
  return map;
}

MapModel MapModel::lookup_table(std::shared_ptr<const PointCloud> cloud,
                                std::vector<std::int32_t> image_indices) {
  if (!cloud) throw structural_error("lookup_table needs a cloud");
  if (image_indices.size() != cloud->size())
    throw structural_error("lookup_table needs one image index per cloud point");
  const auto n = static_cast<std::int32_t>(cloud->size());
  for (std::int32_t idx : image_indices)
    if (idx < 0 || idx >= n) throw structural_error("lookup_table image index out of range");
  MapModel map;
  map.kind_ = Kind::LookupTable;
  map.space_ = cloud->space;
  map.table_order_.resize(cloud->size());
  for (std::int32_t i = 0; i < n; ++i) map.table_order_[static_cast<std::size_t>(i)] = i;
  std::sort(map.table_order_.begin(), map.table_order_.end(),
            [&](std::int32_t a, std::int32_t b) {
              return point_less(cloud->points[static_cast<std::size_t>(a)],
                                cloud->points[static_cast<std::size_t>(b)]);
            });
  map.table_cloud_ = std::move(cloud);
  map.table_image_ = std::move(image_indices);
  return map;
}

double MapModel::apply_real(double x) const {
  switch (kind_) {
    case Kind::TimesM:
      return mod1(static_cast<double>(m_) * x);
    case Kind::Rotation:
      return mod1(x + alpha_);
    case Kind::Tent: {
      const double y = x <= 0.5 ? slope_ * x : slope_ * (1.0 - x);
      return std::clamp(y, 0.0, 1.0);
    }
    case Kind::PiecewiseLinear: {
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
      std::size_t seg = static_cast<std::size_t>(it - breakpoints_.begin());
      if (seg == 0) seg = 1;
      if (seg >= breakpoints_.size()) seg = breakpoints_.size() - 1;
      const double x0 = breakpoints_[seg - 1], x1 = breakpoints_[seg];
      const double y0 = values_[seg - 1], y1 = values_[seg];
      const double t = (x - x0) / (x1 - x0);
      return std::clamp(y0 + t * (y1 - y0), 0.0, 1.0);
    }
    case Kind::Contraction:
      return c_ * x;
    case Kind::Constant:
      return target_.as_real();
    default:
      throw structural_error("apply_real: map is not a real-axis model");
  }
}

Point MapModel::apply(const Point& x) const {
  switch (kind_) {
    case Kind::TimesM:
    case Kind::Rotation:
    case Kind::Tent:
    case Kind::PiecewiseLinear:
    case Kind::Contraction:
      return Point::real(apply_real(x.as_real()));
    case Kind::Constant:
      return target_;
    case Kind::Shift: {
      const Word& w = x.as_word();
      Word out(w.size());
      if (w.size() > 1) std::copy(w.begin() + 1, w.end(), out.begin());
      out.back() = shift_mode_ == ShiftMode::Cyclic ? w.front() : 0;
      return Point::word(std::move(out));
    }
    case Kind::LookupTable: {
      const auto& pts = table_cloud_->points;
      auto it = std::lower_bound(table_order_.begin(), table_order_.end(), x,
                                 [&](std::int32_t idx, const Point& p) {
                                   return point_less(pts[static_cast<std::size_t>(idx)], p);
                                 });
      if (it == table_order_.end() || !(pts[static_cast<std::size_t>(*it)] == x))
        throw structural_error("lookup table miss: point is not in the table cloud");
      return pts[static_cast<std::size_t>(table_image_[static_cast<std::size_t>(*it)])];
    }
  }
  throw structural_error("apply: unknown map kind");
}

std::vector<Point> MapModel::orbit(const Point& x, std::int32_t n) const {
  if (n < 1) throw precondition_error("orbit needs n >= 1");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(space_.normalize_point(x));
  for (std::int32_t i = 1; i < n; ++i) out.push_back(apply(out.back()));
  return out;
}

std::string MapModel::describe() const {
  switch (kind_) {
    case Kind::TimesM: return "times_m(" + std::to_string(m_) + ")";
    case Kind::Rotation: return "rotation(" + format_real(alpha_) + ")";
    case Kind::Tent: return "tent(" + format_real(slope_) + ")";
    case Kind::PiecewiseLinear: return "piecewise_linear[" + std::to_string(breakpoints_.size()) + "]";
    case Kind::Contraction: return "contraction(" + format_real(c_) + ")";
    case Kind::Constant: return "constant";
    case Kind::Shift: return shift_mode_ == ShiftMode::Cyclic ? "shift(cyclic)" : "shift(pad)";
    case Kind::LookupTable: return "lookup_table[" + std::to_string(table_image_.size()) + "]";
  }
  return "?";
}

double bowen_distance(const MapModel& map, const Point& x, const Point& y, std::int32_t n) {
  if (n < 1) throw precondition_error("bowen_distance needs n >= 1");
  Point px = x, py = y;
  double d = map.space().distance(px, py);
  for (std::int32_t i = 1; i < n; ++i) {
    px = map.apply(px);
    py = map.apply(py);
    d = std::max(d, map.space().distance(px, py));
  }
  return d;
}

}  // namespace expanse
