#include "detail/frame.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "expanse/numeric.hpp"

namespace expanse::detail {

double Frame::packed_dist(std::uint64_t a, std::uint64_t b) const {
  const std::uint64_t x = a ^ b;
  if (x == 0) return 0.0;
  const int first_diff = std::countl_zero(x) / sym_bits_;
  return std::ldexp(1.0, -first_diff);
}

Frame Frame::from_points(const SpaceModel& space, std::vector<Point> pts) {
  Frame f;
  f.size_ = pts.size();
  f.space_ = space;
  if (space.single_real_axis()) {
    f.layout_ = space.axis0().kind == AxisKind::Circle ? Layout::Circle : Layout::Interval;
    f.reals_.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) f.reals_[i] = pts[i].as_real();
    f.points_ = std::move(pts);
    return f;
  }
  if (space.single_symbol_axis()) {
    const Axis& axis = space.axis0();
    int bits = std::bit_width(static_cast<unsigned>(axis.alphabet - 1));
    if (bits < 1) bits = 1;
    if (bits * axis.word_length <= 64) {
      f.layout_ = Layout::PackedWords;
      f.sym_bits_ = bits;
      f.packed_.resize(pts.size());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Word& w = pts[i].as_word();
        std::uint64_t v = 0;
        for (std::size_t p = 0; p < w.size(); ++p) {
          const int shift = 64 - bits * static_cast<int>(p + 1);
          v |= static_cast<std::uint64_t>(w[p]) << shift;
        }
        f.packed_[i] = v;
      }
      f.points_ = std::move(pts);
      return f;
    }
  }
  f.layout_ = Layout::Generic;
  f.points_ = std::move(pts);
  return f;
}

OrbitFrames::OrbitFrames(const MapModel& map, const PointCloud& cloud, std::int32_t steps) {
  if (steps < 1) throw precondition_error("orbit frames need >= 1 step");
  if (!(map.space() == cloud.space))
    throw structural_error("map space " + map.space().describe() +
                           " does not match cloud space " + cloud.space.describe());
  frames_.reserve(static_cast<std::size_t>(steps));
  std::vector<Point> current = cloud.points;
  for (std::int32_t s = 0; s < steps; ++s) {
    frames_.push_back(Frame::from_points(cloud.space, current));
    if (s + 1 < steps) {
      std::vector<Point> next(current.size());
      for (std::size_t i = 0; i < current.size(); ++i) next[i] = map.apply(current[i]);
      current = std::move(next);
    }
  }
}

NearestIndex::NearestIndex(const PointCloud& cloud) : cloud_(&cloud) {
  const auto n = static_cast<std::int32_t>(cloud.size());
  order_.resize(cloud.size());
  for (std::int32_t i = 0; i < n; ++i) order_[static_cast<std::size_t>(i)] = i;
  if (cloud.space.single_real_axis()) {
    real_axis_ = true;
    std::sort(order_.begin(), order_.end(), [&](std::int32_t a, std::int32_t b) {
      return cloud.points[static_cast<std::size_t>(a)].as_real() <
             cloud.points[static_cast<std::size_t>(b)].as_real();
    });
    sorted_vals_.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      sorted_vals_[i] = cloud.points[static_cast<std::size_t>(order_[i])].as_real();
  } else {
    std::sort(order_.begin(), order_.end(), [&](std::int32_t a, std::int32_t b) {
      return point_less(cloud.points[static_cast<std::size_t>(a)],
                        cloud.points[static_cast<std::size_t>(b)]);
    });
  }
}

std::pair<std::int32_t, double> NearestIndex::nearest(const Point& p) const {
  const PointCloud& cloud = *cloud_;
  if (cloud.size() == 0) throw structural_error("nearest on an empty cloud");
  if (real_axis_) {
    const double x = p.as_real();
    const bool circular = cloud.space.axis0().kind == AxisKind::Circle;
    auto it = std::lower_bound(sorted_vals_.begin(), sorted_vals_.end(), x);
    std::int32_t best = -1;
    double best_d = kPosInf;
    auto consider = [&](std::ptrdiff_t pos) {
      if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(sorted_vals_.size())) return;
      double d = std::fabs(sorted_vals_[static_cast<std::size_t>(pos)] - x);
      if (circular && d > 0.5) d = 1.0 - d;
      if (d < best_d) {
        best_d = d;
        best = order_[static_cast<std::size_t>(pos)];
      }
    };
    const std::ptrdiff_t at = it - sorted_vals_.begin();
    consider(at - 1);
    consider(at);
    if (circular) {
      consider(0);
      consider(static_cast<std::ptrdiff_t>(sorted_vals_.size()) - 1);
    }
    return {best, best_d};
  }
  // exact hit via the sorted order, else linear scan
  auto it = std::lower_bound(order_.begin(), order_.end(), p,
                             [&](std::int32_t idx, const Point& q) {
                               return point_less(cloud.points[static_cast<std::size_t>(idx)], q);
                             });
  if (it != order_.end() && cloud.points[static_cast<std::size_t>(*it)] == p) return {*it, 0.0};
  std::int32_t best = -1;
  double best_d = kPosInf;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = cloud.space.distance(cloud.points[i], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::int32_t>(i);
    }
  }
  return {best, best_d};
}

}  // namespace expanse::detail
