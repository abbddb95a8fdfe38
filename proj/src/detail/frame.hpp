#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "expanse/maps.hpp"
#include "expanse/spaces.hpp"

namespace expanse::detail {

// Flat snapshot of a list of points (the cloud itself or one orbit step)
// with cheap index-based distance evaluation. Pair scans over 10^8 pairs go
// through here, so the common single-axis layouts avoid Point entirely.
class Frame {
 public:
  enum class Layout { Interval, Circle, PackedWords, Generic };

  static Frame from_points(const SpaceModel& space, std::vector<Point> pts);

  Layout layout() const { return layout_; }
  std::size_t size() const { return size_; }

  double dist(std::size_t i, std::size_t j) const {
    switch (layout_) {
      case Layout::Interval: {
        const double d = reals_[i] - reals_[j];
        return d < 0 ? -d : d;
      }
      case Layout::Circle: {
        double d = reals_[i] - reals_[j];
        if (d < 0) d = -d;
        return d > 0.5 ? 1.0 - d : d;
      }
      case Layout::PackedWords:
        return packed_dist(packed_[i], packed_[j]);
      case Layout::Generic:
        return space_.distance(points_[i], points_[j]);
    }
    return 0.0;
  }

  const std::vector<Point>& points() const { return points_; }

 private:
  double packed_dist(std::uint64_t a, std::uint64_t b) const;

  Layout layout_ = Layout::Generic;
  std::size_t size_ = 0;
  SpaceModel space_;
  std::vector<Point> points_;
  std::vector<double> reals_;
  std::vector<std::uint64_t> packed_;
  int sym_bits_ = 1;
};

// Orbit steps T^0 .. T^{steps-1} of every cloud point, as frames.
class OrbitFrames {
 public:
  OrbitFrames(const MapModel& map, const PointCloud& cloud, std::int32_t steps);

  std::int32_t steps() const { return static_cast<std::int32_t>(frames_.size()); }
  const Frame& step(std::int32_t s) const { return frames_[static_cast<std::size_t>(s)]; }

  // max_{0 <= s < n} d(T^s p_i, T^s p_j); returns early once the running
  // value reaches bail (callers only compare against thresholds <= bail).
  double bowen(std::size_t i, std::size_t j, std::int32_t n, double bail) const {
    double best = 0.0;
    for (std::int32_t s = 0; s < n; ++s) {
      const double d = frames_[static_cast<std::size_t>(s)].dist(i, j);
      if (d > best) {
        best = d;
        if (best >= bail) return best;
      }
    }
    return best;
  }

 private:
  std::vector<Frame> frames_;
};

// Nearest cloud point lookup, used to snap map images back onto a cloud.
class NearestIndex {
 public:
  explicit NearestIndex(const PointCloud& cloud);
  // (index, distance) of the nearest cloud point to p
  std::pair<std::int32_t, double> nearest(const Point& p) const;

 private:
  const PointCloud* cloud_;
  bool real_axis_ = false;
  std::vector<std::int32_t> order_;
  std::vector<double> sorted_vals_;
};

}  // namespace expanse::detail
