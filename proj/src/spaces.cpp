#include "expanse/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "expanse/numeric.hpp"

namespace expanse {

namespace {

const char* axis_name(AxisKind k) {
  switch (k) {
    case AxisKind::UnitInterval: return "interval";
    case AxisKind::Circle: return "circle";
    case AxisKind::Symbol: return "symbol";
  }
  return "?";
}

double axis_distance(const Axis& axis, const Coordinate& a, const Coordinate& b) {
  if (axis.kind == AxisKind::Symbol) {
    const Word& wa = std::get<Word>(a);
    const Word& wb = std::get<Word>(b);
    for (std::size_t j = 0; j < wa.size(); ++j) {
      if (wa[j] != wb[j]) return std::ldexp(1.0, -static_cast<int>(j));
    }
    return 0.0;
  }
  const double x = std::get<double>(a);
  const double y = std::get<double>(b);
  double d = std::fabs(x - y);
  if (axis.kind == AxisKind::Circle && d > 0.5) d = 1.0 - d;
  return d;
}

}  // namespace

Point Point::tuple(std::span<const Point> parts) {
  Point p;
  for (const Point& part : parts)
    for (const Coordinate& c : part.coords) p.coords.push_back(c);
  return p;
}

double Point::as_real() const {
  if (coords.size() != 1 || !std::holds_alternative<double>(coords[0]))
    throw structural_error("point is not a single real coordinate");
  return std::get<double>(coords[0]);
}

const Word& Point::as_word() const {
  if (coords.size() != 1 || !std::holds_alternative<Word>(coords[0]))
    throw structural_error("point is not a single word coordinate");
  return std::get<Word>(coords[0]);
}

bool point_less(const Point& a, const Point& b) {
  if (a.coords.size() != b.coords.size()) return a.coords.size() < b.coords.size();
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const Coordinate& ca = a.coords[i];
    const Coordinate& cb = b.coords[i];
    if (ca.index() != cb.index()) return ca.index() < cb.index();
    if (std::holds_alternative<double>(ca)) {
      const double x = std::get<double>(ca), y = std::get<double>(cb);
      if (x != y) return x < y;
    } else {
      const Word& wa = std::get<Word>(ca);
      const Word& wb = std::get<Word>(cb);
      if (wa != wb) return wa < wb;
    }
  }
  return false;
}

SpaceModel SpaceModel::unit_interval() {
  SpaceModel s;
  s.axes_ = {Axis{AxisKind::UnitInterval, 0, 0}};
  return s;
}

SpaceModel SpaceModel::circle() {
  SpaceModel s;
  s.axes_ = {Axis{AxisKind::Circle, 0, 0}};
  return s;
}

SpaceModel SpaceModel::symbol_space(std::int32_t alphabet, std::int32_t word_length) {
  if (alphabet < 2) throw structural_error("symbol space needs alphabet size >= 2");
  if (word_length < 1) throw structural_error("symbol space needs word length >= 1");
  SpaceModel s;
  s.axes_ = {Axis{AxisKind::Symbol, alphabet, word_length}};
  return s;
}

SpaceModel SpaceModel::product(std::span<const SpaceModel> factors) {
  if (factors.empty()) throw structural_error("product of zero spaces");
  SpaceModel s;
  s.axes_.clear();
  for (const SpaceModel& f : factors)
    for (const Axis& a : f.axes_) s.axes_.push_back(a);
  return s;
}

void SpaceModel::validate_point(const Point& p) const {
  if (p.coords.size() != axes_.size())
    throw structural_error("point arity " + std::to_string(p.coords.size()) +
                           " does not match space with " + std::to_string(axes_.size()) +
                           " axes");
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const Axis& axis = axes_[i];
    if (axis.kind == AxisKind::Symbol) {
      if (!std::holds_alternative<Word>(p.coords[i]))
        throw structural_error("axis " + std::to_string(i) + " expects a word");
      const Word& w = std::get<Word>(p.coords[i]);
      if (static_cast<std::int32_t>(w.size()) != axis.word_length)
        throw structural_error("word length " + std::to_string(w.size()) + " != " +
                               std::to_string(axis.word_length));
      for (std::int32_t sym : w)
        if (sym < 0 || sym >= axis.alphabet)
          throw structural_error("symbol " + std::to_string(sym) + " outside alphabet");
    } else {
      if (!std::holds_alternative<double>(p.coords[i]))
        throw structural_error("axis " + std::to_string(i) + " expects a real");
      const double x = std::get<double>(p.coords[i]);
      if (!std::isfinite(x)) throw structural_error("non-finite coordinate");
      if (axis.kind == AxisKind::UnitInterval && (x < 0.0 || x > 1.0))
        throw structural_error("interval coordinate " + format_real(x) + " outside [0,1]");
      if (axis.kind == AxisKind::Circle && (x < 0.0 || x >= 1.0))
        throw structural_error("circle coordinate " + format_real(x) + " outside [0,1)");
    }
  }
}

Point SpaceModel::normalize_point(Point p) const {
  validate_point(p);
  for (Coordinate& c : p.coords)
    if (std::holds_alternative<double>(c) && std::get<double>(c) == 0.0)
      c = 0.0;  // collapse -0.0
  return p;
}

double SpaceModel::distance(const Point& x, const Point& y) const {
  if (x.coords.size() != axes_.size() || y.coords.size() != axes_.size())
    throw structural_error("distance: point arity does not match space");
  double d = 0.0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (x.coords[i].index() != static_cast<std::size_t>(axes_[i].kind == AxisKind::Symbol) ||
        y.coords[i].index() != static_cast<std::size_t>(axes_[i].kind == AxisKind::Symbol))
      throw structural_error("distance: coordinate type does not match axis");
    d = std::max(d, axis_distance(axes_[i], x.coords[i], y.coords[i]));
  }
  return d;
}

double SpaceModel::diameter() const {
  double d = 0.0;
  for (const Axis& a : axes_) {
    switch (a.kind) {
      case AxisKind::UnitInterval: d = std::max(d, 1.0); break;
      case AxisKind::Circle: d = std::max(d, 0.5); break;
      case AxisKind::Symbol: d = std::max(d, 1.0); break;
    }
  }
  return d;
}

std::string SpaceModel::describe() const {
  if (axes_.size() == 1) {
    const Axis& a = axes_[0];
    if (a.kind == AxisKind::Symbol)
      return "symbol(" + std::to_string(a.alphabet) + "," + std::to_string(a.word_length) + ")";
    return axis_name(a.kind);
  }
  std::string s = "product(";
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (i) s += ",";
    const Axis& a = axes_[i];
    s += a.kind == AxisKind::Symbol
             ? "symbol(" + std::to_string(a.alphabet) + "," + std::to_string(a.word_length) + ")"
             : axis_name(a.kind);
  }
  return s + ")";
}

double distance(const SpaceModel& space, const Point& x, const Point& y) {
  return space.distance(x, y);
}

PointCloud make_cloud(SpaceModel space, std::vector<Point> points,
                      std::optional<double> declared_resolution) {
  PointCloud cloud;
  cloud.space = std::move(space);
  std::map<Point, bool, decltype(&point_less)> seen(&point_less);
  cloud.points.reserve(points.size());
  for (Point& p : points) {
    Point q = cloud.space.normalize_point(std::move(p));
    if (seen.emplace(q, true).second) cloud.points.push_back(std::move(q));
  }
  if (declared_resolution) {
    if (*declared_resolution < 0.0) throw structural_error("resolution must be >= 0");
    cloud.resolution = *declared_resolution;
  } else {
    cloud.resolution = max_nearest_neighbor_distance(cloud);
  }
  return cloud;
}

PointCloud grid_cloud(const SpaceModel& space, std::int64_t n) {
  if (n < 2) throw structural_error("grid_cloud needs n >= 2");
  PointCloud cloud;
  cloud.space = space;
  if (space.single_real_axis()) {
    const AxisKind kind = space.axis0().kind;
    cloud.points.reserve(static_cast<std::size_t>(n));
    if (kind == AxisKind::UnitInterval) {
      for (std::int64_t k = 0; k < n; ++k)
        cloud.points.push_back(Point::real(static_cast<double>(k) / static_cast<double>(n - 1)));
      cloud.resolution = 0.5 / static_cast<double>(n - 1);
    } else {
      for (std::int64_t k = 0; k < n; ++k)
        cloud.points.push_back(Point::real(static_cast<double>(k) / static_cast<double>(n)));
      cloud.resolution = 0.5 / static_cast<double>(n);
    }
    return cloud;
  }
  if (space.single_symbol_axis()) {
    const Axis& axis = space.axis0();
    const double count_d = std::pow(static_cast<double>(axis.alphabet),
                                    static_cast<double>(axis.word_length));
    if (count_d > 1 << 24)
      throw structural_error("symbol space too large to enumerate");
    const std::int64_t count = static_cast<std::int64_t>(count_d + 0.5);
    if (n < count)
      throw structural_error("grid_cloud on a symbol space enumerates all " +
                             std::to_string(count) + " words; n >= " + std::to_string(count) +
                             " required");
    cloud.points.reserve(static_cast<std::size_t>(count));
    Word w(static_cast<std::size_t>(axis.word_length), 0);
    for (std::int64_t idx = 0; idx < count; ++idx) {
      std::int64_t v = idx;
      for (std::int32_t pos = axis.word_length - 1; pos >= 0; --pos) {
        w[static_cast<std::size_t>(pos)] = static_cast<std::int32_t>(v % axis.alphabet);
        v /= axis.alphabet;
      }
      cloud.points.push_back(Point::word(w));
    }
    cloud.resolution = 0.0;  // the sample is the whole space
    return cloud;
  }
  throw structural_error("grid_cloud: unsupported space variant " + space.describe());
}

std::vector<PairEntry> pairs_within(const PointCloud& cloud, double epsilon) {
  if (!(epsilon > 0.0)) throw precondition_error("pairs_within needs epsilon > 0");
  std::vector<PairEntry> out;
  const auto n = static_cast<std::int32_t>(cloud.size());
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = cloud.space.distance(cloud.points[static_cast<std::size_t>(i)],
                                            cloud.points[static_cast<std::size_t>(j)]);
      if (d > 0.0 && d < epsilon) out.push_back(PairEntry{i, j, d});
    }
  }
  return out;
}

double max_nearest_neighbor_distance(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) return 0.0;
  if (cloud.space.single_real_axis()) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = cloud.points[i].as_real();
    std::sort(xs.begin(), xs.end());
    const bool circular = cloud.space.axis0().kind == AxisKind::Circle;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double left, right;
      if (circular) {
        left = i == 0 ? xs[0] + 1.0 - xs[n - 1] : xs[i] - xs[i - 1];
        right = i == n - 1 ? xs[0] + 1.0 - xs[n - 1] : xs[i + 1] - xs[i];
      } else {
        left = i == 0 ? kPosInf : xs[i] - xs[i - 1];
        right = i == n - 1 ? kPosInf : xs[i + 1] - xs[i];
      }
      worst = std::max(worst, std::min(left, right));
    }
    return worst;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = kPosInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      best = std::min(best, cloud.space.distance(cloud.points[i], cloud.points[j]));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double min_positive_distance(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  double best = kPosInf;
  if (cloud.space.single_real_axis() && n >= 2) {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = cloud.points[i].as_real();
    std::sort(xs.begin(), xs.end());
    const bool circular = cloud.space.axis0().kind == AxisKind::Circle;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double gap = xs[i + 1] - xs[i];
      if (gap > 0.0) best = std::min(best, gap);
    }
    if (circular) {
      // the wrap-around arc is a gap like any other; the minimal gap is the
      // minimal circle distance
      const double wrap = xs[0] + 1.0 - xs[n - 1];
      if (wrap > 0.0) best = std::min(best, wrap);
    }
    return best;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = cloud.space.distance(cloud.points[i], cloud.points[j]);
      if (d > 0.0) best = std::min(best, d);
    }
  return best;
}

}  // namespace expanse
