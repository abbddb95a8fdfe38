#include "expanse/measures.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "detail/frame.hpp"
#include "expanse/numeric.hpp"
#include "expanse/rng.hpp"

namespace expanse {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kSnapTolerance = 1e-9;

std::vector<Atom> merge_atoms(const PointCloud& cloud, std::vector<Atom> atoms) {
  const auto n = static_cast<std::int32_t>(cloud.size());
  for (const Atom& a : atoms) {
    if (a.index < 0 || a.index >= n)
      throw structural_error("atom index " + std::to_string(a.index) + " outside cloud of size " +
                             std::to_string(n));
    if (a.weight < 0.0) throw structural_error("negative atom weight");
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.index < b.index;
  });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().index == a.index)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  std::erase_if(merged, [](const Atom& a) { return a.weight == 0.0; });
  if (merged.empty()) throw structural_error("measure has no atoms with positive weight");
  return merged;
}

double atom_sum(const std::vector<Atom>& atoms) {
  KahanSum s;
  for (const Atom& a : atoms) s.add(a.weight);
  return s.value();
}

}  // namespace

AtomicMeasure AtomicMeasure::from_atoms(CloudPtr cloud, std::vector<Atom> atoms) {
  if (!cloud) throw structural_error("measure needs a cloud");
  AtomicMeasure mu;
  mu.atoms_ = merge_atoms(*cloud, std::move(atoms));
  const double total = atom_sum(mu.atoms_);
  if (std::fabs(total - 1.0) > kNormalizationTol)
    throw structural_error("measure weights sum to " + format_real(total) + ", not 1");
  mu.cloud_ = std::move(cloud);
  return mu;
}

AtomicMeasure AtomicMeasure::from_atoms_renormalized(CloudPtr cloud, std::vector<Atom> atoms) {
  if (!cloud) throw structural_error("measure needs a cloud");
  AtomicMeasure mu;
  mu.atoms_ = merge_atoms(*cloud, std::move(atoms));
  const double total = atom_sum(mu.atoms_);
  if (!(total > 0.0)) throw structural_error("measure has zero total weight");
  for (Atom& a : mu.atoms_) a.weight /= total;
  mu.cloud_ = std::move(cloud);
  return mu;
}

AtomicMeasure AtomicMeasure::from_weights(CloudPtr cloud, std::span<const double> weight_per_point) {
  if (!cloud) throw structural_error("measure needs a cloud");
  if (weight_per_point.size() != cloud->size())
    throw structural_error("from_weights needs one weight per cloud point");
  std::vector<Atom> atoms;
  atoms.reserve(weight_per_point.size());
  for (std::size_t i = 0; i < weight_per_point.size(); ++i)
    if (weight_per_point[i] != 0.0)
      atoms.push_back(Atom{static_cast<std::int32_t>(i), weight_per_point[i]});
  return from_atoms_renormalized(std::move(cloud), std::move(atoms));
}

AtomicMeasure AtomicMeasure::uniform(CloudPtr cloud) {
  if (!cloud || cloud->size() == 0) throw structural_error("uniform measure needs a nonempty cloud");
  const double w = 1.0 / static_cast<double>(cloud->size());
  std::vector<Atom> atoms(cloud->size());
  for (std::size_t i = 0; i < atoms.size(); ++i)
    atoms[i] = Atom{static_cast<std::int32_t>(i), w};
  return from_atoms_renormalized(std::move(cloud), std::move(atoms));
}

double AtomicMeasure::total_mass() const { return atom_sum(atoms_); }

double AtomicMeasure::max_atom_weight() const {
  double w = 0.0;
  for (const Atom& a : atoms_) w = std::max(w, a.weight);
  return w;
}

double AtomicMeasure::mass_of(std::span<const std::int32_t> indices) const {
  std::vector<std::int32_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto n = static_cast<std::int32_t>(cloud_->size());
  for (std::int32_t idx : sorted)
    if (idx < 0 || idx >= n) throw structural_error("mass_of: index outside cloud");
  KahanSum s;
  std::size_t a = 0;
  for (std::int32_t idx : sorted) {
    while (a < atoms_.size() && atoms_[a].index < idx) ++a;
    if (a < atoms_.size() && atoms_[a].index == idx) s.add(atoms_[a].weight);
  }
  return s.value();
}

std::vector<std::int32_t> AtomicMeasure::support() const {
  std::vector<std::int32_t> idx(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) idx[i] = atoms_[i].index;
  return idx;
}

bool AtomicMeasure::support_contains(std::int32_t index) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), index,
                             [](const Atom& a, std::int32_t v) { return a.index < v; });
  return it != atoms_.end() && it->index == index;
}

bool AtomicMeasure::support_subset_of(const AtomicMeasure& other) const {
  std::size_t b = 0;
  for (const Atom& a : atoms_) {
    while (b < other.atoms_.size() && other.atoms_[b].index < a.index) ++b;
    if (b >= other.atoms_.size() || other.atoms_[b].index != a.index) return false;
  }
  return true;
}

AtomicMeasure dirac(CloudPtr cloud, std::int32_t index) {
  if (!cloud) throw structural_error("dirac needs a cloud");
  if (index < 0 || index >= static_cast<std::int32_t>(cloud->size()))
    throw structural_error("dirac index " + std::to_string(index) + " outside cloud");
  return AtomicMeasure::from_atoms(std::move(cloud), {Atom{index, 1.0}});
}

AtomicMeasure convex_combine(std::span<const std::pair<double, AtomicMeasure>> terms) {
  if (terms.empty()) throw structural_error("convex_combine needs at least one term");
  KahanSum ts;
  for (const auto& [t, mu] : terms) {
    if (t < 0.0) throw structural_error("convex_combine weights must be nonnegative");
    ts.add(t);
  }
  if (std::fabs(ts.value() - 1.0) > kNormalizationTol)
    throw structural_error("convex_combine weights sum to " + format_real(ts.value()) + ", not 1");
  const CloudPtr& cloud = terms.front().second.cloud_ptr();
  for (const auto& [t, mu] : terms)
    if (mu.cloud_ptr().get() != cloud.get())
      throw structural_error("convex_combine: measures live on different clouds");
  std::vector<Atom> atoms;
  for (const auto& [t, mu] : terms) {
    if (t == 0.0) continue;
    for (const Atom& a : mu.atoms()) atoms.push_back(Atom{a.index, t * a.weight});
  }
  return AtomicMeasure::from_atoms(cloud, std::move(atoms));
}

AtomicMeasure pushforward(const MapModel& map, const AtomicMeasure& mu) {
  const PointCloud& cloud = mu.cloud();
  if (!(map.space() == cloud.space))
    throw structural_error("pushforward: map and measure live on different spaces");
  detail::NearestIndex index(cloud);
  std::vector<Atom> atoms;
  atoms.reserve(mu.atoms().size());
  for (const Atom& a : mu.atoms()) {
    const Point image = map.apply(cloud.points[static_cast<std::size_t>(a.index)]);
    const auto [idx, dist] = index.nearest(image);
    if (!(dist <= kSnapTolerance))
      throw precondition_error("pushforward: image of atom " + std::to_string(a.index) +
                               " is not representable in the cloud (nearest point at distance " +
                               format_real(dist) + ")");
    atoms.push_back(Atom{idx, a.weight});
  }
  return AtomicMeasure::from_atoms(mu.cloud_ptr(), std::move(atoms));
}

double invariance_defect(const MapModel& map, const AtomicMeasure& mu) {
  const AtomicMeasure nu = pushforward(map, mu);
  const auto& a = mu.atoms();
  const auto& b = nu.atoms();
  KahanSum s;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size() || (i < a.size() && a[i].index < b[j].index)) {
      s.add(a[i].weight);
      ++i;
    } else if (i >= a.size() || b[j].index < a[i].index) {
      s.add(b[j].weight);
      ++j;
    } else {
      s.add(std::fabs(a[i].weight - b[j].weight));
      ++i;
      ++j;
    }
  }
  return 0.5 * s.value();
}

SampledMeasure sample_measure(const SpaceModel& space, const GeneratorSpec& gen,
                              std::int64_t n, std::uint64_t seed) {
  switch (gen.kind) {
    case MeasureGenerator::GridUniform: {
      auto cloud = std::make_shared<PointCloud>(grid_cloud(space, n));
      AtomicMeasure mu = AtomicMeasure::uniform(cloud);
      return SampledMeasure{std::move(cloud), std::move(mu)};
    }
    case MeasureGenerator::UniformIid: {
      if (n < 1) throw structural_error("uniform-iid needs n >= 1");
      SplitMix64 rng = seed_stream(seed, "sample/uniform-iid");
      std::vector<Point> raw;
      raw.reserve(static_cast<std::size_t>(n));
      for (std::int64_t k = 0; k < n; ++k) {
        Point p;
        for (const Axis& axis : space.axes()) {
          if (axis.kind == AxisKind::Symbol) {
            Word w(static_cast<std::size_t>(axis.word_length));
            for (auto& sym : w)
              sym = static_cast<std::int32_t>(rng.next_below(static_cast<std::uint64_t>(axis.alphabet)));
            p.coords.emplace_back(std::move(w));
          } else {
            p.coords.emplace_back(rng.next_unit());
          }
        }
        raw.push_back(std::move(p));
      }
      // accumulate 1/n per sample onto deduplicated points
      std::map<Point, double, decltype(&point_less)> weights(&point_less);
      std::vector<Point> unique_pts;
      for (Point& p : raw) {
        Point q = space.normalize_point(std::move(p));
        auto [it, inserted] = weights.emplace(q, 0.0);
        it->second += 1.0 / static_cast<double>(n);
        if (inserted) unique_pts.push_back(it->first);
      }
      auto cloud = std::make_shared<PointCloud>(make_cloud(space, unique_pts));
      std::vector<Atom> atoms;
      atoms.reserve(cloud->size());
      for (std::size_t i = 0; i < cloud->size(); ++i)
        atoms.push_back(Atom{static_cast<std::int32_t>(i), weights.at(cloud->points[i])});
      AtomicMeasure mu = AtomicMeasure::from_atoms_renormalized(cloud, std::move(atoms));
      return SampledMeasure{std::move(cloud), std::move(mu)};
    }
    case MeasureGenerator::Bernoulli: {
      if (!space.single_symbol_axis() || space.axis0().alphabet != 2)
        throw structural_error("bernoulli measures need a 2-symbol space");
      if (!(gen.p >= 0.0 && gen.p <= 1.0)) throw structural_error("bernoulli p must be in [0,1]");
      const std::int64_t count = 1LL << space.axis0().word_length;
      auto cloud = std::make_shared<PointCloud>(grid_cloud(space, count));
      std::vector<double> w(cloud->size());
      for (std::size_t i = 0; i < cloud->size(); ++i) {
        double prob = 1.0;
        for (std::int32_t sym : cloud->points[i].as_word())
          prob *= sym == 0 ? gen.p : 1.0 - gen.p;
        w[i] = prob;
      }
      AtomicMeasure mu = AtomicMeasure::from_weights(cloud, w);
      return SampledMeasure{std::move(cloud), std::move(mu)};
    }
    case MeasureGenerator::CantorMiddleThirds: {
      if (!space.single_real_axis() || space.axis0().kind != AxisKind::UnitInterval)
        throw structural_error("cantor measures live on the unit interval");
      if (gen.depth < 1 || gen.depth > 20) throw structural_error("cantor depth must be in [1,20]");
      const std::int64_t count = 1LL << gen.depth;
      std::vector<Point> pts;
      pts.reserve(static_cast<std::size_t>(count));
      for (std::int64_t mask = 0; mask < count; ++mask) {
        // ternary digits in {0,2}, most significant level first
        double x = 0.0;
        double scale = 1.0;
        for (std::int32_t level = 0; level < gen.depth; ++level) {
          scale /= 3.0;
          if (mask & (1LL << (gen.depth - 1 - level))) x += 2.0 * scale;
        }
        pts.push_back(Point::real(x));
      }
      const double res = 1.0 / std::pow(3.0, static_cast<double>(gen.depth));
      auto cloud = std::make_shared<PointCloud>(make_cloud(space, std::move(pts), res));
      AtomicMeasure mu = AtomicMeasure::uniform(cloud);
      return SampledMeasure{std::move(cloud), std::move(mu)};
    }
  }
  throw structural_error("unknown measure generator");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

AtomicMeasure load_measure_csv(std::istream& in, const SpaceModel& space) {
  std::string line;
  if (!std::getline(in, line)) throw structural_error("measure CSV is empty");
  std::size_t expected_cols = 1;  // weight
  for (const Axis& axis : space.axes())
    expected_cols += axis.kind == AxisKind::Symbol ? static_cast<std::size_t>(axis.word_length) : 1;

  std::vector<Point> pts;
  std::vector<double> weights;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != expected_cols)
      throw structural_error("measure CSV line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(expected_cols));
    Point p;
    std::size_t col = 0;
    for (const Axis& axis : space.axes()) {
      if (axis.kind == AxisKind::Symbol) {
        Word w(static_cast<std::size_t>(axis.word_length));
        for (auto& sym : w) sym = static_cast<std::int32_t>(parse_real(cells[col++]));
        p.coords.emplace_back(std::move(w));
      } else {
        p.coords.emplace_back(parse_real(cells[col++]));
      }
    }
    const double w = parse_real(cells[col]);
    if (w < 0.0) throw structural_error("measure CSV line " + std::to_string(line_no) +
                                        " has a negative weight");
    if (w == 0.0) continue;
    pts.push_back(std::move(p));
    weights.push_back(w);
  }
  if (pts.empty()) throw structural_error("measure CSV has no rows with positive weight");

  // duplicate coordinates accumulate onto one atom
  std::map<Point, double, decltype(&point_less)> acc(&point_less);
  std::vector<Point> unique_pts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Point q = space.normalize_point(std::move(pts[i]));
    auto [it, inserted] = acc.emplace(q, 0.0);
    it->second += weights[i];
    if (inserted) unique_pts.push_back(it->first);
  }
  auto cloud = std::make_shared<PointCloud>(make_cloud(space, unique_pts));
  std::vector<Atom> atoms;
  atoms.reserve(cloud->size());
  for (std::size_t i = 0; i < cloud->size(); ++i)
    atoms.push_back(Atom{static_cast<std::int32_t>(i), acc.at(cloud->points[i])});
  return AtomicMeasure::from_atoms_renormalized(std::move(cloud), std::move(atoms));
}

void write_measure_csv(std::ostream& out, const AtomicMeasure& mu) {
  const SpaceModel& space = mu.cloud().space;
  std::size_t real_axis = 0, sym_axis = 0;
  bool first = true;
  for (const Axis& axis : space.axes()) {
    if (axis.kind == AxisKind::Symbol) {
      for (std::int32_t k = 0; k < axis.word_length; ++k) {
        out << (first ? "" : ",") << "s" << sym_axis << "_" << k;
        first = false;
      }
      ++sym_axis;
    } else {
      out << (first ? "" : ",") << "x" << real_axis++;
      first = false;
    }
  }
  out << (first ? "weight" : ",weight") << "\n";
  for (const Atom& a : mu.atoms()) {
    const Point& p = mu.cloud().points[static_cast<std::size_t>(a.index)];
    for (const Coordinate& c : p.coords) {
      if (std::holds_alternative<double>(c)) {
        out << format_real(std::get<double>(c)) << ",";
      } else {
        for (std::int32_t sym : std::get<Word>(c)) out << sym << ",";
      }
    }
    out << format_real(a.weight) << "\n";
  }
}

}  // namespace expanse
