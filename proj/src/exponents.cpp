#include "expanse/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "detail/frame.hpp"
#include "expanse/numeric.hpp"
#include "expanse/parallel.hpp"

namespace expanse {

namespace {

void validate_grid(std::span<const double> eps_grid, double floor) {
  if (eps_grid.empty()) throw precondition_error("epsilon grid is empty");
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0.0)) throw precondition_error("epsilon grid entries must be positive");
    if (k > 0 && !(eps_grid[k] > eps_grid[k - 1]))
      throw precondition_error("epsilon grid must be strictly increasing");
  }
  if (eps_grid.front() < floor)
    throw precondition_error("epsilon " + format_real(eps_grid.front()) +
                             " is below the resolution floor " + format_real(floor) +
                             " (floor_factor * cloud.resolution)");
}

struct BucketAccum {
  std::vector<double> min_ratio;
  std::vector<std::int64_t> count;
  explicit BucketAccum(std::size_t m) : min_ratio(m, kPosInf), count(m, 0) {}
  void merge(const BucketAccum& other) {
    for (std::size_t k = 0; k < min_ratio.size(); ++k) {
      min_ratio[k] = std::min(min_ratio[k], other.min_ratio[k]);
      count[k] += other.count[k];
    }
  }
};

// bucket = index of the first grid entry strictly above d, so entry k
// collects buckets 0..k (pairs with d < grid[k])
inline std::size_t bucket_of(std::span<const double> grid, double d) {
  return static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), d) - grid.begin());
}

EpsilonProfile profile_core(const MapModel& map, const PointCloud& cloud,
                            std::span<const double> eps_grid, const ProfileOptions& opts,
                            const std::vector<std::int32_t>* support) {
  const double floor = opts.floor_factor * cloud.resolution;
  validate_grid(eps_grid, floor);
  if (!(map.space() == cloud.space))
    throw structural_error("profile: map space does not match cloud space");

  const std::size_t n = cloud.size();
  const std::size_t m = eps_grid.size();
  const double eps_max = eps_grid.back();
  const detail::OrbitFrames frames(map, cloud, 2);
  const detail::Frame& base = frames.step(0);
  const detail::Frame& image = frames.step(1);

  const int max_chunks = thread_budget();
  std::vector<BucketAccum> partial(static_cast<std::size_t>(max_chunks), BucketAccum(m));

  if (support == nullptr) {
    // all ordered pairs; scan unordered and count both orders
    parallel_chunks(n, 256, [&](int chunk, std::size_t lo, std::size_t hi) {
      BucketAccum& acc = partial[static_cast<std::size_t>(chunk)];
      for (std::size_t i = lo; i < hi; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double d = base.dist(i, j);
          if (d >= eps_max) continue;
          const std::size_t b = bucket_of(eps_grid, d);
          const double ratio = image.dist(i, j) / d;
          if (ratio < acc.min_ratio[b]) acc.min_ratio[b] = ratio;
          acc.count[b] += 2;
        }
      }
    });
  } else {
    const std::vector<std::int32_t>& supp = *support;
    parallel_chunks(supp.size(), 8, [&](int chunk, std::size_t lo, std::size_t hi) {
      BucketAccum& acc = partial[static_cast<std::size_t>(chunk)];
      for (std::size_t a = lo; a < hi; ++a) {
        const auto j = static_cast<std::size_t>(supp[a]);
        for (std::size_t i = 0; i < n; ++i) {
          if (i == j) continue;
          const double d = base.dist(i, j);
          if (d >= eps_max) continue;
          const std::size_t b = bucket_of(eps_grid, d);
          const double ratio = image.dist(i, j) / d;
          if (ratio < acc.min_ratio[b]) acc.min_ratio[b] = ratio;
          acc.count[b] += 1;
        }
      }
    });
  }

  BucketAccum total(m);
  for (const BucketAccum& acc : partial) total.merge(acc);

  EpsilonProfile profile;
  profile.resolution_floor = floor;
  profile.entries.resize(m);
  double running_min = kPosInf;
  std::int64_t running_count = 0;
  for (std::size_t k = 0; k < m; ++k) {
    running_min = std::min(running_min, total.min_ratio[k]);
    running_count += total.count[k];
    ProfileEntry& e = profile.entries[k];
    e.epsilon = eps_grid[k];
    e.pair_count = running_count;
    if (running_count == 0)
      e.lambda_hat = kPosInf;
    else if (running_min == 0.0)
      e.lambda_hat = kNegInf;
    else
      e.lambda_hat = std::log(running_min);
  }
  return profile;
}

}  // namespace

double EpsilonProfile::scalar_estimate() const {
  bool any = false;
  double best = kNegInf;
  for (const ProfileEntry& e : entries) {
    if (e.pair_count == 0) continue;
    any = true;
    best = std::max(best, e.lambda_hat);
  }
  return any ? best : kPosInf;
}

double log_ratio(const MapModel& map, const Point& x, const Point& y) {
  const double d = map.space().distance(x, y);
  if (!(d > 0.0)) throw precondition_error("log_ratio needs d(x,y) > 0");
  const double dn = map.space().distance(map.apply(x), map.apply(y));
  if (dn == 0.0) return kNegInf;
  return std::log(dn / d);
}

EpsilonProfile map_expansion_profile(const MapModel& map, const PointCloud& cloud,
                                     std::span<const double> eps_grid,
                                     const ProfileOptions& opts) {
  return profile_core(map, cloud, eps_grid, opts, nullptr);
}

EpsilonProfile measure_expansion_profile(const MapModel& map, const PointCloud& cloud,
                                         const AtomicMeasure& mu,
                                         std::span<const double> eps_grid,
                                         const ProfileOptions& opts) {
  if (mu.cloud_ptr().get() != &cloud)
    throw structural_error("measure profile: measure does not live on this cloud");
  if (mu.full_support()) return profile_core(map, cloud, eps_grid, opts, nullptr);
  const std::vector<std::int32_t> supp = mu.support();
  return profile_core(map, cloud, eps_grid, opts, &supp);
}

std::vector<double> default_epsilon_grid(const PointCloud& cloud, const ProfileOptions& opts) {
  if (cloud.size() < 2) throw precondition_error("default grid needs >= 2 points");
  const double floor = opts.floor_factor * cloud.resolution;
  const double d_min = min_positive_distance(cloud);
  double lo = floor;
  if (std::isfinite(d_min)) lo = std::max(lo, d_min * (1.0 + 1e-9));
  if (!(lo > 0.0))
    throw precondition_error("cannot build an epsilon grid: cloud has no positive scale");
  const double hi = cloud.space.diameter() / 2.0;
  std::vector<double> grid;
  for (double v = lo; v <= hi; v *= 2.0) grid.push_back(v);
  if (grid.empty()) grid.push_back(lo);
  return grid;
}

std::optional<ExponentCertificate> positive_exponent_certificate(
    const MapModel& map, const PointCloud& cloud, const AtomicMeasure& mu,
    std::span<const double> eps_grid, const ProfileOptions& opts) {
  std::vector<double> fallback;
  if (eps_grid.empty()) {
    fallback = default_epsilon_grid(cloud, opts);
    eps_grid = fallback;
  }
  const EpsilonProfile profile = measure_expansion_profile(map, cloud, mu, eps_grid, opts);
  const double e_hat = profile.scalar_estimate();
  if (!(std::isfinite(e_hat) && e_hat > 0.0)) return std::nullopt;

  // strongest scale: the largest epsilon attaining the estimate
  double epsilon = 0.0;
  for (const ProfileEntry& e : profile.entries)
    if (e.pair_count > 0 && e.lambda_hat == e_hat) epsilon = e.epsilon;

  ExponentCertificate cert;
  cert.k = std::max(std::exp(e_hat / 2.0), 1.0 + 1e-9);
  cert.epsilon = epsilon;

  const detail::OrbitFrames frames(map, cloud, 2);
  const detail::Frame& base = frames.step(0);
  const detail::Frame& image = frames.step(1);
  const std::size_t n = cloud.size();
  std::int64_t checked = 0;
  for (std::int32_t j : mu.support()) {
    const auto ja = static_cast<std::size_t>(j);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == ja) continue;
      const double d = base.dist(i, ja);
      if (!(d > 0.0 && d < epsilon)) continue;
      ++checked;
      if (image.dist(i, ja) < cert.k * d) return std::nullopt;  // cannot certify
    }
  }
  cert.checked_pairs = checked;
  return cert;
}

AtomicMeasure witness_measure(const MapModel& map, CloudPtr cloud, double lambda,
                              const WitnessOptions& opts) {
  if (!cloud) throw structural_error("witness needs a cloud");
  if (!std::isfinite(lambda)) throw precondition_error("witness level must be finite");
  const PointCloud& c = *cloud;
  const double floor = opts.profile.floor_factor * c.resolution;
  const double d_min = min_positive_distance(c);
  double eps_ref = floor;
  if (std::isfinite(d_min)) eps_ref = std::max(eps_ref, d_min * (1.0 + 1e-9));
  if (!(eps_ref > 0.0))
    throw precondition_error("witness: cloud has no positive scale to search");

  const detail::OrbitFrames frames(map, c, 2);
  const detail::Frame& base = frames.step(0);
  const detail::Frame& image = frames.step(1);
  const double k_level = std::exp(lambda);

  struct Violating {
    double d;
    std::int32_t i, j;
  };
  std::vector<Violating> violating;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = base.dist(i, j);
      if (!(d > 0.0 && d < eps_ref)) continue;
      if (image.dist(i, j) < k_level * d) {
        violating.push_back({d, static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
        violating.push_back({d, static_cast<std::int32_t>(j), static_cast<std::int32_t>(i)});
      }
    }
  }
  if (violating.empty())
    throw precondition_error("witness: lambda = " + format_real(lambda) +
                             " is not above the map estimate at scale " + format_real(eps_ref) +
                             " (no violating pair)");
  std::sort(violating.begin(), violating.end(), [](const Violating& a, const Violating& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  const std::size_t K = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.truncation, 1)),
                                              violating.size());
  std::vector<Atom> atoms;
  atoms.reserve(K);
  for (std::size_t t = 0; t < K; ++t)
    atoms.push_back(Atom{violating[t].j, std::ldexp(1.0, -static_cast<int>(t + 1))});
  return AtomicMeasure::from_atoms_renormalized(std::move(cloud), std::move(atoms));
}

void write_profile_csv(std::ostream& out, const EpsilonProfile& profile) {
  out << "epsilon,lambda_hat,pair_count\n";
  for (const ProfileEntry& e : profile.entries)
    out << format_real(e.epsilon) << "," << format_real(e.lambda_hat) << "," << e.pair_count
        << "\n";
}

}  // namespace expanse
