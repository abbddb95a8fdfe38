#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "expanse/maps.hpp"
#include "expanse/measures.hpp"

namespace expanse {

struct ProfileEntry {
  double epsilon = 0.0;
  // infimum of log d(Tx,Ty)/d(x,y) over admissible pairs at distance < epsilon;
  // +inf when no pair exists, -inf when a pair collapses to image distance 0
  double lambda_hat = 0.0;
  std::int64_t pair_count = 0;
};

// The estimator's refinement of "sup over lambda such that some epsilon
// works": one infimum per epsilon, read off the best entry.
struct EpsilonProfile {
  std::vector<ProfileEntry> entries;
  double resolution_floor = 0.0;

  // max over entries with pairs; +inf when every entry is vacuous (the
  // uniformly-discrete regime of a finite space)
  double scalar_estimate() const;
};

struct ProfileOptions {
  // admissible epsilon must be >= floor_factor * cloud.resolution; below the
  // sample scale the finite model says nothing about the underlying space
  double floor_factor = 4.0;
};

struct ExponentCertificate {
  double k = 1.0;        // > 1
  double epsilon = 0.0;  // scale at which the k-expansion was verified
  std::int64_t checked_pairs = 0;
};

// log of d(T(x),T(y)) / d(x,y); -inf when the image distance is 0.
double log_ratio(const MapModel& map, const Point& x, const Point& y);

EpsilonProfile map_expansion_profile(const MapModel& map, const PointCloud& cloud,
                                     std::span<const double> eps_grid,
                                     const ProfileOptions& opts = {});

// Pairs (x, y) with x over the whole cloud and y over supp(mu) only: on
// atomic measures "mu(bad set) = 0" is exactly "no support atom is bad".
EpsilonProfile measure_expansion_profile(const MapModel& map, const PointCloud& cloud,
                                         const AtomicMeasure& mu,
                                         std::span<const double> eps_grid,
                                         const ProfileOptions& opts = {});

// Geometric (ratio 2) grid from the resolution floor (or just above the
// closest pair when the declared resolution is 0) up to half the space
// diameter.
std::vector<double> default_epsilon_grid(const PointCloud& cloud,
                                         const ProfileOptions& opts = {});

// (k, epsilon) with k > 1 certifying d(Tx,Ty) >= k d(x,y) for all pairs
// into the support at distance < epsilon; verified by direct scan. Empty
// when the measure estimate is not strictly positive.
std::optional<ExponentCertificate> positive_exponent_certificate(
    const MapModel& map, const PointCloud& cloud, const AtomicMeasure& mu,
    std::span<const double> eps_grid = {}, const ProfileOptions& opts = {});

struct WitnessOptions {
  std::int32_t truncation = 20;  // K; changes the ideal measure by < 2^-K
  ProfileOptions profile;
};

// Measure sum 2^-i delta_{y_i} over the K closest pairs violating the
// lambda-expansion at the reference scale, renormalized. Errors when no
// pair violates (lambda not above the map estimate).
AtomicMeasure witness_measure(const MapModel& map, CloudPtr cloud, double lambda,
                              const WitnessOptions& opts = {});

// columns: epsilon, lambda_hat, pair_count (with +inf/-inf literals)
void write_profile_csv(std::ostream& out, const EpsilonProfile& profile);

}  // namespace expanse
