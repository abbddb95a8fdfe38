#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "expanse/measures.hpp"
#include "expanse/numeric.hpp"

namespace expanse {

struct CoverSample {
  double delta = 0.0;
  double beta = 0.0;
  std::int64_t count = 0;
};

struct DeltaFit {
  double delta = 0.0;
  LineFit fit;  // log N against -log beta
};

struct CapacityReport {
  std::vector<CoverSample> samples;
  std::vector<DeltaFit> fits;        // in delta_grid order (descending)
  double estimate = 0.0;             // slope at the smallest delta
  std::vector<double> beta_grid;     // admissible entries actually used
  std::vector<double> delta_grid;
  double scale_floor = 0.0;          // 2 * cloud.resolution
  std::vector<std::string> caveats;
};

// Greedy count of open beta-balls centered at cloud points needed to
// capture mass >= 1 - delta (ties by lowest center index). Upper bound on
// the true minimum.
std::int64_t greedy_cover_count(const PointCloud& cloud, const AtomicMeasure& mu, double beta,
                                double delta);

// Least-squares slope of log N against -log beta per delta over the
// admissible scale window; the estimate is the slope at the smallest delta.
// beta_grid: descending geometric; delta_grid: descending.
CapacityReport capacity_estimate(const PointCloud& cloud, const AtomicMeasure& mu,
                                 std::span<const double> beta_grid,
                                 std::span<const double> delta_grid);

// columns: delta, beta, n_hat
void write_capacity_csv(std::ostream& out, const CapacityReport& report);

}  // namespace expanse
