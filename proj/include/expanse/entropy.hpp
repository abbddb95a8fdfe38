#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "expanse/maps.hpp"
#include "expanse/measures.hpp"
#include "expanse/numeric.hpp"

namespace expanse {

struct SpanningSample {
  double gamma = 0.0;
  std::int32_t n = 0;
  std::int64_t count = 0;
};

struct GammaFit {
  double gamma = 0.0;
  bool fitted = false;
  LineFit fit;  // log r_hat against n over the admissible window
  std::int32_t window_lo = 0, window_hi = 0;
};

struct EntropyReport {
  std::vector<SpanningSample> samples;
  std::vector<GammaFit> fits;
  double estimate = 0.0;  // slope at the smallest admissible gamma
  double delta = 0.0;
  std::int32_t n_from = 0, n_to = 0;
  std::vector<double> gamma_grid;  // admissible entries actually used
  double scale_floor = 0.0;        // 2 * cloud.resolution
  // minimal number of atoms whose weights sum to 1 - delta: the greedy
  // count's saturation plateau
  std::int64_t plateau = 0;
  std::vector<std::string> caveats;
};

// Greedy size of a set F whose Bowen balls B(x,n,gamma) capture mass
// >= 1 - delta (ties by lowest index). n = 1 is the ordinary ball cover.
std::int64_t spanning_count(const MapModel& map, const PointCloud& cloud, const AtomicMeasure& mu,
                            std::int32_t n, double gamma, double delta);

// Growth rate of log r_hat in n per gamma, fitted over the window where the
// counts have not saturated at the atom plateau; the estimate is the slope
// at the smallest gamma.
EntropyReport katok_entropy_estimate(const MapModel& map, const PointCloud& cloud,
                                     const AtomicMeasure& mu, std::int32_t n_from,
                                     std::int32_t n_to, std::span<const double> gamma_grid,
                                     double delta);

struct BlockEntropyEntry {
  std::int32_t n = 0;
  double entropy = 0.0;  // nats
  double rate = 0.0;     // entropy / n
};

struct BlockEntropyReport {
  std::vector<BlockEntropyEntry> entries;
  double limit_estimate = 0.0;  // last rate
  double last_decrement = 0.0;  // rate(n) - rate(n-1), trend toward the limit
};

// Exact block entropy over n-symbol prefixes of a word measure (nats,
// 0 log 0 = 0). Needs a symbolic cloud and n <= word length.
BlockEntropyEntry block_entropy(const PointCloud& cloud, const AtomicMeasure& mu, std::int32_t n);
BlockEntropyReport block_entropy_sweep(const PointCloud& cloud, const AtomicMeasure& mu,
                                       std::int32_t n_max);

// columns: gamma, n, r_hat
void write_entropy_csv(std::ostream& out, const EntropyReport& report);
// columns: n, H_n, H_n_over_n
void write_block_entropy_csv(std::ostream& out, const BlockEntropyReport& report);

}  // namespace expanse
