#include "expanse/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "detail/cover.hpp"
#include "detail/frame.hpp"

namespace expanse {

namespace {

std::vector<std::int64_t> spanning_counts_core(const detail::OrbitFrames& frames,
                                               const PointCloud& cloud, const AtomicMeasure& mu,
                                               std::int32_t n, double gamma,
                                               std::span<const double> deltas_desc) {
  if (n < 1) throw precondition_error("spanning needs n >= 1");
  if (!(gamma > 0.0)) throw precondition_error("spanning needs gamma > 0");
  if (gamma < 2.0 * cloud.resolution)
    throw precondition_error("gamma " + format_real(gamma) + " is below the scale floor " +
                             format_real(2.0 * cloud.resolution) + " (2 * cloud.resolution)");
  const std::vector<Atom>& atoms = mu.atoms();
  std::vector<std::size_t> atom_point(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a)
    atom_point[a] = static_cast<std::size_t>(atoms[a].index);
  return detail::greedy_cover_counts(cloud.size(), atoms, deltas_desc,
                                     [&](std::size_t c, std::size_t a) {
                                       return frames.bowen(c, atom_point[a], n, gamma) < gamma;
                                     });
}

// smallest number of atoms whose weights reach 1 - delta: the saturation
// plateau of any spanning count
std::int64_t atom_plateau(const AtomicMeasure& mu, double delta) {
  std::vector<double> w;
  w.reserve(mu.atoms().size());
  for (const Atom& a : mu.atoms()) w.push_back(a.weight);
  std::sort(w.begin(), w.end(), std::greater<>());
  KahanSum s;
  std::int64_t count = 0;
  for (double v : w) {
    if (s.value() >= 1.0 - delta) break;
    s.add(v);
    ++count;
  }
  return std::max<std::int64_t>(count, 1);
}

}  // namespace

std::int64_t spanning_count(const MapModel& map, const PointCloud& cloud, const AtomicMeasure& mu,
                            std::int32_t n, double gamma, double delta) {
  if (mu.cloud_ptr().get() != &cloud)
    throw structural_error("spanning: measure does not live on this cloud");
  const detail::OrbitFrames frames(map, cloud, n);
  const double deltas[1] = {delta};
  return spanning_counts_core(frames, cloud, mu, n, gamma, deltas)[0];
}

EntropyReport katok_entropy_estimate(const MapModel& map, const PointCloud& cloud,
                                     const AtomicMeasure& mu, std::int32_t n_from,
                                     std::int32_t n_to, std::span<const double> gamma_grid,
                                     double delta) {
  if (mu.cloud_ptr().get() != &cloud)
    throw structural_error("entropy: measure does not live on this cloud");
  if (n_from < 1 || n_to < n_from) throw precondition_error("entropy needs 1 <= n_from <= n_to");
  if (n_to - n_from < 1) throw precondition_error("entropy needs at least two n values");
  if (!(delta >= 0.0 && delta < 1.0)) throw precondition_error("delta must lie in [0,1)");
  if (gamma_grid.empty()) throw precondition_error("entropy needs a gamma grid");

  EntropyReport report;
  report.delta = delta;
  report.n_from = n_from;
  report.n_to = n_to;
  report.scale_floor = 2.0 * cloud.resolution;
  std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
  std::sort(gammas.begin(), gammas.end(), std::greater<>());
  for (double g : gammas) {
    if (!(g > 0.0)) throw precondition_error("gamma grid entries must be positive");
    if (g >= report.scale_floor) report.gamma_grid.push_back(g);
  }
  if (report.gamma_grid.empty())
    throw precondition_error("no admissible gamma above the scale floor " +
                             format_real(report.scale_floor));
  if (report.gamma_grid.size() < gammas.size())
    report.caveats.push_back("dropped " + std::to_string(gammas.size() - report.gamma_grid.size()) +
                             " gamma values below the scale floor");
  if (delta < mu.max_atom_weight())
    report.caveats.push_back("delta " + format_real(delta) + " is below the mass floor (max atom weight " +
                             format_real(mu.max_atom_weight()) + ")");

  report.plateau = atom_plateau(mu, delta);
  const detail::OrbitFrames frames(map, cloud, n_to);
  const double deltas[1] = {delta};

  for (double gamma : report.gamma_grid) {
    std::vector<double> xs, ys;
    std::int32_t window_lo = 0, window_hi = 0;
    for (std::int32_t n = n_from; n <= n_to; ++n) {
      const std::int64_t r = spanning_counts_core(frames, cloud, mu, n, gamma, deltas)[0];
      report.samples.push_back(SpanningSample{gamma, n, r});
      // saturated counts sit at the atom plateau and flatten the slope
      if (r <= report.plateau / 2) {
        if (xs.empty()) window_lo = n;
        window_hi = n;
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(static_cast<double>(r)));
      }
    }
    GammaFit gf;
    gf.gamma = gamma;
    if (xs.size() >= 2) {
      gf.fitted = true;
      gf.fit = fit_line(xs, ys);
      gf.window_lo = window_lo;
      gf.window_hi = window_hi;
    } else {
      report.caveats.push_back("gamma " + format_real(gamma) +
                               ": spanning counts saturated, no admissible n window");
    }
    report.fits.push_back(gf);
  }

  const GammaFit& finest = report.fits.back();  // smallest admissible gamma
  if (!finest.fitted)
    throw precondition_error("resolution too coarse for requested gamma " +
                             format_real(finest.gamma) +
                             ": spanning counts saturate over the whole n range");
  report.estimate = finest.fit.slope;
  return report;
}

BlockEntropyEntry block_entropy(const PointCloud& cloud, const AtomicMeasure& mu, std::int32_t n) {
  if (mu.cloud_ptr().get() != &cloud)
    throw structural_error("block entropy: measure does not live on this cloud");
  if (!cloud.space.single_symbol_axis())
    throw structural_error("block entropy needs a symbolic cloud");
  const Axis& axis = cloud.space.axis0();
  if (n < 1 || n > axis.word_length)
    throw precondition_error("block entropy needs 1 <= n <= word length " +
                             std::to_string(axis.word_length));
  // aggregate mass per n-prefix
  std::map<std::uint64_t, double> mass;
  for (const Atom& a : mu.atoms()) {
    const Word& w = cloud.points[static_cast<std::size_t>(a.index)].as_word();
    std::uint64_t key = 0;
    for (std::int32_t p = 0; p < n; ++p)
      key = key * static_cast<std::uint64_t>(axis.alphabet) +
            static_cast<std::uint64_t>(w[static_cast<std::size_t>(p)]);
    mass[key] += a.weight;
  }
  KahanSum h;
  for (const auto& [key, m] : mass) {
    (void)key;
    if (m > 0.0) h.add(-m * std::log(m));
  }
  BlockEntropyEntry entry;
  entry.n = n;
  entry.entropy = std::max(h.value(), 0.0);
  entry.rate = entry.entropy / static_cast<double>(n);
  return entry;
}

BlockEntropyReport block_entropy_sweep(const PointCloud& cloud, const AtomicMeasure& mu,
                                       std::int32_t n_max) {
  BlockEntropyReport report;
  for (std::int32_t n = 1; n <= n_max; ++n)
    report.entries.push_back(block_entropy(cloud, mu, n));
  if (report.entries.empty()) throw precondition_error("block entropy sweep needs n_max >= 1");
  report.limit_estimate = report.entries.back().rate;
  report.last_decrement = report.entries.size() >= 2
                              ? report.entries.back().rate - report.entries[report.entries.size() - 2].rate
                              : 0.0;
  return report;
}

void write_entropy_csv(std::ostream& out, const EntropyReport& report) {
  out << "gamma,n,r_hat\n";
  for (const SpanningSample& s : report.samples)
    out << format_real(s.gamma) << "," << s.n << "," << s.count << "\n";
}

void write_block_entropy_csv(std::ostream& out, const BlockEntropyReport& report) {
  out << "n,H_n,H_n_over_n\n";
  for (const BlockEntropyEntry& e : report.entries)
    out << e.n << "," << format_real(e.entropy) << "," << format_real(e.rate) << "\n";
}

}  // namespace expanse
