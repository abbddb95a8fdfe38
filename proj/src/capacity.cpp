#include "expanse/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "detail/cover.hpp"
#include "detail/frame.hpp"

namespace expanse {

namespace {

std::vector<std::int64_t> cover_counts_at(const PointCloud& cloud, const AtomicMeasure& mu,
                                          double beta, std::span<const double> deltas_desc) {
  if (!(beta > 0.0)) throw precondition_error("cover needs beta > 0");
  if (mu.cloud_ptr().get() != &cloud)
    throw structural_error("cover: measure does not live on this cloud");
  const detail::Frame base = detail::Frame::from_points(cloud.space, cloud.points);
  const std::vector<Atom>& atoms = mu.atoms();
  std::vector<std::size_t> atom_point(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a)
    atom_point[a] = static_cast<std::size_t>(atoms[a].index);
  return detail::greedy_cover_counts(
      cloud.size(), atoms, deltas_desc,
      [&](std::size_t c, std::size_t a) { return base.dist(c, atom_point[a]) < beta; });
}

}  // namespace

std::int64_t greedy_cover_count(const PointCloud& cloud, const AtomicMeasure& mu, double beta,
                                double delta) {
  const double deltas[1] = {delta};
  return cover_counts_at(cloud, mu, beta, deltas)[0];
}

CapacityReport capacity_estimate(const PointCloud& cloud, const AtomicMeasure& mu,
                                 std::span<const double> beta_grid,
                                 std::span<const double> delta_grid) {
  if (beta_grid.empty()) throw precondition_error("capacity needs a beta grid");
  if (delta_grid.empty()) throw precondition_error("capacity needs a delta grid");
  for (std::size_t k = 0; k < beta_grid.size(); ++k) {
    if (!(beta_grid[k] > 0.0)) throw precondition_error("beta grid entries must be positive");
    if (k > 0 && !(beta_grid[k] < beta_grid[k - 1]))
      throw precondition_error("beta grid must be strictly descending");
  }
  if (beta_grid.size() >= 3) {
    const double r0 = beta_grid[1] / beta_grid[0];
    for (std::size_t k = 2; k < beta_grid.size(); ++k) {
      const double r = beta_grid[k] / beta_grid[k - 1];
      if (std::fabs(r - r0) > 1e-6 * r0)
        throw precondition_error("beta grid must be geometric (constant ratio)");
    }
  }
  for (std::size_t t = 0; t < delta_grid.size(); ++t) {
    if (!(delta_grid[t] >= 0.0 && delta_grid[t] < 1.0))
      throw precondition_error("delta grid entries must lie in [0,1)");
    if (t > 0 && !(delta_grid[t] < delta_grid[t - 1]))
      throw precondition_error("delta grid must be strictly descending");
  }

  CapacityReport report;
  report.scale_floor = 2.0 * cloud.resolution;
  report.delta_grid.assign(delta_grid.begin(), delta_grid.end());
  for (double beta : beta_grid)
    if (beta >= report.scale_floor) report.beta_grid.push_back(beta);
  if (report.beta_grid.size() < 3)
    throw precondition_error(
        "insufficient scale range: " + std::to_string(report.beta_grid.size()) +
        " admissible beta values above the scale floor " + format_real(report.scale_floor) +
        " (need >= 3)");
  if (report.beta_grid.size() < beta_grid.size())
    report.caveats.push_back("dropped " + std::to_string(beta_grid.size() - report.beta_grid.size()) +
                             " beta values below the scale floor");
  const double mass_floor = mu.max_atom_weight();
  if (delta_grid.back() < mass_floor)
    report.caveats.push_back("delta " + format_real(delta_grid.back()) +
                             " is below the mass floor (max atom weight " +
                             format_real(mass_floor) + "); counts may saturate");

  // one greedy sweep per beta yields the counts for every delta
  std::vector<std::vector<std::int64_t>> counts_per_beta;
  counts_per_beta.reserve(report.beta_grid.size());
  for (double beta : report.beta_grid)
    counts_per_beta.push_back(cover_counts_at(cloud, mu, beta, delta_grid));

  for (std::size_t t = 0; t < delta_grid.size(); ++t)
    for (std::size_t b = 0; b < report.beta_grid.size(); ++b)
      report.samples.push_back(
          CoverSample{delta_grid[t], report.beta_grid[b], counts_per_beta[b][t]});

  for (std::size_t t = 0; t < delta_grid.size(); ++t) {
    std::vector<double> xs, ys;
    xs.reserve(report.beta_grid.size());
    ys.reserve(report.beta_grid.size());
    for (std::size_t b = 0; b < report.beta_grid.size(); ++b) {
      xs.push_back(-std::log(report.beta_grid[b]));
      ys.push_back(std::log(static_cast<double>(counts_per_beta[b][t])));
    }
    report.fits.push_back(DeltaFit{delta_grid[t], fit_line(xs, ys)});
  }
  report.estimate = report.fits.back().fit.slope;
  return report;
}

void write_capacity_csv(std::ostream& out, const CapacityReport& report) {
  out << "delta,beta,n_hat\n";
  for (const CoverSample& s : report.samples)
    out << format_real(s.delta) << "," << format_real(s.beta) << "," << s.count << "\n";
}

}  // namespace expanse
