#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "expanse/maps.hpp"
#include "expanse/spaces.hpp"

namespace expanse {

using CloudPtr = std::shared_ptr<const PointCloud>;

struct Atom {
  std::int32_t index = 0;
  double weight = 0.0;
};

// Finitely supported Borel probability measure on a cloud: the toolkit's
// representation of every measure, with atoms sorted by point index.
class AtomicMeasure {
 public:
  AtomicMeasure() = default;

  // Merges duplicate indices, drops zero weights, requires |sum - 1| <= 1e-12
  // and keeps the weights as given.
  static AtomicMeasure from_atoms(CloudPtr cloud, std::vector<Atom> atoms);
  // Same but divides by the total instead of requiring it to be 1 already.
  static AtomicMeasure from_atoms_renormalized(CloudPtr cloud, std::vector<Atom> atoms);
  static AtomicMeasure from_weights(CloudPtr cloud, std::span<const double> weight_per_point);
  static AtomicMeasure uniform(CloudPtr cloud);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const PointCloud& cloud() const { return *cloud_; }
  const CloudPtr& cloud_ptr() const { return cloud_; }

  double total_mass() const;
  double max_atom_weight() const;
  double mass_of(std::span<const std::int32_t> indices) const;
  std::vector<std::int32_t> support() const;
  bool support_contains(std::int32_t index) const;
  bool support_subset_of(const AtomicMeasure& other) const;
  bool full_support() const { return atoms_.size() == cloud_->size(); }

 private:
  CloudPtr cloud_;
  std::vector<Atom> atoms_;
};

AtomicMeasure dirac(CloudPtr cloud, std::int32_t index);

// Convex combination sum t_i mu_i; the t_i must be nonnegative and sum to 1
// within 1e-12, and all measures must live on the same cloud.
AtomicMeasure convex_combine(std::span<const std::pair<double, AtomicMeasure>> terms);

// Image measure: each atom moves to T(x) and must land on a cloud point
// (snapped within 1e-9, precondition_error otherwise).
AtomicMeasure pushforward(const MapModel& map, const AtomicMeasure& mu);

// Total-variation distance between mu and its pushforward; 0 iff invariant
// on the cloud.
double invariance_defect(const MapModel& map, const AtomicMeasure& mu);

enum class MeasureGenerator {
  UniformIid,          // n iid uniform points, empirical weights
  GridUniform,         // grid cloud, weight 1/n each
  Bernoulli,           // all words of a 2-symbol space, product weights
  CantorMiddleThirds,  // 2^depth left endpoints in [0,1], weight 2^-depth
};

struct GeneratorSpec {
  MeasureGenerator kind = MeasureGenerator::GridUniform;
  double p = 0.5;          // Bernoulli only
  std::int32_t depth = 1;  // Cantor only
};

struct SampledMeasure {
  CloudPtr cloud;
  AtomicMeasure measure;
};

// Deterministic given the seed. n is the sample/grid size for the iid and
// grid generators; Bernoulli and Cantor fix their own cloud sizes.
SampledMeasure sample_measure(const SpaceModel& space, const GeneratorSpec& gen,
                              std::int64_t n, std::uint64_t seed);

// CSV with one column per real axis, one per symbol position, then a weight
// column; weights are renormalized on load.
AtomicMeasure load_measure_csv(std::istream& in, const SpaceModel& space);
void write_measure_csv(std::ostream& out, const AtomicMeasure& mu);

}  // namespace expanse
