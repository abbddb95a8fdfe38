#pragma once

#include <cstdint>
#include <queue>
#include <span>
#include <vector>

#include "expanse/errors.hpp"
#include "expanse/measures.hpp"
#include "expanse/numeric.hpp"
#include "expanse/parallel.hpp"

namespace expanse::detail {

// Greedy mass cover shared by the capacity and entropy estimators:
// repeatedly pick the center whose ball captures maximal uncovered mass
// (ties by lowest center index) until the covered mass reaches 1 - delta.
// Returns one count per delta (deltas strictly descending). in_ball(center,
// atom_ordinal) tests ball membership and must be symmetric in the
// underlying metric. Upper bound on the true minimal cover.
//
// Ball membership is materialized once (CSR) and the greedy loop runs
// lazily: a candidate's gain is recomputed from scratch before being
// accepted, so gains never accumulate float drift and the pick sequence is
// exactly the textbook greedy's.
template <class InBall>
std::vector<std::int64_t> greedy_cover_counts(std::size_t n_centers,
                                              std::span<const Atom> atoms,
                                              std::span<const double> deltas_desc,
                                              InBall&& in_ball) {
  if (deltas_desc.empty()) throw precondition_error("greedy cover needs at least one delta");
  for (std::size_t t = 0; t < deltas_desc.size(); ++t) {
    if (!(deltas_desc[t] >= 0.0 && deltas_desc[t] < 1.0))
      throw precondition_error("delta must lie in [0,1)");
    if (t > 0 && !(deltas_desc[t] < deltas_desc[t - 1]))
      throw precondition_error("delta grid must be strictly descending");
  }
  if (atoms.empty()) throw precondition_error("greedy cover needs a nonempty measure");

  const std::size_t n_atoms = atoms.size();

  // membership lists, centers x atom ordinals
  std::vector<std::int64_t> row_size(n_centers, 0);
  parallel_chunks(n_centers, 64, [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::int64_t cnt = 0;
      for (std::size_t a = 0; a < n_atoms; ++a)
        if (in_ball(c, a)) ++cnt;
      row_size[c] = cnt;
    }
  });
  std::vector<std::int64_t> offset(n_centers + 1, 0);
  for (std::size_t c = 0; c < n_centers; ++c) offset[c + 1] = offset[c] + row_size[c];
  const std::int64_t total = offset[n_centers];
  if (total > (std::int64_t(1) << 28) * 1)  // ~268M entries, ~1 GiB
    throw precondition_error("cover instance too large (ball membership would need " +
                             std::to_string(total) + " entries); coarsen the scale grid");
  std::vector<std::int32_t> member(static_cast<std::size_t>(total));
  parallel_chunks(n_centers, 64, [&](int, std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      std::int64_t at = offset[c];
      for (std::size_t a = 0; a < n_atoms; ++a)
        if (in_ball(c, a)) member[static_cast<std::size_t>(at++)] = static_cast<std::int32_t>(a);
    }
  });

  std::vector<char> covered(n_atoms, 0);
  auto fresh_gain = [&](std::size_t c) {
    double g = 0.0;
    for (std::int64_t t = offset[c]; t < offset[c + 1]; ++t) {
      const auto a = static_cast<std::size_t>(member[static_cast<std::size_t>(t)]);
      if (!covered[a]) g += atoms[a].weight;
    }
    return g;
  };

  struct Entry {
    double gain;
    std::int32_t center;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.gain != b.gain) return a.gain < b.gain;
      return a.center > b.center;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Worse> queue;
  for (std::size_t c = 0; c < n_centers; ++c)
    queue.push(Entry{fresh_gain(c), static_cast<std::int32_t>(c)});

  std::vector<std::int64_t> counts(deltas_desc.size(), 0);
  std::size_t next_target = 0;
  KahanSum covered_mass;
  std::size_t covered_atoms = 0;
  std::int64_t picks = 0;
  while (next_target < deltas_desc.size()) {
    const double target = 1.0 - deltas_desc[next_target];
    // a fully covered support meets every target regardless of how the
    // float sum of its weights rounds
    if (covered_mass.value() >= target || covered_atoms == n_atoms) {
      counts[next_target++] = picks;
      continue;
    }
    if (queue.empty())
      throw precondition_error("greedy cover ran out of candidates before reaching 1-delta");
    Entry top = queue.top();
    queue.pop();
    const double gain = fresh_gain(static_cast<std::size_t>(top.center));
    if (!queue.empty()) {
      const Entry& peer = queue.top();
      // lazy rule: accept only if still at least as good as the best stale
      // bound, with the lowest-index tie unchanged
      if (gain < peer.gain || (gain == peer.gain && top.center > peer.center)) {
        queue.push(Entry{gain, top.center});
        continue;
      }
    }
    if (!(gain > 0.0))
      throw precondition_error("greedy cover stalled: no ball captures uncovered mass");
    ++picks;
    const auto c = static_cast<std::size_t>(top.center);
    for (std::int64_t t = offset[c]; t < offset[c + 1]; ++t) {
      const auto a = static_cast<std::size_t>(member[static_cast<std::size_t>(t)]);
      if (!covered[a]) {
        covered[a] = 1;
        ++covered_atoms;
        covered_mass.add(atoms[a].weight);
      }
    }
  }
  return counts;
}

}  // namespace expanse::detail
