#include "expanse/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace expanse {

std::uint64_t SplitMix64::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below(0)");
  const std::uint64_t bound = n * ((~0ULL) / n);  // largest multiple of n <= 2^64
  std::uint64_t v;
  do {
    v = next();
  } while (v >= bound);
  return v % n;
}

std::vector<std::int32_t> SplitMix64::sample_indices(std::int64_t n, std::int64_t k) {
  if (k > n) k = n;
  std::vector<std::int32_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (std::int64_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  all.resize(static_cast<std::size_t>(k));
  return all;
}

SplitMix64 seed_stream(std::uint64_t seed, std::string_view component) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : component) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  SplitMix64 scramble(seed ^ h);
  return SplitMix64(scramble.next());
}

}  // namespace expanse
