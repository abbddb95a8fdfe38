#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace expanse {

// splitmix64. Every random choice in the toolkit draws from one of these,
// derived from the config seed and a component name, so runs reproduce
// bit-for-bit across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0,1) with 53 random bits
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // unbiased uniform in [0,n)
  std::uint64_t next_below(std::uint64_t n);

  // k distinct values from [0,n), in draw order
  std::vector<std::int32_t> sample_indices(std::int64_t n, std::int64_t k);

 private:
  std::uint64_t state_;
};

// Stream for a named component: the seed XOR'd with an FNV-1a hash of the
// name, run through one splitmix scramble.
SplitMix64 seed_stream(std::uint64_t seed, std::string_view component);

}  // namespace expanse
