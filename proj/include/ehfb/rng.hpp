#pragma once

#include <array>
#include <cstdint>

#include "ehfb/math.hpp"

// Counter-based pseudorandom generation (Philox4x32-10).
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
//
// Every consumer of randomness in this library opens its own substream keyed
// by (seed, purpose, stream).  A substream's output depends only on that key
// and on how many values were drawn from it, never on other substreams, so
// trial-level parallelism reproduces bit-identical results for any worker
// count.  Gaussian variates are produced by the inverse-cdf transform so the
// whole pipeline shares one accuracy contract with normal_inv_cdf.

namespace ehfb {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2>& key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;

  const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);

  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += kW0;
  key[1] += kW1;
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key);
  }
  return ctr;
}

}  // namespace detail

// Stream purposes; distinct consumers never share a substream.
enum class StreamPurpose : std::uint32_t {
  energy_process = 0,
  outage = 1,
  info_density = 2,
  energy_estimation = 3,
  rate_quantile = 4,
  adaptive_budget = 5,
  converse_stats = 6,
  bootstrap = 7,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        base_{0u, 0u, static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32) ^
                  (static_cast<std::uint32_t>(purpose) * 0x9E3779B9u)} {}

  std::uint64_t next_u64() {
    if (word_index_ == 0) {
      block_ = detail::philox10(base_, key_);
      ++base_[0];
      if (base_[0] == 0) ++base_[1];
    }
    const std::uint32_t lo = block_[word_index_];
    const std::uint32_t hi = block_[word_index_ + 1];
    word_index_ = (word_index_ + 2) % 4;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  /// Uniform on the open interval (0,1); neither endpoint is attainable.
  double uniform01() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate via the inverse-cdf transform.
  double gaussian() { return normal_inv_cdf(uniform01()); }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::array<std::uint32_t, 4> block_{};
  int word_index_ = 0;
};

}  // namespace ehfb
