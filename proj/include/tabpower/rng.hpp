#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "tabpower/special.hpp"

namespace tabpower {

// Counter-based RNG (Philox4x32-10, Salmon et al. 2011). A stream is
// addressed by (seed, stream id); streams never overlap because the
// stream id is part of the 128-bit counter. Replicate r of a simulation
// draws only from stream r, so results do not depend on how replicates
// are scheduled across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      philox_block();
      ++index_;
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on the open interval (0,1); never returns an endpoint, so the
  // value is always a valid argument for inverse-CDF transforms.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via the inverse CDF. One uniform per variate, so the
  // stream position after k draws does not depend on the values drawn.
  double normal() { return normal_quantile(uniform()); }

  // Binomial(m, p) by counting geometric waiting times between successes.
  // Exact for all (m, p); O(m * min(p, 1-p)) expected work and no
  // underflow issues for large m (unlike CDF-recursion samplers).
  std::int64_t binomial(std::int64_t m, double p);

 private:
  void philox_block();

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t index_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

inline void RngStream::philox_block() {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  std::uint32_t c0 = static_cast<std::uint32_t>(index_);
  std::uint32_t c1 = static_cast<std::uint32_t>(index_ >> 32);
  std::uint32_t c2 = stream_lo_;
  std::uint32_t c3 = stream_hi_;
  std::uint32_t k0 = key0_, k1 = key1_;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0;
    std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2;
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    k0 += kW0; k1 += kW1;
  }
  buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
}

inline std::int64_t RngStream::binomial(std::int64_t m, double p) {
  if (m < 0) throw std::invalid_argument("binomial: negative trial count");
  if (m == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return m;
  bool flipped = p > 0.5;
  double q = flipped ? 1.0 - p : p;
  // Number of successes = number of complete geometric(q) waiting times
  // that fit into m trials.
  double log1mq = std::log1p(-q);
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  for (;;) {
    double g = std::floor(std::log(uniform()) / log1mq) + 1.0;
    if (g > static_cast<double>(m - trials)) break;
    trials += static_cast<std::int64_t>(g);
    ++successes;
    if (trials == m) break;
  }
  return flipped ? m - successes : successes;
}

}  // namespace tabpower
