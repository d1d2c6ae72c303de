#pragma once

#include <cmath>
#include <cstdint>

// Counter-based RNG for reproducible parallel Monte Carlo.
// Philox4x32-10, Salmon et al., "Parallel random numbers: as easy as 1, 2, 3",
// SC 2011. Each simulation index gets its own stream, so results do not
// depend on how simulations are distributed over threads.

namespace ubsim {

class Philox4x32 {
 public:
  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  // Skip-ahead within the stream (also used by the known-answer tests).
  void set_counter(std::uint64_t counter) { counter_ = counter; }

  // Next 4x32 block; the block counter advances by one per call.
  void next_block(std::uint32_t out[4]) {
    std::uint32_t c[4] = {static_cast<std::uint32_t>(counter_),
                          static_cast<std::uint32_t>(counter_ >> 32),
                          stream_lo_, stream_hi_};
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      one_round(c, k0, k1);
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out[0] = c[0]; out[1] = c[1]; out[2] = c[2]; out[3] = c[3];
    ++counter_;
  }

 private:
  static void mul_hi_lo(std::uint32_t a, std::uint32_t b,
                        std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  static void one_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(0xD2511F53u, c[0], hi0, lo0);
    mul_hi_lo(0xCD9E8D57u, c[2], hi1, lo1);
    const std::uint32_t r0 = hi1 ^ c[1] ^ k0;
    const std::uint32_t r1 = lo1;
    const std::uint32_t r2 = hi0 ^ c[3] ^ k1;
    const std::uint32_t r3 = lo0;
    c[0] = r0; c[1] = r1; c[2] = r2; c[3] = r3;
  }

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t counter_ = 0;
};

// Per-path stream: uniforms strictly inside (0,1) and standard normals.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t stream) : gen_(seed, stream) {}

  std::uint64_t next_u64() {
    if (have_word_) {
      have_word_ = false;
      return spare_word_;
    }
    std::uint32_t b[4];
    gen_.next_block(b);
    spare_word_ = (static_cast<std::uint64_t>(b[2]) << 32) | b[3];
    have_word_ = true;
    return (static_cast<std::uint64_t>(b[0]) << 32) | b[1];
  }

  // Uniform on the open interval (0,1): 53-bit mantissa, half-ulp offset.
  double uniform_open01() {
    const std::uint64_t k = next_u64() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double gauss() {
    if (have_gauss_) {
      have_gauss_ = false;
      return spare_gauss_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_gauss_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

 private:
  Philox4x32 gen_;
  std::uint64_t spare_word_ = 0;
  double spare_gauss_ = 0.0;
  bool have_word_ = false;
  bool have_gauss_ = false;
};

}  // namespace ubsim
