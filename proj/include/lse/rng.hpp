// rng.hpp — counter-based RNG with per-trajectory substreams

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lse {

/// Philox4x64-10 counter-based generator (Salmon et al. constants).
/// The key is (seed, stream); distinct streams are independent keyed
/// permutations of the counter space, so substreams never overlap no
/// matter how many numbers each one draws.
class PhiloxRng {
 public:
  using result_type = std::uint64_t;

  PhiloxRng(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream}, counter_{0, 0, 0, 0} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (index_ == 4) {
      block_ = generate(counter_, key_);
      advance_counter();
      index_ = 0;
    }
    return block_[index_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(operator()() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static void mul_hi_lo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  static std::array<std::uint64_t, 4> generate(std::array<std::uint64_t, 4> x,
                                               std::array<std::uint64_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi0, lo0, hi1, lo1;
      mul_hi_lo(kMul0, x[0], hi0, lo0);
      mul_hi_lo(kMul1, x[2], hi1, lo1);
      x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    return x;
  }

  void advance_counter() {
    for (auto& word : counter_)
      if (++word != 0) break;
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_{};
  int index_ = 4;
};

}  // namespace lse
