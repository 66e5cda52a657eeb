#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "tnn/error.hpp"

namespace tnn {

/// Learning probabilities are integer numerators over this denominator.
inline constexpr int kProbabilityDenominator = 1024;

enum class RngMode {
  standard,  ///< 64-bit Mersenne Twister
  lfsr,      ///< 16-bit maximal-length Galois LFSR, hardware-style
};

/// Seedable deterministic generator. Satisfies UniformRandomBitGenerator so it
/// can drive <random> distributions directly.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, RngMode mode = RngMode::standard) : mode_(mode), engine_(seed) {
    // An all-zero LFSR state is a fixed point.
    lfsr_ = static_cast<std::uint16_t>(seed ^ (seed >> 16) ^ (seed >> 32) ^ (seed >> 48));
    if (lfsr_ == 0) lfsr_ = 0xACE1u;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  RngMode mode() const noexcept { return mode_; }

  result_type operator()() {
    if (mode_ == RngMode::standard) return engine_();
    result_type out = 0;
    for (int i = 0; i < 4; ++i) out = (out << 16) | step_lfsr_word();
    return out;
  }

  /// Uniform value in [0, 1024) from a single draw.
  int uniform10() {
    if (mode_ == RngMode::standard) return static_cast<int>(engine_() >> 54);
    // One LFSR shift per draw; the low 10 bits of the register are the window.
    step_lfsr();
    return lfsr_ & 0x3FF;
  }

 private:
  void step_lfsr() {
    const unsigned lsb = lfsr_ & 1u;
    lfsr_ >>= 1;
    if (lsb) lfsr_ ^= 0xB400u;  // x^16 + x^14 + x^13 + x^11 + 1
  }

  std::uint16_t step_lfsr_word() {
    for (int i = 0; i < 16; ++i) step_lfsr();
    return lfsr_;
  }

  RngMode mode_;
  std::mt19937_64 engine_;
  std::uint16_t lfsr_;
};

/// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

/// True with probability numerator / 1024; consumes exactly one draw.
inline bool bernoulli(int numerator, Rng& rng) {
  if (numerator < 0 || numerator > kProbabilityDenominator)
    throw InvalidArgument("probability numerator " + std::to_string(numerator) + " outside [0, 1024]");
  return rng.uniform10() < numerator;
}

}  // namespace tnn
