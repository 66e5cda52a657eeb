#pragma once

// Noisy pattern streams built from the ten baseline exemplars.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/mnist.hpp"
#include "tnn/random.hpp"
#include "tnn/volley.hpp"

namespace tnn {

/// Flips each pixel independently with probability p.
inline BinaryImage add_noise(const BinaryImage& img, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("noise probability must be in [0, 1]");
  BinaryImage out = img;
  std::bernoulli_distribution flip(p);
  for (auto& px : out.pixels)
    if (flip(rng)) px ^= 1;
  return out;
}

enum class Schedule {
  uniform,          ///< labels i.i.d. uniform over 0..9
  odds_then_evens,  ///< uniform over odd digits, then over even digits
};

struct StreamSpec {
  std::int64_t length = 70000;
  double noise_p = 0.30;
  Schedule schedule = Schedule::uniform;
  std::int64_t transition = 34916;  ///< first even-digit index for odds_then_evens
  std::uint64_t seed = 1;

  void validate() const {
    if (length < 0) throw InvalidArgument("stream length must be non-negative");
    if (!(noise_p >= 0.0 && noise_p <= 1.0)) throw InvalidArgument("noise_p must be in [0, 1]");
    if (schedule == Schedule::odds_then_evens && (transition < 0 || transition >= length))
      throw InvalidArgument("transition index must lie inside the stream");
  }
};

struct StreamItem {
  std::int64_t index = 0;
  int label = 0;
  BinaryImage image;  ///< the noisy image before PosNeg expansion
  Volley volley;      ///< PosNeg-encoded image
};

/// Lazily generated sequence of (noisy volley, label) pairs. The label is
/// ground truth for scoring only.
class PatternStream {
 public:
  PatternStream(BaselineSet baselines, StreamSpec spec)
      : baselines_(std::move(baselines)), spec_((spec.validate(), spec)), rng_(spec.seed) {}

  std::int64_t length() const noexcept { return spec_.length; }
  std::int64_t position() const noexcept { return next_; }
  bool done() const noexcept { return next_ >= spec_.length; }
  const StreamSpec& spec() const noexcept { return spec_; }
  const BaselineSet& baselines() const noexcept { return baselines_; }

  /// Produces the next item. Precondition: !done().
  StreamItem next() {
    if (done()) throw InvalidArgument("pattern stream exhausted");
    StreamItem item;
    item.index = next_;
    item.label = draw_label(next_);
    item.image = add_noise(baselines_.images[static_cast<std::size_t>(item.label)], spec_.noise_p, rng_);
    item.volley = posneg_encode(item.image);
    ++next_;
    return item;
  }

 private:
  int draw_label(std::int64_t index) {
    switch (spec_.schedule) {
      case Schedule::uniform: {
        std::uniform_int_distribution<int> d(0, 9);
        return d(rng_);
      }
      case Schedule::odds_then_evens: {
        std::uniform_int_distribution<int> d(0, 4);
        const int base = index < spec_.transition ? 1 : 0;
        return base + 2 * d(rng_);
      }
    }
    return 0;
  }

  BaselineSet baselines_;
  StreamSpec spec_;
  Rng rng_;
  std::int64_t next_ = 0;
};

}  // namespace tnn
