#pragma once

// Synapse-local probabilistic STDP with search, capture and backoff cases.
//
// Every probability is an integer numerator over 1024. Each case draws its
// Bernoulli variables in a fixed order (synapses neuron-major, then line;
// the mode draw before the stabilizer draw) so a seed fully determines the
// weight trajectory.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tnn/column.hpp"
#include "tnn/error.hpp"
#include "tnn/random.hpp"
#include "tnn/volley.hpp"

namespace tnn {

struct StdpParams {
  int mu_search = 0;
  int mu_capture = 0;
  int mu_backoff = 0;
  int mu_min = 0;
  int w_max = kDefaultWeightMax;

  void validate() const {
    auto check = [](const char* name, int v) {
      if (v < 0 || v > kProbabilityDenominator)
        throw InvalidArgument(std::string(name) + " = " + std::to_string(v) + " outside [0, 1024]");
    };
    check("mu_search", mu_search);
    check("mu_capture", mu_capture);
    check("mu_backoff", mu_backoff);
    check("mu_min", mu_min);
    if (w_max < 1) throw InvalidArgument("w_max must be >= 1");
  }

  friend bool operator==(const StdpParams&, const StdpParams&) = default;
};

enum class UpdateKind { none, search, capture, backoff };

inline const char* to_string(UpdateKind k) {
  switch (k) {
    case UpdateKind::none: return "none";
    case UpdateKind::search: return "search";
    case UpdateKind::capture: return "capture";
    case UpdateKind::backoff: return "backoff";
  }
  return "?";
}

struct UpdateOutcome {
  int weight = 0;
  UpdateKind kind = UpdateKind::none;
  bool applied = false;  ///< the weight actually changed

  friend bool operator==(const UpdateOutcome&, const UpdateOutcome&) = default;
};

/// Which output spike a synapse learns against.
enum class LearningSignal {
  post_inhibition,  ///< z_j: losers of the WTA see no output spike (default)
  pre_inhibition,   ///< y_j: every neuron's own spike, inhibited or not
};

namespace detail {
inline void check_weight(int w, int w_max) {
  if (w < 0 || w > w_max)
    throw InvalidArgument("weight " + std::to_string(w) + " outside [0, " + std::to_string(w_max) + "]");
}
}  // namespace detail

/// F+(w) = w_n (2 - w_n) with w_n = w / w_max, as a rounded /1024 numerator.
inline int f_plus(int w, int w_max) {
  if (w_max < 1) throw InvalidArgument("w_max must be >= 1");
  detail::check_weight(w, w_max);
  const std::int64_t num = std::int64_t{kProbabilityDenominator} * w * (2 * w_max - w);
  const std::int64_t den = std::int64_t{w_max} * w_max;
  return static_cast<int>((2 * num + den) / (2 * den));
}

/// Mirror of F+ about the midpoint: sticky near w_max under decrements.
inline int f_minus(int w, int w_max) {
  detail::check_weight(w, w_max);
  return f_plus(w_max - w, w_max);
}

/// F+/F- lookup tables for one w_max.
class Stabilizer {
 public:
  explicit Stabilizer(int w_max) : plus_(static_cast<std::size_t>(w_max) + 1), minus_(plus_.size()) {
    for (int w = 0; w <= w_max; ++w) {
      plus_[static_cast<std::size_t>(w)] = f_plus(w, w_max);
      minus_[static_cast<std::size_t>(w)] = f_minus(w, w_max);
    }
  }
  int plus(int w) const { return plus_[static_cast<std::size_t>(w)]; }
  int minus(int w) const { return minus_[static_cast<std::size_t>(w)]; }
  int w_max() const { return static_cast<int>(plus_.size()) - 1; }

 private:
  std::vector<int> plus_;
  std::vector<int> minus_;
};

/// Which case of the update table applies to an (input, output) spike pair.
inline UpdateKind classify(SpikeTime x, SpikeTime z) {
  if (x.finite() && z.finite()) return x <= z ? UpdateKind::capture : UpdateKind::backoff;
  if (x.finite()) return UpdateKind::search;
  if (z.finite()) return UpdateKind::backoff;
  return UpdateKind::none;
}

namespace detail {
inline UpdateOutcome apply_update(int w, SpikeTime x, SpikeTime z, const StdpParams& params,
                                  const Stabilizer& stab, Rng& rng) {
  const UpdateKind kind = classify(x, z);
  int next = w;
  switch (kind) {
    case UpdateKind::capture: {
      const bool b1 = bernoulli(params.mu_capture, rng);
      const bool b2 = bernoulli(std::max(stab.plus(w), params.mu_min), rng);
      next = w + ((b1 && b2) ? 1 : 0);
      break;
    }
    case UpdateKind::backoff: {
      const bool b1 = bernoulli(params.mu_backoff, rng);
      const bool b2 = bernoulli(std::max(stab.minus(w), params.mu_min), rng);
      next = w - ((b1 && b2) ? 1 : 0);
      break;
    }
    case UpdateKind::search:
      next = w + (bernoulli(params.mu_search, rng) ? 1 : 0);
      break;
    case UpdateKind::none:
      break;
  }
  next = std::clamp(next, 0, params.w_max);
  return {next, kind, next != w};
}
}  // namespace detail

/// One synapse update for input spike x and output spike z.
inline UpdateOutcome stdp_update(int w, SpikeTime x, SpikeTime z, const StdpParams& params, Rng& rng) {
  params.validate();
  detail::check_weight(w, params.w_max);
  const Stabilizer stab(params.w_max);
  return detail::apply_update(w, x, z, params, stab, rng);
}

/// Applied (weight-changing) updates, by case.
struct UpdateCounts {
  std::int64_t searches = 0;
  std::int64_t captures = 0;
  std::int64_t backoffs = 0;

  std::int64_t total() const noexcept { return searches + captures + backoffs; }

  void add(const UpdateOutcome& o) {
    if (!o.applied) return;
    switch (o.kind) {
      case UpdateKind::search: ++searches; break;
      case UpdateKind::capture: ++captures; break;
      case UpdateKind::backoff: ++backoffs; break;
      case UpdateKind::none: break;
    }
  }

  UpdateCounts& operator+=(const UpdateCounts& o) {
    searches += o.searches;
    captures += o.captures;
    backoffs += o.backoffs;
    return *this;
  }

  friend bool operator==(const UpdateCounts&, const UpdateCounts&) = default;
};

struct StepResult {
  InferenceResult inference;
  UpdateCounts updates;
};

/// Online learner bound to one parameter set.
class Trainer {
 public:
  explicit Trainer(StdpParams params, LearningSignal signal = LearningSignal::post_inhibition)
      : params_(params), signal_(signal), stab_((params.validate(), params.w_max)) {}

  const StdpParams& params() const noexcept { return params_; }
  LearningSignal signal() const noexcept { return signal_; }

  /// Infers on x, then updates every synapse from its input spike and its
  /// neuron's output spike. Weights are mutated in place.
  StepResult step(Column& col, std::span<const SpikeTime> x, Rng& rng) const {
    if (col.w_max() != params_.w_max) throw InvalidArgument("column w_max does not match STDP parameters");
    StepResult out{infer(col, x), {}};
    const Volley& out_spikes = signal_ == LearningSignal::post_inhibition ? out.inference.z : out.inference.y;
    for (int j = 0; j < col.neurons(); ++j) {
      const SpikeTime zj = out_spikes[static_cast<std::size_t>(j)];
      auto row = col.mutable_row(j);
      for (std::size_t i = 0; i < row.size(); ++i) {
        const auto o = detail::apply_update(row[i], x[i], zj, params_, stab_, rng);
        row[i] = o.weight;
        out.updates.add(o);
      }
    }
    return out;
  }

 private:
  StdpParams params_;
  LearningSignal signal_;
  Stabilizer stab_;
};

inline StepResult train_step(Column& col, std::span<const SpikeTime> x, const StdpParams& params, Rng& rng,
                             LearningSignal signal = LearningSignal::post_inhibition) {
  return Trainer(params, signal).step(col, x, rng);
}

/// Applied update counts accumulated in fixed-size buckets of patterns.
class UpdateLog {
 public:
  explicit UpdateLog(std::int64_t bucket_size = 1000) : bucket_size_(bucket_size) {
    if (bucket_size < 1) throw InvalidArgument("bucket size must be >= 1");
  }

  void record(std::int64_t pattern_index, const UpdateCounts& c) {
    const auto b = static_cast<std::size_t>(pattern_index / bucket_size_);
    if (buckets_.size() <= b) buckets_.resize(b + 1);
    buckets_[b] += c;
  }

  std::int64_t bucket_size() const noexcept { return bucket_size_; }
  const std::vector<UpdateCounts>& buckets() const noexcept { return buckets_; }

  /// Sum over patterns [begin, end); both must be bucket-aligned.
  UpdateCounts sum(std::int64_t begin, std::int64_t end) const {
    UpdateCounts s;
    for (std::int64_t b = begin / bucket_size_; b < end / bucket_size_ && b < std::ssize(buckets_); ++b)
      s += buckets_[static_cast<std::size_t>(b)];
    return s;
  }

  /// CSV: bucket_start, searches, captures, backoffs.
  void write_csv(std::ostream& os) const {
    os << "bucket_start,searches,captures,backoffs\n";
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      const auto& c = buckets_[b];
      os << static_cast<std::int64_t>(b) * bucket_size_ << ',' << c.searches << ',' << c.captures << ','
         << c.backoffs << '\n';
    }
  }

 private:
  std::int64_t bucket_size_;
  std::vector<UpdateCounts> buckets_;
};

}  // namespace tnn
