#pragma once

// SRM0 excitatory neuron with no-leak response functions.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/volley.hpp"

namespace tnn {

enum class ResponseKind {
  ramp,  ///< rises by one per time unit, saturates at the weight
  step,  ///< jumps to the weight at arrival
};

inline constexpr int kDefaultWeightMax = 8;

struct ResponseParams {
  int w_max = kDefaultWeightMax;
  ResponseKind kind = ResponseKind::ramp;
};

/// Output of one neuron for one volley: its spike time and the body potential
/// at that time (0 when it does not spike).
struct NeuronResult {
  SpikeTime spike = kInf;
  std::int32_t potential = 0;

  friend bool operator==(const NeuronResult&, const NeuronResult&) = default;
};

/// Response of a synapse with weight `w`, `t` time units after its input spike.
inline int response(int w, std::int64_t t, int w_max = kDefaultWeightMax,
                    ResponseKind kind = ResponseKind::ramp) {
  if (w < 0 || w > w_max)
    throw InvalidArgument("weight " + std::to_string(w) + " outside [0, " + std::to_string(w_max) + "]");
  if (t < 0) return 0;
  if (kind == ResponseKind::step) return w;
  return t < w ? static_cast<int>(t) + 1 : w;
}

/// v(t) = sum over lines with a spike of response(w_i, t - x_i).
inline std::int64_t body_potential(std::span<const SpikeTime> x, std::span<const int> weights, std::int64_t t,
                                   ResponseKind kind = ResponseKind::ramp) {
  if (x.size() != weights.size())
    throw DimensionMismatch("volley has " + std::to_string(x.size()) + " lines but neuron has " +
                            std::to_string(weights.size()) + " synapses");
  std::int64_t v = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_inf()) continue;
    const int w = weights[i];
    if (w < 0) throw InvalidArgument("negative synaptic weight");
    v += response(w, t - x[i].value(), std::max(w, 1), kind);
  }
  return v;
}

namespace detail {

// Event sweep over sorted breakpoints; used when the input spread is too wide
// for a dense per-time-step profile.
inline NeuronResult spike_time_sparse(std::span<const SpikeTime> x, std::span<const int> weights,
                                      std::int64_t theta, ResponseKind kind) {
  struct Event {
    std::int64_t time;
    std::int64_t slope;  // change in per-step increment (ramp)
    std::int64_t jump;   // immediate change in potential (step)
  };
  std::vector<Event> events;
  events.reserve(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_inf() || weights[i] == 0) continue;
    const std::int64_t xi = x[i].value();
    if (kind == ResponseKind::step) {
      events.push_back({xi, 0, weights[i]});
    } else {
      events.push_back({xi, +1, 0});
      events.push_back({xi + weights[i], -1, 0});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

  std::int64_t potential = 0;  // v(t) at the last processed time
  std::int64_t slope = 0;
  std::int64_t now = events.empty() ? 0 : events.front().time - 1;
  std::size_t e = 0;
  while (e < events.size()) {
    const std::int64_t at = events[e].time;
    // Linear stretch over (now, at - 1].
    if (slope > 0 && at - 1 > now) {
      const std::int64_t need = theta - potential;
      const std::int64_t steps = (need + slope - 1) / slope;
      if (steps <= at - 1 - now) {
        const std::int64_t t = now + steps;
        return {SpikeTime::at(t), static_cast<std::int32_t>(potential + steps * slope)};
      }
      potential += slope * (at - 1 - now);
    }
    std::int64_t jump = 0;
    for (; e < events.size() && events[e].time == at; ++e) {
      slope += events[e].slope;
      jump += events[e].jump;
    }
    potential += jump + slope;
    now = at;
    if (potential >= theta) return {SpikeTime::at(now), static_cast<std::int32_t>(potential)};
  }
  return {};
}

}  // namespace detail

/// Spiking function: the smallest t with v(t) >= theta, or INF.
///
/// The potential is zero before the earliest input spike and constant from
/// max_finite(x) + max(w) onward, so only that window is examined.
inline NeuronResult spike_time(std::span<const SpikeTime> x, std::span<const int> weights, std::int64_t theta,
                               ResponseKind kind = ResponseKind::ramp) {
  if (x.size() != weights.size())
    throw DimensionMismatch("volley has " + std::to_string(x.size()) + " lines but neuron has " +
                            std::to_string(weights.size()) + " synapses");
  if (theta < 1) throw InvalidArgument("threshold must be >= 1");

  std::int64_t t_lo = -1, t_hi = -1;
  int w_top = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] < 0) throw InvalidArgument("negative synaptic weight");
    if (x[i].is_inf()) continue;
    const std::int64_t xi = x[i].value();
    if (t_lo < 0 || xi < t_lo) t_lo = xi;
    if (xi > t_hi) t_hi = xi;
    w_top = std::max(w_top, weights[i]);
  }
  if (t_lo < 0 || w_top == 0) return {};

  const std::int64_t horizon = t_hi - t_lo + (kind == ResponseKind::ramp ? w_top : 0);
  if (horizon > (1 << 16)) return detail::spike_time_sparse(x, weights, theta, kind);

  // Dense profile indexed by offset from t_lo.
  std::vector<std::int64_t> delta(static_cast<std::size_t>(horizon) + 2, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_inf() || weights[i] == 0) continue;
    const auto k = static_cast<std::size_t>(x[i].value() - t_lo);
    if (kind == ResponseKind::step) {
      delta[k] += weights[i];
    } else {
      delta[k] += 1;
      delta[k + static_cast<std::size_t>(weights[i])] -= 1;
    }
  }
  std::int64_t potential = 0, slope = 0;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(horizon); ++k) {
    if (kind == ResponseKind::step) {
      potential += delta[k];
    } else {
      slope += delta[k];
      potential += slope;
    }
    if (potential >= theta)
      return {SpikeTime::at(t_lo + static_cast<std::int64_t>(k)), static_cast<std::int32_t>(potential)};
  }
  return {};
}

/// Rescales a spike time observed at threshold theta_I (where the potential
/// was `potential`) to a functional threshold theta_F: ceil(z * theta_F / v).
inline SpikeTime extrapolate_spike_time(SpikeTime z, std::int64_t potential, std::int64_t theta_f) {
  if (potential < 1) throw InvalidArgument("body potential must be >= 1 for extrapolation");
  if (theta_f < 1) throw InvalidArgument("functional threshold must be >= 1");
  if (z.is_inf()) throw InvalidArgument("cannot extrapolate a missing spike");
  const std::int64_t num = static_cast<std::int64_t>(z.value()) * theta_f;
  return SpikeTime::at((num + potential - 1) / potential);
}

/// Spike time of an idealized unbounded ramp with m matching inputs:
/// the smallest t with m + m*t >= theta, i.e. ceil(theta / m) - 1.
inline std::int64_t ideal_spike_time(std::int64_t matches, std::int64_t theta) {
  if (matches < 1) throw InvalidArgument("match count must be >= 1");
  if (theta < 1) throw InvalidArgument("threshold must be >= 1");
  return (theta + matches - 1) / matches - 1;
}

}  // namespace tnn
