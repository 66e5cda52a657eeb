#pragma once

// A column: p input lines feeding q excitatory neurons through a p x q
// synaptic crossbar, followed by 1-WTA inhibition.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/neuron.hpp"
#include "tnn/volley.hpp"

namespace tnn {

class Column {
 public:
  Column(int inputs, int neurons, int theta, int w_max = kDefaultWeightMax,
         ResponseKind response = ResponseKind::ramp)
      : p_(inputs), q_(neurons), theta_(theta), w_max_(w_max), response_(response) {
    if (inputs < 1) throw InvalidArgument("column needs at least one input line");
    if (neurons < 1) throw InvalidArgument("column needs at least one neuron");
    if (theta < 1) throw InvalidArgument("threshold must be >= 1");
    if (w_max < 1) throw InvalidArgument("w_max must be >= 1");
    weights_.assign(static_cast<std::size_t>(p_) * q_, 0);
  }

  int inputs() const noexcept { return p_; }
  int neurons() const noexcept { return q_; }
  int theta() const noexcept { return theta_; }
  int w_max() const noexcept { return w_max_; }
  ResponseKind response() const noexcept { return response_; }
  void set_response(ResponseKind kind) noexcept { response_ = kind; }

  /// Synaptic weights of neuron j, one per input line.
  std::span<const int> row(int neuron) const {
    check_neuron(neuron);
    return {weights_.data() + static_cast<std::size_t>(neuron) * p_, static_cast<std::size_t>(p_)};
  }

  /// Mutable row access; callers must keep entries in [0, w_max].
  std::span<int> mutable_row(int neuron) {
    check_neuron(neuron);
    return {weights_.data() + static_cast<std::size_t>(neuron) * p_, static_cast<std::size_t>(p_)};
  }

  int weight(int neuron, int line) const { return row(neuron)[check_line(line)]; }

  void set_weight(int neuron, int line, int w) {
    check_weight(w);
    mutable_row(neuron)[check_line(line)] = w;
  }

  void fill(int w) {
    check_weight(w);
    std::fill(weights_.begin(), weights_.end(), w);
  }

  /// All weights, neuron-major (q rows of p).
  std::span<const int> weights() const noexcept { return weights_; }

  friend bool operator==(const Column& a, const Column& b) {
    return a.p_ == b.p_ && a.q_ == b.q_ && a.theta_ == b.theta_ && a.w_max_ == b.w_max_ &&
           a.weights_ == b.weights_;
  }

 private:
  void check_neuron(int j) const {
    if (j < 0 || j >= q_) throw InvalidArgument("neuron index " + std::to_string(j) + " out of range");
  }
  std::size_t check_line(int i) const {
    if (i < 0 || i >= p_) throw InvalidArgument("line index " + std::to_string(i) + " out of range");
    return static_cast<std::size_t>(i);
  }
  void check_weight(int w) const {
    if (w < 0 || w > w_max_)
      throw InvalidArgument("weight " + std::to_string(w) + " outside [0, " + std::to_string(w_max_) + "]");
  }

  int p_;
  int q_;
  int theta_;
  int w_max_;
  ResponseKind response_;
  std::vector<int> weights_;
};

struct InferenceResult {
  Volley y;  ///< neuron outputs before inhibition
  Volley z;  ///< outputs after 1-WTA: at most one finite entry
  std::optional<int> winner;
  std::int32_t winner_potential = 0;  ///< body potential of the winner at its spike
};

namespace detail {
inline void check_input(const Column& col, std::span<const SpikeTime> x) {
  if (x.size() != static_cast<std::size_t>(col.inputs()))
    throw DimensionMismatch("volley has " + std::to_string(x.size()) + " lines, column expects " +
                            std::to_string(col.inputs()));
}
}  // namespace detail

/// Evaluates every neuron in parallel (function E), keeping the potentials.
inline std::vector<NeuronResult> evaluate_detailed(const Column& col, std::span<const SpikeTime> x) {
  detail::check_input(col, x);
  std::vector<NeuronResult> out;
  out.reserve(static_cast<std::size_t>(col.neurons()));
  for (int j = 0; j < col.neurons(); ++j) out.push_back(spike_time(x, col.row(j), col.theta(), col.response()));
  return out;
}

inline Volley evaluate(const Column& col, std::span<const SpikeTime> x) {
  const auto results = evaluate_detailed(col, x);
  Volley y;
  y.reserve(results.size());
  for (const auto& r : results) y.push_back(r.spike);
  return y;
}

/// Index of the earliest spike, lowest index on ties; empty for the null volley.
inline std::optional<int> wta_winner(std::span<const SpikeTime> y) {
  std::optional<int> best;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i].is_inf()) continue;
    if (!best || y[i] < y[static_cast<std::size_t>(*best)]) best = static_cast<int>(i);
  }
  return best;
}

/// 1-WTA inhibition (function I).
inline Volley wta(std::span<const SpikeTime> y) {
  Volley z(y.size(), kInf);
  if (auto k = wta_winner(y)) z[static_cast<std::size_t>(*k)] = y[static_cast<std::size_t>(*k)];
  return z;
}

/// z = I(E(x, W)). Pattern x belongs to cluster `winner` when present.
inline InferenceResult infer(const Column& col, std::span<const SpikeTime> x) {
  const auto results = evaluate_detailed(col, x);
  InferenceResult r;
  r.y.reserve(results.size());
  for (const auto& n : results) r.y.push_back(n.spike);
  r.winner = wta_winner(r.y);
  r.z.assign(r.y.size(), kInf);
  if (r.winner) {
    const auto k = static_cast<std::size_t>(*r.winner);
    r.z[k] = r.y[k];
    r.winner_potential = results[k].potential;
  }
  return r;
}

/// Plain-text weight snapshot: "p q w_max theta" then q lines of p weights.
inline void write_snapshot(std::ostream& os, const Column& col) {
  os << col.inputs() << ' ' << col.neurons() << ' ' << col.w_max() << ' ' << col.theta() << '\n';
  for (int j = 0; j < col.neurons(); ++j) {
    const auto r = col.row(j);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ' ';
      os << r[i];
    }
    os << '\n';
  }
}

inline Column read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw InvalidArgument("snapshot: missing header line");
  std::istringstream hs(header);
  int p = 0, q = 0, w_max = 0, theta = 0;
  if (!(hs >> p >> q >> w_max >> theta)) throw InvalidArgument("snapshot: malformed header '" + header + "'");
  Column col(p, q, theta, w_max);
  for (int j = 0; j < q; ++j) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("snapshot: missing row " + std::to_string(j));
    std::istringstream ls(line);
    for (int i = 0; i < p; ++i) {
      int w = 0;
      if (!(ls >> w)) throw InvalidArgument("snapshot: row " + std::to_string(j) + " is short");
      col.set_weight(j, i, w);
    }
    std::string extra;
    if (ls >> extra) throw InvalidArgument("snapshot: row " + std::to_string(j) + " is too long");
  }
  return col;
}

}  // namespace tnn
