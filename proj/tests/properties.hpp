#pragma once

// Randomized property checks shared by the unit suites and the acceptance
// binary. Each returns an empty string on success, or a description of the
// first counterexample.

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tnn/column.hpp"
#include "tnn/metrics.hpp"
#include "tnn/neuron.hpp"
#include "tnn/random.hpp"
#include "tnn/runner.hpp"
#include "tnn/stdp.hpp"
#include "tnn/volley.hpp"

namespace tnn::props {

template <class... Args>
std::string describe(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

inline Volley random_volley(std::mt19937_64& g, std::size_t n, int max_t, double p_inf) {
  std::bernoulli_distribution inf(p_inf);
  std::uniform_int_distribution<int> t(0, max_t);
  Volley v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(inf(g) ? kInf : SpikeTime::at(t(g)));
  return v;
}

inline std::string sad_axioms(std::uint64_t seed, int trials) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> len(1, 32), q(0, 8);
  auto vec = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = q(g) / 8.0;  // exact in binary floating point
    return v;
  };
  for (int k = 0; k < trials; ++k) {
    const auto n = static_cast<std::size_t>(len(g));
    const auto a = vec(n), b = vec(n), c = vec(n);
    const double ab = sad(a, b), ba = sad(b, a), ac = sad(a, c), bc = sad(b, c);
    if (ab < 0) return describe("negative distance at trial ", k);
    if (ab != ba) return describe("asymmetric at trial ", k);
    if (sad(a, a) != 0) return describe("sad(a, a) != 0 at trial ", k);
    if ((ab == 0) != (a == b)) return describe("zero distance between distinct vectors at trial ", k);
    if (ac > ab + bc) return describe("triangle inequality violated at trial ", k);
  }
  return {};
}

inline std::string binarize_idempotent(std::uint64_t seed, int trials) {
  std::mt19937_64 g(seed);
  for (int k = 0; k < trials; ++k) {
    const auto v = random_volley(g, 1 + static_cast<std::size_t>(k % 40), 50, 0.4);
    const auto b = binarize(v);
    if (binarize(b) != b) return describe("binarize not idempotent at trial ", k);
    if (b.size() != v.size()) return describe("length changed at trial ", k);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].finite() != b[i].finite()) return describe("support changed at trial ", k);
      if (b[i].finite() && b[i].value() != 0) return describe("finite entry not moved to 0 at trial ", k);
    }
  }
  return {};
}

inline std::string posneg_complement(std::uint64_t seed, int trials) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> side(1, 18);
  std::bernoulli_distribution bit(0.5);
  for (int k = 0; k < trials; ++k) {
    const int w = side(g), h = side(g);
    BinaryImage img(w, h);
    for (auto& p : img.pixels) p = bit(g) ? 1 : 0;
    const auto v = posneg_encode(img);
    const std::size_t n = img.size();
    if (v.size() != 2 * n) return describe("wrong volley length at trial ", k);
    if (spike_count(v) != n) return describe("spike count != pixel count at trial ", k);
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i].finite() == v[n + i].finite()) return describe("line ", i, " not complementary at trial ", k);
      if (v[i].finite() != (img.pixels[i] == 1)) return describe("positive line ", i, " wrong at trial ", k);
      if (v[i].finite() && v[i].value() != 0) return describe("spike not at t=0 at trial ", k);
    }
    if (posneg_decode(v, w, h) != img) return describe("decode does not invert encode at trial ", k);
  }
  return {};
}

/// rho(w, t) as the number of unit ramp steps taken by time t, each step
/// allowed only while the response is below w.
inline int rho_by_counting(int w, int t) {
  int v = 0;
  for (int s = 0; s <= t; ++s)
    if (v < w) ++v;
  return v;
}

inline std::string response_table() {
  for (int w = 0; w <= 8; ++w)
    for (int t = -2; t <= 12; ++t) {
      const int expect = rho_by_counting(w, t);
      if (response(w, t) != expect) return describe("rho(", w, ", ", t, ") = ", response(w, t), ", expected ", expect);
    }
  return {};
}

/// Binarized input with m lines at w_max = 8: spike time equals ceil(theta/m) - 1
/// for every theta <= 8m.
inline std::string spike_time_oracle() {
  for (int m = 1; m <= 64; ++m) {
    Volley x(128, kInf);
    std::vector<int> w(128, 0);
    for (int i = 0; i < m; ++i) {
      x[static_cast<std::size_t>(2 * i)] = SpikeTime::at(0);
      w[static_cast<std::size_t>(2 * i)] = 8;
      w[static_cast<std::size_t>(2 * i + 1)] = 8;  // weighted but silent lines contribute nothing
    }
    for (int theta = 1; theta <= 512; ++theta) {
      if (theta > 8 * m) break;
      const auto r = spike_time(x, w, theta);
      const auto ideal = ideal_spike_time(m, theta);
      if (!r.spike.finite() || r.spike.value() != ideal)
        return describe("m=", m, " theta=", theta, ": spike ", r.spike, ", ideal ", ideal);
      if (r.potential != m * (ideal + 1)) return describe("m=", m, " theta=", theta, ": potential ", r.potential);
    }
    if (spike_time(x, w, 8 * m + 1).spike.finite()) return describe("m=", m, ": spiked above the saturation bound");
  }
  return {};
}

inline std::string wta_rule(std::uint64_t seed, int trials) {
  std::mt19937_64 g(seed);
  for (int k = 0; k < trials; ++k) {
    const auto y = random_volley(g, 1 + static_cast<std::size_t>(k % 12), 4, 0.3);
    const auto z = wta(y);
    if (z.size() != y.size()) return describe("length changed at trial ", k);
    const auto finite = spike_count(z);
    if (finite > 1) return describe("more than one winner at trial ", k);
    const SpikeTime ymin = min_time(y);
    if (ymin.is_inf()) {
      if (finite != 0) return describe("winner for a null volley at trial ", k);
      continue;
    }
    if (finite != 1) return describe("no winner at trial ", k);
    std::size_t first = 0;
    while (y[first] != ymin) ++first;
    if (z[first] != ymin) return describe("winner is not the lowest-index earliest spike at trial ", k);
  }
  return {};
}

/// Update case selection, written independently of the library's classifier.
inline UpdateKind expected_case(SpikeTime x, SpikeTime z) {
  const bool xs = x.finite(), zs = z.finite();
  if (xs && zs) return x.value() <= z.value() ? UpdateKind::capture : UpdateKind::backoff;
  if (xs) return UpdateKind::search;
  if (zs) return UpdateKind::backoff;
  return UpdateKind::none;
}

inline std::string stdp_partition(std::uint64_t seed, int trials) {
  std::mt19937_64 g(seed);
  std::uniform_int_distribution<int> wmax_d(1, 15), mu(0, 1024), t(0, 6);
  std::bernoulli_distribution inf(0.35), extreme(0.2);
  Rng rng(seed);
  int w_max = 8;
  StdpParams p{};
  Stabilizer stab(w_max);
  for (int k = 0; k < trials; ++k) {
    if (k % 1000 == 0) {
      w_max = wmax_d(g);
      auto pick = [&] { return extreme(g) ? (mu(g) < 512 ? 0 : 1024) : mu(g); };
      p = {pick(), pick(), pick(), pick(), w_max};
      stab = Stabilizer(w_max);
    }
    const int w = std::uniform_int_distribution<int>(0, w_max)(g);
    const SpikeTime x = inf(g) ? kInf : SpikeTime::at(t(g));
    const SpikeTime z = inf(g) ? kInf : SpikeTime::at(t(g));
    const auto o = detail::apply_update(w, x, z, p, stab, rng);
    const auto kind = expected_case(x, z);
    if (o.kind != kind) return describe("case ", to_string(o.kind), " != ", to_string(kind), " at trial ", k);
    if (o.weight < 0 || o.weight > w_max) return describe("weight ", o.weight, " escaped [0, ", w_max, "]");
    const int d = o.weight - w;
    if (d < -1 || d > 1) return describe("step of ", d, " at trial ", k);
    if (o.applied != (d != 0)) return describe("applied flag disagrees with the weight change at trial ", k);
    if ((kind == UpdateKind::capture || kind == UpdateKind::search) && d < 0)
      return describe("increment case decreased the weight at trial ", k);
    if (kind == UpdateKind::backoff && d > 0) return describe("backoff increased the weight at trial ", k);
    if (kind == UpdateKind::none && d != 0) return describe("none case changed the weight at trial ", k);
  }
  return {};
}

/// Runs the same configuration twice and compares every recorded output.
inline std::string run_replay(const ExperimentConfig& cfg, const BaselineSet& base) {
  const auto a = run(cfg, base);
  const auto b = run(cfg, base);
  if (!(a.column == b.column)) return "final weights differ";
  if (a.log.buckets() != b.log.buckets()) return "update logs differ";
  if (a.windows.size() != b.windows.size()) return "window count differs";
  for (std::size_t k = 0; k < a.windows.size(); ++k) {
    const auto& ra = a.windows[k].records;
    const auto& rb = b.windows[k].records;
    if (ra.size() != rb.size()) return "record count differs";
    for (std::size_t i = 0; i < ra.size(); ++i)
      if (ra[i].winner != rb[i].winner || ra[i].spike != rb[i].spike || ra[i].potential != rb[i].potential ||
          ra[i].label != rb[i].label)
        return describe("record ", i, " of window ", k, " differs");
    if (a.windows[k].metrics.purity != b.windows[k].metrics.purity) return "purity differs";
  }
  return {};
}

}  // namespace tnn::props
