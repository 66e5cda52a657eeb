#pragma once

// Clustering quality metrics under the sum-of-absolute-differences distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/volley.hpp"

namespace tnn {

/// A column input viewed as one bit per line (1 = spike), plus its ground
/// truth label when known.
struct Pattern {
  std::vector<std::uint8_t> bits;
  std::optional<int> label;
};

inline Pattern pattern_from_volley(std::span<const SpikeTime> v, std::optional<int> label = std::nullopt) {
  Pattern p;
  p.bits.reserve(v.size());
  for (auto s : v) p.bits.push_back(s.finite() ? 1 : 0);
  p.label = label;
  return p;
}

/// Per-pattern cluster index, or nullopt for patterns no neuron claimed.
struct Clustering {
  std::vector<std::optional<int>> assignments;
  int clusters = 0;

  void validate() const {
    if (clusters < 1) throw InvalidArgument("clustering needs at least one cluster");
    for (const auto& a : assignments)
      if (a && (*a < 0 || *a >= clusters)) throw InvalidArgument("cluster index out of range");
  }
  std::size_t assigned() const {
    return static_cast<std::size_t>(
        std::count_if(assignments.begin(), assignments.end(), [](const auto& a) { return a.has_value(); }));
  }
};

struct Centroid {
  std::vector<double> means;
};

inline double sad(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("sad: vectors differ in length");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double sad(std::span<const std::uint8_t> x, std::span<const double> c) {
  if (x.size() != c.size()) throw DimensionMismatch("sad: vectors differ in length");
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] ? 1.0 - c[i] : c[i];
  return s;
}

inline Centroid centroid(std::span<const Pattern* const> members) {
  if (members.empty()) throw InvalidArgument("centroid of an empty cluster");
  const std::size_t n = members.front()->bits.size();
  std::vector<std::int64_t> sum(n, 0);
  for (const Pattern* m : members) {
    if (m->bits.size() != n) throw DimensionMismatch("centroid: members differ in length");
    for (std::size_t i = 0; i < n; ++i) sum[i] += m->bits[i];
  }
  Centroid c;
  c.means.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.means[i] = static_cast<double>(sum[i]) / static_cast<double>(members.size());
  return c;
}

inline Centroid centroid(std::span<const Pattern> members) {
  std::vector<const Pattern*> ptrs;
  ptrs.reserve(members.size());
  for (const auto& m : members) ptrs.push_back(&m);
  return centroid(std::span<const Pattern* const>(ptrs));
}

/// Centroid of each cluster's members; empty clusters have none.
inline std::vector<std::optional<Centroid>> cluster_centroids(std::span<const Pattern> patterns,
                                                              const Clustering& clustering) {
  clustering.validate();
  if (patterns.size() != clustering.assignments.size())
    throw DimensionMismatch("clustering does not cover the pattern list");
  std::vector<std::vector<const Pattern*>> members(static_cast<std::size_t>(clustering.clusters));
  for (std::size_t k = 0; k < patterns.size(); ++k)
    if (const auto& a = clustering.assignments[k]) members[static_cast<std::size_t>(*a)].push_back(&patterns[k]);
  std::vector<std::optional<Centroid>> out(members.size());
  for (std::size_t i = 0; i < members.size(); ++i)
    if (!members[i].empty()) out[i] = centroid(std::span<const Pattern* const>(members[i]));
  return out;
}

/// Index of the closest centroid; lowest index wins ties. Absent (empty-cluster)
/// centroids are skipped.
inline int nearest_centroid(std::span<const std::uint8_t> x, std::span<const std::optional<Centroid>> centroids) {
  int best = -1;
  double best_d = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (!centroids[i]) continue;
    const double d = sad(x, centroids[i]->means);
    if (best < 0 || d < best_d) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  if (best < 0) throw InvalidArgument("nearest_centroid: no centroids");
  return best;
}

inline int nearest_centroid(std::span<const std::uint8_t> x, std::span<const Centroid> centroids) {
  std::vector<std::optional<Centroid>> opt(centroids.begin(), centroids.end());
  return nearest_centroid(x, std::span<const std::optional<Centroid>>(opt));
}

/// Fraction of assigned patterns whose nearest centroid is their own cluster's.
inline double c_conv(std::span<const Pattern> patterns, const Clustering& clustering,
                     std::span<const std::optional<Centroid>> centroids) {
  std::size_t total = 0, agree = 0;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    const auto& a = clustering.assignments[k];
    if (!a) continue;
    ++total;
    if (nearest_centroid(patterns[k].bits, centroids) == *a) ++agree;
  }
  if (total == 0) throw InvalidArgument("c_conv: no assigned patterns");
  return static_cast<double>(agree) / static_cast<double>(total);
}

/// Mean sad distance of assigned patterns from their own cluster's centroid.
inline double avg_dist(std::span<const Pattern> patterns, const Clustering& clustering,
                       std::span<const std::optional<Centroid>> centroids) {
  std::size_t total = 0;
  double sum = 0;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    const auto& a = clustering.assignments[k];
    if (!a) continue;
    ++total;
    const auto& c = centroids[static_cast<std::size_t>(*a)];
    if (!c) throw InvalidArgument("avg_dist: assigned cluster has no centroid");
    sum += sad(patterns[k].bits, c->means);
  }
  if (total == 0) throw InvalidArgument("avg_dist: no assigned patterns");
  return sum / static_cast<double>(total);
}

/// Bimodality of a weight matrix: sum w (w_max - w) / (count * w_max).
/// Zero when every weight sits at 0 or w_max.
inline double w_conv(std::span<const int> weights, int w_max) {
  if (w_max < 1) throw InvalidArgument("w_max must be >= 1");
  if (weights.empty()) return 0.0;
  std::int64_t s = 0;
  for (int w : weights) {
    if (w < 0 || w > w_max) throw InvalidArgument("w_conv: weight out of range");
    s += static_cast<std::int64_t>(w) * (w_max - w);
  }
  return static_cast<double>(s) / (static_cast<double>(weights.size()) * w_max);
}

/// Majority label of each cluster (lowest label on ties); nullopt for empty clusters.
inline std::vector<std::optional<int>> majority_labels(const Clustering& clustering, std::span<const int> labels) {
  clustering.validate();
  if (labels.size() != clustering.assignments.size()) throw DimensionMismatch("purity: label count mismatch");
  std::vector<std::map<int, std::int64_t>> counts(static_cast<std::size_t>(clustering.clusters));
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (const auto& a = clustering.assignments[k]) ++counts[static_cast<std::size_t>(*a)][labels[k]];
  std::vector<std::optional<int>> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t best = 0;
    for (const auto& [label, n] : counts[i])
      if (n > best) {
        best = n;
        out[i] = label;
      }
  }
  return out;
}

/// Sum over clusters of the majority-label count, over all evaluated
/// patterns. Unassigned patterns count in the denominator only.
inline double purity(const Clustering& clustering, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const auto majority = majority_labels(clustering, labels);
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& a = clustering.assignments[k];
    if (a && majority[static_cast<std::size_t>(*a)] == labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

/// The four clustering metrics over one evaluation window.
struct MetricsReport {
  double w_conv = 0;
  double avg_dist = 0;
  double c_conv = 0;
  double purity = 0;
  double coverage = 0;  ///< fraction of patterns assigned to some cluster
  std::int64_t patterns = 0;
};

/// avg_dist, c_conv, purity and coverage of a clustering (w_conv left at 0).
inline MetricsReport clustering_metrics(std::span<const Pattern> patterns, const Clustering& clustering,
                                        std::span<const int> labels) {
  MetricsReport r;
  r.patterns = static_cast<std::int64_t>(patterns.size());
  r.purity = purity(clustering, labels);
  const std::size_t assigned = clustering.assigned();
  r.coverage = patterns.empty() ? 0.0 : static_cast<double>(assigned) / static_cast<double>(patterns.size());
  if (assigned == 0) return r;
  const auto cents = cluster_centroids(patterns, clustering);
  r.avg_dist = avg_dist(patterns, clustering, cents);
  r.c_conv = c_conv(patterns, clustering, cents);
  return r;
}

}  // namespace tnn
