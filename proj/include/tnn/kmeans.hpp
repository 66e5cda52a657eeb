#pragma once

// Offline k-means under sad distance, the reference the column is compared to.
//
// Centroids are kept as exact integer member sums plus a member count, so
// distances compare exactly (cross-multiplied) and the lowest-index tie rule
// holds without floating-point noise.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tnn/error.hpp"
#include "tnn/metrics.hpp"
#include "tnn/random.hpp"

namespace tnn {

struct KMeansOptions {
  int max_epochs = 100;
  double converge_at = 0.99;  ///< stop once this fraction of assignments is stable
};

/// A centroid as the sum of its member bit vectors over the member count.
struct ExactCentroid {
  std::vector<std::int64_t> sums;
  std::int64_t count = 0;

  Centroid to_centroid() const {
    Centroid c;
    c.means.resize(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i)
      c.means[i] = static_cast<double>(sums[i]) / static_cast<double>(count);
    return c;
  }
};

struct KMeansModel {
  std::vector<ExactCentroid> centroids;
  int epochs_run = 0;
  double final_c_conv = 0;
  std::int64_t reseeds = 0;
  std::vector<double> objective;  ///< total within-cluster sad after each epoch's update

  int k() const { return static_cast<int>(centroids.size()); }
  std::vector<Centroid> means() const {
    std::vector<Centroid> out;
    for (const auto& c : centroids) out.push_back(c.to_centroid());
    return out;
  }
};

namespace detail {

// Scaled distance n * sad(x, s / n) = S + sum_{x_i = 1} (n - 2 s_i).
class KMeansScorer {
 public:
  explicit KMeansScorer(std::span<const ExactCentroid> cents) {
    const std::size_t dim = cents.empty() ? 0 : cents.front().sums.size();
    dim_ = dim;
    coef_.resize(cents.size() * dim);
    base_.resize(cents.size());
    count_.resize(cents.size());
    for (std::size_t c = 0; c < cents.size(); ++c) {
      const auto& e = cents[c];
      std::int64_t s = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        s += e.sums[i];
        coef_[c * dim + i] = static_cast<std::int32_t>(e.count - 2 * e.sums[i]);
      }
      base_[c] = s;
      count_[c] = e.count;
    }
  }

  int nearest(std::span<const std::uint8_t> x) const {
    int best = -1;
    std::int64_t best_d = 0, best_n = 1;
    for (std::size_t c = 0; c < base_.size(); ++c) {
      if (count_[c] == 0) continue;
      const std::int32_t* a = coef_.data() + c * dim_;
      std::int64_t dot = 0;
      for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<std::int32_t>(x[i]) * a[i];
      const std::int64_t d = base_[c] + dot;
      // d / count_[c] < best_d / best_n
      if (best < 0 || d * best_n < best_d * count_[c]) {
        best = static_cast<int>(c);
        best_d = d;
        best_n = count_[c];
      }
    }
    return best;
  }

  double distance(std::span<const std::uint8_t> x, int c) const {
    const std::int32_t* a = coef_.data() + static_cast<std::size_t>(c) * dim_;
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<std::int32_t>(x[i]) * a[i];
    return static_cast<double>(base_[static_cast<std::size_t>(c)] + dot) /
           static_cast<double>(count_[static_cast<std::size_t>(c)]);
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::int32_t> coef_;
  std::vector<std::int64_t> base_;
  std::vector<std::int64_t> count_;
};

inline ExactCentroid single(std::span<const std::uint8_t> bits) {
  ExactCentroid e;
  e.sums.assign(bits.begin(), bits.end());
  e.count = 1;
  return e;
}

}  // namespace detail

/// Assigns each pattern to its nearest centroid (lowest index on ties).
inline std::vector<int> kmeans_assign(std::span<const Pattern> patterns, std::span<const ExactCentroid> cents) {
  const detail::KMeansScorer scorer(cents);
  std::vector<int> out(patterns.size());
  for (std::size_t k = 0; k < patterns.size(); ++k) out[k] = scorer.nearest(patterns[k].bits);
  return out;
}

/// Forgy initialization (k random patterns with distinct values), then alternating
/// assign/update epochs until at least `converge_at` of the assignments are
/// unchanged by an epoch or `max_epochs` have run. Empty clusters are
/// re-seeded from a uniformly drawn pattern.
inline KMeansModel kmeans_fit(std::span<const Pattern> patterns, int k, Rng& rng, KMeansOptions opts = {}) {
  if (k <= 0) throw InvalidArgument("k must be positive");
  if (patterns.empty()) throw InvalidArgument("k-means needs at least one pattern");
  if (static_cast<std::size_t>(k) > patterns.size()) throw InvalidArgument("k exceeds the number of patterns");
  if (opts.max_epochs < 1) throw InvalidArgument("max_epochs must be >= 1");
  const std::size_t dim = patterns.front().bits.size();
  for (const auto& p : patterns)
    if (p.bits.size() != dim) throw DimensionMismatch("k-means: patterns differ in length");

  KMeansModel model;
  {
    // Partial Fisher-Yates over indices, skipping patterns equal to one
    // already chosen. Duplicates are taken only when the distinct values run out.
    std::vector<std::size_t> idx(patterns.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> skipped;
    for (std::size_t n = 0; n < idx.size() && model.centroids.size() < static_cast<std::size_t>(k); ++n) {
      std::uniform_int_distribution<std::size_t> pick(n, idx.size() - 1);
      std::swap(idx[n], idx[pick(rng)]);
      const auto& bits = patterns[idx[n]].bits;
      const bool seen = std::any_of(model.centroids.begin(), model.centroids.end(), [&](const ExactCentroid& c) {
        return std::equal(c.sums.begin(), c.sums.end(), bits.begin(), bits.end());
      });
      if (seen) skipped.push_back(idx[n]);
      else model.centroids.push_back(detail::single(bits));
    }
    for (std::size_t n = 0; model.centroids.size() < static_cast<std::size_t>(k); ++n)
      model.centroids.push_back(detail::single(patterns[skipped[n]].bits));
  }

  std::vector<int> assign = kmeans_assign(patterns, model.centroids);
  std::uniform_int_distribution<std::size_t> any(0, patterns.size() - 1);
  while (model.epochs_run < opts.max_epochs) {
    // Update step.
    std::vector<ExactCentroid> next(static_cast<std::size_t>(k));
    for (auto& c : next) c.sums.assign(dim, 0);
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      auto& c = next[static_cast<std::size_t>(assign[p])];
      const auto& bits = patterns[p].bits;
      for (std::size_t i = 0; i < dim; ++i) c.sums[i] += bits[i];
      ++c.count;
    }
    for (auto& c : next) {
      if (c.count == 0) {
        c = detail::single(patterns[any(rng)].bits);
        ++model.reseeds;
      }
    }
    model.centroids = std::move(next);
    ++model.epochs_run;

    // Assignment step, and stability against the previous assignment.
    const detail::KMeansScorer scorer(model.centroids);
    std::vector<int> fresh(patterns.size());
    std::size_t stable = 0;
    double objective = 0;
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      fresh[p] = scorer.nearest(patterns[p].bits);
      if (fresh[p] == assign[p]) ++stable;
      objective += scorer.distance(patterns[p].bits, assign[p]);
    }
    model.objective.push_back(objective);
    model.final_c_conv = static_cast<double>(stable) / static_cast<double>(patterns.size());
    assign = std::move(fresh);
    if (model.final_c_conv >= opts.converge_at) break;
  }
  return model;
}

/// Partitions held-out patterns with the fitted centroids and scores them.
inline MetricsReport kmeans_evaluate(const KMeansModel& model, std::span<const Pattern> patterns,
                                     std::span<const int> labels) {
  if (model.centroids.empty()) throw InvalidArgument("k-means model is not fitted");
  const auto assign = kmeans_assign(patterns, model.centroids);
  Clustering clustering;
  clustering.clusters = model.k();
  clustering.assignments.reserve(assign.size());
  for (int a : assign) clustering.assignments.emplace_back(a);
  return clustering_metrics(patterns, clustering, labels);
}

}  // namespace tnn
