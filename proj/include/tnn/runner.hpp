#pragma once

// Experiment driver: configuration, seeded runs over a pattern stream,
// evaluation windows, parameter sweeps, k-means batches and CSV output.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tnn/column.hpp"
#include "tnn/error.hpp"
#include "tnn/kmeans.hpp"
#include "tnn/metrics.hpp"
#include "tnn/mnist.hpp"
#include "tnn/random.hpp"
#include "tnn/stdp.hpp"
#include "tnn/stream.hpp"
#include "tnn/volley.hpp"

namespace tnn {

enum class Experiment { baseline, sweep, odd_even, rf18, temporal, ablation_step, kmeans };

enum class InitKind { zeros, constant, normal };

enum class DataSource { mnist, synthetic };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::baseline: return "baseline";
    case Experiment::sweep: return "sweep";
    case Experiment::odd_even: return "odd-even";
    case Experiment::rf18: return "rf18";
    case Experiment::temporal: return "temporal";
    case Experiment::ablation_step: return "ablation-step";
    case Experiment::kmeans: return "kmeans";
  }
  return "?";
}

inline Experiment parse_experiment(const std::string& s) {
  static const std::map<std::string, Experiment> names = {
      {"baseline", Experiment::baseline}, {"sweep", Experiment::sweep},
      {"odd-even", Experiment::odd_even}, {"rf18", Experiment::rf18},
      {"temporal", Experiment::temporal}, {"ablation-step", Experiment::ablation_step},
      {"kmeans", Experiment::kmeans}};
  auto it = names.find(s);
  if (it == names.end()) throw InvalidArgument("unknown experiment '" + s + "'");
  return it->second;
}

struct InitSpec {
  InitKind kind = InitKind::zeros;
  int value = 0;              ///< constant init
  double mean_fraction = 0.8; ///< normal init, as fractions of w_max
  double sd_fraction = 0.05;
};

/// One point of a parameter sweep.
struct SweepPoint {
  int theta = 0;
  int mu_capture = 0;
  int mu_backoff = 0;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::baseline;
  std::string name;  ///< config_id stem in CSV output; defaults to the experiment name

  int rf = 8;
  int neurons = 10;
  int theta = 60;
  int theta_f = 0;  ///< functional threshold for spike-time extrapolation; 0 = off
  StdpParams stdp{3, 224, 320, 32, kDefaultWeightMax};
  InitSpec init;
  ResponseKind response = ResponseKind::ramp;
  LearningSignal signal = LearningSignal::post_inhibition;
  RngMode rng_mode = RngMode::standard;

  /// Warm-up lengths; each opens an evaluation window of eval_count patterns.
  std::vector<std::int64_t> warmups = {60000};
  std::int64_t eval_count = 10000;
  /// Odd/even protocol: odd window start; the even window is the final eval_count.
  std::int64_t odd_warmup = 10000;

  std::uint64_t seed = 1;
  StreamSpec stream;
  std::int64_t bucket = 1000;

  DataSource data = DataSource::mnist;
  std::filesystem::path mnist_images = "data/mnist/train-images-idx3-ubyte";
  std::filesystem::path mnist_labels = "data/mnist/train-labels-idx1-ubyte";
  std::array<int, 10> exemplars = kDefaultExemplars;
  ExemplarIndexing indexing = ExemplarIndexing::class_occurrence_0;
  int binarize_threshold = kDefaultBinarizeThreshold;

  int kmeans_seeds = 64;
  KMeansOptions kmeans;

  std::vector<int> sweep_theta = {-4, 0, 4};
  std::vector<int> sweep_capture = {-16, 0, 16};
  std::vector<int> sweep_backoff = {-16, 0, 16};

  int inputs() const { return 2 * rf * rf; }
  std::string id() const { return name.empty() ? std::string(to_string(experiment)) : name; }

  void validate() const {
    stdp.validate();
    if (rf < 1) throw InvalidArgument("rf_size must be >= 1");
    if (neurons < 1) throw InvalidArgument("neurons must be >= 1");
    if (theta < 1) throw InvalidArgument("theta must be >= 1");
    if (theta_f < 0) throw InvalidArgument("theta_f must be >= 0");
    if (theta_f > 0 && theta_f < theta) throw InvalidArgument("theta_f must be >= theta");
    if (init.kind == InitKind::constant && (init.value < 0 || init.value > stdp.w_max))
      throw InvalidArgument("init_value outside [0, w_max]");
    if (init.kind == InitKind::normal && !(init.sd_fraction >= 0))
      throw InvalidArgument("init_sd_fraction must be >= 0");
    if (eval_count < 1) throw InvalidArgument("eval_count must be >= 1");
    if (bucket < 1) throw InvalidArgument("bucket must be >= 1");
    if (warmups.empty()) throw InvalidArgument("at least one warm-up length is required");
    for (auto w : warmups) {
      if (w < 0) throw InvalidArgument("warm-up lengths must be non-negative");
      if (experiment != Experiment::odd_even && w + eval_count > stream.length)
        throw InvalidArgument("warmup + eval_count exceeds the stream length");
    }
    if (experiment == Experiment::odd_even && (odd_warmup + eval_count > stream.length || eval_count > stream.length))
      throw InvalidArgument("odd/even windows do not fit the stream");
    if (kmeans_seeds < 1) throw InvalidArgument("kmeans_seeds must be >= 1");
    stream.validate();
  }
};

/// Default configuration of each experiment family.
inline ExperimentConfig preset(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::baseline:
    case Experiment::kmeans: break;
    case Experiment::sweep: c.warmups = {10000, 20000, 60000}; break;
    case Experiment::odd_even:
      c.stream.schedule = Schedule::odds_then_evens;
      c.stream.transition = 34916;
      break;
    case Experiment::rf18:
      c.rf = 18;
      c.theta = 56;
      c.stdp = {4, 232, 288, 40, kDefaultWeightMax};
      break;
    case Experiment::temporal: c.theta_f = 512; break;
    case Experiment::ablation_step:
      c.response = ResponseKind::step;
      c.theta_f = 512;
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw InvalidArgument("config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

inline int parse_int32(const std::string& key, const std::string& v) {
  const auto x = parse_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw InvalidArgument("config key '" + key + "': value out of range");
  return static_cast<int>(x);
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty())
    throw InvalidArgument("config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& v, F&& one) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(one(trim(item)));
  return out;
}

}  // namespace detail

/// Applies one "key = value" setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_int;
  using detail::parse_int32;
  const std::string& v = value;
  if (key == "experiment") {
    c.experiment = parse_experiment(v);
  } else if (key == "name") {
    c.name = v;
  } else if (key == "rf_size") {
    c.rf = parse_int32(key, v);
  } else if (key == "neurons") {
    c.neurons = parse_int32(key, v);
  } else if (key == "theta") {
    c.theta = parse_int32(key, v);
  } else if (key == "theta_f") {
    c.theta_f = parse_int32(key, v);
  } else if (key == "mu_search") {
    c.stdp.mu_search = parse_int32(key, v);
  } else if (key == "mu_capture") {
    c.stdp.mu_capture = parse_int32(key, v);
  } else if (key == "mu_backoff") {
    c.stdp.mu_backoff = parse_int32(key, v);
  } else if (key == "mu_min") {
    c.stdp.mu_min = parse_int32(key, v);
  } else if (key == "w_max") {
    c.stdp.w_max = parse_int32(key, v);
  } else if (key == "init") {
    if (v == "zeros") c.init.kind = InitKind::zeros;
    else if (v == "constant") c.init.kind = InitKind::constant;
    else if (v == "normal") c.init.kind = InitKind::normal;
    else throw InvalidArgument("init must be zeros, constant or normal");
  } else if (key == "init_value") {
    c.init.value = parse_int32(key, v);
  } else if (key == "init_mean_fraction") {
    c.init.mean_fraction = detail::parse_real(key, v);
  } else if (key == "init_sd_fraction") {
    c.init.sd_fraction = detail::parse_real(key, v);
  } else if (key == "response") {
    if (v == "ramp") c.response = ResponseKind::ramp;
    else if (v == "step") c.response = ResponseKind::step;
    else throw InvalidArgument("response must be ramp or step");
  } else if (key == "learning_signal") {
    if (v == "post") c.signal = LearningSignal::post_inhibition;
    else if (v == "pre") c.signal = LearningSignal::pre_inhibition;
    else throw InvalidArgument("learning_signal must be post or pre");
  } else if (key == "rng") {
    if (v == "standard") c.rng_mode = RngMode::standard;
    else if (v == "lfsr") c.rng_mode = RngMode::lfsr;
    else throw InvalidArgument("rng must be standard or lfsr");
  } else if (key == "warmup") {
    c.warmups = {parse_int(key, v)};
  } else if (key == "warmups") {
    c.warmups = detail::parse_list<std::int64_t>(v, [&](const std::string& s) { return parse_int(key, s); });
  } else if (key == "eval_count") {
    c.eval_count = parse_int(key, v);
  } else if (key == "odd_warmup") {
    c.odd_warmup = parse_int(key, v);
  } else if (key == "seed") {
    const auto s = parse_int(key, v);
    if (s < 0) throw InvalidArgument("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "stream_length") {
    c.stream.length = parse_int(key, v);
  } else if (key == "noise_p") {
    c.stream.noise_p = detail::parse_real(key, v);
  } else if (key == "schedule") {
    if (v == "uniform") c.stream.schedule = Schedule::uniform;
    else if (v == "odds-then-evens") c.stream.schedule = Schedule::odds_then_evens;
    else throw InvalidArgument("schedule must be uniform or odds-then-evens");
  } else if (key == "transition") {
    c.stream.transition = parse_int(key, v);
  } else if (key == "bucket") {
    c.bucket = parse_int(key, v);
  } else if (key == "data") {
    if (v == "mnist") c.data = DataSource::mnist;
    else if (v == "synthetic") c.data = DataSource::synthetic;
    else throw InvalidArgument("data must be mnist or synthetic");
  } else if (key == "mnist_images") {
    c.mnist_images = v;
  } else if (key == "mnist_labels") {
    c.mnist_labels = v;
  } else if (key == "exemplars") {
    const auto xs = detail::parse_list<int>(v, [&](const std::string& s) { return parse_int32(key, s); });
    if (xs.size() != 10) throw InvalidArgument("exemplars needs ten comma-separated indices");
    std::copy(xs.begin(), xs.end(), c.exemplars.begin());
  } else if (key == "exemplar_indexing") {
    if (v == "class0") c.indexing = ExemplarIndexing::class_occurrence_0;
    else if (v == "class1") c.indexing = ExemplarIndexing::class_occurrence_1;
    else if (v == "global0") c.indexing = ExemplarIndexing::global_0;
    else if (v == "global1") c.indexing = ExemplarIndexing::global_1;
    else throw InvalidArgument("exemplar_indexing must be class0, class1, global0 or global1");
  } else if (key == "binarize_threshold") {
    c.binarize_threshold = parse_int32(key, v);
  } else if (key == "kmeans_seeds") {
    c.kmeans_seeds = parse_int32(key, v);
  } else if (key == "kmeans_max_epochs") {
    c.kmeans.max_epochs = parse_int32(key, v);
  } else if (key == "sweep_theta") {
    c.sweep_theta = detail::parse_list<int>(v, [&](const std::string& s) { return parse_int32(key, s); });
  } else if (key == "sweep_capture") {
    c.sweep_capture = detail::parse_list<int>(v, [&](const std::string& s) { return parse_int32(key, s); });
  } else if (key == "sweep_backoff") {
    c.sweep_backoff = detail::parse_list<int>(v, [&](const std::string& s) { return parse_int32(key, s); });
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

/// Parses "key = value" lines ('#' starts a comment).
inline std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(n) + ": expected key = value");
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(n) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

/// Builds a config from settings: the experiment preset first, then every
/// setting in order.
inline ExperimentConfig config_from_settings(const std::vector<std::pair<std::string, std::string>>& settings,
                                             std::optional<Experiment> experiment = std::nullopt) {
  Experiment e = Experiment::baseline;
  for (const auto& [k, v] : settings)
    if (k == "experiment") e = parse_experiment(v);
  if (experiment) e = *experiment;
  ExperimentConfig c = preset(e);
  for (const auto& [k, v] : settings)
    if (k != "experiment") apply_setting(c, k, v);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return config_from_settings(parse_settings(in));
}

// ---------------------------------------------------------------------------
// Runs

inline BaselineSet load_baselines(const ExperimentConfig& c) {
  if (c.data == DataSource::synthetic) return synthetic_baselines(c.rf);
  if (!std::filesystem::exists(c.mnist_images) || !std::filesystem::exists(c.mnist_labels))
    throw Error("missing_dataset", "MNIST files not found: " + c.mnist_images.string() + ", " +
                                       c.mnist_labels.string());
  const auto records = load_mnist_idx(c.mnist_images, c.mnist_labels);
  return select_baselines(records, c.exemplars, c.rf, c.binarize_threshold, c.indexing);
}

/// Seeds of the independent random streams within one run.
struct RunSeeds {
  std::uint64_t stream, learner, init;
  static RunSeeds from(std::uint64_t seed) { return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)}; }
};

inline void initialize_weights(Column& col, const InitSpec& init, Rng& rng) {
  switch (init.kind) {
    case InitKind::zeros: col.fill(0); break;
    case InitKind::constant: col.fill(init.value); break;
    case InitKind::normal: {
      const double w_max = col.w_max();
      std::normal_distribution<double> d(init.mean_fraction * w_max, init.sd_fraction * w_max);
      for (int j = 0; j < col.neurons(); ++j)
        for (int i = 0; i < col.inputs(); ++i) {
          const long w = std::lround(d(rng));
          col.set_weight(j, i, static_cast<int>(std::clamp<long>(w, 0, col.w_max())));
        }
      break;
    }
  }
}

/// One evaluated pattern.
struct EvalRecord {
  int label = 0;
  std::optional<int> winner;
  SpikeTime spike;             ///< winner spike time at the implemented threshold
  std::int32_t potential = 0;  ///< winner body potential at that time
};

struct WindowSpec {
  std::string name;
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

struct WindowReport {
  WindowSpec window;
  MetricsReport metrics;  ///< w_conv from the weights at the end of the window
  UpdateCounts updates;
  std::vector<EvalRecord> records;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<WindowReport> windows;
  UpdateLog log;
  Column column{1, 1, 1};  ///< weights at the end of the run
  std::int64_t eval_weight_changes = 0;

  const WindowReport& primary() const { return windows.back(); }
  const WindowReport& window(const std::string& name) const {
    for (const auto& w : windows)
      if (w.window.name == name) return w;
    throw InvalidArgument("run has no window '" + name + "'");
  }
};

inline std::vector<WindowSpec> evaluation_windows(const ExperimentConfig& c) {
  std::vector<WindowSpec> out;
  if (c.experiment == Experiment::odd_even) {
    out.push_back({"odds", c.odd_warmup, c.odd_warmup + c.eval_count});
    out.push_back({"evens", c.stream.length - c.eval_count, c.stream.length});
    return out;
  }
  auto ws = c.warmups;
  std::sort(ws.begin(), ws.end());
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  for (auto w : ws) out.push_back({std::to_string(w), w, w + c.eval_count});
  return out;
}

inline Clustering window_clustering(const std::vector<EvalRecord>& records, int clusters) {
  Clustering cl;
  cl.clusters = clusters;
  cl.assignments.reserve(records.size());
  for (const auto& r : records) cl.assignments.push_back(r.winner);
  return cl;
}

inline std::vector<int> window_labels(const std::vector<EvalRecord>& records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

/// Streams patterns through the column with learning always on, scoring each
/// evaluation window as it closes.
inline RunReport run(const ExperimentConfig& config, const BaselineSet& baselines) {
  config.validate();
  if (baselines.rf != config.rf) throw InvalidArgument("baseline set does not match rf_size");
  const auto seeds = RunSeeds::from(config.seed);
  const auto windows = evaluation_windows(config);
  std::int64_t length = 0;
  for (const auto& w : windows) length = std::max(length, w.end);

  StreamSpec spec = config.stream;
  spec.seed = seeds.stream;
  PatternStream stream(baselines, spec);

  RunReport report{config, {}, UpdateLog(config.bucket), Column(config.inputs(), config.neurons, config.theta,
                                                                config.stdp.w_max, config.response)};
  Column& col = report.column;
  {
    Rng init_rng(seeds.init);
    initialize_weights(col, config.init, init_rng);
  }
  Rng rng(seeds.learner, config.rng_mode);
  const Trainer trainer(config.stdp, config.signal);

  struct Open {
    WindowReport report;
    std::vector<Pattern> patterns;
  };
  std::vector<Open> open(windows.size());
  for (std::size_t k = 0; k < windows.size(); ++k) open[k].report.window = windows[k];
  const std::int64_t eval_begin = windows.front().begin;

  for (std::int64_t idx = 0; idx < length; ++idx) {
    const StreamItem item = stream.next();
    const StepResult step = trainer.step(col, item.volley, rng);
    report.log.record(idx, step.updates);
    if (idx >= eval_begin) report.eval_weight_changes += step.updates.total();

    for (auto& o : open) {
      if (idx < o.report.window.begin || idx >= o.report.window.end) continue;
      const auto& inf = step.inference;
      EvalRecord rec{item.label, inf.winner, kInf, 0};
      if (inf.winner) {
        rec.spike = inf.z[static_cast<std::size_t>(*inf.winner)];
        rec.potential = inf.winner_potential;
      }
      o.report.records.push_back(rec);
      o.report.updates += step.updates;
      o.patterns.push_back(pattern_from_volley(item.volley, item.label));
      if (idx + 1 == o.report.window.end) {
        const auto labels = window_labels(o.report.records);
        o.report.metrics =
            clustering_metrics(o.patterns, window_clustering(o.report.records, config.neurons), labels);
        o.report.metrics.w_conv = w_conv(col.weights(), col.w_max());
        o.patterns.clear();
        o.patterns.shrink_to_fit();
      }
    }
  }
  for (auto& o : open) report.windows.push_back(std::move(o.report));
  return report;
}

inline RunReport run(const ExperimentConfig& config) { return run(config, load_baselines(config)); }

// ---------------------------------------------------------------------------
// Spike-time analysis

struct TemporalRow {
  std::int64_t time = 0;
  std::int64_t count = 0;
  std::int64_t cumulative = 0;
  double cumulative_coverage = 0;  ///< patterns with a winner at or before `time`, over all window patterns
  double cumulative_purity = 0;    ///< majority-label agreement among those patterns
};

struct TemporalTable {
  std::vector<TemporalRow> rows;
  std::int64_t covered = 0;
  std::int64_t patterns = 0;

  std::size_t distinct_times() const { return rows.size(); }
  /// First spike time at which a quarter of the covered patterns have arrived.
  const TemporalRow& quartile_row() const {
    for (const auto& r : rows)
      if (4 * r.cumulative >= covered) return r;
    return rows.back();
  }
  double dispersion() const {
    return rows.empty() ? 0.0 : static_cast<double>(rows.back().time - rows.front().time);
  }
};

/// Buckets the window's patterns by winner spike time, extrapolated to
/// theta_f when it is non-zero.
inline TemporalTable temporal_report(const WindowReport& w, int clusters, int theta_f = 0) {
  const auto& recs = w.records;
  const auto labels = window_labels(recs);
  const auto majority = majority_labels(window_clustering(recs, clusters), labels);
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> by_time;  // time -> (count, correct)
  std::int64_t covered = 0;
  for (const auto& r : recs) {
    if (!r.winner) continue;
    ++covered;
    const SpikeTime t = theta_f > 0 ? extrapolate_spike_time(r.spike, r.potential, theta_f) : r.spike;
    auto& cell = by_time[t.value()];
    ++cell.first;
    if (majority[static_cast<std::size_t>(*r.winner)] == r.label) ++cell.second;
  }
  if (covered == 0) throw InvalidArgument("temporal report: no pattern produced a winner");
  TemporalTable table;
  table.covered = covered;
  table.patterns = static_cast<std::int64_t>(recs.size());
  std::int64_t cum = 0, cum_ok = 0;
  for (const auto& [t, cell] : by_time) {
    cum += cell.first;
    cum_ok += cell.second;
    table.rows.push_back({t, cell.first, cum, static_cast<double>(cum) / static_cast<double>(recs.size()),
                          static_cast<double>(cum_ok) / static_cast<double>(cum)});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Batches

/// Runs fn(0..n-1) on up to `threads` workers.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<RunReport> run_seeds(const ExperimentConfig& base, const BaselineSet& baselines,
                                        const std::vector<std::uint64_t>& seeds, int threads = 1) {
  std::vector<std::optional<RunReport>> slots(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    ExperimentConfig c = base;
    c.seed = seeds[k];
    slots[k] = run(c, baselines);
  });
  std::vector<RunReport> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<SweepPoint> sweep_grid(const ExperimentConfig& base) {
  std::vector<SweepPoint> grid;
  for (int dt : base.sweep_theta)
    for (int dc : base.sweep_capture)
      for (int db : base.sweep_backoff)
        grid.push_back({base.theta + dt, base.stdp.mu_capture + dc, base.stdp.mu_backoff + db});
  return grid;
}

struct SweepResult {
  SweepPoint point;
  RunReport report;
};

/// Runs every grid point; each run reports all of base.warmups.
inline std::vector<SweepResult> sweep(const ExperimentConfig& base, const BaselineSet& baselines,
                                      const std::vector<SweepPoint>& grid, int threads = 1) {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  std::vector<std::optional<RunReport>> slots(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    ExperimentConfig c = base;
    c.theta = grid[k].theta;
    c.stdp.mu_capture = grid[k].mu_capture;
    c.stdp.mu_backoff = grid[k].mu_backoff;
    c.name = base.id() + "-t" + std::to_string(c.theta) + "-c" + std::to_string(c.stdp.mu_capture) + "-b" +
             std::to_string(c.stdp.mu_backoff);
    slots[k] = run(c, baselines);
  });
  std::vector<SweepResult> out;
  for (std::size_t k = 0; k < grid.size(); ++k) out.push_back({grid[k], std::move(*slots[k])});
  return out;
}

struct KMeansSeedResult {
  std::uint64_t seed = 0;
  int epochs = 0;
  MetricsReport metrics;
};

/// Fits k-means on the first `train` stream patterns and scores the next
/// `test`, once per k-means seed. The stream is the run seed's stream.
inline std::vector<KMeansSeedResult> kmeans_batch(const ExperimentConfig& c, const BaselineSet& baselines,
                                                  std::int64_t train, std::int64_t test, int threads = 1) {
  c.validate();
  if (train < c.neurons || test < 1) throw InvalidArgument("k-means needs train >= k and test >= 1 patterns");
  if (train + test > c.stream.length) throw InvalidArgument("k-means windows exceed the stream length");
  StreamSpec spec = c.stream;
  spec.seed = RunSeeds::from(c.seed).stream;
  PatternStream stream(baselines, spec);
  std::vector<Pattern> train_set, test_set;
  std::vector<int> test_labels;
  for (std::int64_t i = 0; i < train + test; ++i) {
    auto item = stream.next();
    auto p = pattern_from_volley(item.volley, item.label);
    if (i < train) {
      train_set.push_back(std::move(p));
    } else {
      test_set.push_back(std::move(p));
      test_labels.push_back(item.label);
    }
  }
  std::vector<KMeansSeedResult> out(static_cast<std::size_t>(c.kmeans_seeds));
  parallel_for(out.size(), threads, [&](std::size_t s) {
    Rng rng(derive_seed(c.seed, 1000 + s));
    const auto model = kmeans_fit(train_set, c.neurons, rng, c.kmeans);
    out[s] = {static_cast<std::uint64_t>(s), model.epochs_run, kmeans_evaluate(model, test_set, test_labels)};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Output

inline void write_metrics_header(std::ostream& os) {
  os << "config_id,theta,mu_search,mu_capture,mu_backoff,mu_min,w_conv,avg_dist,c_conv,purity\n";
}

inline void write_metrics_row(std::ostream& os, const std::string& id, const ExperimentConfig& c,
                              const MetricsReport& m) {
  os << id << ',' << c.theta << ',' << c.stdp.mu_search << ',' << c.stdp.mu_capture << ',' << c.stdp.mu_backoff
     << ',' << c.stdp.mu_min << ',' << m.w_conv << ',' << m.avg_dist << ',' << m.c_conv << ',' << m.purity << '\n';
}

inline std::string window_id(const RunReport& r, const WindowReport& w) {
  return r.config.id() + "-s" + std::to_string(r.config.seed) + "@" + w.window.name;
}

inline void write_temporal_csv(std::ostream& os, const TemporalTable& t) {
  os << "spike_time,count,cumulative_coverage,cumulative_purity\n";
  for (const auto& r : t.rows)
    os << r.time << ',' << r.count << ',' << r.cumulative_coverage << ',' << r.cumulative_purity << '\n';
}

inline void write_kmeans_csv(std::ostream& os, const std::vector<KMeansSeedResult>& rs) {
  os << "seed,epochs,purity,avg_dist,c_conv\n";
  for (const auto& r : rs)
    os << r.seed << ',' << r.epochs << ',' << r.metrics.purity << ',' << r.metrics.avg_dist << ','
       << r.metrics.c_conv << '\n';
}

/// Sweep purities, sorted descending within each warm-up regime.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepResult>& results) {
  os << "warmup,rank,config_id,theta,mu_capture,mu_backoff,purity\n";
  std::map<std::int64_t, std::vector<std::pair<double, const SweepResult*>>> by_warmup;
  for (const auto& r : results)
    for (const auto& w : r.report.windows) by_warmup[w.window.begin].emplace_back(w.metrics.purity, &r);
  for (auto& [warmup, rows] : by_warmup) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    int rank = 0;
    for (const auto& [purity, r] : rows)
      os << warmup << ',' << rank++ << ',' << r->report.config.id() << ',' << r->point.theta << ','
         << r->point.mu_capture << ',' << r->point.mu_backoff << ',' << purity << '\n';
  }
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("io", "cannot write " + path.string());
  os.precision(6);
  return os;
}

/// metrics.csv, updates.csv, weights.txt and, when theta_f is set, temporal.csv.
inline void write_run_outputs(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto os = open_output(dir / "metrics.csv");
    write_metrics_header(os);
    for (const auto& w : r.windows) write_metrics_row(os, window_id(r, w), r.config, w.metrics);
  }
  {
    auto os = open_output(dir / "updates.csv");
    r.log.write_csv(os);
  }
  {
    auto os = open_output(dir / "weights.txt");
    write_snapshot(os, r.column);
  }
  if (r.config.theta_f > 0 || r.config.experiment == Experiment::temporal) {
    auto os = open_output(dir / "temporal.csv");
    write_temporal_csv(os, temporal_report(r.primary(), r.config.neurons, r.config.theta_f));
  }
}

}  // namespace tnn
