// Command-line experiment driver.
//
//   tnn_sim --experiment baseline --seed 3 --out-dir out/baseline
//   tnn_sim --config configs/table2_search3.cfg --seeds 5 --threads 4

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tnn/runner.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string experiment;
  std::optional<std::int64_t> seed;
  int seeds = 1;
  std::string mnist_images;
  std::string mnist_labels;
  std::string out_dir = "out";
  int threads = 1;
  std::vector<std::string> sets;
};

void print_window(const tnn::RunReport& r, const tnn::WindowReport& w) {
  const auto& m = w.metrics;
  std::printf("%-32s purity %.4f  c_conv %.4f  avg_dist %.2f  w_conv %.4f  coverage %.4f  updates/pattern %.2f\n",
              tnn::window_id(r, w).c_str(), m.purity, m.c_conv, m.avg_dist, m.w_conv, m.coverage,
              static_cast<double>(w.updates.total()) / static_cast<double>(w.records.size()));
}

void run_single(const tnn::ExperimentConfig& cfg, const tnn::BaselineSet& base, const fs::path& dir) {
  const auto report = tnn::run(cfg, base);
  tnn::write_run_outputs(report, dir);
  for (const auto& w : report.windows) print_window(report, w);
}

void run_batch(const tnn::ExperimentConfig& cfg, const tnn::BaselineSet& base, const Options& opt) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(opt.seeds));
  std::iota(seeds.begin(), seeds.end(), cfg.seed);
  const auto reports = tnn::run_seeds(cfg, base, seeds, opt.threads);
  fs::create_directories(opt.out_dir);
  auto summary = tnn::open_output(fs::path(opt.out_dir) / "metrics.csv");
  tnn::write_metrics_header(summary);
  for (const auto& r : reports) {
    tnn::write_run_outputs(r, fs::path(opt.out_dir) / ("seed_" + std::to_string(r.config.seed)));
    for (const auto& w : r.windows) {
      tnn::write_metrics_row(summary, tnn::window_id(r, w), r.config, w.metrics);
      print_window(r, w);
    }
  }
}

void run_sweep(const tnn::ExperimentConfig& cfg, const tnn::BaselineSet& base, const Options& opt) {
  const auto results = tnn::sweep(cfg, base, tnn::sweep_grid(cfg), opt.threads);
  fs::create_directories(opt.out_dir);
  {
    auto os = tnn::open_output(fs::path(opt.out_dir) / "metrics.csv");
    tnn::write_metrics_header(os);
    for (const auto& r : results)
      for (const auto& w : r.report.windows) tnn::write_metrics_row(os, tnn::window_id(r.report, w), r.report.config, w.metrics);
  }
  auto os = tnn::open_output(fs::path(opt.out_dir) / "sweep.csv");
  tnn::write_sweep_csv(os, results);
  std::printf("%zu grid points written to %s\n", results.size(), opt.out_dir.c_str());
}

void run_kmeans(const tnn::ExperimentConfig& cfg, const tnn::BaselineSet& base, const Options& opt) {
  const auto results = tnn::kmeans_batch(cfg, base, cfg.warmups.back(), cfg.eval_count, opt.threads);
  fs::create_directories(opt.out_dir);
  {
    auto os = tnn::open_output(fs::path(opt.out_dir) / "kmeans_seeds.csv");
    tnn::write_kmeans_csv(os, results);
  }
  double sum = 0, best = 0, worst = 1;
  int max_epochs = 0;
  for (const auto& r : results) {
    sum += r.metrics.purity;
    best = std::max(best, r.metrics.purity);
    worst = std::min(worst, r.metrics.purity);
    max_epochs = std::max(max_epochs, r.epochs);
  }
  std::printf("k-means %zu seeds: purity mean %.4f best %.4f worst %.4f, max epochs %d\n", results.size(),
              sum / static_cast<double>(results.size()), best, worst, max_epochs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal neural column simulator"};
  Options opt;
  app.add_option("--config", opt.config_path, "config file of 'key = value' lines")->check(CLI::ExistingFile);
  app.add_option("--experiment", opt.experiment,
                 "baseline, sweep, odd-even, rf18, temporal, ablation-step or kmeans");
  app.add_option("--seed", opt.seed, "run seed");
  app.add_option("--seeds", opt.seeds, "number of consecutive seeds to run")->check(CLI::PositiveNumber);
  app.add_option("--mnist-images", opt.mnist_images, "IDX image file");
  app.add_option("--mnist-labels", opt.mnist_labels, "IDX label file");
  app.add_option("--out-dir", opt.out_dir, "output directory");
  app.add_option("--threads", opt.threads, "worker threads for sweeps and seed batches")->check(CLI::PositiveNumber);
  app.add_option("--set", opt.sets, "extra 'key=value' setting, applied after the config file");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::string, std::string>> settings;
    if (!opt.config_path.empty()) {
      std::ifstream in(opt.config_path);
      settings = tnn::parse_settings(in);
    }
    for (const auto& s : opt.sets) {
      std::istringstream in(s);
      for (auto& kv : tnn::parse_settings(in)) settings.push_back(std::move(kv));
    }
    std::optional<tnn::Experiment> experiment;
    if (!opt.experiment.empty()) experiment = tnn::parse_experiment(opt.experiment);
    auto cfg = tnn::config_from_settings(settings, experiment);
    if (opt.seed) {
      if (*opt.seed < 0) throw tnn::InvalidArgument("seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(*opt.seed);
    }
    if (!opt.mnist_images.empty()) cfg.mnist_images = opt.mnist_images;
    if (!opt.mnist_labels.empty()) cfg.mnist_labels = opt.mnist_labels;
    cfg.validate();

    const auto base = tnn::load_baselines(cfg);
    switch (cfg.experiment) {
      case tnn::Experiment::sweep: run_sweep(cfg, base, opt); break;
      case tnn::Experiment::kmeans: run_kmeans(cfg, base, opt); break;
      default:
        if (opt.seeds > 1) run_batch(cfg, base, opt);
        else run_single(cfg, base, opt.out_dir);
    }
  } catch (const tnn::Error& e) {
    std::cerr << nlohmann::json{{"error", e.code()}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
  return 0;
}
