#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "properties.hpp"
#include "tnn/runner.hpp"

using namespace tnn;

namespace {

ExperimentConfig small(Experiment e = Experiment::baseline) {
  auto c = preset(e);
  c.data = DataSource::synthetic;
  c.stream.length = 3000;
  c.warmups = {2000};
  c.eval_count = 1000;
  c.bucket = 100;
  c.seed = 11;
  return c;
}

}  // namespace

TEST(Config, ParsesSettingsAndComments) {
  const auto c = parse_config(
      "# comment line\n"
      "experiment = rf18\n"
      "theta = 50   # trailing comment\n"
      "mu_search = 2\n"
      "warmups = 100, 200\n"
      "init = constant\n"
      "init_value = 7\n"
      "learning_signal = pre\n"
      "schedule = odds-then-evens\n"
      "exemplar_indexing = global1\n");
  EXPECT_EQ(c.experiment, Experiment::rf18);
  EXPECT_EQ(c.rf, 18);  // preset applied before the settings
  EXPECT_EQ(c.theta, 50);
  EXPECT_EQ(c.stdp.mu_search, 2);
  EXPECT_EQ(c.stdp.mu_capture, 232);
  EXPECT_EQ(c.warmups, (std::vector<std::int64_t>{100, 200}));
  EXPECT_EQ(c.init.kind, InitKind::constant);
  EXPECT_EQ(c.init.value, 7);
  EXPECT_EQ(c.signal, LearningSignal::pre_inhibition);
  EXPECT_EQ(c.stream.schedule, Schedule::odds_then_evens);
  EXPECT_EQ(c.indexing, ExemplarIndexing::global_1);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("thetaa = 3\n"), InvalidArgument);
  EXPECT_THROW(parse_config("theta = abc\n"), InvalidArgument);
  EXPECT_THROW(parse_config("theta = 3x\n"), InvalidArgument);
  EXPECT_THROW(parse_config("experiment = nope\n"), InvalidArgument);
  EXPECT_THROW(parse_config("no equals sign\n"), InvalidArgument);
  EXPECT_THROW(parse_config("mu_capture = 2000\n").validate(), InvalidArgument);
  EXPECT_THROW(parse_config("theta_f = 10\n").validate(), InvalidArgument);
}

TEST(Config, Presets) {
  EXPECT_EQ(preset(Experiment::sweep).warmups, (std::vector<std::int64_t>{10000, 20000, 60000}));
  EXPECT_EQ(preset(Experiment::odd_even).stream.transition, 34916);
  EXPECT_EQ(preset(Experiment::temporal).theta_f, 512);
  EXPECT_EQ(preset(Experiment::ablation_step).response, ResponseKind::step);
  EXPECT_EQ(parse_experiment("odd-even"), Experiment::odd_even);
  EXPECT_EQ(parse_experiment("ablation-step"), Experiment::ablation_step);
  for (auto e : {Experiment::baseline, Experiment::sweep, Experiment::odd_even, Experiment::rf18,
                 Experiment::temporal, Experiment::ablation_step, Experiment::kmeans})
    EXPECT_NO_THROW(preset(e).validate());
}

TEST(Config, BundledConfigFilesParse) {
  for (const auto& entry : std::filesystem::directory_iterator(TNN_CONFIG_DIR)) {
    std::ifstream in(entry.path());
    ASSERT_NO_THROW(config_from_settings(parse_settings(in), std::nullopt).validate()) << entry.path();
  }
}

TEST(Runner, EvaluationWindows) {
  auto c = preset(Experiment::sweep);
  const auto w = evaluation_windows(c);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].begin, 10000);
  EXPECT_EQ(w[2].end, 70000);
  const auto oe = evaluation_windows(preset(Experiment::odd_even));
  ASSERT_EQ(oe.size(), 2u);
  EXPECT_EQ(oe[0].name, "odds");
  EXPECT_EQ(oe[0].begin, 10000);
  EXPECT_EQ(oe[0].end, 20000);
  EXPECT_EQ(oe[1].begin, 60000);
  EXPECT_EQ(oe[1].end, 70000);
}

TEST(Runner, ReplayIsBitExact) {
  EXPECT_EQ(props::run_replay(small(), synthetic_baselines(8)), "");
  auto c = small();
  c.rng_mode = RngMode::lfsr;
  EXPECT_EQ(props::run_replay(c, synthetic_baselines(8)), "");
}

TEST(Runner, SeedsChangeTheRun) {
  auto a = small(), b = small();
  b.seed = 12;
  const auto base = synthetic_baselines(8);
  EXPECT_FALSE(run(a, base).column == run(b, base).column);
}

TEST(Runner, LearningStaysOnDuringEvaluation) {
  const auto r = run(small(), synthetic_baselines(8));
  EXPECT_GT(r.eval_weight_changes, 0);
  EXPECT_EQ(r.primary().records.size(), 1000u);
  EXPECT_EQ(r.primary().metrics.patterns, 1000);
  EXPECT_EQ(r.primary().updates, r.log.sum(2000, 3000));
  EXPECT_GE(r.primary().metrics.purity, 0.0);
  EXPECT_LE(r.primary().metrics.purity, 1.0);
}

TEST(Runner, MismatchedBaselinesRejected) {
  EXPECT_THROW(run(small(), synthetic_baselines(18)), InvalidArgument);
}

TEST(Temporal, TableInvariants) {
  auto c = small(Experiment::temporal);
  c.init = {InitKind::constant, 8};
  const auto r = run(c, synthetic_baselines(8));
  const auto t = temporal_report(r.primary(), c.neurons, c.theta_f);
  ASSERT_FALSE(t.rows.empty());
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    sum += t.rows[k].count;
    EXPECT_EQ(t.rows[k].cumulative, sum);
    if (k) {
      EXPECT_GT(t.rows[k].time, t.rows[k - 1].time);
    }
    EXPECT_GE(t.rows[k].cumulative_purity, 0.0);
    EXPECT_LE(t.rows[k].cumulative_purity, 1.0);
  }
  EXPECT_EQ(sum, t.covered);
  EXPECT_DOUBLE_EQ(t.rows.back().cumulative_coverage, r.primary().metrics.coverage);
  // Cumulative purity over every covered pattern is the window purity rescaled
  // by coverage.
  EXPECT_NEAR(t.rows.back().cumulative_purity * r.primary().metrics.coverage, r.primary().metrics.purity, 1e-12);
  EXPECT_GE(4 * t.quartile_row().cumulative, t.covered);
}

TEST(Temporal, ExtrapolationAtImplementedThresholdNeverDelays) {
  auto c = small();
  c.init = {InitKind::constant, 8};
  const auto r = run(c, synthetic_baselines(8));
  for (const auto& rec : r.primary().records) {
    if (!rec.winner) continue;
    EXPECT_LE(extrapolate_spike_time(rec.spike, rec.potential, c.theta).value(), rec.spike.value());
  }
  const auto raw = temporal_report(r.primary(), c.neurons);
  EXPECT_EQ(raw.covered, static_cast<std::int64_t>(r.primary().metrics.coverage * 1000 + 0.5));
}

TEST(Temporal, StepResponseCollapsesToOneTime) {
  auto c = small(Experiment::ablation_step);
  c.init = {InitKind::constant, 8};
  const auto r = run(c, synthetic_baselines(8));
  const auto t = temporal_report(r.primary(), c.neurons, c.theta_f);
  EXPECT_EQ(t.distinct_times(), 1u);
  EXPECT_DOUBLE_EQ(t.dispersion(), 0.0);
}

TEST(Temporal, NoWinnersIsAnError) {
  WindowReport w;
  w.records.push_back({3, std::nullopt, kInf, 0});
  EXPECT_THROW(temporal_report(w, 10), InvalidArgument);
}

TEST(Sweep, DefaultGridHas27Points) {
  const auto g = sweep_grid(preset(Experiment::sweep));
  ASSERT_EQ(g.size(), 27u);
  std::set<std::tuple<int, int, int>> distinct;
  for (const auto& p : g) distinct.insert({p.theta, p.mu_capture, p.mu_backoff});
  EXPECT_EQ(distinct.size(), 27u);
  EXPECT_EQ(g[13].theta, 60);
  EXPECT_EQ(g[13].mu_capture, 224);
  EXPECT_EQ(g[13].mu_backoff, 320);
}

TEST(Sweep, SinglePointMatchesPlainRun) {
  const auto c = small();
  const auto base = synthetic_baselines(8);
  const auto res = sweep(c, base, {{c.theta, c.stdp.mu_capture, c.stdp.mu_backoff}}, 2);
  ASSERT_EQ(res.size(), 1u);
  const auto direct = run(c, base);
  EXPECT_TRUE(res[0].report.column == direct.column);
  EXPECT_EQ(res[0].report.primary().metrics.purity, direct.primary().metrics.purity);
  EXPECT_THROW(sweep(c, base, {}), InvalidArgument);
}

TEST(Batch, ParallelSeedsMatchSerial) {
  const auto c = small();
  const auto base = synthetic_baselines(8);
  const auto par = run_seeds(c, base, {3, 4, 5}, 3);
  for (std::size_t k = 0; k < 3; ++k) {
    auto s = c;
    s.seed = 3 + k;
    EXPECT_TRUE(par[k].column == run(s, base).column);
  }
}

TEST(Batch, KMeansSeeds) {
  auto c = small(Experiment::kmeans);
  c.kmeans_seeds = 4;
  c.stream.noise_p = 0;
  const auto rs = kmeans_batch(c, synthetic_baselines(8), 2000, 500, 2);
  ASSERT_EQ(rs.size(), 4u);
  for (const auto& r : rs) {
    EXPECT_GE(r.epochs, 1);
    EXPECT_DOUBLE_EQ(r.metrics.coverage, 1.0);
  }
  EXPECT_THROW(kmeans_batch(c, synthetic_baselines(8), 5, 10), InvalidArgument);
}

TEST(Output, CsvHeaders) {
  std::ostringstream m;
  write_metrics_header(m);
  EXPECT_EQ(m.str(), "config_id,theta,mu_search,mu_capture,mu_backoff,mu_min,w_conv,avg_dist,c_conv,purity\n");
  std::ostringstream t;
  write_temporal_csv(t, TemporalTable{});
  EXPECT_EQ(t.str(), "spike_time,count,cumulative_coverage,cumulative_purity\n");
  std::ostringstream k;
  write_kmeans_csv(k, {});
  EXPECT_EQ(k.str(), "seed,epochs,purity,avg_dist,c_conv\n");
}

TEST(Output, RunOutputsWritten) {
  auto c = small(Experiment::temporal);
  c.init = {InitKind::constant, 8};
  const auto r = run(c, synthetic_baselines(8));
  const auto dir = std::filesystem::temp_directory_path() / "tnn_run_outputs";
  std::filesystem::remove_all(dir);
  write_run_outputs(r, dir);
  for (const char* f : {"metrics.csv", "updates.csv", "weights.txt", "temporal.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::ifstream w(dir / "weights.txt");
  EXPECT_TRUE(read_snapshot(w) == r.column);
  std::filesystem::remove_all(dir);
}
