#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "doacorr/experiment.h"
#include "doacorr/harness.h"
#include "doacorr/persistence.h"

using namespace doacorr;

namespace {

std::vector<ThetaPoint> Series(std::size_t ticks, double t_h, const std::function<double(double)> &f) {
  std::vector<ThetaPoint> s;
  for (std::size_t k = 0; k <= ticks; ++k) s.push_back({k * t_h, f(k * t_h)});
  return s;
}

RunRecord FakeRecord(std::vector<ThetaPoint> series, double truth = 0.0) {
  RunRecord r;
  r.theta_series = std::move(series);
  r.true_doa = truth;
  return r;
}

const ScenePlan &ShortScene() {
  static const ScenePlan scene = ScenePreset("two-source", {20.0, 5, 16000});
  return scene;
}

}  // namespace

TEST_CASE("angle difference wraps") {
  CHECK(AngleDiffDeg(10.0, 0.0) == doctest::Approx(10.0));
  CHECK(AngleDiffDeg(355.0, 0.0) == doctest::Approx(-5.0));
  CHECK(AngleDiffDeg(-15.0, 345.0) == doctest::Approx(0.0));
  CHECK(AngleDiffDeg(180.0, 0.0) == doctest::Approx(180.0));
}

TEST_CASE("good-run classifier examples") {
  CHECK(ClassifyGoodRun(Series(900, 0.1, [](double) { return 0.0; }), 0.0));
  CHECK_FALSE(ClassifyGoodRun(Series(900, 0.1, [](double) { return 10.0; }), 0.0));
  CHECK(ClassifyGoodRun(Series(900, 0.1, [](double t) { return t < 60.0 ? 10.0 : 0.0; }), 0.0));
  CHECK(ClassifyGoodRun(Series(900, 0.1, [](double) { return 94.0; }), 90.0));
  CHECK_FALSE(ClassifyGoodRun(Series(900, 0.1, [](double) { return 4.999 + 90.0; }), 85.0));
  CHECK_THROWS_AS(ClassifyGoodRun(std::vector<ThetaPoint>{}, 0.0), std::invalid_argument);
}

TEST_CASE("final-third mean uses only the last third of the duration") {
  const auto s = Series(900, 0.1, [](double t) { return t; });
  // Mean of t over [60, 90] sampled every 0.1 s.
  CHECK(FinalThirdMeanTheta(s) == doctest::Approx(75.0).epsilon(1e-9));
}

TEST_CASE("convergence time") {
  const auto s = Series(900, 0.1, [](double t) { return t < 20.0 ? 15.0 : 0.0; });
  const double tc = ConvergenceTime(s, 0.0);
  // Trailing 5 s mean drops below 5 once two thirds of the window sit at 0.
  CHECK(tc == doctest::Approx(23.4).epsilon(0.01));
  CHECK(ConvergenceTime(Series(900, 0.1, [](double) { return 10.0; }), 0.0) < 0.0);
}

TEST_CASE("aggregate basics") {
  const auto one = FakeRecord(Series(50, 0.1, [](double t) { return std::sin(t); }));
  const TrajectoryStats s1 = Aggregate({one});
  for (double v : s1.std_theta) CHECK(v == 0.0);
  CHECK(s1.n_runs == 1);

  const auto up = FakeRecord(Series(50, 0.1, [](double t) { return 3.0 + t; }));
  const auto down = FakeRecord(Series(50, 0.1, [](double t) { return 3.0 - t; }));
  const TrajectoryStats s2 = Aggregate({up, down});
  for (std::size_t i = 0; i < s2.time_s.size(); ++i) {
    CHECK(s2.mean_theta[i] == doctest::Approx(3.0));
    CHECK(s2.std_theta[i] == doctest::Approx(s2.time_s[i]));
  }

  CHECK_THROWS_AS(Aggregate({}), std::invalid_argument);
  const auto shorter = FakeRecord(Series(40, 0.1, [](double) { return 0.0; }));
  CHECK_THROWS_AS(Aggregate({one, shorter}), std::invalid_argument);
  const auto shifted = FakeRecord(Series(50, 0.2, [](double) { return 0.0; }));
  CHECK_THROWS_AS(Aggregate({one, shifted}), std::invalid_argument);
}

TEST_CASE("trial configuration errors are rejected up front") {
  const TrialConfig cfg;
  ScenePlan tiny = ShortScene();
  tiny.duration_s = 2.0;
  CHECK_THROWS_AS(RunTrial(tiny, cfg, 15.0, 1), std::invalid_argument);
  const Mixture m = RenderMixture(ShortScene());
  Mixture wrong = m;
  wrong.fs = 8000;
  CHECK_THROWS_AS(RunTrial(ShortScene(), wrong, cfg, 15.0, 1), std::invalid_argument);
  TrialConfig bad = cfg;
  bad.corrector.eta = 0.0;
  CHECK_THROWS_AS(RunTrial(ShortScene(), m, bad, 15.0, 1), std::invalid_argument);
}

TEST_CASE("trial record shape and warm-up") {
  const TrialConfig cfg;
  const RunRecord r = RunTrial(ShortScene(), cfg, 15.0, 3);
  REQUIRE(r.theta_series.size() == 201);
  CHECK(r.quality_series.size() == 200);
  for (std::size_t k = 0; k < 100; ++k) CHECK(r.theta_series[k].theta_deg == 15.0);
  for (std::size_t k = 1; k < r.theta_series.size(); ++k) {
    CHECK(r.theta_series[k].time_s > r.theta_series[k - 1].time_s);
    CHECK(r.quality_series[k - 1].time_s == doctest::Approx(r.theta_series[k].time_s));
  }
  CHECK(r.true_doa == 0.0);
  CHECK(r.scene_digest == ShortScene().Digest());
  CHECK(r.good == ClassifyGoodRun(r, 0.0));
  CHECK(r.final_third_mean_theta == doctest::Approx(FinalThirdMeanTheta(r.theta_series)));
  // The first t_w seconds cannot be scored.
  for (std::size_t k = 0; k < 29; ++k) CHECK_FALSE(r.quality_series[k].raw_q_db);
}

TEST_CASE("same seed gives an identical record") {
  const TrialConfig cfg;
  const Mixture m = RenderMixture(ShortScene());
  const RunRecord a = RunTrial(ShortScene(), m, cfg, 15.0, 9), b = RunTrial(ShortScene(), cfg, 15.0, 9);
  CHECK(RunCsv(a) == RunCsv(b));
  CHECK(RunSummaryJson(a).dump() == RunSummaryJson(b).dump());
  CHECK(RunCsv(RunTrial(ShortScene(), m, cfg, 15.0, 10)) != RunCsv(a));
}

TEST_CASE("starting at the true DOA with a noiseless oracle stays near it") {
  TrialConfig cfg;
  cfg.quality.estimator = EstimatorKind::kOracle;
  const ScenePlan scene = ScenePreset("two-source", {60.0, 2, 16000});
  const RunRecord r = RunTrial(scene, cfg, 0.0, 1);
  CHECK(std::abs(r.final_third_mean_theta) < 5.0);
  CHECK(r.good);
}

TEST_CASE("full dropout gates every step") {
  TrialConfig cfg;
  cfg.quality.dropout_prob = 1.0;
  const RunRecord r = RunTrial(ShortScene(), cfg, 15.0, 2);
  for (const auto &q : r.quality_series) {
    CHECK_FALSE(q.vad_active);
    CHECK_FALSE(q.raw_q_db);
  }
  for (const auto &p : r.theta_series) CHECK(p.theta_deg == 15.0);
  CHECK(r.warnings.size() == 2);
}

TEST_CASE("aggregate of seeded trials matches a direct recomputation") {
  const TrialConfig cfg;
  const Mixture m = RenderMixture(ShortScene());
  std::vector<RunRecord> recs;
  for (std::uint64_t s = 0; s < 30; ++s) recs.push_back(RunTrial(ShortScene(), m, cfg, 15.0, 100 + s));
  const TrajectoryStats st = Aggregate(recs);
  for (std::size_t i = 0; i < st.time_s.size(); ++i) {
    // Two-pass oracle in long double.
    long double sum = 0;
    for (const auto &r : recs) sum += r.theta_series[i].theta_deg;
    const long double mean = sum / 30;
    long double ss = 0;
    for (const auto &r : recs) ss += (r.theta_series[i].theta_deg - mean) * (r.theta_series[i].theta_deg - mean);
    CHECK(std::abs(st.mean_theta[i] - static_cast<double>(mean)) <= 1e-9);
    CHECK(std::abs(st.std_theta[i] - static_cast<double>(std::sqrt(ss / 30))) <= 1e-9);
    CHECK(st.std_theta[i] >= 0.0);
  }
  std::size_t good = 0;
  for (const auto &r : recs) good += ClassifyGoodRun(r, r.true_doa);
  CHECK(st.good_run_count == good);
}

TEST_CASE("parallel cell execution equals sequential") {
  CellSpec cell{"c", ShortScene(), TrialConfig{}, 15.0, 6};
  const auto a = RunCell(cell, 50, 1), b = RunCell(cell, 50, 3);
  REQUIRE(a.size() == 6);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].seed == 50 + k);
    CHECK(RunCsv(a[k]) == RunCsv(b[k]));
  }
}
