#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "doacorr/quality.h"
#include "test_util.h"

using namespace doacorr;

TEST_CASE("VAD counts") {
  const std::vector<double> zeros(48000, 0.0);
  const VadCount z = VadActivity(zeros, 0.032, 16000, -45.0);
  CHECK(z.n_total == 93);
  CHECK(z.n_act == 0);

  std::vector<double> sine(48000);
  for (std::size_t i = 0; i < sine.size(); ++i) sine[i] = std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0);
  const VadCount s = VadActivity(sine, 0.032, 16000, -45.0);
  CHECK(s.n_act == s.n_total);
  CHECK(s.n_total == 93);
}

TEST_CASE("VAD threshold is on RMS in dBFS") {
  // Constant 0.01 has RMS -40 dBFS.
  const std::vector<double> x(48000, 0.01);
  CHECK(VadActivity(x, 0.032, 16000, -41.0).n_act == 93);
  CHECK(VadActivity(x, 0.032, 16000, -39.0).n_act == 0);
}

TEST_CASE("gate examples") {
  CHECK(Gate(93, 93));
  CHECK_FALSE(Gate(69, 93));
  CHECK(Gate(70, 93));
  CHECK_FALSE(Gate(0, 93));
  CHECK_FALSE(Gate(3, 4));
  CHECK(Gate(4, 4));
}

TEST_CASE("gate is monotone in n_act") {
  for (std::size_t total = 1; total < 200; ++total)
    for (std::size_t n = 0; n < total; ++n)
      if (Gate(n, total)) CHECK(Gate(n + 1, total));
}

TEST_CASE("SI-SDR examples") {
  const auto s = testutil::Gaussian(1000, 1);
  CHECK(SiSdr(s, s) == kSiSdrMaxDb);
  std::vector<double> twice = s;
  for (double &v : twice) v *= 2.0;
  CHECK(SiSdr(twice, s) == kSiSdrMaxDb);

  // Orthogonal equal-energy noise: Gram-Schmidt then rescale to ||s||.
  auto n = testutil::Gaussian(1000, 2);
  double sn = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sn += s[i] * n[i];
    ss += s[i] * s[i];
  }
  for (std::size_t i = 0; i < s.size(); ++i) n[i] -= sn / ss * s[i];
  double nn = 0.0;
  for (double v : n) nn += v * v;
  for (double &v : n) v *= std::sqrt(ss / nn);
  std::vector<double> est(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) est[i] = s[i] + n[i];
  CHECK(std::abs(SiSdr(est, s)) <= 1e-9);
}

TEST_CASE("SI-SDR is scale invariant and clamped below") {
  const auto s = testutil::Gaussian(2000, 3), n = testutil::Gaussian(2000, 4);
  std::vector<double> est(s.size()), scaled(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    est[i] = s[i] + 0.3 * n[i];
    scaled[i] = -7.0 * est[i];
  }
  CHECK(SiSdr(scaled, s) == doctest::Approx(SiSdr(est, s)).epsilon(1e-9));
  CHECK(SiSdr(n, s) >= kSiSdrMinDb);
  CHECK(SiSdr(std::vector<double>(2000, 0.0), s) == kSiSdrMinDb);
}

TEST_CASE("SI-SDR errors") {
  CHECK_THROWS_AS(SiSdr(std::vector<double>(10, 1.0), std::vector<double>(10, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(SiSdr(std::vector<double>(10, 1.0), std::vector<double>(9, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(SiSdr(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("noise emulator") {
  std::mt19937_64 a(5), b(5);
  CHECK(EmulateNoise(12.5, 0.0, a) == 12.5);
  std::vector<double> draws;
  for (int i = 0; i < 10000; ++i) draws.push_back(EmulateNoise(0.0, 2.5, a));
  const double sd = std::sqrt(testutil::Variance(draws));
  CHECK(sd >= 2.3);
  CHECK(sd <= 2.7);
  std::mt19937_64 c(9), d(9);
  for (int i = 0; i < 100; ++i) CHECK(EmulateNoise(1.0, 2.5, c) == EmulateNoise(1.0, 2.5, d));
}

TEST_CASE("smoothing examples") {
  CHECK(Smooth(10.0, 20.0, 0.0) == 20.0);
  CHECK(Smooth(10.0, 20.0, 1.0) == 10.0);
  CHECK(Smooth(10.0, 20.0, 0.9) == 11.0);
}

TEST_CASE("smoothing is a convex combination") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0), a(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), r = u(rng), al = a(rng), s = Smooth(p, r, al);
    CHECK(s >= std::min(p, r) - 1e-12);
    CHECK(s <= std::max(p, r) + 1e-12);
  }
}

TEST_CASE("smoothing reduces variance of a stationary sequence") {
  const auto raw = testutil::Gaussian(1000, 17, 2.5);
  std::vector<double> smooth{raw[0]};
  for (std::size_t i = 1; i < raw.size(); ++i) smooth.push_back(Smooth(smooth.back(), raw[i], 0.9));
  CHECK(testutil::Variance(smooth) < testutil::Variance(raw));
  CHECK(testutil::Variance(smooth) < 0.2 * testutil::Variance(raw));
}

TEST_CASE("constant input converges geometrically") {
  double s = 0.0;
  for (int k = 1; k <= 50; ++k) {
    s = Smooth(s, 10.0, 0.9);
    CHECK(10.0 - s == doctest::Approx(10.0 * std::pow(0.9, k)).epsilon(1e-9));
  }
}

TEST_CASE("config validation") {
  QualityConfig c;
  CHECK_NOTHROW(c.Validate());
  c.t_vad = 5.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.t_h = 4.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.alpha = 1.1;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.noise_sigma_db = -1.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  CHECK(ParseEstimatorKind("oracle") == EstimatorKind::kOracle);
  CHECK(ToString(EstimatorKind::kNoisyOracle) == "noisy-oracle");
  CHECK_THROWS_AS(ParseEstimatorKind("squim"), std::invalid_argument);
}

TEST_CASE("stream: silent window is gated and holds the smoothed value") {
  QualityConfig c;
  c.estimator = EstimatorKind::kOracle;
  QualityStream qs(c, 16000, 1);
  const auto ref = testutil::Gaussian(48000, 1, 0.1);
  auto est = ref;
  for (std::size_t i = 0; i < est.size(); ++i) est[i] += 0.01 * std::sin(0.1 * static_cast<double>(i));
  const QualitySample first = qs.Step(0.1, est, ref);
  CHECK(first.vad_active);
  REQUIRE(first.raw_q_db);
  CHECK(*first.smooth_q_db == *first.raw_q_db);
  const QualitySample gated = qs.Step(0.2, std::vector<double>(48000, 0.0), ref);
  CHECK_FALSE(gated.vad_active);
  CHECK_FALSE(gated.raw_q_db);
  CHECK(*gated.smooth_q_db == *first.smooth_q_db);
  CHECK(gated.n_act == 0);
  CHECK(gated.n_total == 93);
}

TEST_CASE("stream: gate closed before any estimate leaves no smoothed value") {
  QualityStream qs({}, 16000, 1);
  const QualitySample s = qs.Step(0.1, std::vector<double>(48000, 0.0), testutil::Gaussian(48000, 1));
  CHECK_FALSE(s.smooth_q_db);
  CHECK_FALSE(qs.smoothed());
}

TEST_CASE("stream: perfect enhancement converges monotonically to the clamp") {
  QualityConfig c;
  c.estimator = EstimatorKind::kOracle;
  QualityStream qs(c, 16000, 1);
  const auto ref = testutil::Gaussian(48000, 3, 0.1);
  auto noisy = ref;
  const auto n = testutil::Gaussian(48000, 4, 0.1);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += n[i];
  qs.Step(0.1, noisy, ref);  // seeds the smoother near 0 dB
  double prev = *qs.smoothed();
  for (int k = 0; k < 200; ++k) {
    const double s = *qs.Step(0.2 + 0.1 * k, ref, ref).smooth_q_db;
    CHECK(s >= prev);
    prev = s;
  }
  CHECK(prev == doctest::Approx(kSiSdrMaxDb).epsilon(1e-6));
}

TEST_CASE("stream: noisy oracle is reproducible per seed") {
  const auto ref = testutil::Gaussian(48000, 5, 0.1);
  QualityStream a({}, 16000, 42), b({}, 16000, 42), c({}, 16000, 43);
  for (int k = 0; k < 5; ++k) {
    const auto sa = a.Step(0.1, ref, ref), sb = b.Step(0.1, ref, ref), sc = c.Step(0.1, ref, ref);
    CHECK(*sa.raw_q_db == *sb.raw_q_db);
    CHECK(*sa.raw_q_db != *sc.raw_q_db);
  }
}
