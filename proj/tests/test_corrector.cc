#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "doacorr/corrector.h"

using namespace doacorr;

namespace {

// Straight transcription of the update, kept separate from the library.
struct Ref {
  double tc, tp = 0, qc = 0, qp = 0, m = 0, v = 0;
  int step = 0;
  double Step(double q, const CorrectorConfig &c) {
    qp = qc;
    qc = c.q_ceiling - q;
    const double g = (qc - qp) / (tc - tp + c.epsilon);
    m = c.beta_m * m + (1 - c.beta_m) * g;
    v = c.beta_v * v + (1 - c.beta_v) * g * g;
    tp = tc;
    ++step;
    if (c.bias_correction) {
      const double mh = m / (1 - std::pow(c.beta_m, step)), vh = v / (1 - std::pow(c.beta_v, step));
      tc -= c.eta * mh / (std::sqrt(vh) + c.epsilon);
    } else {
      tc -= c.eta * m / (std::sqrt(v) + c.epsilon);
    }
    return tc;
  }
};

double Concave(double theta, double peak) { return 20.0 - 0.02 * (theta - peak) * (theta - peak); }

}  // namespace

TEST_CASE("init") {
  const CorrectorConfig c;
  const CorrectorState s = CorrectorInit(15.0, c);
  CHECK(s.theta_c == 15.0);
  CHECK(s.theta_p == 0.0);
  CHECK(s.q_c == 0.0);
  CHECK(s.q_p == 0.0);
  CHECK(s.grad_m == 0.0);
  CHECK(s.grad_v == 0.0);
  CHECK(s.step == 0);
  CHECK(CorrectorInit(0.0, c).theta_c == 0.0);
  CHECK(CorrectorInit(-15.0, c).theta_c == -15.0);
  CHECK_THROWS_AS(CorrectorInit(std::nan(""), c), std::invalid_argument);
}

TEST_CASE("first step, hand-derived values") {
  CorrectorConfig c;
  const StepOutcome o = CorrectorStep(CorrectorInit(15.0, c), 20.0, c);
  CHECK(o.accepted);
  CHECK(o.state.grad_m == doctest::Approx(0.533333).epsilon(1e-5));
  CHECK(o.state.grad_v == doctest::Approx(0.0284444).epsilon(1e-5));
  CHECK(std::abs(o.state.theta_c - 14.68377) <= 1e-4);
  CHECK(o.state.theta_p == 15.0);
  CHECK(o.state.q_c == 80.0);
  CHECK(o.state.step == 1);

  c.bias_correction = true;
  CHECK(std::abs(CorrectorStep(CorrectorInit(15.0, c), 20.0, c).state.theta_c - 14.9) <= 1e-4);
}

TEST_CASE("matches an independent transcription over random inputs") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> q(-10.0, 30.0);
  for (bool bias : {false, true}) {
    CorrectorConfig c;
    c.bias_correction = bias;
    c.eta = 0.3;
    CorrectorState s = CorrectorInit(12.0, c);
    Ref r{12.0};
    for (int i = 0; i < 300; ++i) {
      const double qi = q(rng);
      s = CorrectorStep(s, qi, c).state;
      CHECK(s.theta_c == doctest::Approx(r.Step(qi, c)).epsilon(1e-12));
      CHECK(s.grad_v >= 0.0);
    }
  }
}

TEST_CASE("repeated quality decays the update") {
  const CorrectorConfig c;
  const CorrectorState s0 = CorrectorInit(15.0, c);
  const CorrectorState s1 = CorrectorStep(s0, 20.0, c).state;
  const CorrectorState s2 = CorrectorStep(s1, 20.0, c).state;
  CHECK(std::abs(s2.theta_c - s1.theta_c) < std::abs(s1.theta_c - s0.theta_c));
}

TEST_CASE("first-step magnitude is independent of the gradient size") {
  for (double eta : {0.01, 0.1, 0.3}) {
    CorrectorConfig c;
    c.eta = eta;
    const double law = eta * (1 - c.beta_m) / std::sqrt(1 - c.beta_v);
    for (double q : {-30.0, 5.0, 20.0, 60.0, 99.0}) {
      for (double th : {15.0, 3.0, -20.0}) {
        const double moved = CorrectorStep(CorrectorInit(th, c), q, c).state.theta_c - th;
        // Exact once epsilon is kept, and within 1e-4 of the limit without it.
        const double mag = std::abs((100.0 - q) / (th + c.epsilon));
        const double exact = eta * (1 - c.beta_m) * mag / (std::sqrt((1 - c.beta_v) * mag * mag) + c.epsilon);
        CHECK(std::abs(moved) == doctest::Approx(exact).epsilon(1e-9));
        CHECK(std::abs(moved) == doctest::Approx(law).epsilon(1e-4));
        // Gradient sign is sign((100 - q) / th); the push opposes it.
        const double g = (100.0 - q) / th;
        CHECK((moved > 0) == (g < 0));
      }
    }
    c.bias_correction = true;
    const double moved = CorrectorStep(CorrectorInit(15.0, c), 20.0, c).state.theta_c - 15.0;
    CHECK(std::abs(moved) == doctest::Approx(eta).epsilon(1e-6));
    CHECK(std::abs(moved) < law);
  }
}

TEST_CASE("constant gradient approaches a unit step of eta") {
  const CorrectorConfig c;
  const double g = 0.7;
  CorrectorState s = CorrectorInit(15.0, c);
  double update = 0.0;
  for (int i = 0; i < 5000; ++i) {
    // Choose q so that the finite difference equals g exactly.
    const double q_c = s.q_c + g * (s.theta_c - s.theta_p + c.epsilon);
    const double before = s.theta_c;
    s = CorrectorStep(s, c.q_ceiling - q_c, c).state;
    update = s.theta_c - before;
  }
  CHECK(update == doctest::Approx(-c.eta).epsilon(0.01));
}

TEST_CASE("non-finite quality is rejected") {
  const CorrectorConfig c;
  const CorrectorState s = CorrectorStep(CorrectorInit(15.0, c), 20.0, c).state;
  for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
    const StepOutcome o = CorrectorStep(s, bad, c);
    CHECK_FALSE(o.accepted);
    CHECK(o.state == s);
  }
}

TEST_CASE("steps are deterministic") {
  const CorrectorConfig c;
  const CorrectorState s = CorrectorInit(7.0, c);
  CHECK(CorrectorStep(s, 3.3, c).state == CorrectorStep(s, 3.3, c).state);
}

TEST_CASE("config validation") {
  CorrectorConfig c;
  c.eta = -1.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.beta_m = 1.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.beta_v = -0.1;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
  c = {};
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.Validate(), std::invalid_argument);
}

TEST_CASE("warm-up holds theta_est for the first 100 emissions") {
  const CorrectorConfig c;
  const auto traj = RunCorrectionLoop([](double) { return 20.0; }, 15.0, c, {0.1, 300});
  REQUIRE(traj.size() == 301);
  for (std::size_t i = 0; i < 100; ++i) CHECK(traj[i].theta_deg == 15.0);
  CHECK(traj[100].theta_deg != 15.0);
  CHECK(traj[100].time_s == doctest::Approx(10.0));
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].time_s >= traj[i - 1].time_s);
}

TEST_CASE("held quality: one push, then decaying updates") {
  const CorrectorConfig c;
  const auto traj = RunCorrectionLoop([](double) { return 20.0; }, 15.0, c, {0.1, 400});
  const double push = traj[100].theta_deg - traj[99].theta_deg;
  CHECK(push == doctest::Approx(-0.316228).epsilon(1e-5));
  double prev = std::abs(push);
  for (std::size_t i = 101; i < traj.size(); ++i) {
    const double d = std::abs(traj[i].theta_deg - traj[i - 1].theta_deg);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}

TEST_CASE("no quality yet: every step is rejected and theta holds") {
  const CorrectorConfig c;
  CorrectionLoop loop(15.0, c, 0.1);
  for (std::size_t k = 1; k <= 200; ++k) CHECK(loop.Tick(k, std::nullopt) == 15.0);
  CHECK(loop.rejected_steps() == 101);
  CHECK(loop.state().step == 0);
}

TEST_CASE("noiseless concave objective converges within 500 steps") {
  for (double peak : {0.0, 40.0, -30.0}) {
    CorrectorConfig c;
    c.warmup_s = 0.0;
    CorrectorState s = CorrectorInit(peak + 15.0, c);
    int reached = -1;
    for (int i = 0; i < 500 && reached < 0; ++i) {
      s = CorrectorStep(s, Concave(s.theta_c, peak), c).state;
      if (std::abs(s.theta_c - peak) < 1.0) reached = i;
    }
    CHECK(reached >= 0);
  }
}

TEST_CASE("loop output reaches the channel") {
  ThetaChannel ch(15.0);
  CHECK(ch.Latest().theta_deg == 15.0);
  const auto traj = RunCorrectionLoop([](double t) { return 20.0 + t; }, 15.0, {}, {0.1, 150}, &ch);
  CHECK(ch.Latest().theta_deg == traj.back().theta_deg);
  CHECK(ch.Latest().time_s == doctest::Approx(15.0));
}
