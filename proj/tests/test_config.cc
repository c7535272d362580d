#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <map>
#include <numbers>

#include "doacorr/config_file.h"
#include "doacorr/persistence.h"
#include "doacorr/wav_io.h"

using namespace doacorr;
namespace fs = std::filesystem;

namespace {

fs::path Dir() {
  const fs::path d = fs::temp_directory_path() / "doacorr_config_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("key=value parsing") {
  const auto e = ParseConfigText("# header\n\n eta = 0.2  # trailing\nalpha=0.5\n", "cfg");
  REQUIRE(e.size() == 2);
  CHECK(e[0].key == "eta");
  CHECK(e[0].value == "0.2");
  CHECK(e[0].line == 3);
  CHECK(e[1].key == "alpha");
  CHECK_THROWS_WITH_AS(ParseConfigText("eta 0.2\n", "cfg"), "cfg:1: expected key = value", std::invalid_argument);
  CHECK_THROWS_AS(ParseConfigText("= 3\n", "cfg"), std::invalid_argument);
  CHECK_THROWS_AS(ParseConfigText("eta =\n", "cfg"), std::invalid_argument);
}

TEST_CASE("values map onto the module configs") {
  CliConfig c;
  ApplyConfigValue(c, "eta", "0.3");
  ApplyConfigValue(c, "alpha", "0.8");
  ApplyConfigValue(c, "bias-correction", "true");
  ApplyConfigValue(c, "estimator", "oracle");
  ApplyConfigValue(c, "phase-tolerance", "0.5");
  ApplyConfigValue(c, "window-len", "512");
  ApplyConfigValue(c, "theta-est", "-15");
  ApplyConfigValue(c, "seed", "12");
  CHECK(c.trial.corrector.eta == 0.3);
  CHECK(c.trial.quality.alpha == 0.8);
  CHECK(c.trial.corrector.bias_correction);
  CHECK(c.trial.quality.estimator == EstimatorKind::kOracle);
  CHECK(c.trial.beamformer.phase_tolerance_rad == doctest::Approx(0.5 * std::numbers::pi));
  CHECK(c.trial.hop == 128);
  CHECK(c.theta_est == -15.0);
  CHECK(c.seed == 12);
  CHECK_NOTHROW(c.Validate());
}

TEST_CASE("bad keys and values are rejected with the key named") {
  CliConfig c;
  CHECK_THROWS_WITH_AS(ApplyConfigValue(c, "etta", "1"), "unknown config key 'etta'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(ApplyConfigValue(c, "eta", "fast"), doctest::Contains("eta"), std::invalid_argument);
  CHECK_THROWS_AS(ApplyConfigValue(c, "seed", "-1"), std::invalid_argument);
  CHECK_THROWS_AS(ApplyConfigValue(c, "bias-correction", "maybe"), std::invalid_argument);
  CHECK_THROWS_AS(ApplyConfigValue(c, "estimator", "squim"), std::invalid_argument);
  ApplyConfigValue(c, "eta", "-1");
  CHECK_THROWS_WITH_AS(c.Validate(), doctest::Contains("eta"), std::invalid_argument);
}

TEST_CASE("every listed key accepts a valid value") {
  const std::map<std::string, std::string> samples = {
      {"theta-est", "5"},        {"seed", "2"},          {"duration", "30"},
      {"scene", "three-source"}, {"scene-seed", "4"},    {"out", "x"},
      {"runs", "3"},             {"workers", "2"},       {"eta", "0.2"},
      {"beta-m", "0.8"},         {"beta-v", "0.99"},     {"epsilon", "1e-6"},
      {"bias-correction", "on"}, {"warmup", "5"},        {"q-ceiling", "80"},
      {"alpha", "0.5"},          {"t-h", "0.2"},         {"t-w", "2"},
      {"t-vad", "0.02"},         {"vad-threshold-db", "-50"},
      {"estimator", "oracle"},   {"noise-sigma", "1"},   {"dropout-prob", "0.1"},
      {"phase-tolerance", "0.3"}, {"mask-floor", "0.1"}, {"reference-channel", "1"},
      {"aliasing-policy", "lowpass-only"}, {"window-len", "2048"},
  };
  std::vector<std::string> keys;
  for (const auto &[k, _] : samples) keys.push_back(k);
  CHECK(CliConfigKeys() == keys);
  CliConfig c;
  for (const auto &[k, v] : samples) CHECK_NOTHROW(ApplyConfigValue(c, k, v));
  CHECK_NOTHROW(c.Validate());
  CHECK(c.trial.quality.t_w == 2.0);
  CHECK(c.runs == 3u);
}

TEST_CASE("config file errors carry the line number") {
  const auto p = (Dir() / "bad.cfg").string();
  WriteFileAtomic(p, "eta = 0.2\nwat = 1\n");
  CliConfig c;
  CHECK_THROWS_WITH_AS(ApplyConfigFile(c, p), doctest::Contains("bad.cfg:2"), std::invalid_argument);
}

TEST_CASE("scene files") {
  const fs::path d = Dir();
  std::vector<double> tone(16000 * 6);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = 0.3 * std::sin(0.05 * static_cast<double>(i));
  WriteWav((d / "tone.wav").string(), tone, 16000, WavEncoding::kFloat32);
  const std::string text =
      "duration = 5\nseed = 4\nnoise-db = -30\n"
      "source = 10\n"
      "source = 100 0.5 tone.wav\n";
  const ScenePlan p = ParseSceneText(text, (d / "scene.cfg").string(), {});
  REQUIRE(p.sources.size() == 2);
  CHECK(p.duration_s == 5.0);
  CHECK(p.seed == 4);
  CHECK(*p.diffuse_noise_db == -30.0);
  CHECK(p.sources[0].true_doa_deg == 10.0);
  CHECK(p.sources[1].gain == 0.5);
  CHECK(p.sources[1].signal.size() == tone.size());
  CHECK_THROWS_AS(ParseSceneText("duration = 5\n", "s", {}), std::invalid_argument);
  CHECK_THROWS_AS(ParseSceneText("source = 0\ncolour = red\n", "s", {}), std::invalid_argument);
  CHECK_THROWS_AS(ParseSceneText("source = 0 1 missing.wav\n", "s", {}), std::runtime_error);
  CHECK_THROWS_AS(ParseSceneText("source = 500\n", "s", {}), std::invalid_argument);
}

TEST_CASE("scene resolution") {
  CHECK(ResolveScene("two-source", {5.0, 1, 16000}).sources.size() == 2);
  CHECK(ResolveScene("three-source", {5.0, 1, 16000}).sources.size() == 3);
  CHECK_THROWS_WITH_AS(ResolveScene("no-such-scene", {}), doctest::Contains("two-source"), std::invalid_argument);
}
