#include "doacorr/config_file.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "doacorr/persistence.h"
#include "doacorr/wav_io.h"

namespace doacorr {

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception &) {
  }
  throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
}

std::uint64_t ToUnsigned(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long u = std::stoull(v, &used);
      if (used == v.size()) return u;
    }
  } catch (const std::exception &) {
  }
  throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
}

bool ToBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument(key + ": expected true/false, got '" + v + "'");
}

using Setter = std::function<void(CliConfig &, const std::string &, const std::string &)>;

const std::map<std::string, Setter> &Setters() {
  static const std::map<std::string, Setter> setters = {
      {"theta-est", [](CliConfig &c, auto &k, auto &v) { c.theta_est = ToDouble(k, v); }},
      {"seed", [](CliConfig &c, auto &k, auto &v) { c.seed = ToUnsigned(k, v); }},
      {"duration", [](CliConfig &c, auto &k, auto &v) { c.scene.duration_s = ToDouble(k, v); }},
      {"scene", [](CliConfig &c, auto &, auto &v) { c.scene_source = v; }},
      {"scene-seed", [](CliConfig &c, auto &k, auto &v) { c.scene.seed = ToUnsigned(k, v); }},
      {"out", [](CliConfig &c, auto &, auto &v) { c.out_dir = v; }},
      {"runs", [](CliConfig &c, auto &k, auto &v) { c.runs = ToUnsigned(k, v); }},
      {"workers",
       [](CliConfig &c, auto &k, auto &v) { c.workers = static_cast<unsigned>(ToUnsigned(k, v)); }},
      // corrector
      {"eta", [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.eta = ToDouble(k, v); }},
      {"beta-m", [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.beta_m = ToDouble(k, v); }},
      {"beta-v", [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.beta_v = ToDouble(k, v); }},
      {"epsilon",
       [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.epsilon = ToDouble(k, v); }},
      {"bias-correction",
       [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.bias_correction = ToBool(k, v); }},
      {"warmup", [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.warmup_s = ToDouble(k, v); }},
      {"q-ceiling",
       [](CliConfig &c, auto &k, auto &v) { c.trial.corrector.q_ceiling = ToDouble(k, v); }},
      // quality
      {"alpha", [](CliConfig &c, auto &k, auto &v) { c.trial.quality.alpha = ToDouble(k, v); }},
      {"t-h", [](CliConfig &c, auto &k, auto &v) { c.trial.quality.t_h = ToDouble(k, v); }},
      {"t-w", [](CliConfig &c, auto &k, auto &v) { c.trial.quality.t_w = ToDouble(k, v); }},
      {"t-vad", [](CliConfig &c, auto &k, auto &v) { c.trial.quality.t_vad = ToDouble(k, v); }},
      {"vad-threshold-db",
       [](CliConfig &c, auto &k, auto &v) {
         c.trial.quality.vad_energy_threshold_db = ToDouble(k, v);
       }},
      {"estimator",
       [](CliConfig &c, auto &, auto &v) { c.trial.quality.estimator = ParseEstimatorKind(v); }},
      {"noise-sigma",
       [](CliConfig &c, auto &k, auto &v) { c.trial.quality.noise_sigma_db = ToDouble(k, v); }},
      {"dropout-prob",
       [](CliConfig &c, auto &k, auto &v) { c.trial.quality.dropout_prob = ToDouble(k, v); }},
      // beamformer (tolerance given in units of pi)
      {"phase-tolerance",
       [](CliConfig &c, auto &k, auto &v) {
         c.trial.beamformer.phase_tolerance_rad = ToDouble(k, v) * std::numbers::pi;
       }},
      {"mask-floor",
       [](CliConfig &c, auto &k, auto &v) { c.trial.beamformer.mask_floor = ToDouble(k, v); }},
      {"reference-channel",
       [](CliConfig &c, auto &k, auto &v) {
         c.trial.beamformer.reference_channel = static_cast<std::size_t>(ToUnsigned(k, v));
       }},
      {"aliasing-policy",
       [](CliConfig &c, auto &, auto &v) {
         c.trial.beamformer.aliasing_policy = ParseAliasingPolicy(v);
       }},
      {"window-len",
       [](CliConfig &c, auto &k, auto &v) {
         c.trial.window_len = static_cast<std::size_t>(ToUnsigned(k, v));
         c.trial.hop = c.trial.window_len / 4;
       }},
  };
  return setters;
}

}  // namespace

std::vector<ConfigEntry> ParseConfigText(const std::string &text, const std::string &source) {
  std::vector<ConfigEntry> entries;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string body = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(source + ":" + std::to_string(line) + ": expected key = value");
    ConfigEntry e{Trim(body.substr(0, eq)), Trim(body.substr(eq + 1)), line};
    if (e.key.empty())
      throw std::invalid_argument(source + ":" + std::to_string(line) + ": missing key");
    if (e.value.empty())
      throw std::invalid_argument(source + ":" + std::to_string(line) + ": missing value for " + e.key);
    entries.push_back(std::move(e));
  }
  return entries;
}

void CliConfig::Validate() const {
  trial.Validate();
  if (!std::isfinite(theta_est)) throw std::invalid_argument("theta-est must be finite");
  if (!(scene.duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  if (scene.duration_s < trial.quality.t_w)
    throw std::invalid_argument("duration must be at least t-w");
  if (runs && *runs == 0) throw std::invalid_argument("runs must be at least 1");
  if (workers == 0) throw std::invalid_argument("workers must be at least 1");
  if (out_dir.empty()) throw std::invalid_argument("out must not be empty");
}

std::vector<std::string> CliConfigKeys() {
  std::vector<std::string> keys;
  for (const auto &[k, _] : Setters()) keys.push_back(k);
  return keys;
}

void ApplyConfigValue(CliConfig &config, const std::string &key, const std::string &value) {
  const auto &setters = Setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  try {
    it->second(config, key, value);
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    if (msg.rfind(key + ":", 0) == 0) throw;
    throw std::invalid_argument(key + ": " + msg);
  }
}

void ApplyConfigFile(CliConfig &config, const std::string &path) {
  for (const auto &e : ParseConfigText(ReadFile(path), path)) {
    try {
      ApplyConfigValue(config, e.key, e.value);
    } catch (const std::invalid_argument &err) {
      throw std::invalid_argument(path + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
}

ScenePlan ParseSceneText(const std::string &text, const std::string &source,
                         const SceneOptions &defaults) {
  SceneOptions opts = defaults;
  std::optional<double> noise_db;
  struct Src {
    double doa, gain;
    std::string wav;
  };
  std::vector<Src> srcs;
  for (const auto &e : ParseConfigText(text, source)) {
    const std::string where = source + ":" + std::to_string(e.line) + ": ";
    try {
      if (e.key == "duration") {
        opts.duration_s = ToDouble(e.key, e.value);
      } else if (e.key == "seed") {
        opts.seed = ToUnsigned(e.key, e.value);
      } else if (e.key == "fs") {
        opts.fs = static_cast<int>(ToUnsigned(e.key, e.value));
      } else if (e.key == "noise-db") {
        noise_db = e.value == "off" ? std::nullopt : std::optional(ToDouble(e.key, e.value));
      } else if (e.key == "source") {
        std::istringstream fields(e.value);
        std::vector<std::string> f;
        for (std::string s; fields >> s;) f.push_back(s);
        if (f.size() > 3) throw std::invalid_argument("source: expected <doa> [gain] [wav]");
        srcs.push_back({ToDouble("source doa", f[0]), f.size() > 1 ? ToDouble("source gain", f[1]) : 1.0,
                        f.size() > 2 ? f[2] : ""});
      } else {
        throw std::invalid_argument("unknown scene key '" + e.key + "'");
      }
    } catch (const std::invalid_argument &err) {
      throw std::invalid_argument(where + err.what());
    }
  }
  if (srcs.empty()) throw std::invalid_argument(source + ": scene has no sources");
  if (!(opts.duration_s > 0.0)) throw std::invalid_argument(source + ": duration must be positive");
  if (opts.fs <= 0) throw std::invalid_argument(source + ": fs must be positive");

  ScenePlan plan;
  plan.fs = opts.fs;
  plan.duration_s = opts.duration_s;
  plan.seed = opts.seed;
  plan.diffuse_noise_db = noise_db;
  const auto base = std::filesystem::path(source).parent_path();
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    SourceSpec s;
    s.true_doa_deg = srcs[i].doa;
    s.gain = srcs[i].gain;
    if (srcs[i].wav.empty()) {
      s.signal = SynthSpeechLike(opts.duration_s, opts.fs, opts.seed * 1000 + i + 1);
      s.fs = opts.fs;
    } else {
      auto p = std::filesystem::path(srcs[i].wav);
      if (p.is_relative()) p = base / p;
      WavData w = LoadWav(p.string());
      s.signal = std::move(w.samples);
      s.fs = w.fs;
    }
    plan.sources.push_back(std::move(s));
  }
  plan.Validate();
  return plan;
}

ScenePlan ResolveScene(const std::string &preset_or_path, const SceneOptions &defaults) {
  const auto names = ScenePresetNames();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end())
    return ScenePreset(preset_or_path, defaults);
  if (!std::filesystem::exists(preset_or_path)) {
    std::string valid;
    for (const auto &n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("scene '" + preset_or_path +
                                "' is neither a preset (" + valid + ") nor an existing file");
  }
  return ParseSceneText(ReadFile(preset_or_path), preset_or_path, defaults);
}

}  // namespace doacorr
