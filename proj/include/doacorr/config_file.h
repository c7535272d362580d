// key=value configuration shared by the config file and command-line flags.
//
// One entry per line, '#' starts a comment, blank lines are ignored. Keys
// are the long flag names without the leading dashes (theta-est, eta, ...).
// Precedence: defaults < config file < flags.

#ifndef DOACORR_CONFIG_FILE_H_
#define DOACORR_CONFIG_FILE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "doacorr/experiment.h"
#include "doacorr/harness.h"

namespace doacorr {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

// Throws std::invalid_argument with "<source>:<line>: ..." on malformed lines.
std::vector<ConfigEntry> ParseConfigText(const std::string &text, const std::string &source);

struct CliConfig {
  TrialConfig trial;
  double theta_est = 15.0;
  std::uint64_t seed = 1;
  SceneOptions scene;
  // Scene preset name or path to a scene file.
  std::string scene_source = "two-source";
  std::string out_dir = "out";
  std::optional<std::size_t> runs;
  unsigned workers = 1;

  void Validate() const;
};

std::vector<std::string> CliConfigKeys();

// Unknown keys and unparsable values throw std::invalid_argument naming the key.
void ApplyConfigValue(CliConfig &config, const std::string &key, const std::string &value);
void ApplyConfigFile(CliConfig &config, const std::string &path);

// Scene file: the same line syntax with keys duration, seed, fs, noise-db
// and repeated `source = <doa_deg> [gain] [wav-path]`. The first source is
// the SOI; sources without a wav path get a synthetic speech-like signal.
ScenePlan ParseSceneText(const std::string &text, const std::string &source,
                         const SceneOptions &defaults);
// A scene preset name, or else a path to a scene file.
ScenePlan ResolveScene(const std::string &preset_or_path, const SceneOptions &defaults);

}  // namespace doacorr

#endif  // DOACORR_CONFIG_FILE_H_
