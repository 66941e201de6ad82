#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condkit/anchoring.hpp"
#include "condkit/conditioning.hpp"
#include "condkit/depth.hpp"

namespace condkit {

/// Effective tool configuration. Every default reproduces the reference
/// setup: viewer-centric conditioning, two anchors, probability 0.5,
/// gating at depth 1.0, 500 DDIM steps, guidance 3.0, final noise 0.025.
struct Config {
  // [conditioning]
  Variant variant = Variant::SixDofViewer;

  // [depth]
  QuantileMethod quantile = QuantileMethod::Linear;
  int downsample = 4;
  double viewerDefaultScale = kDefaultViewerScale;

  // [dataset]
  double rate = 1.0;
  int workers = 1;
  int scenesPerShard = 64;
  int queuedScenes = 4;
  bool oneEpoch = false;

  // [run]
  std::uint64_t seed = 0;

  // [input]; angles in degrees
  double inputRadius = 1.0;
  double inputElevationDeg = 0.0;
  double inputAzimuthDeg = 0.0;
  double fovDeg = 49.1;
  double inputViewerScale = kDefaultViewerScale;

  // [anchoring]
  bool anchoring = true;
  int anchors = 2;
  double anchorProbability = 0.5;
  double gatingThreshold = 1.0;
  NearestMetric nearest = NearestMetric::Rotation;
  int ddimSteps = kDefaultDdimSteps;
  double guidanceScale = kDefaultGuidanceScale;

  // [noise]
  double noiseStart = 0.98;
  double noiseEnd = 0.025;
  std::optional<double> anisotropy;

  // [sampling]; degrees
  double azimuthStartDeg = 30.0;
  double elevationStartDeg = 5.0;
  double elevationMinDeg = -10.0;
  double elevationMaxDeg = 60.0;

  // [[stages]]
  std::vector<StageConfig> stages = {{5000, 128, 6}, {5000, 256, 1}};

  // [metrics]
  std::vector<std::string> metrics = {"psnr", "ssim"};
  std::string lpipsCommand;

  // [preprocess]
  int cropSize = 256;

  DistillConfig distillConfig() const;

  bool operator==(const Config&) const = default;
};

/// Parses TOML text. Unknown sections or keys and mistyped values throw
/// ConfigError naming the key.
Config parseConfig(const std::string& toml);
Config loadConfig(const std::filesystem::path& path);

/// Full effective configuration as TOML; parseConfig(dumpConfig(c)) == c.
std::string dumpConfig(const Config& config);

/// Sets one "section.key" from its textual form, typed after the key.
void setConfigValue(Config& config, const std::string& key, const std::string& value);

/// Applies CONDKIT_<SECTION>_<KEY> variables, e.g. CONDKIT_ANCHORING_K=3.
/// `lookup` defaults to the process environment.
void applyEnvironment(Config& config,
                      const std::function<std::optional<std::string>(const std::string&)>& lookup = {});

/// Every settable "section.key" (stages excluded).
std::vector<std::string> configKeys();

std::string_view quantileMethodName(QuantileMethod m);

}  // namespace condkit
