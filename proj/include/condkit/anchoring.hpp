#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "condkit/conditioning.hpp"
#include "condkit/depth.hpp"
#include "condkit/geometry.hpp"
#include "condkit/image.hpp"

namespace condkit {

/// The novel-view diffusion model p(X_j | X_i, M). Implementations must be
/// deterministic for a given seed.
class GuidanceModel {
 public:
  virtual ~GuidanceModel() = default;

  /// Full sampling run (DDIM) for the view described by `conditioning`.
  virtual Image sample(const Image& input, const ConditioningVector& conditioning, int steps,
                       double guidanceScale, std::uint64_t seed) = 0;

  /// Denoising direction for a noisy render at the given noise level.
  virtual Image score(const Image& noisyRender, const ConditioningVector& conditioning,
                      double noiseLevel) = 0;
};

/// Pure, thread-safe stand-in: outputs are smooth patterns derived from a
/// hash of the conditioning bytes, the input pixels and the seed.
class MockGuidanceModel : public GuidanceModel {
 public:
  Image sample(const Image& input, const ConditioningVector& conditioning, int steps,
               double guidanceScale, std::uint64_t seed) override;
  Image score(const Image& noisyRender, const ConditioningVector& conditioning,
              double noiseLevel) override;
};

/// The view distillation starts from.
struct InputView {
  std::shared_ptr<const Image> image;
  Pose pose;
  double fov = 0.8575;
  /// Translation normalizer for conditioning (viewer scale q_i).
  double scale = kDefaultViewerScale;
};

struct AnchorPose {
  double offset = 0.0;   // azimuth relative to the input view, in [0, 2 pi)
  double offsetDegrees = 0.0;
  double azimuth = 0.0;  // absolute azimuth, wrapped
  Pose pose;
};

/// k poses on the input camera's orbit circle at azimuth offsets
/// m * 2 pi / (k + 1), m = 1..k, each looking at `origin`.
std::vector<AnchorPose> makeAnchorPoses(const Pose& inputPose, int k, double radius,
                                        double elevation, const Vec3& origin = Vec3::Zero());
/// Same, keeping the input camera's own radius and elevation.
std::vector<AnchorPose> makeAnchorPoses(const Pose& inputPose, int k,
                                        const Vec3& origin = Vec3::Zero());

struct Anchor {
  AnchorPose pose;
  std::shared_ptr<const Image> image;
};

enum class NearestMetric { Rotation, Center };

struct AnchorPlan {
  std::vector<Anchor> anchors;
  double gatingThreshold = 1.0;
  double anchorProbability = 0.5;
  NearestMetric metric = NearestMetric::Rotation;
  std::uint64_t seed = 0;

  void validate() const;
  bool filled() const;
};

AnchorPlan makeAnchorPlan(const InputView& input, int k, std::uint64_t seed,
                          const Vec3& origin = Vec3::Zero());

inline constexpr int kDefaultDdimSteps = 500;
inline constexpr double kDefaultGuidanceScale = 3.0;

/// Fills every anchor slot by sampling the model conditioned on the input
/// view. Model failures are rethrown as GuidanceFailure naming the anchor.
AnchorPlan sampleAnchors(GuidanceModel& model, const InputView& input, AnchorPlan plan,
                         int ddimSteps = kDefaultDdimSteps,
                         double guidanceScale = kDefaultGuidanceScale);

enum class GuidanceKind { InputView, Anchor };

struct GuidanceSource {
  GuidanceKind kind = GuidanceKind::InputView;
  int anchorIndex = -1;
  Pose pose;
  std::shared_ptr<const Image> image;
  /// Target conditioned relative to this source.
  std::optional<ConditioningVector> conditioning;
};

/// Index of the anchor nearest to `target` (ties toward the smaller azimuth
/// offset), or -1 when the plan has no anchors.
int nearestAnchor(const AnchorPlan& plan, const Pose& target);

/// Coin flip with the plan's anchor probability, then the nearest anchor or
/// the input view. Does not require filled images.
GuidanceKind drawGuidanceKind(const AnchorPlan& plan, std::mt19937_64& rng);

/// Picks the guidance view for one SDS step and conditions the target on it.
/// Throws UnfilledPlan if an anchor image is missing.
GuidanceSource selectGuidance(const AnchorPlan& plan, const InputView& input,
                              const Pose& targetPose, std::mt19937_64& rng);

/// Per-pixel gate for SDS gradients: for anchor guidance, true exactly where
/// the render depth exceeds `threshold`; for input-view guidance, all true.
std::vector<std::uint8_t> depthGate(const DepthMap& renderDepth, GuidanceKind kind,
                                    double threshold);

struct NoiseSchedule {
  int totalSteps = 1000;
  double maxNoiseStart = 0.98;
  double maxNoiseEnd = 0.025;
  /// Strength of the slower decay opposite the input view. When unset, chosen
  /// so that at the last step the 180 degree side has covered only half of
  /// the start-to-end drop.
  std::optional<double> anisotropy;

  void validate() const;
  double beta() const;
  /// 1 + beta (1 - cos offset) / 2
  double anisotropyFactor(double angularOffset) const;
};

/// min(1, base(step) * anisotropy(offset)) with base interpolating linearly
/// from maxNoiseStart at step 0 to maxNoiseEnd at the last step.
double noiseLevel(const NoiseSchedule& schedule, int step, double angularOffset);

struct ProgressiveSampling {
  double azimuthStartHalfWidth = 30.0 * kPi / 180.0;
  double elevationStartHalfWidth = 5.0 * kPi / 180.0;
  double elevationMin = -10.0 * kPi / 180.0;
  double elevationMax = 60.0 * kPi / 180.0;

  void validate() const;
};

struct CameraSample {
  Pose pose;
  double azimuthOffset = 0.0;  // relative to the input view, in [-pi, pi)
  double elevation = 0.0;
};

/// Random training camera whose azimuth window around the input view widens
/// linearly from the start half-width to the full circle over training, and
/// whose elevation window widens likewise to the configured range.
CameraSample progressiveCamera(int step, int totalSteps, const ProgressiveSampling& sampling,
                               const Spherical& input, std::mt19937_64& rng,
                               const Vec3& origin = Vec3::Zero());

struct StageConfig {
  int steps = 0;
  int resolution = 0;
  int batch = 0;

  bool operator==(const StageConfig&) const = default;
};

struct DistillConfig {
  std::uint64_t seed = 0;
  double inputRadius = 1.0;
  double inputElevation = 0.0;
  double inputAzimuth = 0.0;
  double fov = 0.8575;
  double viewerScale = kDefaultViewerScale;

  bool anchoring = true;
  int anchors = 2;
  double anchorProbability = 0.5;
  double gatingThreshold = 1.0;
  NearestMetric metric = NearestMetric::Rotation;
  int ddimSteps = kDefaultDdimSteps;
  double guidanceScale = kDefaultGuidanceScale;

  double noiseStart = 0.98;
  double noiseEnd = 0.025;
  std::optional<double> anisotropy;

  ProgressiveSampling sampling;
  std::vector<StageConfig> stages = {{5000, 128, 6}, {5000, 256, 1}};

  /// Throws ConfigError naming the offending field.
  void validate() const;
  int totalSteps() const;
};

struct PlanStep {
  int step = 0;
  int stage = 0;
  Pose camera;
  double azimuthOffset = 0.0;
  GuidanceKind kind = GuidanceKind::InputView;
  int sourceIndex = -1;
  double noise = 0.0;
  int resolution = 0;
  int batch = 0;
};

struct DistillPlan {
  DistillConfig config;
  Pose inputPose;
  std::vector<AnchorPose> anchors;
  std::vector<PlanStep> steps;

  /// Header line (format, version, effective config, anchors) followed by
  /// one JSON object per step.
  std::string toNdjson() const;
};

DistillPlan distillPlan(const DistillConfig& config);

std::string_view guidanceKindName(GuidanceKind kind);

}  // namespace condkit
