#include "condkit/anchoring.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>

#include <nlohmann/json.hpp>

#include "condkit/error.hpp"

namespace condkit {

namespace {

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t h = 1469598103934665603ull) {
  for (const std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t imageHash(const Image& image) {
  const auto rgb = image.toRgb8();
  return fnv1a(rgb);
}

Image pattern(int width, int height, std::uint64_t h) {
  Image out(width, height);
  const double fx = 0.05 + static_cast<double>(h & 0xff) / 2550.0;
  const double fy = 0.05 + static_cast<double>((h >> 8) & 0xff) / 2550.0;
  const double phase = static_cast<double>((h >> 16) & 0xffff) / 65535.0 * 2.0 * kPi;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = 0.5 + 0.5 * std::sin(fx * x + fy * y + phase + 2.0 * c);
      }
    }
  }
  return out;
}

void requireFilled(const AnchorPlan& plan) {
  for (std::size_t m = 0; m < plan.anchors.size(); ++m) {
    if (!plan.anchors[m].image) {
      throw Error(ErrorCode::UnfilledPlan, "anchor " + std::to_string(m) + " has no sampled image");
    }
  }
}

}  // namespace

Image MockGuidanceModel::sample(const Image& input, const ConditioningVector& conditioning,
                                int steps, double guidanceScale, std::uint64_t seed) {
  if (steps <= 0) throw Error(ErrorCode::InvalidArgument, "DDIM steps must be positive");
  const auto bytes = conditioning.serialize();
  std::uint64_t h = fnv1a(bytes, imageHash(input));
  h ^= seed * 0x9e3779b97f4a7c15ull;
  h ^= static_cast<std::uint64_t>(steps) << 32;
  h ^= static_cast<std::uint64_t>(std::llround(guidanceScale * 1000.0));
  return pattern(input.width(), input.height(), h);
}

Image MockGuidanceModel::score(const Image& noisyRender, const ConditioningVector& conditioning,
                               double noiseLevel) {
  const Image target = pattern(noisyRender.width(), noisyRender.height(),
                               fnv1a(conditioning.serialize()));
  Image out(noisyRender.width(), noisyRender.height());
  const auto src = noisyRender.data();
  const auto tgt = target.data();
  auto dst = out.data();
  const double w = std::clamp(noiseLevel, 0.0, 1.0);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - w) * src[i] + w * tgt[i];
  return out;
}

std::vector<AnchorPose> makeAnchorPoses(const Pose& inputPose, int k, double radius,
                                        double elevation, const Vec3& origin) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "anchor count must be non-negative");
  if (!(radius > 0.0)) throw Error(ErrorCode::DegenerateRadius, "anchor radius must be positive");
  const double inputAzimuth = toSpherical(inputPose, origin).azimuth;
  std::vector<AnchorPose> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int m = 1; m <= k; ++m) {
    AnchorPose a;
    a.offset = 2.0 * kPi * m / (k + 1);
    a.offsetDegrees = 360.0 * m / (k + 1);
    a.azimuth = wrapAngle(inputAzimuth + a.offset);
    a.pose = lookAt(fromSpherical({elevation, a.azimuth, radius}, origin), origin);
    out.push_back(a);
  }
  return out;
}

std::vector<AnchorPose> makeAnchorPoses(const Pose& inputPose, int k, const Vec3& origin) {
  const Spherical s = toSpherical(inputPose, origin);
  return makeAnchorPoses(inputPose, k, s.radius, s.elevation, origin);
}

void AnchorPlan::validate() const {
  if (!(gatingThreshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gating threshold must be positive");
  }
  if (!(anchorProbability >= 0.0 && anchorProbability <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "anchor probability must lie in [0, 1]");
  }
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t b = a + 1; b < anchors.size(); ++b) {
      if (std::abs(wrapAngle(anchors[a].pose.azimuth - anchors[b].pose.azimuth)) < 1e-12) {
        throw Error(ErrorCode::InvalidArgument, "anchor azimuths must be distinct");
      }
    }
  }
}

bool AnchorPlan::filled() const {
  return std::all_of(anchors.begin(), anchors.end(), [](const Anchor& a) { return a.image != nullptr; });
}

AnchorPlan makeAnchorPlan(const InputView& input, int k, std::uint64_t seed, const Vec3& origin) {
  AnchorPlan plan;
  plan.seed = seed;
  for (auto& p : makeAnchorPoses(input.pose, k, origin)) plan.anchors.push_back({p, nullptr});
  return plan;
}

AnchorPlan sampleAnchors(GuidanceModel& model, const InputView& input, AnchorPlan plan,
                         int ddimSteps, double guidanceScale) {
  plan.validate();
  if (!input.image) throw Error(ErrorCode::InvalidArgument, "input view has no image");
  for (std::size_t m = 0; m < plan.anchors.size(); ++m) {
    auto& anchor = plan.anchors[m];
    if (anchor.image) continue;
    try {
      const auto cond = sixDofWithScale(Variant::SixDofViewer, input.pose, anchor.pose.pose,
                                        input.fov, input.scale);
      anchor.image = std::make_shared<const Image>(
          model.sample(*input.image, cond, ddimSteps, guidanceScale, plan.seed + m));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::GuidanceFailure, "anchor " + std::to_string(m) + ": " + e.what());
    }
  }
  return plan;
}

int nearestAnchor(const AnchorPlan& plan, const Pose& target) {
  int best = -1;
  double bestDistance = 0.0;
  double bestOffset = 0.0;
  for (std::size_t m = 0; m < plan.anchors.size(); ++m) {
    const auto& a = plan.anchors[m].pose;
    const double d = plan.metric == NearestMetric::Rotation
                         ? geodesicDistance(a.pose.rotation(), target.rotation())
                         : (a.pose.center() - target.center()).norm();
    if (best < 0 || d < bestDistance || (d == bestDistance && a.offset < bestOffset)) {
      best = static_cast<int>(m);
      bestDistance = d;
      bestOffset = a.offset;
    }
  }
  return best;
}

GuidanceKind drawGuidanceKind(const AnchorPlan& plan, std::mt19937_64& rng) {
  const bool anchor = std::bernoulli_distribution(plan.anchorProbability)(rng);
  return anchor && !plan.anchors.empty() ? GuidanceKind::Anchor : GuidanceKind::InputView;
}

GuidanceSource selectGuidance(const AnchorPlan& plan, const InputView& input,
                              const Pose& targetPose, std::mt19937_64& rng) {
  plan.validate();
  requireFilled(plan);
  GuidanceSource src;
  src.kind = drawGuidanceKind(plan, rng);
  if (src.kind == GuidanceKind::Anchor) {
    src.anchorIndex = nearestAnchor(plan, targetPose);
    const auto& anchor = plan.anchors[static_cast<std::size_t>(src.anchorIndex)];
    src.pose = anchor.pose.pose;
    src.image = anchor.image;
  } else {
    src.pose = input.pose;
    src.image = input.image;
  }
  src.conditioning =
      sixDofWithScale(Variant::SixDofViewer, src.pose, targetPose, input.fov, input.scale);
  return src;
}

std::vector<std::uint8_t> depthGate(const DepthMap& renderDepth, GuidanceKind kind,
                                    double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "gating threshold must be positive");
  std::vector<std::uint8_t> mask(renderDepth.size(), 1);
  if (kind == GuidanceKind::InputView) return mask;
  const auto v = renderDepth.values();
  const auto m = renderDepth.mask();
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (m[i] != 0 && v[i] > threshold) ? 1 : 0;
  return mask;
}

void NoiseSchedule::validate() const {
  if (totalSteps < 1) throw Error(ErrorCode::InvalidArgument, "noise schedule needs >= 1 step");
  if (!(maxNoiseEnd >= 0.0 && maxNoiseEnd <= maxNoiseStart && maxNoiseStart <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need 0 <= noise end <= noise start <= 1");
  }
  if (anisotropy && !(*anisotropy >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "anisotropy must be non-negative");
  }
  if (!anisotropy && !(maxNoiseEnd > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "default anisotropy needs a positive noise end");
  }
}

double NoiseSchedule::beta() const {
  if (anisotropy) return *anisotropy;
  // end * (1 + beta) = (start + end) / 2
  return (maxNoiseStart + maxNoiseEnd) / (2.0 * maxNoiseEnd) - 1.0;
}

double NoiseSchedule::anisotropyFactor(double angularOffset) const {
  return 1.0 + beta() * (1.0 - std::cos(angularOffset)) * 0.5;
}

double noiseLevel(const NoiseSchedule& schedule, int step, double angularOffset) {
  schedule.validate();
  if (step < 0 || step >= schedule.totalSteps) {
    throw Error(ErrorCode::StepOutOfRange, "step " + std::to_string(step) + " outside [0, " +
                                               std::to_string(schedule.totalSteps) + ")");
  }
  const double t = schedule.totalSteps == 1
                       ? 1.0
                       : static_cast<double>(step) / static_cast<double>(schedule.totalSteps - 1);
  const double base = (1.0 - t) * schedule.maxNoiseStart + t * schedule.maxNoiseEnd;
  const double offset = std::min(std::abs(wrapAngle(angularOffset)), kPi);
  return std::min(1.0, base * schedule.anisotropyFactor(offset));
}

void ProgressiveSampling::validate() const {
  if (!(azimuthStartHalfWidth >= 0.0 && azimuthStartHalfWidth <= kPi)) {
    throw Error(ErrorCode::InvalidArgument, "azimuth start half-width must lie in [0, pi]");
  }
  if (!(elevationMin <= elevationMax) || elevationMin < -kPi / 2 || elevationMax > kPi / 2) {
    throw Error(ErrorCode::InvalidArgument, "elevation range must be ordered within [-pi/2, pi/2]");
  }
  if (!(elevationStartHalfWidth >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "elevation start half-width must be non-negative");
  }
}

CameraSample progressiveCamera(int step, int totalSteps, const ProgressiveSampling& sampling,
                               const Spherical& input, std::mt19937_64& rng, const Vec3& origin) {
  sampling.validate();
  if (step < 0 || step >= totalSteps) {
    throw Error(ErrorCode::StepOutOfRange, "step " + std::to_string(step) + " outside [0, " +
                                               std::to_string(totalSteps) + ")");
  }
  const double t =
      totalSteps == 1 ? 1.0 : static_cast<double>(step) / static_cast<double>(totalSteps - 1);
  const double azHalf =
      sampling.azimuthStartHalfWidth + (kPi - sampling.azimuthStartHalfWidth) * t;

  const double center = std::clamp(input.elevation, sampling.elevationMin, sampling.elevationMax);
  const double fullHalf = std::max(sampling.elevationMax - center, center - sampling.elevationMin);
  const double startHalf = std::min(sampling.elevationStartHalfWidth, fullHalf);
  const double elHalf = startHalf + (fullHalf - startHalf) * t;
  const double elLo = std::max(sampling.elevationMin, center - elHalf);
  const double elHi = std::min(sampling.elevationMax, center + elHalf);

  CameraSample out;
  const double u = std::uniform_real_distribution<double>(-azHalf, azHalf)(rng);
  out.azimuthOffset = wrapAngle(u);
  out.elevation = elHi > elLo ? std::uniform_real_distribution<double>(elLo, elHi)(rng) : elLo;
  const double azimuth = wrapAngle(input.azimuth + out.azimuthOffset);
  out.pose = lookAt(fromSpherical({out.elevation, azimuth, input.radius}, origin), origin);
  return out;
}

void DistillConfig::validate() const {
  const auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::ConfigError, field + ": " + why);
  };
  if (!(inputRadius > 0.0)) bad("input.radius", "must be positive");
  if (!(fov > 0.0 && fov < kPi)) bad("input.fov", "must lie in (0, pi)");
  if (!(viewerScale > 0.0)) bad("input.viewer_scale", "must be positive");
  if (anchors < 0) bad("anchoring.k", "must be non-negative");
  if (!(anchorProbability >= 0.0 && anchorProbability <= 1.0)) {
    bad("anchoring.anchor_probability", "must lie in [0, 1]");
  }
  if (!(gatingThreshold > 0.0)) bad("anchoring.gating_threshold", "must be positive");
  if (ddimSteps <= 0) bad("anchoring.ddim_steps", "must be positive");
  if (!(guidanceScale > 0.0)) bad("anchoring.guidance_scale", "must be positive");
  if (!(noiseEnd >= 0.0 && noiseEnd <= noiseStart && noiseStart <= 1.0)) {
    bad("noise.end", "need 0 <= end <= start <= 1");
  }
  if (anisotropy && !(*anisotropy >= 0.0)) bad("noise.anisotropy", "must be non-negative");
  if (!anisotropy && !(noiseEnd > 0.0)) bad("noise.end", "must be positive unless anisotropy is set");
  try {
    sampling.validate();
  } catch (const Error& e) {
    bad("sampling", e.what());
  }
  if (stages.empty()) bad("stages", "at least one stage required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    const std::string f = "stages[" + std::to_string(i) + "]";
    if (s.steps <= 0) bad(f + ".steps", "must be positive");
    if (s.resolution <= 0) bad(f + ".resolution", "must be positive");
    if (s.batch <= 0) bad(f + ".batch", "must be positive");
  }
}

int DistillConfig::totalSteps() const {
  int total = 0;
  for (const auto& s : stages) total += s.steps;
  return total;
}

std::string_view guidanceKindName(GuidanceKind kind) {
  return kind == GuidanceKind::Anchor ? "anchor" : "input_view";
}

DistillPlan distillPlan(const DistillConfig& config) {
  config.validate();
  DistillPlan plan;
  plan.config = config;
  const Spherical input{config.inputElevation, wrapAngle(config.inputAzimuth), config.inputRadius};
  plan.inputPose = lookAt(fromSpherical(input, Vec3::Zero()), Vec3::Zero());

  AnchorPlan anchorPlan;
  anchorPlan.anchorProbability = config.anchorProbability;
  anchorPlan.gatingThreshold = config.gatingThreshold;
  anchorPlan.metric = config.metric;
  anchorPlan.seed = config.seed;
  if (config.anchoring) {
    plan.anchors = makeAnchorPoses(plan.inputPose, config.anchors);
    for (const auto& a : plan.anchors) anchorPlan.anchors.push_back({a, nullptr});
  }
  anchorPlan.validate();

  NoiseSchedule schedule;
  schedule.totalSteps = config.totalSteps();
  schedule.maxNoiseStart = config.noiseStart;
  schedule.maxNoiseEnd = config.noiseEnd;
  schedule.anisotropy = config.anisotropy;

  std::mt19937_64 rng(config.seed);
  const int total = config.totalSteps();
  plan.steps.reserve(static_cast<std::size_t>(total));
  int step = 0;
  for (std::size_t stage = 0; stage < config.stages.size(); ++stage) {
    const auto& sc = config.stages[stage];
    for (int s = 0; s < sc.steps; ++s, ++step) {
      PlanStep ps;
      ps.step = step;
      ps.stage = static_cast<int>(stage);
      const CameraSample cam = progressiveCamera(step, total, config.sampling, input, rng);
      ps.camera = cam.pose;
      ps.azimuthOffset = cam.azimuthOffset;
      ps.kind = config.anchoring ? drawGuidanceKind(anchorPlan, rng) : GuidanceKind::InputView;
      if (ps.kind == GuidanceKind::Anchor) ps.sourceIndex = nearestAnchor(anchorPlan, cam.pose);
      ps.noise = noiseLevel(schedule, step, cam.azimuthOffset);
      ps.resolution = sc.resolution;
      ps.batch = sc.batch;
      plan.steps.push_back(ps);
    }
  }
  return plan;
}

namespace {

nlohmann::ordered_json poseJson(const Pose& p) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  const Mat4 m = p.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

}  // namespace

std::string DistillPlan::toNdjson() const {
  using json = nlohmann::ordered_json;
  const auto& c = config;
  json stagesJson = json::array();
  for (const auto& s : c.stages) {
    stagesJson.push_back({{"steps", s.steps}, {"resolution", s.resolution}, {"batch", s.batch}});
  }
  NoiseSchedule schedule;
  schedule.maxNoiseStart = c.noiseStart;
  schedule.maxNoiseEnd = c.noiseEnd;
  schedule.anisotropy = c.anisotropy;
  json cfg = {
      {"seed", c.seed},
      {"input", {{"radius", c.inputRadius}, {"elevation", c.inputElevation},
                 {"azimuth", c.inputAzimuth}, {"fov", c.fov}, {"viewer_scale", c.viewerScale}}},
      {"anchoring", {{"enabled", c.anchoring}, {"k", c.anchors},
                     {"anchor_probability", c.anchorProbability},
                     {"gating_threshold", c.gatingThreshold},
                     {"nearest", c.metric == NearestMetric::Rotation ? "rotation" : "center"},
                     {"ddim_steps", c.ddimSteps}, {"guidance_scale", c.guidanceScale}}},
      {"noise", {{"start", c.noiseStart}, {"end", c.noiseEnd}, {"anisotropy", schedule.beta()}}},
      {"sampling", {{"azimuth_start_half_width", c.sampling.azimuthStartHalfWidth},
                    {"elevation_start_half_width", c.sampling.elevationStartHalfWidth},
                    {"elevation_min", c.sampling.elevationMin},
                    {"elevation_max", c.sampling.elevationMax}}},
      {"stages", stagesJson}};
  json anchorsJson = json::array();
  for (std::size_t m = 0; m < anchors.size(); ++m) {
    anchorsJson.push_back({{"index", m},
                           {"offset_deg", anchors[m].offsetDegrees},
                           {"pose", poseJson(anchors[m].pose)}});
  }
  std::ostringstream out;
  out << json{{"format", "condkit-distill-plan"},
              {"version", 1},
              {"total_steps", steps.size()},
              {"config", cfg},
              {"input_pose", poseJson(inputPose)},
              {"anchors", anchorsJson}}
             .dump()
      << '\n';
  for (const auto& s : steps) {
    out << json{{"step", s.step},
                {"stage", s.stage},
                {"pose", poseJson(s.camera)},
                {"azimuth_offset", s.azimuthOffset},
                {"guidance", guidanceKindName(s.kind)},
                {"source", s.sourceIndex},
                {"noise", s.noise},
                {"resolution", s.resolution},
                {"batch", s.batch}}
               .dump()
        << '\n';
  }
  return out.str();
}

}  // namespace condkit
