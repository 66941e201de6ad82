#include "condkit/conditioning.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "condkit/error.hpp"

namespace condkit {

void SceneView::validate() const {
  const auto n = static_cast<int>(extrinsics.size());
  if (n == 0) throw Error(ErrorCode::EmptyScene, "scene has no views");
  if (inputIndex < 0 || inputIndex >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "input view index " + std::to_string(inputIndex) + " outside [0, " +
                    std::to_string(n) + ")");
  }
  if (targetIndex < 0 || targetIndex >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "target view index " + std::to_string(targetIndex) + " outside [0, " +
                    std::to_string(n) + ")");
  }
  if (!(fov > 0.0 && fov < kPi)) {
    throw Error(ErrorCode::FovOutOfRange, "field of view must lie in (0, pi)");
  }
  if (!depths.empty() && depths.size() != extrinsics.size()) {
    throw Error(ErrorCode::ShapeMismatch, "scene has " + std::to_string(depths.size()) +
                                              " depth maps for " + std::to_string(n) + " views");
  }
}

std::string_view variantName(Variant v) {
  switch (v) {
    case Variant::Zero123: return "zero123";
    case Variant::SixDof: return "sixdof";
    case Variant::SixDofNorm: return "sixdof_norm";
    case Variant::SixDofAgg: return "sixdof_agg";
    case Variant::SixDofViewer: return "sixdof_viewer";
  }
  return "unknown";
}

Variant parseVariant(std::string_view name) {
  for (Variant v : kAllVariants) {
    if (variantName(v) == name) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown conditioning variant '" + std::string(name) + "'");
}

ConditioningVector::ConditioningVector(Variant variant, std::vector<double> entries)
    : variant_(variant), entries_(std::move(entries)) {
  const std::size_t expected =
      variant == Variant::Zero123 ? kSphericalConditioningLength : kPoseConditioningLength;
  if (entries_.size() != expected) {
    throw Error(ErrorCode::InvalidArgument, std::string(variantName(variant)) + " vector needs " +
                                                std::to_string(expected) + " entries");
  }
  for (double e : entries_) {
    if (!std::isfinite(e)) {
      throw Error(ErrorCode::InvalidArgument, "conditioning vector has a non-finite entry");
    }
  }
}

Mat4 ConditioningVector::poseBlock() const {
  if (variant_ == Variant::Zero123) {
    throw Error(ErrorCode::InvalidArgument, "zero123 vectors carry no pose block");
  }
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = entries_[static_cast<std::size_t>(r * 4 + c)];
  }
  return m;
}

namespace {

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t getU32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> ConditioningVector::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(5 + 4 * entries_.size());
  out.push_back(static_cast<std::uint8_t>(variant_));
  putU32(out, static_cast<std::uint32_t>(entries_.size()));
  for (double e : entries_) putU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(e)));
  return out;
}

ConditioningVector ConditioningVector::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw Error(ErrorCode::FormatError, "conditioning record truncated");
  const std::uint8_t tag = bytes[0];
  if (tag > static_cast<std::uint8_t>(Variant::SixDofViewer)) {
    throw Error(ErrorCode::FormatError, "unknown variant tag " + std::to_string(tag));
  }
  const std::uint32_t count = getU32(bytes, 1);
  if (bytes.size() != 5 + 4 * static_cast<std::size_t>(count)) {
    throw Error(ErrorCode::FormatError, "conditioning record length does not match its count");
  }
  std::vector<double> entries(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    entries[i] = std::bit_cast<float>(getU32(bytes, 5 + 4 * static_cast<std::size_t>(i)));
  }
  return ConditioningVector(static_cast<Variant>(tag), std::move(entries));
}

std::array<double, 3> fovEmbedding(double fov) {
  if (!(fov > 0.0 && fov < kPi)) {
    throw Error(ErrorCode::FovOutOfRange,
                "field of view " + std::to_string(fov) + " rad outside (0, pi)");
  }
  return {fov, std::sin(fov), std::cos(fov)};
}

Vec3 cameraCentroid(const std::vector<Pose>& extrinsics) {
  if (extrinsics.empty()) throw Error(ErrorCode::EmptyScene, "scene has no cameras");
  Vec3 sum = Vec3::Zero();
  for (const auto& e : extrinsics) sum += e.center();
  return sum / static_cast<double>(extrinsics.size());
}

double cameraSpread(const std::vector<Pose>& extrinsics) {
  const Vec3 mean = cameraCentroid(extrinsics);
  double total = 0.0;
  for (const auto& e : extrinsics) total += (e.center() - mean).norm();
  return total / static_cast<double>(extrinsics.size());
}

std::array<double, 3> zero123RawDifference(const SceneView& s, const Vec3& origin) {
  s.validate();
  const Spherical a = toSpherical(s.extrinsics[static_cast<std::size_t>(s.inputIndex)], origin);
  const Spherical b = toSpherical(s.extrinsics[static_cast<std::size_t>(s.targetIndex)], origin);
  return {a.elevation - b.elevation, a.azimuth - b.azimuth, a.radius - b.radius};
}

ConditioningVector mZero123(const SceneView& s, const Vec3& origin) {
  const auto raw = zero123RawDifference(s, origin);
  return ConditioningVector(Variant::Zero123, {raw[0], wrapAngle(raw[1]), raw[2]});
}

ConditioningVector mZero123(const SceneView& s) {
  s.validate();
  return mZero123(s, cameraCentroid(s.extrinsics));
}

ConditioningVector sixDofWithScale(Variant tag, const Pose& input, const Pose& target, double fov,
                                   double scale) {
  if (tag == Variant::Zero123) {
    throw Error(ErrorCode::InvalidArgument, "zero123 is not a 6DoF variant");
  }
  const auto fovEmb = fovEmbedding(fov);
  Pose rel = relativePose(input, target);
  if (scale != 1.0) rel = scaleTranslation(rel, 1.0 / scale);
  const Mat4 m = rel.matrix();
  std::vector<double> entries;
  entries.reserve(kPoseConditioningLength);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) entries.push_back(m(r, c));
  }
  entries.insert(entries.end(), fovEmb.begin(), fovEmb.end());
  return ConditioningVector(tag, std::move(entries));
}

namespace {

const Pose& inputPose(const SceneView& s) {
  return s.extrinsics[static_cast<std::size_t>(s.inputIndex)];
}
const Pose& targetPose(const SceneView& s) {
  return s.extrinsics[static_cast<std::size_t>(s.targetIndex)];
}

}  // namespace

ConditioningVector mSixDof(const SceneView& s) {
  s.validate();
  return sixDofWithScale(Variant::SixDof, inputPose(s), targetPose(s), s.fov, 1.0);
}

ConditioningVector mSixDofNorm(const SceneView& s) {
  s.validate();
  const double spread = cameraSpread(s.extrinsics);
  if (!(spread > 0.0)) {
    throw Error(ErrorCode::DegenerateScale, "all camera centers coincide; cannot normalize");
  }
  return sixDofWithScale(Variant::SixDofNorm, inputPose(s), targetPose(s), s.fov, spread);
}

ConditioningVector mSixDofAgg(const SceneView& s, QuantileMethod method) {
  s.validate();
  if (s.depths.empty()) {
    throw Error(ErrorCode::EmptyDepth, "aggregate normalization needs a depth map per view");
  }
  const double q = sceneScaleAgg(s.depths, method);
  return sixDofWithScale(Variant::SixDofAgg, inputPose(s), targetPose(s), s.fov, q);
}

ConditioningVector mSixDofViewer(const SceneView& s, const DepthMap& infilledInputDepth,
                                 QuantileMethod method) {
  s.validate();
  const double q = viewerScale(infilledInputDepth, method);
  return sixDofWithScale(Variant::SixDofViewer, inputPose(s), targetPose(s), s.fov, q);
}

}  // namespace condkit
