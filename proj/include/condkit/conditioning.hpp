#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condkit/depth.hpp"
#include "condkit/geometry.hpp"

namespace condkit {

/// Geometry of one scene plus the (input, target) view pair being conditioned.
/// Depths are optional; variants that need them check on use.
struct SceneView {
  std::vector<Pose> extrinsics;
  std::vector<DepthMap> depths;
  double fov = kPi / 2;
  int inputIndex = 0;
  int targetIndex = 0;

  /// Checks indices, fov range and that depths (when present) match the views.
  void validate() const;
  std::size_t viewCount() const { return extrinsics.size(); }
};

enum class Variant : std::uint8_t {
  Zero123 = 0,
  SixDof = 1,
  SixDofNorm = 2,
  SixDofAgg = 3,
  SixDofViewer = 4,
};

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::Zero123, Variant::SixDof, Variant::SixDofNorm, Variant::SixDofAgg,
    Variant::SixDofViewer};

std::string_view variantName(Variant v);
/// Accepts the snake_case names used by the CLI and config ("sixdof_viewer").
Variant parseVariant(std::string_view name);

inline constexpr std::size_t kPoseConditioningLength = 19;
inline constexpr std::size_t kSphericalConditioningLength = 3;

class ConditioningVector {
 public:
  ConditioningVector(Variant variant, std::vector<double> entries);

  Variant variant() const { return variant_; }
  const std::vector<double>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }

  /// Relative pose block of a 6DoF variant (entries 0..15 as a 4x4 row-major matrix).
  Mat4 poseBlock() const;

  /// u8 variant tag, u32 little-endian count, then count little-endian float32.
  std::vector<std::uint8_t> serialize() const;
  static ConditioningVector deserialize(std::span<const std::uint8_t> bytes);

 private:
  Variant variant_;
  std::vector<double> entries_;
};

/// [f, sin f, cos f]; throws FovOutOfRange unless 0 < f < pi.
std::array<double, 3> fovEmbedding(double fov);

/// Difference of spherical projections P(E_i) - P(E_j): raw elevation and
/// radius differences, azimuth difference wrapped to [-pi, pi).
ConditioningVector mZero123(const SceneView& s, const Vec3& origin);
/// Same, with the origin at the centroid of all camera centers.
ConditioningVector mZero123(const SceneView& s);
/// Unwrapped azimuth difference, for callers that need the raw value.
std::array<double, 3> zero123RawDifference(const SceneView& s, const Vec3& origin);

ConditioningVector mSixDof(const SceneView& s);
ConditioningVector mSixDofNorm(const SceneView& s);
ConditioningVector mSixDofAgg(const SceneView& s,
                              QuantileMethod method = QuantileMethod::Linear);
ConditioningVector mSixDofViewer(const SceneView& s, const DepthMap& infilledInputDepth,
                                 QuantileMethod method = QuantileMethod::Linear);

/// 6DoF+1 vector for a pose pair whose translation is divided by `scale`.
/// All 6DoF variants reduce to this once their scale is known.
ConditioningVector sixDofWithScale(Variant tag, const Pose& input, const Pose& target,
                                   double fov, double scale);

/// Mean distance of the camera centers from their centroid.
double cameraSpread(const std::vector<Pose>& extrinsics);
Vec3 cameraCentroid(const std::vector<Pose>& extrinsics);

}  // namespace condkit
