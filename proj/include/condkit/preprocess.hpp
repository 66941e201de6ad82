#pragma once

#include <functional>
#include <span>
#include <vector>

#include "condkit/geometry.hpp"

namespace condkit {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  void validate() const;
  bool operator==(const Intrinsics&) const = default;
};

/// Pixel offset of a centered target x target crop.
struct CropWindow {
  int x = 0;
  int y = 0;
  int size = 0;
};

CropWindow centerCropWindow(const Intrinsics& intr, int target);

/// Centered square crop: focal lengths unchanged, principal point shifted by
/// the crop offset. Throws TargetTooLarge if target > min(width, height).
Intrinsics centerCrop(const Intrinsics& intr, int target);

/// Resize to newWidth x newHeight; every intrinsic scales with its axis.
Intrinsics resize(const Intrinsics& intr, int newWidth, int newHeight);

/// Aspect-preserving fit into outWidth x outHeight with centered padding.
struct Letterbox {
  Intrinsics intrinsics;
  double scale = 1.0;
  int padX = 0;
  int padY = 0;
  int scaledWidth = 0;
  int scaledHeight = 0;
};
Letterbox letterbox(const Intrinsics& intr, int outWidth, int outHeight);

/// 2 atan(width / (2 fx)) of square intrinsics.
double fovFromIntrinsics(const Intrinsics& intr);

/// Angle between the camera's forward axis and the plane orthogonal to
/// `worldUp`; negative when looking down.
double elevationFromPose(const Pose& e, const Vec3& worldUp = Vec3::UnitZ());

/// The world-scale candidates 0.3, 0.4, ..., 1.5.
std::vector<double> defaultWorldScales();

/// Candidate minimizing `score` (lower is better); ties go to the smaller scale.
double worldScaleGrid(std::span<const double> candidates,
                      const std::function<double(double)>& score);

struct Standardization {
  /// World-to-standard rigid transform applied to every camera.
  Pose transform;
  std::vector<Pose> poses;
};

/// PCA alignment of the camera centers: centroid to the origin, principal
/// axes onto world X, Y, Z (largest variance first). No scaling. Z is
/// flipped, if needed, so the mean camera up vector points to +Z.
Standardization standardizePoses(const std::vector<Pose>& extrinsics);

}  // namespace condkit
