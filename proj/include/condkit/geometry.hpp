#pragma once

#include <Eigen/Core>

namespace condkit {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Rigid camera-to-world transform. The translation is the camera center in
/// world coordinates. Camera axes follow the OpenCV convention: +x right,
/// +y down, +z forward (viewing direction).
class Pose {
 public:
  /// Identity transform.
  Pose();

  /// Validates that `rotation` lies within 1e-6 of SO(3) and snaps it onto
  /// SO(3) with a polar decomposition. Throws InvalidRotation otherwise.
  Pose(const Mat3& rotation, const Vec3& translation);

  /// Builds from a 4x4 homogeneous matrix; the bottom row must be [0 0 0 1].
  static Pose fromMatrix(const Mat4& m);

  static Pose identity() { return Pose(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  const Vec3& center() const { return translation_; }

  Vec3 forward() const { return rotation_.col(2); }
  Vec3 up() const { return -rotation_.col(1); }

  Mat4 matrix() const;

 private:
  struct Trusted {};
  Pose(Trusted, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  friend Pose compose(const Pose& a, const Pose& b);
  friend Pose inverse(const Pose& p);
  friend Pose scaleTranslation(const Pose& e, double lambda);

  Mat3 rotation_;
  Vec3 translation_;
};

/// "Apply b, then a": the matrix product a * b.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// E_i^-1 * E_j: the pose of camera j expressed in camera i's frame.
Pose relativePose(const Pose& ei, const Pose& ej);

/// Multiplies the translation by lambda; throws NonPositiveScale for lambda <= 0.
Pose scaleTranslation(const Pose& e, double lambda);

/// Elevation is measured from the world XY-plane (Z up), azimuth is
/// atan2(y, x) wrapped to [-pi, pi).
struct Spherical {
  double elevation = 0.0;
  double azimuth = 0.0;
  double radius = 0.0;
};

Spherical toSpherical(const Vec3& point, const Vec3& origin);
/// Spherical coordinates of the camera center; roll is not representable.
Spherical toSpherical(const Pose& e, const Vec3& origin);
Vec3 fromSpherical(const Spherical& s, const Vec3& origin);

/// Wraps an angle into [-pi, pi).
double wrapAngle(double radians);

/// Rotation angle of Ra^T * Rb, in [0, pi].
double geodesicDistance(const Mat3& ra, const Mat3& rb);

/// Camera at `eye` looking at `target`. `worldUp` fixes roll; if the view
/// direction is parallel to it, world +Y is used instead.
Pose lookAt(const Vec3& eye, const Vec3& target, const Vec3& worldUp = Vec3::UnitZ());

/// Rotation by `radians` about the world Z axis.
Mat3 rotationZ(double radians);

}  // namespace condkit
