#include "condkit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "condkit/error.hpp"

namespace condkit {

namespace {

constexpr double kRotationTolerance = 1e-6;

Mat3 snapToRotation(const Mat3& m) {
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

Pose::Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation) : translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidRotation, "pose contains non-finite entries");
  }
  const double orthoError = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation.determinant();
  if (orthoError > kRotationTolerance || std::abs(det - 1.0) > kRotationTolerance) {
    throw Error(ErrorCode::InvalidRotation,
                "matrix is not a rotation (orthonormality error " + std::to_string(orthoError) +
                    ", det " + std::to_string(det) + ")");
  }
  rotation_ = snapToRotation(rotation);
}

Pose Pose::fromMatrix(const Mat4& m) {
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kRotationTolerance) {
    throw Error(ErrorCode::InvalidRotation, "homogeneous bottom row must be [0 0 0 1]");
  }
  return Pose(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(Pose::Trusted{}, a.rotation_ * b.rotation_,
              a.rotation_ * b.translation_ + a.translation_);
}

Pose inverse(const Pose& p) {
  const Mat3 rt = p.rotation_.transpose();
  return Pose(Pose::Trusted{}, rt, -(rt * p.translation_));
}

Pose relativePose(const Pose& ei, const Pose& ej) { return compose(inverse(ei), ej); }

Pose scaleTranslation(const Pose& e, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonPositiveScale, "translation scale must be positive, got " +
                                                 std::to_string(lambda));
  }
  return Pose(Pose::Trusted{}, e.rotation_, e.translation_ * lambda);
}

double wrapAngle(double radians) {
  double r = std::fmod(radians + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  if (r >= kPi) r -= 2.0 * kPi;
  return r;
}

Spherical toSpherical(const Vec3& point, const Vec3& origin) {
  const Vec3 d = point - origin;
  const double radius = d.norm();
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::DegenerateRadius, "camera center coincides with the spherical origin");
  }
  Spherical s;
  s.radius = radius;
  s.elevation = std::asin(std::clamp(d.z() / radius, -1.0, 1.0));
  s.azimuth = wrapAngle(std::atan2(d.y(), d.x()));
  return s;
}

Spherical toSpherical(const Pose& e, const Vec3& origin) { return toSpherical(e.center(), origin); }

Vec3 fromSpherical(const Spherical& s, const Vec3& origin) {
  const double ce = std::cos(s.elevation);
  return origin + s.radius * Vec3(ce * std::cos(s.azimuth), ce * std::sin(s.azimuth),
                                  std::sin(s.elevation));
}

double geodesicDistance(const Mat3& ra, const Mat3& rb) {
  const double c = ((ra.transpose() * rb).trace() - 1.0) * 0.5;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Pose lookAt(const Vec3& eye, const Vec3& target, const Vec3& worldUp) {
  const Vec3 diff = target - eye;
  if (!(diff.norm() > 0.0)) {
    throw Error(ErrorCode::DegenerateRadius, "lookAt eye coincides with target");
  }
  const Vec3 forward = diff.normalized();
  Vec3 right = forward.cross(worldUp);
  if (right.norm() < 1e-12) right = forward.cross(Vec3::UnitY());
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  return Pose(r, eye);
}

Mat3 rotationZ(double radians) {
  return Eigen::AngleAxisd(radians, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace condkit
