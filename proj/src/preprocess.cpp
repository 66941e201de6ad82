#include "condkit/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "condkit/error.hpp"

namespace condkit {

void Intrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "intrinsics need positive focal lengths and size");
  }
}

CropWindow centerCropWindow(const Intrinsics& intr, int target) {
  intr.validate();
  if (target <= 0 || target > std::min(intr.width, intr.height)) {
    throw Error(ErrorCode::TargetTooLarge,
                "crop " + std::to_string(target) + " does not fit " + std::to_string(intr.width) +
                    "x" + std::to_string(intr.height));
  }
  return {(intr.width - target) / 2, (intr.height - target) / 2, target};
}

Intrinsics centerCrop(const Intrinsics& intr, int target) {
  const CropWindow win = centerCropWindow(intr, target);
  Intrinsics out = intr;
  out.cx -= win.x;
  out.cy -= win.y;
  out.width = target;
  out.height = target;
  return out;
}

Intrinsics resize(const Intrinsics& intr, int newWidth, int newHeight) {
  intr.validate();
  if (newWidth <= 0 || newHeight <= 0) {
    throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
  }
  const double sx = static_cast<double>(newWidth) / intr.width;
  const double sy = static_cast<double>(newHeight) / intr.height;
  return {intr.fx * sx, intr.fy * sy, intr.cx * sx, intr.cy * sy, newWidth, newHeight};
}

Letterbox letterbox(const Intrinsics& intr, int outWidth, int outHeight) {
  intr.validate();
  if (outWidth <= 0 || outHeight <= 0) {
    throw Error(ErrorCode::InvalidArgument, "letterbox target must be positive");
  }
  Letterbox lb;
  lb.scale = std::min(static_cast<double>(outWidth) / intr.width,
                      static_cast<double>(outHeight) / intr.height);
  lb.scaledWidth = std::min(outWidth, static_cast<int>(std::lround(intr.width * lb.scale)));
  lb.scaledHeight = std::min(outHeight, static_cast<int>(std::lround(intr.height * lb.scale)));
  lb.padX = (outWidth - lb.scaledWidth) / 2;
  lb.padY = (outHeight - lb.scaledHeight) / 2;
  lb.intrinsics = {intr.fx * lb.scale,           intr.fy * lb.scale,
                   intr.cx * lb.scale + lb.padX, intr.cy * lb.scale + lb.padY,
                   outWidth,                     outHeight};
  return lb;
}

double fovFromIntrinsics(const Intrinsics& intr) {
  intr.validate();
  if (intr.width != intr.height) {
    throw Error(ErrorCode::InvalidArgument, "field of view is defined on square intrinsics; crop first");
  }
  return 2.0 * std::atan(static_cast<double>(intr.width) / (2.0 * intr.fx));
}

double elevationFromPose(const Pose& e, const Vec3& worldUp) {
  const double n = worldUp.norm();
  if (std::abs(n - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "world up vector must be unit length");
  }
  return std::asin(std::clamp(e.forward().dot(worldUp), -1.0, 1.0));
}

std::vector<double> defaultWorldScales() {
  std::vector<double> out;
  for (int i = 3; i <= 15; ++i) out.push_back(i / 10.0);
  return out;
}

double worldScaleGrid(std::span<const double> candidates,
                      const std::function<double(double)>& score) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no world-scale candidates");
  double best = candidates.front();
  double bestScore = score(best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double c = candidates[i];
    const double s = score(c);
    if (s < bestScore || (s == bestScore && c < best)) {
      best = c;
      bestScore = s;
    }
  }
  return best;
}

Standardization standardizePoses(const std::vector<Pose>& extrinsics) {
  if (extrinsics.size() < 3) {
    throw Error(ErrorCode::DegenerateConfiguration, "PCA standardization needs at least 3 cameras");
  }
  Vec3 centroid = Vec3::Zero();
  for (const auto& e : extrinsics) centroid += e.center();
  centroid /= static_cast<double>(extrinsics.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& e : extrinsics) {
    const Vec3 d = e.center() - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(extrinsics.size());

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // Eigen sorts ascending.
  const Vec3 values = eig.eigenvalues();
  if (!(values(2) > 0.0) || values(1) <= 1e-12 * values(2)) {
    throw Error(ErrorCode::DegenerateConfiguration, "camera centers are collinear or coincident");
  }
  Mat3 axes;
  axes.row(0) = eig.eigenvectors().col(2).transpose();
  axes.row(1) = eig.eigenvectors().col(1).transpose();
  axes.row(2) = eig.eigenvectors().col(0).transpose();
  if (axes.determinant() < 0.0) axes.row(1) *= -1.0;

  Vec3 meanUp = Vec3::Zero();
  for (const auto& e : extrinsics) meanUp += e.up();
  if ((axes * meanUp).z() < 0.0) {
    // Half turn about the new Y axis keeps the frame right-handed.
    axes.row(0) *= -1.0;
    axes.row(2) *= -1.0;
  }

  Standardization out;
  out.transform = Pose(axes, -(axes * centroid));
  out.poses.reserve(extrinsics.size());
  for (const auto& e : extrinsics) out.poses.push_back(compose(out.transform, e));
  return out;
}

}  // namespace condkit
