#pragma once

// Shared test helpers: random geometry, synthetic scenes and the plain-array
// reference implementations the library is checked against.

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "condkit/conditioning.hpp"
#include "condkit/depth.hpp"
#include "condkit/error.hpp"
#include "condkit/geometry.hpp"
#include "condkit/shard.hpp"

namespace testsupport {

using condkit::DepthMap;
using condkit::Mat3;
using condkit::Pose;
using condkit::Vec3;

inline Mat3 randomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 randomVector(std::mt19937_64& rng, double scale = 3.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Pose randomPose(std::mt19937_64& rng, double scale = 3.0) {
  return Pose(randomRotation(rng), randomVector(rng, scale));
}

/// Random map with roughly `validFraction` of pixels valid (at least one).
inline DepthMap randomDepth(std::mt19937_64& rng, int w, int h, double validFraction = 1.0,
                            double lo = 0.5, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::bernoulli_distribution keep(validFraction);
  std::vector<double> v(static_cast<std::size_t>(w * h));
  std::vector<std::uint8_t> m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    m[i] = keep(rng) ? 1 : 0;
    v[i] = m[i] ? u(rng) : 0.0;
  }
  if (std::find(m.begin(), m.end(), 1) == m.end()) {
    m[0] = 1;
    v[0] = u(rng);
  }
  return DepthMap(w, h, std::move(v), std::move(m));
}

inline condkit::SceneView randomSceneView(std::mt19937_64& rng, int views = 4, bool depths = true) {
  condkit::SceneView s;
  for (int k = 0; k < views; ++k) {
    s.extrinsics.push_back(randomPose(rng));
    if (depths) s.depths.push_back(randomDepth(rng, 8, 6, k == 0 ? 1.0 : 0.6));
  }
  s.fov = std::uniform_real_distribution<double>(0.2, 2.5)(rng);
  s.inputIndex = 0;
  s.targetIndex = 1;
  return s;
}

/// Scene record whose views sit on a ring looking at the origin.
inline condkit::SceneRecord ringScene(const std::string& id, int views, std::uint64_t seed,
                                      int depthSize = 8, bool withImages = false) {
  std::mt19937_64 rng(seed);
  condkit::SceneRecord s;
  s.sceneId = id;
  s.fov = 0.8;
  s.source = "synthetic";
  for (int k = 0; k < views; ++k) {
    const double az = 2.0 * condkit::kPi * k / views;
    const Vec3 eye(2.0 * std::cos(az), 2.0 * std::sin(az), 0.5);
    auto v = condkit::ViewRecord::fromPose(condkit::lookAt(eye, Vec3::Zero()));
    if (depthSize > 0) v.setDepth(randomDepth(rng, depthSize, depthSize, k == 0 ? 1.0 : 0.7));
    if (withImages) v.image = {0x89, 'P', 'N', 'G', static_cast<std::uint8_t>(k)};
    s.views.push_back(std::move(v));
  }
  return s;
}

// ------------------------------------------------------------ oracles

using Arr4 = std::array<std::array<double, 4>, 4>;

inline Arr4 toArr(const condkit::Mat4& m) {
  Arr4 a{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a[r][c] = m(r, c);
  return a;
}

inline Arr4 matmul(const Arr4& a, const Arr4& b) {
  Arr4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < 4; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

/// Gauss-Jordan elimination with partial pivoting on a general 4x4 matrix.
inline Arr4 invert(Arr4 a) {
  Arr4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (int c = 0; c < 4; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < 4; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/// Sort, then interpolate between order statistics at h = (n - 1) k / 100.
inline double quantileOracle(std::vector<double> v, double k) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * k / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::vector<double> validValues(const DepthMap& d) {
  std::vector<double> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.mask()[i]) out.push_back(d.values()[i]);
  return out;
}

inline double maxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

/// Code of the condkit::Error thrown by f, or 0 when nothing is thrown.
template <typename F>
condkit::ErrorCode codeOf(F&& f) {
  try {
    f();
  } catch (const condkit::Error& e) {
    return e.code();
  }
  return static_cast<condkit::ErrorCode>(0);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("condkit-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path dataDir() { return CONDKIT_TEST_DATA_DIR; }

}  // namespace testsupport
