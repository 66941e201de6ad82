#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace condkit {

/// H x W grid of depths with a per-pixel validity mask. Valid entries are
/// finite and strictly positive; invalid entries carry no meaning.
class DepthMap {
 public:
  DepthMap() = default;

  /// Fully valid map.
  DepthMap(int width, int height, std::vector<double> values);
  DepthMap(int width, int height, std::vector<double> values, std::vector<std::uint8_t> mask);

  static DepthMap constant(int width, int height, double value);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  bool valid(int x, int y) const { return mask_[index(x, y)] != 0; }

  std::span<const double> values() const { return values_; }
  std::span<const std::uint8_t> mask() const { return mask_; }

  std::size_t validCount() const;
  bool fullyValid() const { return validCount() == values_.size(); }

  /// Copy with every valid value multiplied by `lambda` (> 0).
  DepthMap scaled(double lambda) const;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  void validate() const;

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

enum class QuantileMethod {
  Linear,       // interpolate between order statistics at h = (n - 1) * k / 100
  NearestRank,  // x[ceil(k / 100 * n) - 1], with k = 0 mapping to the minimum
};

/// k-th percentile (k in [0, 100]) of the valid values. Throws EmptyDepth.
double quantile(const DepthMap& d, double k, QuantileMethod method = QuantileMethod::Linear);
double quantile(std::span<const double> values, double k,
                QuantileMethod method = QuantileMethod::Linear);

/// Stereo-magnification scene scale: the 10th percentile of the per-map
/// 5th percentiles.
double sceneScaleAgg(std::span<const DepthMap> depths,
                     QuantileMethod method = QuantileMethod::Linear);

/// 20th percentile of an infilled (fully valid) input-view depth map.
double viewerScale(const DepthMap& infilled, QuantileMethod method = QuantileMethod::Linear);

/// Viewer scale assumed at inference time when no input-view depth exists.
inline constexpr double kDefaultViewerScale = 0.7;

struct ScaleShift {
  double scale = 1.0;
  double shift = 0.0;
  std::size_t pixels = 0;

  bool nonPositiveScale() const { return !(scale > 0.0); }
};

/// Least-squares (scale, shift) mapping predicted disparity onto the inverse
/// of the sparse ground-truth depth over pixels valid in both maps.
ScaleShift alignScaleShift(const DepthMap& predictedDisparity, const DepthMap& sparseDepth);

inline constexpr double kInfillDepthFloor = 1e-4;

struct InfillResult {
  DepthMap depth;
  ScaleShift alignment;
  std::size_t filled = 0;
  /// Holes where scale * disparity + shift produced a depth below the floor.
  std::size_t clamped = 0;
};

/// Fills holes in `sparse` with aligned predicted depth. Valid input pixels
/// are copied through untouched and the result is fully valid.
InfillResult infill(const DepthMap& sparse, const DepthMap& predictedDisparity);

/// Keeps the top-left pixel (value and mask bit) of every factor x factor block.
DepthMap downsample(const DepthMap& d, int factor);

}  // namespace condkit
