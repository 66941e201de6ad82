#include "condkit/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "condkit/error.hpp"

namespace condkit {

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : DepthMap(width, height, std::move(values),
               std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                             static_cast<std::size_t>(std::max(height, 0)),
                                         1)) {}

DepthMap::DepthMap(int width, int height, std::vector<double> values,
                   std::vector<std::uint8_t> mask)
    : width_(width), height_(height), values_(std::move(values)), mask_(std::move(mask)) {
  validate();
}

DepthMap DepthMap::constant(int width, int height, double value) {
  return DepthMap(width, height,
                  std::vector<double>(static_cast<std::size_t>(width) * height, value));
}

void DepthMap::validate() const {
  if (width_ < 0 || height_ < 0) {
    throw Error(ErrorCode::InvalidArgument, "depth map dimensions must be non-negative");
  }
  const auto n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  if (values_.size() != n || mask_.size() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "depth map buffers do not match " + std::to_string(width_) + "x" +
                    std::to_string(height_));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mask_[i] != 0 && !(std::isfinite(values_[i]) && values_[i] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "valid depth entries must be finite and positive (pixel " + std::to_string(i) +
                      ")");
    }
  }
}

std::size_t DepthMap::validCount() const {
  return static_cast<std::size_t>(std::count_if(mask_.begin(), mask_.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

DepthMap DepthMap::scaled(double lambda) const {
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::NonPositiveScale, "depth scale must be positive");
  }
  std::vector<double> v(values_);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask_[i] != 0) v[i] *= lambda;
  }
  return DepthMap(width_, height_, std::move(v), mask_);
}

namespace {

double quantileInPlace(std::vector<double>& x, double k, QuantileMethod method) {
  if (x.empty()) {
    throw Error(ErrorCode::EmptyDepth, "quantile of an empty set of depths");
  }
  if (!(k >= 0.0 && k <= 100.0)) {
    throw Error(ErrorCode::InvalidArgument, "percentile must lie in [0, 100]");
  }
  const std::size_t n = x.size();
  if (method == QuantileMethod::NearestRank) {
    auto rank = static_cast<std::size_t>(std::ceil(k / 100.0 * static_cast<double>(n)));
    const std::size_t idx = rank == 0 ? 0 : std::min(rank, n) - 1;
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(idx), x.end());
    return x[idx];
  }
  const double h = static_cast<double>(n - 1) * k / 100.0;
  const auto lo = std::min(static_cast<std::size_t>(std::floor(h)), n - 1);
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lo), x.end());
  const double xlo = x[lo];
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n || frac == 0.0) return xlo;
  const double xhi = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(lo) + 1, x.end());
  return xlo + frac * (xhi - xlo);
}

std::vector<double> validValues(const DepthMap& d) {
  std::vector<double> out;
  out.reserve(d.size());
  const auto v = d.values();
  const auto m = d.mask();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i] != 0) out.push_back(v[i]);
  }
  return out;
}

}  // namespace

double quantile(std::span<const double> values, double k, QuantileMethod method) {
  std::vector<double> x(values.begin(), values.end());
  return quantileInPlace(x, k, method);
}

double quantile(const DepthMap& d, double k, QuantileMethod method) {
  auto x = validValues(d);
  return quantileInPlace(x, k, method);
}

double sceneScaleAgg(std::span<const DepthMap> depths, QuantileMethod method) {
  if (depths.empty()) {
    throw Error(ErrorCode::EmptyScene, "scene scale requires at least one depth map");
  }
  std::vector<double> perView;
  perView.reserve(depths.size());
  for (const auto& d : depths) perView.push_back(quantile(d, 5.0, method));
  return quantileInPlace(perView, 10.0, method);
}

double viewerScale(const DepthMap& infilled, QuantileMethod method) {
  if (infilled.size() == 0) {
    throw Error(ErrorCode::EmptyDepth, "viewer scale of an empty depth map");
  }
  if (!infilled.fullyValid()) {
    throw Error(ErrorCode::NotInfilled, "viewer scale requires an infilled depth map");
  }
  return quantile(infilled, 20.0, method);
}

ScaleShift alignScaleShift(const DepthMap& predictedDisparity, const DepthMap& sparseDepth) {
  if (predictedDisparity.width() != sparseDepth.width() ||
      predictedDisparity.height() != sparseDepth.height()) {
    throw Error(ErrorCode::ShapeMismatch, "predicted disparity and sparse depth differ in shape");
  }
  const auto pv = predictedDisparity.values();
  const auto pm = predictedDisparity.mask();
  const auto gv = sparseDepth.values();
  const auto gm = sparseDepth.mask();

  // Normal equations of min sum (a * p + b - 1 / g)^2, accumulated around the
  // mean of p so constant-disparity detection is not swamped by cancellation.
  std::size_t n = 0;
  double meanP = 0.0;
  double meanT = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pm[i] == 0 || gm[i] == 0) continue;
    ++n;
    meanP += pv[i];
    meanT += 1.0 / gv[i];
  }
  if (n < 2) {
    throw Error(ErrorCode::InsufficientOverlap,
                "alignment needs at least 2 overlapping valid pixels, found " + std::to_string(n));
  }
  meanP /= static_cast<double>(n);
  meanT /= static_cast<double>(n);
  double spp = 0.0;
  double spt = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pm[i] == 0 || gm[i] == 0) continue;
    const double dp = pv[i] - meanP;
    spp += dp * dp;
    spt += dp * (1.0 / gv[i] - meanT);
  }
  if (!(spp > 1e-24 * static_cast<double>(n) * std::max(1.0, meanP * meanP))) {
    throw Error(ErrorCode::SingularSystem, "predicted disparity is constant over the overlap");
  }
  ScaleShift out;
  out.scale = spt / spp;
  out.shift = meanT - out.scale * meanP;
  out.pixels = n;
  return out;
}

InfillResult infill(const DepthMap& sparse, const DepthMap& predictedDisparity) {
  if (predictedDisparity.width() != sparse.width() ||
      predictedDisparity.height() != sparse.height()) {
    throw Error(ErrorCode::ShapeMismatch, "predicted disparity and sparse depth differ in shape");
  }
  InfillResult result;
  if (sparse.fullyValid()) {
    result.depth = sparse;
    return result;
  }
  result.alignment = alignScaleShift(predictedDisparity, sparse);
  const auto sv = sparse.values();
  const auto sm = sparse.mask();
  const auto pv = predictedDisparity.values();
  const auto pm = predictedDisparity.mask();
  std::vector<double> out(sv.begin(), sv.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (sm[i] != 0) continue;
    if (pm[i] == 0) {
      throw Error(ErrorCode::InsufficientOverlap,
                  "predicted disparity is invalid at hole pixel " + std::to_string(i));
    }
    const double disparity = result.alignment.scale * pv[i] + result.alignment.shift;
    double depth = disparity > 0.0 ? 1.0 / disparity : 0.0;
    if (!(depth >= kInfillDepthFloor) || !std::isfinite(depth)) {
      depth = kInfillDepthFloor;
      ++result.clamped;
    }
    out[i] = depth;
    ++result.filled;
  }
  result.depth = DepthMap(sparse.width(), sparse.height(), std::move(out));
  return result;
}

DepthMap downsample(const DepthMap& d, int factor) {
  if (factor < 1) {
    throw Error(ErrorCode::InvalidArgument, "downsample factor must be >= 1");
  }
  if (factor == 1) return d;
  const int w = (d.width() + factor - 1) / factor;
  const int h = (d.height() + factor - 1) / factor;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  values.reserve(static_cast<std::size_t>(w) * h);
  mask.reserve(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      values.push_back(d.at(x * factor, y * factor));
      mask.push_back(d.valid(x * factor, y * factor) ? 1 : 0);
    }
  }
  return DepthMap(w, h, std::move(values), std::move(mask));
}

}  // namespace condkit
