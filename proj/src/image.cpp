#include "condkit/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "condkit/error.hpp"

namespace condkit {

Image::Image(int width, int height)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 0.0) {}

Image::Image(int width, int height, std::vector<double> rgb)
    : width_(width), height_(height), data_(std::move(rgb)) {
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw Error(ErrorCode::ShapeMismatch, "image buffer does not match its dimensions");
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "image values must be finite and in [0, 1]");
    }
  }
}

Image Image::fromRgb8(int width, int height, std::span<const std::uint8_t> rgb) {
  std::vector<double> data(rgb.size());
  std::transform(rgb.begin(), rgb.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return Image(width, height, std::move(data));
}

std::vector<std::uint8_t> Image::toRgb8() const {
  std::vector<std::uint8_t> out(data_.size());
  std::transform(data_.begin(), data_.end(), out.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  return out;
}

namespace {

Image fromMat(const cv::Mat& decoded, const std::string& what) {
  if (decoded.empty()) throw Error(ErrorCode::IoFailure, "cannot decode image " + what);
  cv::Mat rgb;
  if (decoded.channels() == 1) {
    cv::cvtColor(decoded, rgb, cv::COLOR_GRAY2RGB);
  } else if (decoded.channels() == 4) {
    cv::cvtColor(decoded, rgb, cv::COLOR_BGRA2RGB);
  } else {
    cv::cvtColor(decoded, rgb, cv::COLOR_BGR2RGB);
  }
  cv::Mat scaled;
  const double denom = rgb.depth() == CV_16U ? 65535.0 : 255.0;
  rgb.convertTo(scaled, CV_64FC3, 1.0 / denom);
  if (!scaled.isContinuous()) scaled = scaled.clone();
  const auto* p = scaled.ptr<double>();
  std::vector<double> data(p, p + static_cast<std::size_t>(scaled.total()) * 3);
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
  return Image(scaled.cols, scaled.rows, std::move(data));
}

cv::Mat toBgr8(const Image& image) {
  const auto rgb = image.toRgb8();
  cv::Mat m(image.height(), image.width(), CV_8UC3, const_cast<std::uint8_t*>(rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(m, bgr, cv::COLOR_RGB2BGR);
  return bgr;
}

cv::Mat toMat(const Image& image) {
  cv::Mat m(image.height(), image.width(), CV_64FC3);
  std::copy(image.data().begin(), image.data().end(), m.ptr<double>());
  return m;
}

Image fromDoubleMat(const cv::Mat& m) {
  const cv::Mat c = m.isContinuous() ? m : m.clone();
  const auto* p = c.ptr<double>();
  std::vector<double> data(p, p + static_cast<std::size_t>(c.total()) * 3);
  for (double& v : data) v = std::clamp(v, 0.0, 1.0);
  return Image(c.cols, c.rows, std::move(data));
}

}  // namespace

Image cropImage(const Image& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width <= 0 || height <= 0 || x + width > image.width() ||
      y + height > image.height()) {
    throw Error(ErrorCode::IndexOutOfRange, "crop window outside the image");
  }
  Image out(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int k = 0; k < 3; ++k) out.at(c, r, k) = image.at(x + c, y + r, k);
    }
  }
  return out;
}

Image resizeImage(const Image& image, int width, int height) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "resize target must be positive");
  if (width == image.width() && height == image.height()) return image;
  cv::Mat out;
  cv::resize(toMat(image), out, cv::Size(width, height), 0, 0, cv::INTER_AREA);
  return fromDoubleMat(out);
}

Image padImage(const Image& image, int canvasWidth, int canvasHeight, int x, int y) {
  if (x < 0 || y < 0 || x + image.width() > canvasWidth || y + image.height() > canvasHeight) {
    throw Error(ErrorCode::IndexOutOfRange, "image does not fit on the canvas");
  }
  Image out(canvasWidth, canvasHeight);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      for (int k = 0; k < 3; ++k) out.at(x + c, y + r, k) = image.at(c, r, k);
    }
  }
  return out;
}

Image readImage(const std::filesystem::path& path) {
  return fromMat(cv::imread(path.string(), cv::IMREAD_UNCHANGED), path.string());
}

void writePng(const Image& image, const std::filesystem::path& path) {
  if (!cv::imwrite(path.string(), toBgr8(image))) {
    throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  }
}

std::vector<std::uint8_t> encodePng(const Image& image) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", toBgr8(image), out)) {
    throw Error(ErrorCode::IoFailure, "PNG encoding failed");
  }
  return out;
}

Image decodePng(std::span<const std::uint8_t> bytes) {
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                    const_cast<std::uint8_t*>(bytes.data()));
  return fromMat(cv::imdecode(buf, cv::IMREAD_UNCHANGED), "from memory");
}

}  // namespace condkit
