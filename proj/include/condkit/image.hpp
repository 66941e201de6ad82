#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace condkit {

/// Interleaved RGB image with values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height);
  Image(int width, int height, std::vector<double> rgb);

  int width() const { return width_; }
  int height() const { return height_; }
  static constexpr int channels() { return 3; }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// 8-bit RGB samples divided by 255.
  static Image fromRgb8(int width, int height, std::span<const std::uint8_t> rgb);
  std::vector<std::uint8_t> toRgb8() const;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Pixels [x, x + width) x [y, y + height); throws IndexOutOfRange if the
/// window leaves the image.
Image cropImage(const Image& image, int x, int y, int width, int height);
/// Area-averaging resize.
Image resizeImage(const Image& image, int width, int height);
/// Places `image` at (x, y) on a black canvas of the given size.
Image padImage(const Image& image, int canvasWidth, int canvasHeight, int x, int y);

Image readImage(const std::filesystem::path& path);
void writePng(const Image& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encodePng(const Image& image);
Image decodePng(std::span<const std::uint8_t> bytes);

}  // namespace condkit
