#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "condkit/error.hpp"
#include "condkit/image.hpp"
#include "condkit/metrics.hpp"
#include "support.hpp"

using namespace condkit;
using namespace testsupport;

namespace {

Image uniform(int w, int h, double v) { return Image(w, h, std::vector<double>(static_cast<std::size_t>(w * h * 3), v)); }

Image randomImage(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(w * h * 3));
  for (double& x : d) x = u(rng);
  return Image(w, h, d);
}

std::vector<std::pair<std::string, double>> goldens() {
  std::ifstream in(dataDir() / "ssim" / "golden.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<std::string, double>> out;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace

TEST(Psnr, UniformDifferenceIsTwentyDecibels) {
  EXPECT_NEAR(psnr(uniform(16, 16, 0.3), uniform(16, 16, 0.4)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(uniform(16, 16, 0.0), uniform(16, 16, 0.01)), 40.0, 1e-9);
}

TEST(Psnr, IdenticalIsInfinite) {
  std::mt19937_64 rng(30);
  const auto a = randomImage(rng, 8, 8);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, MatchesMseOracle) {
  std::mt19937_64 rng(31);
  const auto a = randomImage(rng, 9, 7);
  const auto b = randomImage(rng, 9, 7);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) mse += std::pow(a.data()[i] - b.data()[i], 2);
  mse /= static_cast<double>(a.data().size());
  EXPECT_NEAR(psnr(a, b), -10.0 * std::log10(mse), 1e-12);
}

TEST(Psnr, ShapeMismatch) {
  EXPECT_EQ(codeOf([] { psnr(uniform(4, 4, 0.1), uniform(4, 5, 0.1)); }), ErrorCode::ShapeMismatch);
}

TEST(Ssim, IdenticalIsOne) {
  std::mt19937_64 rng(32);
  const auto a = randomImage(rng, 20, 17);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-9);
}

TEST(Ssim, Symmetric) {
  std::mt19937_64 rng(33);
  const auto a = randomImage(rng, 16, 16);
  const auto b = randomImage(rng, 16, 16);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}

TEST(Ssim, TooSmall) {
  EXPECT_EQ(codeOf([] { ssim(uniform(10, 20, 0.5), uniform(10, 20, 0.5)); }), ErrorCode::TooSmall);
}

TEST(Ssim, MatchesGoldenValues) {
  const auto rows = goldens();
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& [name, expected] : rows) {
    const auto a = readImage(dataDir() / "ssim" / (name + "_a.png"));
    const auto b = readImage(dataDir() / "ssim" / (name + "_b.png"));
    EXPECT_NEAR(ssim(a, b), expected, 1e-4) << name;
  }
}

TEST(Lpips, ParsesLastNumber) {
  std::mt19937_64 rng(34);
  const auto a = randomImage(rng, 8, 8);
  EXPECT_DOUBLE_EQ(lpipsExternal(a, a, "echo loading 3 layers; echo lpips: 0.125"), 0.125);
  EXPECT_DOUBLE_EQ(lpipsExternal(a, a, "test -f {a} && test -f {b} && echo 0.5"), 0.5);
}

TEST(Lpips, Failures) {
  std::mt19937_64 rng(35);
  const auto a = randomImage(rng, 8, 8);
  EXPECT_EQ(codeOf([&] { lpipsExternal(a, a, "condkit-no-such-command-xyz {a} {b}"); }),
            ErrorCode::ExternalUnavailable);
  EXPECT_EQ(codeOf([&] { lpipsExternal(a, a, "echo no numbers here"); }), ErrorCode::ParseFailure);
  EXPECT_EQ(codeOf([&] { lpipsExternal(a, a, "exit 3"); }), ErrorCode::ExternalUnavailable);
}

TEST(Image, PngRoundTripIsExactAt8Bits) {
  std::vector<std::uint8_t> rgb(6 * 5 * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 7);
  const auto img = Image::fromRgb8(6, 5, rgb);
  const auto back = decodePng(encodePng(img));
  EXPECT_EQ(back.toRgb8(), rgb);
}

TEST(Image, CropResizePad) {
  std::mt19937_64 rng(36);
  const auto a = randomImage(rng, 10, 8);
  const auto c = cropImage(a, 2, 1, 4, 3);
  EXPECT_EQ(c.at(0, 0, 1), a.at(2, 1, 1));
  EXPECT_EQ(c.at(3, 2, 2), a.at(5, 3, 2));
  EXPECT_EQ(codeOf([&] { cropImage(a, 8, 0, 4, 3); }), ErrorCode::IndexOutOfRange);
  const auto r = resizeImage(uniform(8, 8, 0.25), 4, 4);
  EXPECT_NEAR(r.at(3, 3, 0), 0.25, 1e-12);
  const auto p = padImage(c, 6, 5, 1, 2);
  EXPECT_EQ(p.at(0, 0, 0), 0.0);
  EXPECT_EQ(p.at(1, 2, 1), c.at(0, 0, 1));
}
