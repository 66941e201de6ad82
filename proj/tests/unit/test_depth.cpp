#include <gtest/gtest.h>

#include <numeric>

#include "condkit/depth.hpp"
#include "condkit/error.hpp"
#include "support.hpp"

using namespace condkit;
using namespace testsupport;

namespace {

DepthMap oneToHundred() {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  return DepthMap(10, 10, v);
}

}  // namespace

TEST(DepthMap, RejectsInvalidValidEntries) {
  EXPECT_EQ(codeOf([] { DepthMap(2, 1, {1.0, -1.0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(codeOf([] { DepthMap(2, 1, {1.0, std::nan("")}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(codeOf([] { DepthMap(2, 2, {1.0, 2.0}); }), ErrorCode::ShapeMismatch);
  // Invalid pixels may hold anything.
  EXPECT_NO_THROW(DepthMap(2, 1, {1.0, -5.0}, {1, 0}));
}

TEST(Quantile, ConstantMap) {
  const auto d = DepthMap::constant(4, 3, 3.0);
  for (double k : {0.0, 5.0, 20.0, 50.0, 100.0}) EXPECT_DOUBLE_EQ(quantile(d, k), 3.0);
}

TEST(Quantile, OneToHundredFifthPercentile) {
  // h = 99 * 0.05 = 4.95, between the 5th and 6th order statistics.
  EXPECT_NEAR(quantile(oneToHundred(), 5.0), 5.95, 1e-12);
}

TEST(Quantile, Extremes) {
  const auto d = oneToHundred();
  EXPECT_DOUBLE_EQ(quantile(d, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(d, 100.0), 100.0);
}

TEST(Quantile, IgnoresMaskedPixels) {
  const DepthMap d(3, 1, {100.0, 1.0, 3.0}, {0, 1, 1});
  EXPECT_DOUBLE_EQ(quantile(d, 50.0), 2.0);
}

TEST(Quantile, EmptyMapThrows) {
  const DepthMap d(2, 1, {1.0, 1.0}, {0, 0});
  EXPECT_EQ(codeOf([&] { quantile(d, 5.0); }), ErrorCode::EmptyDepth);
  EXPECT_EQ(codeOf([] { quantile(DepthMap::constant(2, 2, 1.0), 101.0); }), ErrorCode::InvalidArgument);
}

TEST(Quantile, NearestRank) {
  const auto d = oneToHundred();
  EXPECT_DOUBLE_EQ(quantile(d, 5.0, QuantileMethod::NearestRank), 5.0);
  EXPECT_DOUBLE_EQ(quantile(d, 0.0, QuantileMethod::NearestRank), 1.0);
  EXPECT_DOUBLE_EQ(quantile(d, 100.0, QuantileMethod::NearestRank), 100.0);
  EXPECT_DOUBLE_EQ(quantile(d, 20.5, QuantileMethod::NearestRank), 21.0);
}

TEST(Quantile, MatchesSortOracle) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> k(0.0, 100.0);
  for (int t = 0; t < 300; ++t) {
    const auto d = randomDepth(rng, 7, 5, 0.5);
    const double kk = k(rng);
    EXPECT_NEAR(quantile(d, kk), quantileOracle(validValues(d), kk), 1e-12);
  }
}

TEST(Quantile, MonotoneInK) {
  std::mt19937_64 rng(11);
  const auto d = randomDepth(rng, 9, 9, 0.7);
  double prev = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double q = quantile(d, k);
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Quantile, ScaleEquivariant) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const auto d = randomDepth(rng, 6, 6, 0.8);
    for (double lambda : {0.1, 3.0, 10.0}) {
      EXPECT_NEAR(quantile(d.scaled(lambda), 20.0), lambda * quantile(d, 20.0), 1e-12 * lambda);
    }
  }
}

TEST(SceneScaleAgg, Examples) {
  const std::vector<DepthMap> one = {DepthMap::constant(3, 3, 2.0)};
  EXPECT_DOUBLE_EQ(sceneScaleAgg(one), 2.0);
  const std::vector<DepthMap> three = {DepthMap::constant(3, 3, 1.0), DepthMap::constant(3, 3, 2.0),
                                       DepthMap::constant(3, 3, 3.0)};
  EXPECT_NEAR(sceneScaleAgg(three), 1.2, 1e-12);
}

TEST(SceneScaleAgg, AddingAMapChangesTheScale) {
  std::vector<DepthMap> maps = {DepthMap::constant(3, 3, 2.0), DepthMap::constant(3, 3, 4.0)};
  const double before = sceneScaleAgg(maps);
  maps.push_back(DepthMap::constant(3, 3, 0.5));
  EXPECT_NE(sceneScaleAgg(maps), before);
}

TEST(SceneScaleAgg, Errors) {
  EXPECT_EQ(codeOf([] { sceneScaleAgg(std::vector<DepthMap>{}); }), ErrorCode::EmptyScene);
  const std::vector<DepthMap> bad = {DepthMap::constant(2, 2, 1.0),
                                     DepthMap(2, 1, {1.0, 1.0}, {0, 0})};
  EXPECT_EQ(codeOf([&] { sceneScaleAgg(bad); }), ErrorCode::EmptyDepth);
}

TEST(SceneScaleAgg, MatchesNestedOracle) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 100; ++t) {
    std::vector<DepthMap> maps;
    std::vector<double> q5;
    for (int k = 0; k < 5; ++k) {
      maps.push_back(randomDepth(rng, 6, 5, 0.6));
      q5.push_back(quantileOracle(validValues(maps.back()), 5.0));
    }
    EXPECT_NEAR(sceneScaleAgg(maps), quantileOracle(q5, 10.0), 1e-12);
  }
}

TEST(ViewerScale, Examples) {
  EXPECT_DOUBLE_EQ(viewerScale(DepthMap::constant(4, 4, 0.7)), 0.7);
  EXPECT_DOUBLE_EQ(kDefaultViewerScale, 0.7);
  std::mt19937_64 rng(14);
  const auto d = randomDepth(rng, 8, 8, 1.0);
  EXPECT_EQ(viewerScale(d), quantile(d, 20.0));
}

TEST(ViewerScale, RequiresInfilledMap) {
  const DepthMap holes(2, 1, {1.0, 1.0}, {1, 0});
  EXPECT_EQ(codeOf([&] { viewerScale(holes); }), ErrorCode::NotInfilled);
  EXPECT_EQ(codeOf([] { viewerScale(DepthMap()); }), ErrorCode::EmptyDepth);
}

TEST(Align, ExactAffineDisparity) {
  std::mt19937_64 rng(15);
  const auto pred = randomDepth(rng, 6, 6, 1.0, 0.2, 2.0);
  std::vector<double> gt;
  for (double p : pred.values()) gt.push_back(1.0 / (2.0 * p + 0.1));
  const auto r = alignScaleShift(pred, DepthMap(6, 6, gt));
  EXPECT_NEAR(r.scale, 2.0, 1e-9);
  EXPECT_NEAR(r.shift, 0.1, 1e-9);
  EXPECT_EQ(r.pixels, 36u);
  EXPECT_FALSE(r.nonPositiveScale());
}

TEST(Align, Errors) {
  const auto pred = DepthMap(3, 1, {1.0, 2.0, 3.0});
  const DepthMap single(3, 1, {1.0, 1.0, 1.0}, {1, 0, 0});
  EXPECT_EQ(codeOf([&] { alignScaleShift(pred, single); }), ErrorCode::InsufficientOverlap);
  EXPECT_EQ(codeOf([&] { alignScaleShift(DepthMap::constant(3, 1, 2.0), DepthMap(3, 1, {1.0, 2.0, 3.0})); }),
            ErrorCode::SingularSystem);
  EXPECT_EQ(codeOf([&] { alignScaleShift(pred, DepthMap::constant(2, 1, 1.0)); }), ErrorCode::ShapeMismatch);
}

TEST(Align, ReportsNegativeScale) {
  const DepthMap pred(3, 1, {1.0, 2.0, 3.0});
  // Disparity decreasing in pred: 1/gt = -0.1 pred + 1.
  std::vector<double> gt;
  for (double p : pred.values()) gt.push_back(1.0 / (-0.1 * p + 1.0));
  const auto r = alignScaleShift(pred, DepthMap(3, 1, gt));
  EXPECT_TRUE(r.nonPositiveScale());
  EXPECT_NEAR(r.scale, -0.1, 1e-12);
}

TEST(Infill, FillsHoleWithExactValue) {
  const DepthMap pred(4, 1, {0.5, 1.0, 1.5, 2.0});
  std::vector<double> truth;
  for (double p : pred.values()) truth.push_back(1.0 / (3.0 * p + 0.25));
  std::vector<double> sparse = truth;
  sparse[2] = 0.0;
  const auto r = infill(DepthMap(4, 1, sparse, {1, 1, 0, 1}), pred);
  EXPECT_TRUE(r.depth.fullyValid());
  EXPECT_EQ(r.filled, 1u);
  EXPECT_EQ(r.clamped, 0u);
  EXPECT_NEAR(r.depth.at(2, 0), truth[2], 1e-12);
  for (int x : {0, 1, 3}) EXPECT_EQ(r.depth.at(x, 0), truth[static_cast<std::size_t>(x)]);
}

TEST(Infill, FullyValidInputUnchanged) {
  std::mt19937_64 rng(16);
  const auto d = randomDepth(rng, 5, 5, 1.0);
  const auto r = infill(d, randomDepth(rng, 5, 5, 1.0));
  EXPECT_EQ(r.filled, 0u);
  EXPECT_TRUE(std::equal(d.values().begin(), d.values().end(), r.depth.values().begin()));
}

TEST(Infill, ClampsNonPositiveDepths) {
  // Aligned disparity goes negative at the hole, so the depth is floored.
  const DepthMap pred(4, 1, {1.0, 2.0, 3.0, 30.0});
  std::vector<double> sparse;
  for (double p : {1.0, 2.0, 3.0}) sparse.push_back(1.0 / (-0.1 * p + 1.0));
  sparse.push_back(0.0);
  const auto r = infill(DepthMap(4, 1, sparse, {1, 1, 1, 0}), pred);
  EXPECT_EQ(r.clamped, 1u);
  EXPECT_TRUE(r.depth.fullyValid());
  EXPECT_GE(r.depth.at(3, 0), kInfillDepthFloor);
}

TEST(Downsample, KeepsTopLeftPixel) {
  std::vector<double> v(16);
  std::iota(v.begin(), v.end(), 1.0);
  std::vector<std::uint8_t> m(16, 1);
  m[2] = 0;
  const auto d = downsample(DepthMap(4, 4, v, m), 2);
  ASSERT_EQ(d.width(), 2);
  ASSERT_EQ(d.height(), 2);
  EXPECT_EQ(d.at(0, 0), 1.0);
  EXPECT_FALSE(d.valid(1, 0));
  EXPECT_EQ(d.at(0, 1), 9.0);
  EXPECT_EQ(d.at(1, 1), 11.0);
  EXPECT_EQ(codeOf([&] { downsample(d, 0); }), ErrorCode::InvalidArgument);
}
