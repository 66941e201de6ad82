#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <tuple>

#include "condkit/error.hpp"
#include "condkit/preprocess.hpp"
#include "support.hpp"

using namespace condkit;
using namespace testsupport;

TEST(CenterCrop, SquareImageUnchanged) {
  const Intrinsics in{300, 300, 128, 128, 256, 256};
  EXPECT_EQ(centerCrop(in, 256), in);
}

TEST(CenterCrop, LandscapeShiftsPrincipalPoint) {
  const Intrinsics in{500, 500, 320, 240, 640, 480};
  const auto out = centerCrop(in, 480);
  EXPECT_EQ(out.cx, 240.0);
  EXPECT_EQ(out.cy, 240.0);
  EXPECT_EQ(out.fx, 500.0);
  EXPECT_EQ(out.width, 480);
  EXPECT_EQ(out.height, 480);
  EXPECT_EQ(codeOf([&] { centerCrop(in, 481); }), ErrorCode::TargetTooLarge);
}

TEST(CenterCrop, PrincipalRayPreserved) {
  // The pixel the principal point lands on is the same scene ray.
  const Intrinsics in{420, 410, 300, 250, 640, 480};
  const auto win = centerCropWindow(in, 400);
  const auto out = centerCrop(in, 400);
  EXPECT_EQ(out.cx + win.x, in.cx);
  EXPECT_EQ(out.cy + win.y, in.cy);
}

TEST(Resize, ScalesEveryIntrinsic) {
  const Intrinsics in{500, 500, 240, 240, 480, 480};
  const auto out = resize(in, 256, 256);
  EXPECT_DOUBLE_EQ(out.fx, 500.0 * 256.0 / 480.0);
  EXPECT_DOUBLE_EQ(out.cx, 240.0 * 256.0 / 480.0);
  EXPECT_EQ(out.width, 256);
}

TEST(Fov, Examples) {
  EXPECT_NEAR(fovFromIntrinsics({128, 128, 128, 128, 256, 256}), kPi / 2, 1e-15);
  EXPECT_NEAR(fovFromIntrinsics({256, 256, 128, 128, 256, 256}), 2.0 * std::atan(0.5), 1e-15);
  EXPECT_NEAR(2.0 * std::atan(0.5), 0.9273, 1e-4);
  EXPECT_LT(fovFromIntrinsics({512, 512, 128, 128, 256, 256}), fovFromIntrinsics({256, 256, 128, 128, 256, 256}));
  EXPECT_EQ(codeOf([] { fovFromIntrinsics({256, 256, 160, 128, 320, 256}); }), ErrorCode::InvalidArgument);
}

TEST(Fov, CropThenResizeAgrees) {
  const Intrinsics in{500, 500, 320, 240, 640, 480};
  const auto cropped = centerCrop(in, 480);
  EXPECT_NEAR(fovFromIntrinsics(resize(cropped, 256, 256)), fovFromIntrinsics(cropped), 1e-14);
}

TEST(Letterbox, FitsAndCenters) {
  const Intrinsics in{800, 800, 800, 600, 1600, 1200};
  const auto lb = letterbox(in, 400, 300);
  EXPECT_DOUBLE_EQ(lb.scale, 0.25);
  EXPECT_EQ(lb.padX, 0);
  EXPECT_EQ(lb.padY, 0);
  const auto tall = letterbox({500, 500, 250, 500, 500, 1000}, 400, 300);
  EXPECT_EQ(tall.scaledHeight, 300);
  EXPECT_EQ(tall.scaledWidth, 150);
  EXPECT_EQ(tall.padX, 125);
  EXPECT_DOUBLE_EQ(tall.intrinsics.cx, 250 * 0.3 + 125);
}

TEST(Elevation, Examples) {
  EXPECT_NEAR(elevationFromPose(lookAt(Vec3(2, 0, 0), Vec3::Zero())), 0.0, 1e-15);
  EXPECT_NEAR(elevationFromPose(lookAt(Vec3(0, 0, 3), Vec3::Zero())), -kPi / 2, 1e-12);
  EXPECT_NEAR(elevationFromPose(lookAt(Vec3(0, 0, -3), Vec3::Zero())), kPi / 2, 1e-12);
}

TEST(Elevation, MatchesPlaneProjectionOracle) {
  std::mt19937_64 rng(40);
  for (int t = 0; t < 200; ++t) {
    const Pose p = randomPose(rng);
    const Vec3 f = p.forward();
    const Vec3 inPlane(f.x(), f.y(), 0.0);
    // Angle between f and its projection, signed by the vertical component.
    const double angle = std::atan2(f.z(), inPlane.norm());
    EXPECT_NEAR(elevationFromPose(p), angle, 1e-12);
  }
}

TEST(WorldScale, DefaultCandidates) {
  const auto c = defaultWorldScales();
  ASSERT_EQ(c.size(), 13u);
  const std::vector<double> listed = {.3, .4, .5, .6, .7, .8, .9, 1., 1.1, 1.2, 1.3, 1.4, 1.5};
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], listed[i], 1e-12);
}

TEST(WorldScale, Argmin) {
  const auto c = defaultWorldScales();
  EXPECT_NEAR(worldScaleGrid(c, [](double s) { return std::abs(s - 0.7); }), 0.7, 1e-12);
  EXPECT_NEAR(worldScaleGrid(c, [](double) { return 1.0; }), 0.3, 1e-12);
  EXPECT_EQ(codeOf([] { worldScaleGrid({}, [](double) { return 0.0; }); }), ErrorCode::EmptyCandidates);
}

TEST(Standardize, TiltedRingBecomesPlanar) {
  const Mat3 tilt = Eigen::AngleAxisd(0.6, Vec3(1, 2, 0.5).normalized()).toRotationMatrix();
  const Vec3 offset(3, -1, 2);
  std::vector<Pose> cams;
  for (int k = 0; k < 12; ++k) {
    const double a = 2 * kPi * k / 12;
    const Vec3 local(3 * std::cos(a), 2 * std::sin(a), 0.0);
    const Vec3 eye = tilt * local + offset;
    cams.push_back(lookAt(eye, offset, tilt.col(2)));
  }
  const auto s = standardizePoses(cams);
  Vec3 mean = Vec3::Zero();
  for (const auto& p : s.poses) {
    EXPECT_NEAR(p.center().z(), 0.0, 1e-6);
    mean += p.center();
  }
  EXPECT_LT(mean.norm() / 12, 1e-9);
  Vec3 up = Vec3::Zero();
  for (const auto& p : s.poses) up += p.up();
  EXPECT_GT(up.z(), 0.0);
  for (std::size_t k = 1; k < cams.size(); ++k) {
    EXPECT_LT((relativePose(cams[0], cams[k]).matrix() - relativePose(s.poses[0], s.poses[k]).matrix())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
  }
}

TEST(Standardize, InvariantToRigidPreTransform) {
  std::mt19937_64 rng(41);
  std::vector<Pose> cams;
  for (int k = 0; k < 8; ++k) cams.push_back(randomPose(rng));
  const Pose g = randomPose(rng, 5.0);
  std::vector<Pose> moved;
  for (const auto& c : cams) moved.push_back(compose(g, c));
  const auto a = standardizePoses(cams);
  const auto b = standardizePoses(moved);
  // Equal up to the sign of each principal axis.
  for (std::size_t k = 0; k < cams.size(); ++k) {
    const Vec3 ca = a.poses[k].center();
    const Vec3 cb = b.poses[k].center();
    EXPECT_LT((ca.cwiseAbs() - cb.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Standardize, Degenerate) {
  const std::vector<Pose> two = {Pose(), Pose(Mat3::Identity(), Vec3(1, 0, 0))};
  EXPECT_EQ(codeOf([&] { standardizePoses(two); }), ErrorCode::DegenerateConfiguration);
  std::vector<Pose> line;
  for (int k = 0; k < 5; ++k) line.push_back(Pose(Mat3::Identity(), Vec3(k, 2 * k, 0)));
  EXPECT_EQ(codeOf([&] { standardizePoses(line); }), ErrorCode::DegenerateConfiguration);
}

TEST(EvalScenes, MipNerf360Table) {
  std::ifstream in(std::filesystem::path(CONDKIT_SOURCE_DIR) / "docs" / "mipnerf360-scenes.csv");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "scene,input_view,content_scale");
  const std::vector<std::tuple<std::string, int, double>> expected = {
      {"bicycle", 98, 0.9}, {"bonsai", 204, 0.9}, {"counter", 95, 0.9}, {"garden", 63, 0.9},
      {"kitchen", 65, 0.9}, {"room", 151, 2.0},   {"stump", 34, 0.9}};
  for (const auto& [scene, view, scale] : expected) {
    ASSERT_TRUE(std::getline(in, line));
    std::istringstream row(line);
    std::string name, v, s;
    std::getline(row, name, ',');
    std::getline(row, v, ',');
    std::getline(row, s, ',');
    EXPECT_EQ(name, scene);
    EXPECT_EQ(std::stoi(v), view);
    EXPECT_EQ(std::stod(s), scale);
  }
  EXPECT_FALSE(std::getline(in, line));
}
