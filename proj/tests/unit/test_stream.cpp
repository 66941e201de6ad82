#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "condkit/error.hpp"
#include "condkit/stream.hpp"
#include "condkit/tar.hpp"
#include "support.hpp"

using namespace condkit;
using namespace testsupport;

namespace {

// Writes `count` shards of `scenes` ring scenes each and returns their paths.
std::vector<std::filesystem::path> makeShards(const TempDir& dir, int count, int scenes, int views = 4,
                                              int depthSize = 4) {
  std::vector<std::filesystem::path> out;
  for (int s = 0; s < count; ++s) {
    std::vector<SceneRecord> recs;
    for (int k = 0; k < scenes; ++k) {
      recs.push_back(ringScene("sc" + std::to_string(s) + "_" + std::to_string(k), views,
                               static_cast<std::uint64_t>(s * 1000 + k), depthSize));
    }
    out.push_back(dir / ("part-" + std::to_string(s) + ".tar"));
    writeShard(recs, out.back());
  }
  return out;
}

std::vector<std::string> drain(PairStream& s) {
  std::vector<std::string> ids;
  while (auto p = s.next()) ids.push_back(p->id());
  return ids;
}

// Stream that yields `n` synthetic samples per epoch.
class CountingStream : public PairStream {
 public:
  CountingStream(std::string tag, std::size_t n) : tag_(std::move(tag)), n_(n) {
    scene_ = std::make_shared<SceneRecord>(ringScene(tag_, 2, 1, 0));
  }
  std::optional<PairSample> next() override {
    if (emitted_ >= n_) return std::nullopt;
    ++emitted_;
    return PairSample{scene_, tag_, 0, 1};
  }
  void restart() override {
    emitted_ = 0;
    ++restarts;
  }
  std::vector<StreamFailure> failures() const override { return {}; }
  int restarts = 0;

 private:
  std::string tag_;
  std::size_t n_;
  std::size_t emitted_ = 0;
  std::shared_ptr<const SceneRecord> scene_;
};

}  // namespace

TEST(Sampler, TwoViewsYieldOneOfTheTwoPairs) {
  auto scene = std::make_shared<const SceneRecord>(ringScene("two", 2, 1, 0));
  ScenePairSampler sampler(1e6, 7);
  for (int t = 0; t < 20; ++t) {
    const auto pairs = sampler.sample(scene, "s");
    ASSERT_EQ(pairs.size(), 2u);  // capped at n (n - 1)
    EXPECT_NE(pairs[0].input, pairs[0].target);
  }
}

TEST(Sampler, PairsAreDistinctValidAndCapped) {
  auto scene = std::make_shared<const SceneRecord>(ringScene("five", 5, 2, 0));
  ScenePairSampler sampler(12.0, 8);
  for (int t = 0; t < 200; ++t) {
    const auto pairs = sampler.sample(scene, "s");
    EXPECT_LE(pairs.size(), 20u);
    std::set<std::pair<int, int>> seen;
    for (const auto& p : pairs) {
      EXPECT_NE(p.input, p.target);
      EXPECT_GE(p.input, 0);
      EXPECT_LT(p.target, 5);
      EXPECT_EQ(p.scene.get(), scene.get());
      EXPECT_TRUE(seen.emplace(p.input, p.target).second);
    }
  }
}

TEST(Sampler, MeanMatchesRate) {
  auto scene = std::make_shared<const SceneRecord>(ringScene("many", 10, 3, 0));
  ScenePairSampler sampler(4.0, 9);
  double total = 0;
  const int n = 5000;
  for (int t = 0; t < n; ++t) total += static_cast<double>(sampler.sample(scene, "s").size());
  EXPECT_NEAR(total / n, 4.0, 0.1);
}

TEST(Sampler, PairsAreUniform) {
  // With 3 views there are 6 ordered pairs; draw one at a time.
  auto scene = std::make_shared<const SceneRecord>(ringScene("three", 3, 4, 0));
  ScenePairSampler sampler(1.0, 10);
  std::map<std::pair<int, int>, int> counts;
  int draws = 0;
  for (int t = 0; t < 30000; ++t) {
    for (const auto& p : sampler.sample(scene, "s")) {
      ++counts[{p.input, p.target}];
      ++draws;
    }
  }
  ASSERT_EQ(counts.size(), 6u);
  // Each pair is equally likely given the number drawn.
  for (const auto& [pair, c] : counts) EXPECT_NEAR(c / static_cast<double>(draws), 1.0 / 6.0, 0.01);
}

TEST(Sampler, RejectsBadRate) {
  EXPECT_EQ(codeOf([] { ScenePairSampler(0.0, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(codeOf([] { ScenePairSampler(-1.0, 1); }), ErrorCode::InvalidArgument);
}

TEST(ShardStream, DeterministicUnderSeed) {
  TempDir dir("det");
  const auto shards = makeShards(dir, 2, 10);
  ShardPairStream a(shards, 2.0, 42);
  ShardPairStream b(shards, 2.0, 42);
  const auto ia = drain(a);
  EXPECT_EQ(ia, drain(b));
  EXPECT_FALSE(ia.empty());
  ShardPairStream c(shards, 2.0, 43);
  EXPECT_NE(ia, drain(c));
  EXPECT_EQ(a.scenesVisited(), 20u);
}

TEST(ShardStream, RestartBeginsANewEpoch) {
  TempDir dir("restart");
  const auto shards = makeShards(dir, 1, 30);
  ShardPairStream s(shards, 3.0, 5);
  const auto first = drain(s);
  s.restart();
  const auto second = drain(s);
  EXPECT_EQ(s.epoch(), 1u);
  EXPECT_FALSE(second.empty());
  EXPECT_NE(first, second);
}

TEST(ShardStream, ZeroShardsIsEmpty) {
  ShardPairStream s({}, 1.0, 1);
  EXPECT_FALSE(s.next());
  ParallelPairStream p({}, 1.0, 1, {4, 2});
  EXPECT_FALSE(p.next());
}

TEST(ShardStream, CorruptSceneSkippedAndRecorded) {
  TempDir dir("skip");
  const auto shards = makeShards(dir, 1, 3);
  // Damage the second scene's poses.bin payload.
  TarReader r(shards[0]);
  std::uint64_t offset = 0;
  while (auto e = r.next(false)) {
    if (e->name == "sc0_1/poses.bin") offset = e->headerOffset + 512;
  }
  {
    std::fstream f(shards[0], std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(offset + 4));
    f.put('\x7f');
  }
  ShardPairStream s(shards, 50.0, 1);
  const auto ids = drain(s);
  for (const auto& id : ids) EXPECT_EQ(id.find("sc0_1:"), std::string::npos);
  ASSERT_EQ(s.failures().size(), 1u);
  EXPECT_EQ(s.failures()[0].sceneId, "sc0_1");
  EXPECT_EQ(s.failures()[0].shardId, "part-0");
  EXPECT_EQ(ids.size(), 24u);
}

TEST(ShardStream, TruncatedShardIsTerminal) {
  TempDir dir("trunc");
  const auto shards = makeShards(dir, 1, 5);
  std::filesystem::resize_file(shards[0], std::filesystem::file_size(shards[0]) / 2);
  ShardPairStream s(shards, 1.0, 1);
  EXPECT_EQ(codeOf([&] { drain(s); }), ErrorCode::IoFailure);
}

TEST(ParallelStream, SameMultisetForAnyWorkerCount) {
  TempDir dir("par");
  const auto shards = makeShards(dir, 5, 12);
  ShardPairStream serial(shards, 3.0, 11);
  auto expected = drain(serial);
  for (std::size_t workers : {1u, 2u, 4u}) {
    ParallelPairStream p(shards, 3.0, 11, {workers, 2});
    auto got = drain(p);
    if (workers == 1) EXPECT_EQ(got, expected);
    std::sort(got.begin(), got.end());
    auto sortedExpected = expected;
    std::sort(sortedExpected.begin(), sortedExpected.end());
    EXPECT_EQ(got, sortedExpected) << workers << " workers";
  }
}

TEST(ParallelStream, ResidencyStaysWithinBudget) {
  TempDir dir("mem");
  const auto shards = makeShards(dir, 4, 40);
  const ParallelOptions opts{3, 2};
  resetResidencyPeak();
  ASSERT_EQ(sceneResidency().liveScenes, 0u);
  {
    ParallelPairStream p(shards, 2.0, 3, opts);
    while (auto s = p.next()) {
    }
  }
  const auto r = sceneResidency();
  EXPECT_EQ(r.liveScenes, 0u);
  EXPECT_LE(r.peakScenes, opts.workers + opts.queuedScenes + 1);
}

TEST(ParallelStream, FailedShardReportedOthersContinue) {
  TempDir dir("parfail");
  auto shards = makeShards(dir, 3, 4);
  std::filesystem::resize_file(shards[1], 700);
  ParallelPairStream p(shards, 2.0, 1, {2, 2});
  const auto ids = drain(p);
  EXPECT_FALSE(ids.empty());
  bool sawShard1 = false;
  for (const auto& f : p.failures()) sawShard1 |= f.shardId == "part-1";
  EXPECT_TRUE(sawShard1);
}

TEST(MixedStream, WeightsValidated) {
  std::vector<std::unique_ptr<PairStream>> s;
  s.push_back(std::make_unique<CountingStream>("a", 5));
  s.push_back(std::make_unique<CountingStream>("b", 5));
  EXPECT_EQ(codeOf([&] { MixedStream(std::move(s), {0.5, 0.6}, 1); }), ErrorCode::InvalidArgument);
}

TEST(MixedStream, UniformCountsWithinThreeSigma) {
  std::vector<std::unique_ptr<PairStream>> s;
  for (const char* tag : {"a", "b", "c"}) s.push_back(std::make_unique<CountingStream>(tag, 7));
  MixedStream m(std::move(s), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 99);
  for (int i = 0; i < 30000; ++i) ASSERT_TRUE(m.next());
  const double sigma = std::sqrt(30000.0 * (1.0 / 3) * (2.0 / 3));
  for (auto c : m.counts()) EXPECT_NEAR(static_cast<double>(c), 10000.0, 3 * sigma);
}

TEST(MixedStream, ZeroWeightNeverPolled) {
  std::vector<std::unique_ptr<PairStream>> s;
  s.push_back(std::make_unique<CountingStream>("a", 3));
  s.push_back(std::make_unique<CountingStream>("b", 3));
  MixedStream m(std::move(s), {1.0, 0.0}, 1);
  for (int i = 0; i < 100; ++i) ASSERT_TRUE(m.next());
  EXPECT_EQ(m.polls()[1], 0u);
}

TEST(MixedStream, SingleStreamPassthroughAndOneEpoch) {
  std::vector<std::unique_ptr<PairStream>> s;
  s.push_back(std::make_unique<CountingStream>("a", 4));
  MixedStream m(std::move(s), {1.0}, 1, false);
  int n = 0;
  while (auto p = m.next()) {
    EXPECT_EQ(p->shardId, "a");
    ++n;
  }
  EXPECT_EQ(n, 4);
}

TEST(MixedStream, RestartsExhaustedStreams) {
  std::vector<std::unique_ptr<PairStream>> s;
  auto owned = std::make_unique<CountingStream>("a", 2);
  auto* raw = owned.get();
  s.push_back(std::move(owned));
  MixedStream m(std::move(s), {1.0}, 1);
  for (int i = 0; i < 9; ++i) ASSERT_TRUE(m.next());
  EXPECT_EQ(raw->restarts, 4);
}

TEST(MixedStream, StreamThatNeverYieldsIsAnError) {
  std::vector<std::unique_ptr<PairStream>> s;
  s.push_back(std::make_unique<CountingStream>("a", 0));
  MixedStream m(std::move(s), {1.0}, 1);
  EXPECT_EQ(codeOf([&] { m.next(); }), ErrorCode::EmptyScene);
}

TEST(PairSample, IdFormat) {
  auto scene = std::make_shared<const SceneRecord>(ringScene("room", 3, 1, 0));
  const PairSample p{scene, "train-0", 2, 0};
  EXPECT_EQ(p.id(), "train-0/room:2:0");
}
