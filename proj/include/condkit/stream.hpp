#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "condkit/shard.hpp"

namespace condkit {

/// An ordered (input, target) view pair from one scene. The scene record is
/// shared and immutable, so samples can be handed across threads.
struct PairSample {
  std::shared_ptr<const SceneRecord> scene;
  std::string shardId;
  int input = 0;
  int target = 0;

  const std::string& sceneId() const { return scene->sceneId; }
  const ViewRecord& inputView() const { return scene->views[static_cast<std::size_t>(input)]; }
  const ViewRecord& targetView() const { return scene->views[static_cast<std::size_t>(target)]; }
  SceneView sceneView() const { return scene->sceneView(input, target); }

  /// "<shard>/<scene>:<input>:<target>"
  std::string id() const;
};

/// Draws the pairs emitted for one scene: min(Poisson(rate), n (n - 1))
/// distinct ordered pairs, uniformly without replacement.
class ScenePairSampler {
 public:
  ScenePairSampler(double rate, std::uint64_t seed);

  std::vector<PairSample> sample(const std::shared_ptr<const SceneRecord>& scene,
                                 const std::string& shardId);

  double rate() const { return rate_; }

 private:
  double rate_;
  std::mt19937_64 rng_;
};

/// Seed of the sampler for a shard; depends only on the run seed and the
/// shard id, so the pairs drawn from a shard do not depend on scheduling.
std::uint64_t shardSeed(std::uint64_t seed, const std::string& shardId);

struct StreamFailure {
  std::string shardId;
  std::string sceneId;  // empty for shard-level failures
  Error error;
};

/// Pull-based stream of pair samples. next() returns nullopt when the epoch
/// ends and throws on terminal errors.
class PairStream {
 public:
  virtual ~PairStream() = default;
  virtual std::optional<PairSample> next() = 0;
  /// Starts a new epoch over the same data.
  virtual void restart() = 0;
  /// Scenes skipped because they were unreadable, and failed shards.
  virtual std::vector<StreamFailure> failures() const = 0;
};

/// Streams the given shards one after another on the calling thread. An
/// unreadable scene is skipped and recorded; an I/O or structural failure
/// of the archive is terminal and rethrown from next().
class ShardPairStream : public PairStream {
 public:
  ShardPairStream(std::vector<std::filesystem::path> shards, double rate, std::uint64_t seed);

  std::optional<PairSample> next() override;
  void restart() override;
  std::vector<StreamFailure> failures() const override { return failures_; }

  std::size_t scenesVisited() const { return scenesVisited_; }
  std::uint64_t bytesRead() const { return bytesRead_; }
  std::size_t epoch() const { return epoch_; }

 private:
  bool openNextShard();

  std::vector<std::filesystem::path> shards_;
  double rate_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t shardIndex_ = 0;
  std::optional<ShardReader> reader_;
  std::string shardId_;
  std::optional<ScenePairSampler> sampler_;
  std::deque<PairSample> pending_;
  std::vector<StreamFailure> failures_;
  std::size_t scenesVisited_ = 0;
  std::uint64_t bytesRead_ = 0;
  std::uint64_t readerBytesCounted_ = 0;
};

std::unique_ptr<ShardPairStream> streamShard(const std::filesystem::path& shard, double rate,
                                             std::uint64_t seed);

/// Weighted random mixture of streams. In restarting mode (the default) an
/// exhausted stream is restarted so the mixture never runs dry; a stream that
/// produces nothing even after a restart is an error. In one-epoch mode an
/// exhausted stream drops out and the mixture ends when all have.
class MixedStream : public PairStream {
 public:
  MixedStream(std::vector<std::unique_ptr<PairStream>> streams, std::vector<double> weights,
              std::uint64_t seed, bool restartExhausted = true);

  std::optional<PairSample> next() override;
  void restart() override;
  std::vector<StreamFailure> failures() const override;

  /// Samples emitted per stream, and how often each stream was polled.
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<std::size_t>& polls() const { return polls_; }

 private:
  void rebuildDistribution();

  std::vector<std::unique_ptr<PairStream>> streams_;
  std::vector<double> weights_;
  std::vector<bool> exhausted_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> polls_;
  bool restartExhausted_;
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> pick_;
};

/// Fixed-capacity blocking queue; close() wakes everyone and makes pop()
/// drain then return nullopt.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  bool push(T value) {
    std::unique_lock lock(mutex_);
    notFull_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    notEmpty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    notEmpty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    notFull_.notify_one();
    return v;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    notFull_.notify_all();
    notEmpty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable notFull_;
  std::condition_variable notEmpty_;
  std::deque<T> items_;
  bool closed_ = false;
};

struct ParallelOptions {
  std::size_t workers = 1;
  /// Scenes that may wait in the hand-off queue between readers and consumer.
  std::size_t queuedScenes = 4;
};

/// Streams shards on `workers` reader threads. Each reader owns one shard at
/// a time and hands whole scenes' pairs to the consumer through a bounded
/// queue, so at most workers + queuedScenes + 1 scenes are resident. A failed
/// shard is recorded with its id and the remaining shards continue.
class ParallelPairStream : public PairStream {
 public:
  ParallelPairStream(std::vector<std::filesystem::path> shards, double rate, std::uint64_t seed,
                     ParallelOptions options = {});
  ~ParallelPairStream() override;

  std::optional<PairSample> next() override;
  void restart() override;
  std::vector<StreamFailure> failures() const override;

  std::uint64_t bytesRead() const { return bytesRead_.load(); }
  std::size_t scenesVisited() const { return scenesVisited_.load(); }

 private:
  struct Batch {
    std::vector<PairSample> samples;
  };

  void start();
  void stop();
  void work();

  std::vector<std::filesystem::path> shards_;
  double rate_;
  std::uint64_t seed_;
  ParallelOptions options_;

  std::unique_ptr<BoundedQueue<Batch>> queue_;
  std::vector<std::thread> threads_;
  std::atomic<std::size_t> nextShard_{0};
  std::atomic<std::size_t> running_{0};
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> bytesRead_{0};
  std::atomic<std::size_t> scenesVisited_{0};
  mutable std::mutex failuresMutex_;
  std::vector<StreamFailure> failures_;
  std::deque<PairSample> current_;
};

}  // namespace condkit
