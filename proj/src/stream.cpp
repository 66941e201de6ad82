#include "condkit/stream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace condkit {

std::string PairSample::id() const {
  return shardId + "/" + scene->sceneId + ":" + std::to_string(input) + ":" + std::to_string(target);
}

ScenePairSampler::ScenePairSampler(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  }
}

std::vector<PairSample> ScenePairSampler::sample(const std::shared_ptr<const SceneRecord>& scene,
                                                 const std::string& shardId) {
  const auto n = static_cast<std::uint64_t>(scene->views.size());
  const std::uint64_t available = n < 2 ? 0 : n * (n - 1);
  std::poisson_distribution<std::uint64_t> poisson(rate_);
  const std::uint64_t count = std::min<std::uint64_t>(poisson(rng_), available);

  // Floyd's algorithm: `count` distinct indices of [0, available).
  std::vector<std::uint64_t> chosen;
  chosen.reserve(count);
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t j = available - count; j < available; ++j) {
    const std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, j)(rng_);
    if (seen.insert(t).second) {
      chosen.push_back(t);
    } else {
      seen.insert(j);
      chosen.push_back(j);
    }
  }
  std::shuffle(chosen.begin(), chosen.end(), rng_);

  std::vector<PairSample> out;
  out.reserve(chosen.size());
  for (const std::uint64_t p : chosen) {
    const auto i = static_cast<int>(p / (n - 1));
    const auto r = static_cast<int>(p % (n - 1));
    out.push_back({scene, shardId, i, r < i ? r : r + 1});
  }
  return out;
}

std::uint64_t shardSeed(std::uint64_t seed, const std::string& shardId) {
  // FNV-1a over the id, mixed with the run seed through splitmix64.
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : shardId) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

ShardPairStream::ShardPairStream(std::vector<std::filesystem::path> shards, double rate,
                                 std::uint64_t seed)
    : shards_(std::move(shards)), rate_(rate), seed_(seed) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  }
}

bool ShardPairStream::openNextShard() {
  if (shardIndex_ >= shards_.size()) return false;
  const auto& path = shards_[shardIndex_++];
  reader_.emplace(path);
  readerBytesCounted_ = 0;
  shardId_ = defaultShardId(path);
  sampler_.emplace(rate_, shardSeed(seed_ + epoch_, shardId_));
  return true;
}

std::optional<PairSample> ShardPairStream::next() {
  while (pending_.empty()) {
    if (!reader_ && !openNextShard()) return std::nullopt;
    auto result = reader_->next();
    bytesRead_ += reader_->bytesRead() - readerBytesCounted_;
    readerBytesCounted_ = reader_->bytesRead();
    if (!result) {
      reader_.reset();
      continue;
    }
    ++scenesVisited_;
    if (result->error) {
      failures_.push_back({shardId_, result->sceneId, *result->error});
      continue;
    }
    for (auto& s : sampler_->sample(result->scene, shardId_)) pending_.push_back(std::move(s));
  }
  PairSample s = std::move(pending_.front());
  pending_.pop_front();
  return s;
}

void ShardPairStream::restart() {
  ++epoch_;
  shardIndex_ = 0;
  reader_.reset();
  pending_.clear();
}

std::unique_ptr<ShardPairStream> streamShard(const std::filesystem::path& shard, double rate,
                                             std::uint64_t seed) {
  return std::make_unique<ShardPairStream>(std::vector<std::filesystem::path>{shard}, rate, seed);
}

MixedStream::MixedStream(std::vector<std::unique_ptr<PairStream>> streams,
                         std::vector<double> weights, std::uint64_t seed, bool restartExhausted)
    : streams_(std::move(streams)),
      weights_(std::move(weights)),
      exhausted_(streams_.size(), false),
      counts_(streams_.size(), 0),
      polls_(streams_.size(), 0),
      restartExhausted_(restartExhausted),
      rng_(seed) {
  if (streams_.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one stream");
  if (weights_.size() != streams_.size()) {
    throw Error(ErrorCode::InvalidArgument, "mixture needs one weight per stream");
  }
  double sum = 0.0;
  for (const double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "mixture weights must be non-negative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
  }
  rebuildDistribution();
}

void MixedStream::rebuildDistribution() {
  std::vector<double> live(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) live[i] = exhausted_[i] ? 0.0 : weights_[i];
  pick_ = std::discrete_distribution<std::size_t>(live.begin(), live.end());
}

std::optional<PairSample> MixedStream::next() {
  for (;;) {
    bool anyLive = false;
    for (std::size_t i = 0; i < weights_.size(); ++i) anyLive |= !exhausted_[i] && weights_[i] > 0.0;
    if (!anyLive) return std::nullopt;

    const std::size_t s = pick_(rng_);
    ++polls_[s];
    auto sample = streams_[s]->next();
    if (!sample && restartExhausted_) {
      streams_[s]->restart();
      sample = streams_[s]->next();
      if (!sample) {
        throw Error(ErrorCode::EmptyScene,
                    "mixture stream " + std::to_string(s) + " yields no samples");
      }
    }
    if (sample) {
      ++counts_[s];
      return sample;
    }
    exhausted_[s] = true;
    rebuildDistribution();
  }
}

void MixedStream::restart() {
  for (auto& s : streams_) s->restart();
  std::fill(exhausted_.begin(), exhausted_.end(), false);
  rebuildDistribution();
}

std::vector<StreamFailure> MixedStream::failures() const {
  std::vector<StreamFailure> out;
  for (const auto& s : streams_) {
    auto f = s->failures();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

ParallelPairStream::ParallelPairStream(std::vector<std::filesystem::path> shards, double rate,
                                       std::uint64_t seed, ParallelOptions options)
    : shards_(std::move(shards)), rate_(rate), seed_(seed), options_(options) {
  if (options_.workers == 0) throw Error(ErrorCode::InvalidArgument, "workers must be >= 1");
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  }
  start();
}

ParallelPairStream::~ParallelPairStream() { stop(); }

void ParallelPairStream::start() {
  queue_ = std::make_unique<BoundedQueue<Batch>>(options_.queuedScenes);
  nextShard_ = 0;
  stopping_ = false;
  const std::size_t n = std::min(options_.workers, std::max<std::size_t>(shards_.size(), 1));
  running_ = n;
  for (std::size_t i = 0; i < n; ++i) threads_.emplace_back([this] { work(); });
}

void ParallelPairStream::stop() {
  stopping_ = true;
  if (queue_) queue_->close();
  for (auto& t : threads_) t.join();
  threads_.clear();
}

void ParallelPairStream::work() {
  for (;;) {
    if (stopping_) break;
    const std::size_t idx = nextShard_.fetch_add(1);
    if (idx >= shards_.size()) break;
    const auto& path = shards_[idx];
    const std::string shardId = defaultShardId(path);
    try {
      ShardReader reader(path);
      ScenePairSampler sampler(rate_, shardSeed(seed_, shardId));
      std::uint64_t counted = 0;
      while (auto result = reader.next()) {
        bytesRead_ += reader.bytesRead() - counted;
        counted = reader.bytesRead();
        scenesVisited_.fetch_add(1);
        if (result->error) {
          const std::lock_guard lock(failuresMutex_);
          failures_.push_back({shardId, result->sceneId, *result->error});
          continue;
        }
        Batch batch{sampler.sample(result->scene, shardId)};
        result->scene.reset();
        if (batch.samples.empty()) continue;
        if (!queue_->push(std::move(batch))) return;
      }
      bytesRead_ += reader.bytesRead() - counted;
    } catch (const Error& e) {
      const std::lock_guard lock(failuresMutex_);
      failures_.push_back({shardId, {}, Error(e.code(), "shard " + shardId + ": " + e.what())});
    } catch (const std::exception& e) {
      const std::lock_guard lock(failuresMutex_);
      failures_.push_back({shardId, {}, Error(ErrorCode::IoFailure, "shard " + shardId + ": " + e.what())});
    }
  }
  if (running_.fetch_sub(1) == 1) queue_->close();
}

std::optional<PairSample> ParallelPairStream::next() {
  while (current_.empty()) {
    auto batch = queue_->pop();
    if (!batch) return std::nullopt;
    for (auto& s : batch->samples) current_.push_back(std::move(s));
  }
  PairSample s = std::move(current_.front());
  current_.pop_front();
  return s;
}

void ParallelPairStream::restart() {
  stop();
  current_.clear();
  ++seed_;
  start();
}

std::vector<StreamFailure> ParallelPairStream::failures() const {
  const std::lock_guard lock(failuresMutex_);
  return failures_;
}

}  // namespace condkit
