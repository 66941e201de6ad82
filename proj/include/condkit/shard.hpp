#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "condkit/conditioning.hpp"
#include "condkit/depth.hpp"
#include "condkit/error.hpp"
#include "condkit/geometry.hpp"
#include "condkit/tar.hpp"

namespace condkit {

inline constexpr const char* kCameraToWorld = "camera_to_world";
inline constexpr int kShardFormatVersion = 1;

/// One view exactly as stored in a shard: float32 pose and depth planes, a
/// byte mask, and optional PNG bytes.
struct ViewRecord {
  std::array<float, 16> pose{};  // row-major 4x4, camera-to-world
  int depthWidth = 0;
  int depthHeight = 0;
  std::vector<float> depth;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> image;

  static ViewRecord fromPose(const Pose& pose);
  void setDepth(const DepthMap& d);

  Pose toPose() const;
  DepthMap toDepthMap() const;
  bool hasDepth() const { return !depth.empty(); }

  bool operator==(const ViewRecord&) const = default;
};

struct SceneRecord {
  std::string sceneId;
  double fov = kPi / 2;
  std::string source;
  std::string convention = kCameraToWorld;
  std::optional<double> contentScale;
  std::vector<ViewRecord> views;

  /// Throws InvalidScene naming the scene on any violated invariant.
  void validate() const;

  std::vector<Pose> poses() const;
  std::vector<DepthMap> depthMaps() const;
  SceneView sceneView(int inputIndex, int targetIndex) const;

  /// Bytes of pose, depth, mask and image payloads.
  std::size_t payloadBytes() const;

  bool operator==(const SceneRecord&) const = default;
};

struct PairConditioningOptions {
  QuantileMethod quantile = QuantileMethod::Linear;
  /// Depth maps are downsampled by this factor before any quantile is taken.
  int downsample = 4;
  /// Viewer scale for an input view that carries no depth.
  double viewerDefaultScale = kDefaultViewerScale;
  /// Replaces the viewer scale outright when set.
  std::optional<double> viewerScale;
};

/// Conditioning vector of the (input, target) pair of a stored scene. The
/// viewer variant needs the input view's depth to be fully valid (infilled)
/// or absent. Zero123 measures from the centroid of the camera centers.
ConditioningVector conditionPair(const SceneRecord& scene, int input, int target, Variant variant,
                                 const PairConditioningOptions& options = {});

struct ManifestEntry {
  std::string sceneId;
  std::uint64_t offset = 0;  // header offset of the scene's meta.json
  std::uint64_t size = 0;    // bytes through the end of its checksums.json
  std::uint32_t crc32 = 0;   // of checksums.json, which covers every other entry
  std::uint32_t views = 0;
};

struct ShardManifest {
  std::string shardId;
  std::string quantile = "linear";
  std::vector<ManifestEntry> scenes;
};

/// Streams scenes into a tar shard. The manifest is appended by finish().
class ShardWriter {
 public:
  ShardWriter(const std::filesystem::path& path, std::string shardId);
  void add(const SceneRecord& scene);
  ShardManifest finish();

 private:
  void put(const std::string& name, std::span<const std::uint8_t> data,
           std::vector<std::pair<std::string, std::uint32_t>>& sums);

  TarWriter tar_;
  ShardManifest manifest_;
  bool finished_ = false;
};

ShardManifest writeShard(const std::vector<SceneRecord>& scenes, const std::filesystem::path& path,
                         const std::string& shardId = {});

/// Outcome of reading one scene: the record, or the error that made it
/// unreadable (payload checksum mismatch or malformed content).
struct SceneResult {
  std::string sceneId;
  std::shared_ptr<const SceneRecord> scene;
  std::optional<Error> error;
  std::uint64_t bytes = 0;
};

/// Single-pass scene reader. One scene is resident at a time. Payload
/// damage is reported per scene and reading continues; structural damage
/// to the archive throws.
class ShardReader {
 public:
  explicit ShardReader(const std::filesystem::path& path);

  std::optional<SceneResult> next();

  /// Available once next() has returned nullopt.
  const std::optional<ShardManifest>& manifest() const { return manifest_; }
  std::uint64_t bytesRead() const { return tar_.bytesRead(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  TarReader tar_;
  std::optional<TarEntry> pending_;
  std::optional<ShardManifest> manifest_;
};

/// Reads every scene; throws on the first damaged one.
std::vector<SceneRecord> readShard(const std::filesystem::path& path);

/// Manifest of a shard, read by skipping over scene payloads.
ShardManifest readManifest(const std::filesystem::path& path);

/// Shard id used when none is given: the file name without extensions.
std::string defaultShardId(const std::filesystem::path& path);

/// Scene directories use the same file layout as a scene inside a shard.
SceneRecord loadSceneDir(const std::filesystem::path& dir);
void saveSceneDir(const SceneRecord& scene, const std::filesystem::path& dir);

/// Process-wide count of scene records created by ShardReader that are
/// still alive, used to verify the streaming memory bound.
struct Residency {
  std::size_t liveScenes = 0;
  std::size_t peakScenes = 0;
  std::size_t liveBytes = 0;
  std::size_t peakBytes = 0;
};
Residency sceneResidency();
void resetResidencyPeak();

}  // namespace condkit
