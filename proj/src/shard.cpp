#include "condkit/shard.hpp"

#include <zlib.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace condkit {

using nlohmann::json;

namespace {

std::uint32_t crc32Of(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t at = 0; at < data.size(); at += kChunk) {
    const std::size_t n = std::min(kChunk, data.size() - at);
    crc = ::crc32(crc, data.data() + at, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encodeFloats(std::span<const float> values) {
  std::vector<std::uint8_t> out(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

std::vector<float> decodeFloats(std::span<const std::uint8_t> bytes, const std::string& what) {
  if (bytes.size() % 4 != 0) throw Error(ErrorCode::FormatError, what + " is not a float32 array");
  std::vector<float> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::vector<std::uint8_t> toBytes(const std::string& s) { return {s.begin(), s.end()}; }

std::string viewFile(const char* stem, std::size_t k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04zu.%s", stem, k, ext);
  return buf;
}

bool validSceneId(const std::string& id) {
  if (id.empty() || id.size() > 64 || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

json metaJson(const SceneRecord& s) {
  json depthSizes = json::array();
  json images = json::array();
  for (const auto& v : s.views) {
    depthSizes.push_back({v.depthWidth, v.depthHeight});
    images.push_back(!v.image.empty());
  }
  json meta = {{"format", "condkit-scene"},
               {"version", kShardFormatVersion},
               {"scene_id", s.sceneId},
               {"fov", s.fov},
               {"source", s.source},
               {"convention", s.convention},
               {"views", s.views.size()},
               {"depth_sizes", depthSizes},
               {"images", images}};
  if (s.contentScale) meta["content_scale"] = *s.contentScale;
  return meta;
}

// Ordered (file name, bytes) list making up one scene.
std::vector<std::pair<std::string, std::vector<std::uint8_t>>> sceneFiles(const SceneRecord& s) {
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files;
  files.emplace_back("meta.json", toBytes(metaJson(s).dump()));
  std::vector<float> poses;
  poses.reserve(s.views.size() * 16);
  for (const auto& v : s.views) poses.insert(poses.end(), v.pose.begin(), v.pose.end());
  files.emplace_back("poses.bin", encodeFloats(poses));
  for (std::size_t k = 0; k < s.views.size(); ++k) {
    const auto& v = s.views[k];
    if (!v.image.empty()) files.emplace_back(viewFile("image", k, "png"), v.image);
    if (v.hasDepth()) {
      files.emplace_back(viewFile("depth", k, "f32"), encodeFloats(v.depth));
      files.emplace_back(viewFile("mask", k, "u8"), v.mask);
    }
  }
  return files;
}

SceneRecord parseScene(const std::map<std::string, std::vector<std::uint8_t>>& files) {
  const auto get = [&](const std::string& name) -> const std::vector<std::uint8_t>& {
    const auto it = files.find(name);
    if (it == files.end()) throw Error(ErrorCode::FormatError, "missing " + name);
    return it->second;
  };
  const auto& metaBytes = get("meta.json");
  json meta;
  try {
    meta = json::parse(metaBytes.begin(), metaBytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("meta.json: ") + e.what());
  }
  SceneRecord s;
  try {
    if (meta.at("version").get<int>() != kShardFormatVersion) {
      throw Error(ErrorCode::FormatError, "unsupported scene format version");
    }
    s.sceneId = meta.at("scene_id").get<std::string>();
    s.fov = meta.at("fov").get<double>();
    s.source = meta.at("source").get<std::string>();
    s.convention = meta.at("convention").get<std::string>();
    if (meta.contains("content_scale")) s.contentScale = meta["content_scale"].get<double>();
    const auto n = meta.at("views").get<std::size_t>();
    const auto& sizes = meta.at("depth_sizes");
    const auto& images = meta.at("images");
    if (sizes.size() != n || images.size() != n) {
      throw Error(ErrorCode::FormatError, "meta.json view arrays disagree with view count");
    }
    const auto poses = decodeFloats(get("poses.bin"), "poses.bin");
    if (poses.size() != n * 16) throw Error(ErrorCode::FormatError, "poses.bin has wrong length");
    s.views.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto& v = s.views[k];
      std::copy_n(poses.begin() + static_cast<std::ptrdiff_t>(k * 16), 16, v.pose.begin());
      v.depthWidth = sizes[k].at(0).get<int>();
      v.depthHeight = sizes[k].at(1).get<int>();
      if (images[k].get<bool>()) v.image = get(viewFile("image", k, "png"));
      if (v.depthWidth > 0 && v.depthHeight > 0) {
        v.depth = decodeFloats(get(viewFile("depth", k, "f32")), viewFile("depth", k, "f32"));
        v.mask = get(viewFile("mask", k, "u8"));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("meta.json: ") + e.what());
  }
  return s;
}

struct ResidencyCounters {
  std::atomic<std::size_t> live{0};
  std::atomic<std::size_t> peak{0};
  std::atomic<std::size_t> liveBytes{0};
  std::atomic<std::size_t> peakBytes{0};
};

ResidencyCounters& counters() {
  static ResidencyCounters c;
  return c;
}

void raisePeak(std::atomic<std::size_t>& peak, std::size_t value) {
  std::size_t cur = peak.load();
  while (value > cur && !peak.compare_exchange_weak(cur, value)) {
  }
}

std::shared_ptr<const SceneRecord> track(SceneRecord&& scene) {
  auto& c = counters();
  const std::size_t bytes = scene.payloadBytes();
  raisePeak(c.peak, c.live.fetch_add(1) + 1);
  raisePeak(c.peakBytes, c.liveBytes.fetch_add(bytes) + bytes);
  return std::shared_ptr<const SceneRecord>(new SceneRecord(std::move(scene)),
                                            [bytes](const SceneRecord* p) {
                                              auto& cc = counters();
                                              cc.live.fetch_sub(1);
                                              cc.liveBytes.fetch_sub(bytes);
                                              delete p;
                                            });
}

ShardManifest parseManifest(std::span<const std::uint8_t> bytes) {
  ShardManifest m;
  try {
    const json j = json::parse(bytes.begin(), bytes.end());
    if (j.at("format").get<std::string>() != "condkit-shard") {
      throw Error(ErrorCode::FormatError, "not a condkit shard manifest");
    }
    m.shardId = j.at("shard_id").get<std::string>();
    m.quantile = j.at("quantile").get<std::string>();
    for (const auto& e : j.at("scenes")) {
      m.scenes.push_back({e.at("scene_id").get<std::string>(), e.at("offset").get<std::uint64_t>(),
                          e.at("size").get<std::uint64_t>(), e.at("crc32").get<std::uint32_t>(),
                          e.at("views").get<std::uint32_t>()});
    }
    if (j.at("scene_count").get<std::size_t>() != m.scenes.size()) {
      throw Error(ErrorCode::FormatError, "manifest scene_count disagrees with its entries");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("manifest.json: ") + e.what());
  }
  return m;
}

}  // namespace

ViewRecord ViewRecord::fromPose(const Pose& pose) {
  ViewRecord v;
  const Mat4 m = pose.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) v.pose[static_cast<std::size_t>(r * 4 + c)] = static_cast<float>(m(r, c));
  }
  return v;
}

void ViewRecord::setDepth(const DepthMap& d) {
  depthWidth = d.width();
  depthHeight = d.height();
  depth.resize(d.size());
  mask.assign(d.mask().begin(), d.mask().end());
  for (std::size_t i = 0; i < d.size(); ++i) {
    depth[i] = mask[i] != 0 ? static_cast<float>(d.values()[i]) : 0.0f;
  }
}

Pose ViewRecord::toPose() const {
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = pose[static_cast<std::size_t>(r * 4 + c)];
  }
  return Pose::fromMatrix(m);
}

DepthMap ViewRecord::toDepthMap() const {
  std::vector<double> values(depth.begin(), depth.end());
  return DepthMap(depthWidth, depthHeight, std::move(values), mask);
}

void SceneRecord::validate() const {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidScene, "scene '" + sceneId + "': " + why);
  };
  if (!validSceneId(sceneId)) fail("scene id must be 1..64 characters of [A-Za-z0-9_.-]");
  if (views.size() < 2) fail("needs at least 2 views");
  if (views.size() > 9999) fail("at most 9999 views per scene");
  if (!(fov > 0.0 && fov < kPi)) fail("field of view outside (0, pi)");
  if (convention != kCameraToWorld) fail("unsupported extrinsics convention '" + convention + "'");
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& v = views[k];
    try {
      (void)v.toPose();
      if (v.hasDepth() || v.depthWidth != 0 || v.depthHeight != 0) (void)v.toDepthMap();
    } catch (const Error& e) {
      fail("view " + std::to_string(k) + ": " + e.what());
    }
  }
}

std::vector<Pose> SceneRecord::poses() const {
  std::vector<Pose> out;
  out.reserve(views.size());
  for (const auto& v : views) out.push_back(v.toPose());
  return out;
}

std::vector<DepthMap> SceneRecord::depthMaps() const {
  std::vector<DepthMap> out;
  for (const auto& v : views) {
    if (!v.hasDepth()) return {};
    out.push_back(v.toDepthMap());
  }
  return out;
}

SceneView SceneRecord::sceneView(int inputIndex, int targetIndex) const {
  SceneView s;
  s.extrinsics = poses();
  s.depths = depthMaps();
  s.fov = fov;
  s.inputIndex = inputIndex;
  s.targetIndex = targetIndex;
  s.validate();
  return s;
}

ConditioningVector conditionPair(const SceneRecord& scene, int input, int target, Variant variant,
                                 const PairConditioningOptions& options) {
  if (options.downsample < 1) {
    throw Error(ErrorCode::InvalidArgument, "downsample factor must be at least 1");
  }
  SceneView s;
  s.extrinsics = scene.poses();
  s.fov = scene.fov;
  s.inputIndex = input;
  s.targetIndex = target;
  s.validate();
  switch (variant) {
    case Variant::Zero123: return mZero123(s);
    case Variant::SixDof: return mSixDof(s);
    case Variant::SixDofNorm: return mSixDofNorm(s);
    case Variant::SixDofAgg:
      for (const auto& d : scene.depthMaps()) s.depths.push_back(downsample(d, options.downsample));
      return mSixDofAgg(s, options.quantile);
    case Variant::SixDofViewer: {
      const auto& view = scene.views[static_cast<std::size_t>(input)];
      if (options.viewerScale || !view.hasDepth()) {
        const double q = options.viewerScale.value_or(options.viewerDefaultScale);
        return sixDofWithScale(Variant::SixDofViewer, s.extrinsics[static_cast<std::size_t>(input)],
                               s.extrinsics[static_cast<std::size_t>(target)], s.fov, q);
      }
      return mSixDofViewer(s, downsample(view.toDepthMap(), options.downsample), options.quantile);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown conditioning variant");
}

std::size_t SceneRecord::payloadBytes() const {
  std::size_t total = 0;
  for (const auto& v : views) {
    total += sizeof(v.pose) + v.depth.size() * sizeof(float) + v.mask.size() + v.image.size();
  }
  return total;
}

ShardWriter::ShardWriter(const std::filesystem::path& path, std::string shardId) : tar_(path) {
  manifest_.shardId = shardId.empty() ? defaultShardId(path) : std::move(shardId);
}

void ShardWriter::put(const std::string& name, std::span<const std::uint8_t> data,
                      std::vector<std::pair<std::string, std::uint32_t>>& sums) {
  tar_.add(name, data);
  sums.emplace_back(name.substr(name.find('/') + 1), crc32Of(data));
}

void ShardWriter::add(const SceneRecord& scene) {
  if (finished_) throw Error(ErrorCode::InvalidArgument, "shard already finished");
  scene.validate();
  for (const auto& e : manifest_.scenes) {
    if (e.sceneId == scene.sceneId) {
      throw Error(ErrorCode::InvalidScene, "scene '" + scene.sceneId + "' appears twice in shard");
    }
  }
  ManifestEntry entry;
  entry.sceneId = scene.sceneId;
  entry.offset = tar_.offset();
  entry.views = static_cast<std::uint32_t>(scene.views.size());
  std::vector<std::pair<std::string, std::uint32_t>> sums;
  for (const auto& [name, bytes] : sceneFiles(scene)) put(scene.sceneId + "/" + name, bytes, sums);
  json checks = json::array();
  for (const auto& [name, crc] : sums) checks.push_back({name, crc});
  const auto checkBytes = toBytes(json{{"entries", checks}}.dump());
  tar_.add(scene.sceneId + "/checksums.json", checkBytes);
  entry.crc32 = crc32Of(checkBytes);
  entry.size = tar_.offset() - entry.offset;
  manifest_.scenes.push_back(entry);
}

ShardManifest ShardWriter::finish() {
  if (finished_) return manifest_;
  finished_ = true;
  json scenes = json::array();
  for (const auto& e : manifest_.scenes) {
    scenes.push_back({{"scene_id", e.sceneId},
                      {"offset", e.offset},
                      {"size", e.size},
                      {"crc32", e.crc32},
                      {"views", e.views}});
  }
  const json j = {{"format", "condkit-shard"},
                  {"version", kShardFormatVersion},
                  {"shard_id", manifest_.shardId},
                  {"quantile", manifest_.quantile},
                  {"convention", kCameraToWorld},
                  {"scene_count", manifest_.scenes.size()},
                  {"scenes", scenes}};
  tar_.add("manifest.json", toBytes(j.dump()));
  tar_.finish();
  return manifest_;
}

ShardManifest writeShard(const std::vector<SceneRecord>& scenes, const std::filesystem::path& path,
                         const std::string& shardId) {
  if (scenes.empty()) throw Error(ErrorCode::InvalidArgument, "refusing to write an empty shard");
  ShardWriter writer(path, shardId);
  for (const auto& s : scenes) writer.add(s);
  return writer.finish();
}

ShardReader::ShardReader(const std::filesystem::path& path) : path_(path), tar_(path) {}

std::optional<SceneResult> ShardReader::next() {
  std::optional<TarEntry> entry = pending_ ? std::move(pending_) : tar_.next();
  pending_.reset();
  if (!entry) return std::nullopt;
  if (entry->name == "manifest.json") {
    manifest_ = parseManifest(entry->data);
    if (tar_.next()) {
      throw Error(ErrorCode::FormatError, path_.string() + ": entries after manifest.json");
    }
    return std::nullopt;
  }
  const auto slash = entry->name.find('/');
  if (slash == std::string::npos) {
    throw Error(ErrorCode::FormatError, path_.string() + ": stray top-level entry " + entry->name);
  }
  SceneResult result;
  result.sceneId = entry->name.substr(0, slash);
  const std::string prefix = result.sceneId + "/";

  std::map<std::string, std::vector<std::uint8_t>> files;
  std::vector<std::uint8_t> checksums;
  bool complete = false;
  while (entry) {
    if (entry->name.rfind(prefix, 0) != 0) {
      pending_ = std::move(entry);
      break;
    }
    result.bytes += entry->size;
    std::string name = entry->name.substr(prefix.size());
    if (name == "checksums.json") {
      checksums = std::move(entry->data);
      complete = true;
      break;
    }
    files.emplace(std::move(name), std::move(entry->data));
    entry = tar_.next();
  }

  try {
    if (!complete) throw Error(ErrorCode::FormatError, "scene has no checksums.json");
    json sums;
    try {
      sums = json::parse(checksums.begin(), checksums.end());
    } catch (const json::exception&) {
      throw Error(ErrorCode::ChecksumMismatch, "checksums.json is unreadable");
    }
    std::set<std::string> listed;
    for (const auto& item : sums.at("entries")) {
      const auto name = item.at(0).get<std::string>();
      const auto crc = item.at(1).get<std::uint32_t>();
      listed.insert(name);
      const auto it = files.find(name);
      if (it == files.end()) throw Error(ErrorCode::FormatError, "missing entry " + name);
      if (crc32Of(it->second) != crc) {
        throw Error(ErrorCode::ChecksumMismatch, "payload of " + name + " is corrupt");
      }
    }
    for (const auto& [name, bytes] : files) {
      if (!listed.contains(name)) throw Error(ErrorCode::FormatError, "unlisted entry " + name);
    }
    SceneRecord scene = parseScene(files);
    if (scene.sceneId != result.sceneId) {
      throw Error(ErrorCode::FormatError, "directory name disagrees with meta.json scene_id");
    }
    scene.validate();
    result.scene = track(std::move(scene));
  } catch (const Error& e) {
    result.error = Error(e.code(), path_.string() + ": scene '" + result.sceneId + "': " + e.what());
  } catch (const json::exception& e) {
    result.error = Error(ErrorCode::FormatError,
                         path_.string() + ": scene '" + result.sceneId + "': " + e.what());
  }
  return result;
}

std::vector<SceneRecord> readShard(const std::filesystem::path& path) {
  ShardReader reader(path);
  std::vector<SceneRecord> out;
  while (auto r = reader.next()) {
    if (r->error) throw *r->error;
    out.push_back(*r->scene);
  }
  return out;
}

ShardManifest readManifest(const std::filesystem::path& path) {
  TarReader tar(path);
  while (auto e = tar.next(false)) {
    if (e->name != "manifest.json") continue;
    std::ifstream in(path, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(e->headerOffset + 512));
    std::vector<std::uint8_t> data(e->size);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(e->size));
    if (static_cast<std::uint64_t>(in.gcount()) != e->size) {
      throw Error(ErrorCode::IoFailure, path.string() + ": truncated manifest");
    }
    return parseManifest(data);
  }
  throw Error(ErrorCode::FormatError, path.string() + ": shard has no manifest.json");
}

std::string defaultShardId(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

SceneRecord loadSceneDir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, dir.string() + " is not a scene directory");
  }
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    files.emplace(entry.path().filename().string(), std::move(data));
  }
  SceneRecord scene = parseScene(files);
  scene.validate();
  return scene;
}

void saveSceneDir(const SceneRecord& scene, const std::filesystem::path& dir) {
  scene.validate();
  std::filesystem::create_directories(dir);
  for (const auto& [name, bytes] : sceneFiles(scene)) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + (dir / name).string());
  }
}

Residency sceneResidency() {
  auto& c = counters();
  return {c.live.load(), c.peak.load(), c.liveBytes.load(), c.peakBytes.load()};
}

void resetResidencyPeak() {
  auto& c = counters();
  c.peak.store(c.live.load());
  c.peakBytes.store(c.liveBytes.load());
}

}  // namespace condkit
