#include "condkit/c_api.h"

#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "condkit/conditioning.hpp"
#include "condkit/error.hpp"
#include "condkit/shard.hpp"
#include "condkit/stream.hpp"

struct condkit_scene {
  std::shared_ptr<const condkit::SceneRecord> record;
};

struct condkit_stream {
  std::vector<std::filesystem::path> shards;
  double rate = 1.0;
  std::uint64_t seed = 0;
  std::unique_ptr<condkit::ShardPairStream> stream;
  std::optional<condkit::PairSample> current;
};

namespace {

struct LastError {
  int code = 0;
  std::string name = "Ok";
  std::string message;
};

thread_local LastError lastError;

int fail(condkit::ErrorCode code, const std::string& message) {
  lastError.code = static_cast<int>(code);
  lastError.name = std::string(condkit::errorName(code));
  lastError.message = message;
  return lastError.code;
}

// Runs `body`, translating exceptions into a status code.
template <typename F>
int guarded(F&& body) {
  try {
    body();
    lastError = LastError{};
    return 0;
  } catch (const condkit::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return fail(condkit::ErrorCode::IoFailure, "out of memory");
  } catch (const std::exception& e) {
    return fail(condkit::ErrorCode::InvalidArgument, e.what());
  }
}

void requireHandle(const void* p, const char* what) {
  if (p == nullptr) throw condkit::Error(condkit::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

int copyString(const std::string& s, char* buf, std::size_t capacity) {
  if (buf == nullptr || capacity < s.size() + 1) return CONDKIT_BUFFER_TOO_SMALL;
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return 0;
}

const condkit::ViewRecord& viewAt(const condkit_scene* scene, std::size_t view) {
  requireHandle(scene, "scene");
  if (view >= scene->record->views.size()) {
    throw condkit::Error(condkit::ErrorCode::IndexOutOfRange,
                         "view index " + std::to_string(view) + " outside [0, " +
                             std::to_string(scene->record->views.size()) + ")");
  }
  return scene->record->views[view];
}

}  // namespace

extern "C" {

condkit_conditioning_options condkit_conditioning_options_default(void) {
  const condkit::PairConditioningOptions d;
  return {static_cast<int>(d.quantile), d.downsample, d.viewerDefaultScale, 0.0};
}

int condkit_last_error_code(void) { return lastError.code; }
const char* condkit_last_error_name(void) { return lastError.name.c_str(); }
const char* condkit_last_error_message(void) { return lastError.message.c_str(); }

int condkit_scene_load(const char* scene_dir, condkit_scene** out) {
  return guarded([&] {
    requireHandle(scene_dir, "scene_dir");
    requireHandle(out, "out");
    auto record = std::make_shared<const condkit::SceneRecord>(condkit::loadSceneDir(scene_dir));
    *out = new condkit_scene{std::move(record)};
  });
}

int condkit_scene_load_from_shard(const char* shard_path, const char* scene_id, condkit_scene** out) {
  return guarded([&] {
    requireHandle(shard_path, "shard_path");
    requireHandle(scene_id, "scene_id");
    requireHandle(out, "out");
    condkit::ShardReader reader(shard_path);
    while (auto r = reader.next()) {
      if (r->sceneId != scene_id) continue;
      if (r->error) throw *r->error;
      *out = new condkit_scene{r->scene};
      return;
    }
    throw condkit::Error(condkit::ErrorCode::InvalidArgument,
                         std::string("scene '") + scene_id + "' not found in " + shard_path);
  });
}

void condkit_scene_close(condkit_scene* scene) { delete scene; }

size_t condkit_scene_view_count(const condkit_scene* scene) {
  return scene == nullptr ? 0 : scene->record->views.size();
}

double condkit_scene_fov(const condkit_scene* scene) { return scene == nullptr ? 0.0 : scene->record->fov; }

int condkit_scene_id(const condkit_scene* scene, char* buf, size_t capacity) {
  int status = 0;
  const int rc = guarded([&] {
    requireHandle(scene, "scene");
    status = copyString(scene->record->sceneId, buf, capacity);
  });
  return rc != 0 ? rc : status;
}

int condkit_scene_extrinsics(const condkit_scene* scene, float* out, size_t capacity) {
  int status = 0;
  const int rc = guarded([&] {
    requireHandle(scene, "scene");
    const auto& views = scene->record->views;
    if (out == nullptr || capacity < views.size() * 16) {
      status = CONDKIT_BUFFER_TOO_SMALL;
      return;
    }
    for (std::size_t k = 0; k < views.size(); ++k) {
      std::memcpy(out + k * 16, views[k].pose.data(), sizeof(float) * 16);
    }
  });
  return rc != 0 ? rc : status;
}

int condkit_scene_depth_shape(const condkit_scene* scene, size_t view, int* width, int* height) {
  return guarded([&] {
    const auto& v = viewAt(scene, view);
    if (width != nullptr) *width = v.depthWidth;
    if (height != nullptr) *height = v.depthHeight;
  });
}

int condkit_scene_depth(const condkit_scene* scene, size_t view, float* depth, uint8_t* mask,
                        size_t capacity) {
  int status = 0;
  const int rc = guarded([&] {
    const auto& v = viewAt(scene, view);
    if (capacity < v.depth.size()) {
      status = CONDKIT_BUFFER_TOO_SMALL;
      return;
    }
    if (depth != nullptr) std::memcpy(depth, v.depth.data(), v.depth.size() * sizeof(float));
    if (mask != nullptr) std::memcpy(mask, v.mask.data(), v.mask.size());
  });
  return rc != 0 ? rc : status;
}

int condkit_conditioning(const condkit_scene* scene, int i, int j, int variant,
                         const condkit_conditioning_options* options, float* out, size_t capacity,
                         size_t* length) {
  int status = 0;
  const int rc = guarded([&] {
    requireHandle(scene, "scene");
    if (variant < 0 || variant > static_cast<int>(condkit::Variant::SixDofViewer)) {
      throw condkit::Error(condkit::ErrorCode::InvalidArgument,
                           "unknown variant tag " + std::to_string(variant));
    }
    const auto o = options != nullptr ? *options : condkit_conditioning_options_default();
    condkit::PairConditioningOptions opts;
    opts.quantile = o.quantile == 1 ? condkit::QuantileMethod::NearestRank : condkit::QuantileMethod::Linear;
    opts.downsample = o.downsample;
    opts.viewerDefaultScale = o.viewer_default_scale;
    if (o.viewer_scale > 0.0) opts.viewerScale = o.viewer_scale;
    const auto v = condkit::conditionPair(*scene->record, i, j, static_cast<condkit::Variant>(variant), opts);
    if (length != nullptr) *length = v.size();
    if (out == nullptr || capacity < v.size()) {
      status = CONDKIT_BUFFER_TOO_SMALL;
      return;
    }
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = static_cast<float>(v[k]);
  });
  return rc != 0 ? rc : status;
}

int condkit_variant_from_name(const char* name, int* variant) {
  return guarded([&] {
    requireHandle(name, "name");
    requireHandle(variant, "variant");
    *variant = static_cast<int>(condkit::parseVariant(name));
  });
}

int condkit_pair_stream_open(const char* const* shard_paths, size_t count, double rate, uint64_t seed,
                             condkit_stream** out) {
  return guarded([&] {
    requireHandle(out, "out");
    if (count > 0) requireHandle(shard_paths, "shard_paths");
    auto s = std::make_unique<condkit_stream>();
    for (std::size_t k = 0; k < count; ++k) {
      requireHandle(shard_paths[k], "shard path");
      s->shards.emplace_back(shard_paths[k]);
    }
    s->rate = rate;
    s->seed = seed;
    s->stream = std::make_unique<condkit::ShardPairStream>(s->shards, rate, seed);
    *out = s.release();
  });
}

void condkit_pair_stream_close(condkit_stream* stream) { delete stream; }

int condkit_pair_stream_next(condkit_stream* stream, int* has_item) {
  return guarded([&] {
    requireHandle(stream, "stream");
    stream->current = stream->stream->next();
    if (has_item != nullptr) *has_item = stream->current ? 1 : 0;
  });
}

int condkit_pair_stream_reset(condkit_stream* stream) {
  return guarded([&] {
    requireHandle(stream, "stream");
    stream->stream = std::make_unique<condkit::ShardPairStream>(stream->shards, stream->rate, stream->seed);
    stream->current.reset();
  });
}

namespace {
const condkit::PairSample& currentPair(const condkit_stream* stream) {
  requireHandle(stream, "stream");
  if (!stream->current) {
    throw condkit::Error(condkit::ErrorCode::InvalidArgument, "stream has no current pair");
  }
  return *stream->current;
}
}  // namespace

int condkit_pair_indices(const condkit_stream* stream, int* input, int* target) {
  return guarded([&] {
    const auto& p = currentPair(stream);
    if (input != nullptr) *input = p.input;
    if (target != nullptr) *target = p.target;
  });
}

int condkit_pair_id(const condkit_stream* stream, char* buf, size_t capacity) {
  int status = 0;
  const int rc = guarded([&] { status = copyString(currentPair(stream).id(), buf, capacity); });
  return rc != 0 ? rc : status;
}

int condkit_pair_scene(const condkit_stream* stream, condkit_scene** out) {
  return guarded([&] {
    requireHandle(out, "out");
    *out = new condkit_scene{currentPair(stream).scene};
  });
}

size_t condkit_pair_stream_failures(const condkit_stream* stream) {
  return stream == nullptr ? 0 : stream->stream->failures().size();
}

}  // extern "C"
