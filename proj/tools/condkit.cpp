// condkit command-line tool.

#include <glob.h>
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "condkit/anchoring.hpp"
#include "condkit/conditioning.hpp"
#include "condkit/config.hpp"
#include "condkit/error.hpp"
#include "condkit/image.hpp"
#include "condkit/metrics.hpp"
#include "condkit/preprocess.hpp"
#include "condkit/shard.hpp"
#include "condkit/stream.hpp"

namespace fs = std::filesystem;
using namespace condkit;

namespace {

constexpr const char* kVersion = "0.1.0";

// Settings shared by every subcommand. Overrides are "section.key" values in
// the order they appeared on the command line.
struct Globals {
  std::string configPath;
  std::vector<std::pair<std::string, std::string>> overrides;
};

Config effectiveConfig(const Globals& g) {
  Config c = g.configPath.empty() ? Config{} : loadConfig(g.configPath);
  for (const auto& [key, value] : g.overrides) setConfigValue(c, key, value);
  applyEnvironment(c);
  c.distillConfig().validate();
  return c;
}

// Adds a flag whose value is written into the configuration key.
CLI::Option* configFlag(CLI::App* app, Globals& g, const std::string& flag, const std::string& key,
                        const std::string& help) {
  return app->add_option_function<std::string>(
      flag, [&g, key](const std::string& v) { g.overrides.emplace_back(key, v); }, help);
}

CLI::Option* configSwitch(CLI::App* app, Globals& g, const std::string& flag, const std::string& key,
                          const std::string& help) {
  return app->add_flag_callback(flag, [&g, key] { g.overrides.emplace_back(key, "true"); }, help);
}

std::vector<fs::path> expandGlobs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> out;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t k = 0; k < g.gl_pathc; ++k) out.emplace_back(g.gl_pathv[k]);
    }
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw Error(ErrorCode::IoFailure, "no shard matches " + p);
    if (rc != 0 && rc != GLOB_NOMATCH) throw Error(ErrorCode::IoFailure, "cannot expand " + p);
  }
  return out;
}

void writeFile(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

std::string fmt(double v, int digits = 17) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

long peakRssKb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

// ---------------------------------------------------------------- shard

struct ShardBuildArgs {
  std::string input;
  std::string out;
  std::string prefix = "shard";
};

int runShardBuild(const Globals& g, const ShardBuildArgs& a) {
  const Config c = effectiveConfig(g);
  if (c.scenesPerShard < 1) throw Error(ErrorCode::ConfigError, "dataset.scenes_per_shard must be >= 1");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(a.input)) {
    if (e.is_directory() && fs::exists(e.path() / "meta.json")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw Error(ErrorCode::InvalidArgument, "no scene directories under " + a.input);
  fs::create_directories(a.out);
  std::size_t shardCount = 0;
  for (std::size_t first = 0; first < dirs.size(); first += static_cast<std::size_t>(c.scenesPerShard)) {
    std::ostringstream name;
    name << a.prefix << '-' << std::setw(6) << std::setfill('0') << shardCount;
    const fs::path path = fs::path(a.out) / (name.str() + ".tar");
    ShardWriter writer(path, name.str());
    const std::size_t last = std::min(dirs.size(), first + static_cast<std::size_t>(c.scenesPerShard));
    for (std::size_t k = first; k < last; ++k) writer.add(loadSceneDir(dirs[k]));
    const auto manifest = writer.finish();
    std::cout << path.string() << '\t' << manifest.scenes.size() << " scenes\n";
    ++shardCount;
  }
  std::cout << "wrote " << shardCount << " shards, " << dirs.size() << " scenes\n";
  return 0;
}

int runShardInspect(const std::string& shard, bool asJson) {
  ShardReader reader(shard);
  std::vector<SceneResult> results;
  while (auto r = reader.next()) {
    results.push_back(std::move(*r));
    results.back().scene.reset();
  }
  const auto& manifest = *reader.manifest();
  int status = 0;
  if (asJson) {
    nlohmann::json j = {{"shard_id", manifest.shardId}, {"quantile", manifest.quantile}};
    auto& scenes = j["scenes"] = nlohmann::json::array();
    for (std::size_t k = 0; k < manifest.scenes.size(); ++k) {
      const auto& e = manifest.scenes[k];
      nlohmann::json s = {{"scene_id", e.sceneId}, {"views", e.views}, {"offset", e.offset},
                          {"size", e.size}, {"crc32", e.crc32}, {"status", "ok"}};
      if (k < results.size() && results[k].error) s["status"] = results[k].error->what();
      scenes.push_back(s);
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "shard_id\t" << manifest.shardId << "\nscenes\t" << manifest.scenes.size()
              << "\nquantile\t" << manifest.quantile << '\n';
    std::cout << "scene_id\tviews\toffset\tsize\tstatus\n";
    for (std::size_t k = 0; k < manifest.scenes.size(); ++k) {
      const auto& e = manifest.scenes[k];
      const bool bad = k < results.size() && results[k].error;
      std::cout << e.sceneId << '\t' << e.views << '\t' << e.offset << '\t' << e.size << '\t'
                << (bad ? results[k].error->what() : "ok") << '\n';
    }
  }
  for (const auto& r : results) {
    if (r.error) {
      std::cerr << "damaged scene " << r.sceneId << ": " << r.error->what() << '\n';
      if (status == 0) status = static_cast<int>(r.error->code());
    }
  }
  return status;
}

// ---------------------------------------------------------------- stream

struct BenchArgs {
  std::vector<std::string> shards;
  double seconds = 10.0;
  std::string dump;
  std::size_t maxSamples = 0;
};

int runStreamBench(const Globals& g, const BenchArgs& a) {
  const Config c = effectiveConfig(g);
  if (c.workers < 1) throw Error(ErrorCode::ConfigError, "dataset.workers must be >= 1");
  if (c.queuedScenes < 1) throw Error(ErrorCode::ConfigError, "dataset.queued_scenes must be >= 1");
  const auto shards = expandGlobs(a.shards);
  std::ofstream dump;
  if (!a.dump.empty()) {
    dump.open(a.dump, std::ios::trunc);
    if (!dump) throw Error(ErrorCode::IoFailure, "cannot write " + a.dump);
  }
  resetResidencyPeak();
  ParallelOptions opts{static_cast<std::size_t>(c.workers), static_cast<std::size_t>(c.queuedScenes)};
  ParallelPairStream stream(shards, c.rate, c.seed, opts);

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto budget = std::chrono::duration<double>(a.seconds);
  std::size_t samples = 0;
  std::size_t epochs = 1;
  // Scenes read without error so far; an epoch that adds none means there is
  // nothing left to stream. Zero pairs from readable scenes is just a draw.
  const auto readableScenes = [&stream] {
    std::size_t failed = 0;
    for (const auto& f : stream.failures()) failed += f.sceneId.empty() ? 0 : 1;
    return stream.scenesVisited() - failed;
  };
  std::size_t readableAtEpochStart = 0;
  while (Clock::now() - start < budget && (a.maxSamples == 0 || samples < a.maxSamples)) {
    auto s = stream.next();
    if (!s) {
      const std::size_t readable = readableScenes();
      if (c.oneEpoch || readable == readableAtEpochStart) break;
      readableAtEpochStart = readable;
      stream.restart();
      ++epochs;
      continue;
    }
    ++samples;
    if (dump.is_open()) dump << s->id() << '\n';
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  const auto residency = sceneResidency();
  const auto failures = stream.failures();
  const double safe = std::max(elapsed, 1e-9);
  std::cout << "shards\t" << shards.size() << "\nworkers\t" << c.workers << "\nrate\t" << fmt(c.rate, 6)
            << "\nsamples\t" << samples << "\nepochs\t" << epochs << "\nscenes\t" << stream.scenesVisited()
            << "\nseconds\t" << fmt(elapsed, 6) << "\nsamples_per_sec\t" << fmt(samples / safe, 6)
            << "\nbytes_per_sec\t" << fmt(static_cast<double>(stream.bytesRead()) / safe, 6)
            << "\npeak_resident_scenes\t" << residency.peakScenes << "\npeak_resident_bytes\t"
            << residency.peakBytes << "\npeak_rss_kb\t" << peakRssKb() << "\nfailures\t"
            << failures.size() << '\n';
  for (const auto& f : failures) {
    std::cerr << "failure " << f.shardId << (f.sceneId.empty() ? "" : "/" + f.sceneId) << ": "
              << f.error.what() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- conditioning

struct ConditioningArgs {
  std::string scene;
  std::string sceneId;
  int i = 0;
  int j = 1;
  std::string variant;
  std::string out;
  std::optional<double> viewerScale;
};

SceneRecord loadSceneArg(const std::string& path, const std::string& sceneId) {
  if (fs::is_directory(path)) return loadSceneDir(path);
  ShardReader reader(path);
  while (auto r = reader.next()) {
    if (!sceneId.empty() && r->sceneId != sceneId) continue;
    if (r->error) throw *r->error;
    return *r->scene;
  }
  throw Error(ErrorCode::InvalidArgument,
              sceneId.empty() ? "shard " + path + " has no scenes" : "scene '" + sceneId + "' not in " + path);
}

int runConditioning(const Globals& g, const ConditioningArgs& a) {
  const Config c = effectiveConfig(g);
  const SceneRecord scene = loadSceneArg(a.scene, a.sceneId);
  std::vector<Variant> variants;
  if (a.variant == "all") {
    variants.assign(kAllVariants.begin(), kAllVariants.end());
  } else {
    variants.push_back(a.variant.empty() ? c.variant : parseVariant(a.variant));
  }
  PairConditioningOptions opts;
  opts.quantile = c.quantile;
  opts.downsample = c.downsample;
  opts.viewerDefaultScale = c.viewerDefaultScale;
  opts.viewerScale = a.viewerScale;
  std::vector<std::uint8_t> bytes;
  for (const Variant v : variants) {
    const auto vec = conditionPair(scene, a.i, a.j, v, opts);
    std::cout << variantName(v) << '\t' << vec.size();
    for (const double x : vec.entries()) std::cout << '\t' << fmt(x);
    std::cout << '\n';
    const auto ser = vec.serialize();
    bytes.insert(bytes.end(), ser.begin(), ser.end());
  }
  if (!a.out.empty()) writeFile(a.out, std::string(bytes.begin(), bytes.end()));
  return 0;
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string input;
  std::string out;
  bool dtu = false;
};

// Pinhole intrinsics of a view: the scene fov spans the image width and the
// principal point is centered.
Intrinsics viewIntrinsics(double fov, int width, int height) {
  const double f = width / (2.0 * std::tan(fov / 2.0));
  return {f, f, width / 2.0, height / 2.0, width, height};
}

int runPreprocess(const Globals& g, const PreprocessArgs& a) {
  const Config c = effectiveConfig(g);
  SceneRecord scene = loadSceneDir(a.input);
  const std::string suffix = a.dtu ? "_dtu" : "_" + std::to_string(c.cropSize);
  const fs::path out = a.out.empty() ? fs::path(fs::path(a.input).lexically_normal().string() + suffix) : fs::path(a.out);
  if (a.dtu) {
    constexpr int kWidth = 400;
    constexpr int kHeight = 300;
    nlohmann::json views = nlohmann::json::array();
    fs::create_directories(out);
    for (std::size_t k = 0; k < scene.views.size(); ++k) {
      if (scene.views[k].image.empty()) continue;
      const Image img = decodePng(scene.views[k].image);
      const Letterbox lb = letterbox(viewIntrinsics(scene.fov, img.width(), img.height()), kWidth, kHeight);
      const Image fitted = resizeImage(img, lb.scaledWidth, lb.scaledHeight);
      std::ostringstream name;
      name << "eval_" << std::setw(4) << std::setfill('0') << k << ".png";
      writePng(padImage(fitted, kWidth, kHeight, lb.padX, lb.padY), out / name.str());
      const auto& in = lb.intrinsics;
      views.push_back({{"view", k}, {"file", name.str()}, {"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx},
                       {"cy", in.cy}, {"width", in.width}, {"height", in.height}});
    }
    writeFile(out / "eval.json", nlohmann::json({{"scene_id", scene.sceneId}, {"views", views}}).dump(2) + "\n");
    std::cout << "wrote " << views.size() << " evaluation crops to " << out.string() << '\n';
    return 0;
  }

  const int size = c.cropSize;
  std::optional<double> newFov;
  for (auto& v : scene.views) {
    if (v.image.empty()) continue;
    const Image img = decodePng(v.image);
    const Intrinsics intr = viewIntrinsics(scene.fov, img.width(), img.height());
    const int side = std::min(img.width(), img.height());
    const CropWindow win = centerCropWindow(intr, side);
    const Intrinsics adjusted = resize(centerCrop(intr, side), size, size);
    const double fov = fovFromIntrinsics(adjusted);
    if (newFov && std::abs(*newFov - fov) > 1e-12) {
      throw Error(ErrorCode::InvalidScene, "views of scene '" + scene.sceneId + "' disagree on field of view");
    }
    newFov = fov;
    v.image = encodePng(resizeImage(cropImage(img, win.x, win.y, side, side), size, size));
    if (v.hasDepth()) {
      const int dside = std::min(v.depthWidth, v.depthHeight);
      const int dx = (v.depthWidth - dside) / 2;
      const int dy = (v.depthHeight - dside) / 2;
      std::vector<float> depth;
      std::vector<std::uint8_t> mask;
      for (int r = 0; r < dside; ++r) {
        for (int col = 0; col < dside; ++col) {
          const auto idx = static_cast<std::size_t>(r + dy) * static_cast<std::size_t>(v.depthWidth) +
                           static_cast<std::size_t>(col + dx);
          depth.push_back(v.depth[idx]);
          mask.push_back(v.mask[idx]);
        }
      }
      v.depth = std::move(depth);
      v.mask = std::move(mask);
      v.depthWidth = v.depthHeight = dside;
    }
  }
  if (!newFov) throw Error(ErrorCode::InvalidScene, "scene '" + scene.sceneId + "' has no images");
  scene.fov = *newFov;
  saveSceneDir(scene, out);
  std::cout << "wrote " << out.string() << " (" << size << "x" << size << ", fov " << fmt(scene.fov, 9) << ")\n";
  return 0;
}

// ---------------------------------------------------------------- plan

int runPlanDistill(const Globals& g, const std::string& out) {
  const Config c = effectiveConfig(g);
  const DistillPlan plan = distillPlan(c.distillConfig());
  const std::string text = plan.toNdjson();
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    writeFile(out, text);
    std::cerr << "wrote " << plan.steps.size() << " steps to " << out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
};

int runEval(const Globals& g, const EvalArgs& a) {
  const Config c = effectiveConfig(g);
  for (const auto& m : c.metrics) {
    if (m == "lpips" && c.lpipsCommand.empty()) {
      throw Error(ErrorCode::ExternalUnavailable, "lpips requested without --lpips-cmd");
    }
  }
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a.gt)) {
    if (e.is_regular_file() && e.path().extension() == ".png") names.push_back(e.path().filename());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error(ErrorCode::InvalidArgument, "no PNG images in " + a.gt);

  std::ostringstream csv;
  csv << "# condkit eval v1\n" << "image";
  for (const auto& m : c.metrics) csv << ',' << m;
  csv << '\n';
  std::vector<double> sums(c.metrics.size(), 0.0);
  for (const auto& name : names) {
    const fs::path predPath = fs::path(a.pred) / name;
    if (!fs::exists(predPath)) throw Error(ErrorCode::IoFailure, "missing prediction " + predPath.string());
    const Image pred = readImage(predPath);
    const Image gt = readImage(fs::path(a.gt) / name);
    if (pred.width() != gt.width() || pred.height() != gt.height()) {
      throw Error(ErrorCode::ShapeMismatch, name.string() + ": prediction and ground truth differ in size");
    }
    csv << name.string();
    for (std::size_t k = 0; k < c.metrics.size(); ++k) {
      const auto& m = c.metrics[k];
      const double v = m == "psnr" ? psnr(pred, gt) : m == "ssim" ? ssim(pred, gt) : lpipsExternal(pred, gt, c.lpipsCommand);
      sums[k] += v;
      csv << ',' << fmt(v, 10);
    }
    csv << '\n';
  }
  csv << "mean";
  for (const double s : sums) csv << ',' << fmt(s / static_cast<double>(names.size()), 10);
  csv << '\n';
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    writeFile(a.out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"condkit: camera conditioning, sharded multiview streaming, distillation planning"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.configPath, "TOML configuration file")->check(CLI::ExistingFile);
  configFlag(&app, g, "--seed", "run.seed", "Random seed for every stochastic step");
  app.add_option_function<std::vector<std::string>>(
         "--set",
         [&g](const std::vector<std::string>& items) {
           for (const auto& item : items) {
             const auto eq = item.find('=');
             if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected section.key=value");
             g.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
           }
         },
         "Override a configuration key (section.key=value); repeatable")
      ->take_all();

  int status = 0;

  auto* shard = app.add_subcommand("shard", "Build and inspect shards")->require_subcommand(1);
  ShardBuildArgs build;
  auto* shardBuild = shard->add_subcommand("build", "Pack scene directories into tar shards");
  shardBuild->add_option("--input", build.input, "Directory of scene directories")->required()->check(CLI::ExistingDirectory);
  shardBuild->add_option("--out", build.out, "Output directory")->required();
  shardBuild->add_option("--prefix", build.prefix, "Shard file name prefix");
  configFlag(shardBuild, g, "--scenes-per-shard", "dataset.scenes_per_shard", "Scenes per shard");
  shardBuild->callback([&] { status = runShardBuild(g, build); });

  std::string inspectPath;
  bool inspectJson = false;
  auto* shardInspect = shard->add_subcommand("inspect", "Print a shard's manifest and verify its scenes");
  shardInspect->add_option("shard", inspectPath, "Shard file")->required()->check(CLI::ExistingFile);
  shardInspect->add_flag("--json", inspectJson, "JSON output");
  shardInspect->callback([&] { status = runShardInspect(inspectPath, inspectJson); });

  auto* stream = app.add_subcommand("stream", "Pair streaming")->require_subcommand(1);
  BenchArgs bench;
  auto* streamBench = stream->add_subcommand("bench", "Measure pair-stream throughput");
  streamBench->add_option("--shards", bench.shards, "Shard files or glob patterns")->required();
  configFlag(streamBench, g, "--workers", "dataset.workers", "Reader threads");
  configFlag(streamBench, g, "--rate", "dataset.rate", "Expected pairs per scene");
  configFlag(streamBench, g, "--queued-scenes", "dataset.queued_scenes", "Scenes buffered between readers and consumer");
  configSwitch(streamBench, g, "--one-epoch", "dataset.one_epoch", "Stop after one pass instead of restarting");
  streamBench->add_option("--seconds", bench.seconds, "Time budget")->check(CLI::PositiveNumber);
  streamBench->add_option("--max-samples", bench.maxSamples, "Stop after this many samples (0 = no limit)");
  streamBench->add_option("--dump", bench.dump, "Write one sample id per line");
  streamBench->callback([&] { status = runStreamBench(g, bench); });

  ConditioningArgs cond;
  auto* conditioning = app.add_subcommand("conditioning", "Conditioning vector of a view pair");
  conditioning->add_option("--scene", cond.scene, "Scene directory or shard")->required()->check(CLI::ExistingPath);
  conditioning->add_option("--scene-id", cond.sceneId, "Scene inside a shard (default: first)");
  conditioning->add_option("--i", cond.i, "Input view index");
  conditioning->add_option("--j", cond.j, "Target view index");
  conditioning->add_option("--variant", cond.variant,
                           "zero123, sixdof, sixdof_norm, sixdof_agg, sixdof_viewer or all (default: config)");
  conditioning->add_option("--out", cond.out, "Write the serialized vectors to this file");
  conditioning->add_option("--viewer-scale", cond.viewerScale, "Viewer scale to use instead of the input depth");
  configFlag(conditioning, g, "--quantile", "depth.quantile", "linear or nearest_rank");
  configFlag(conditioning, g, "--downsample", "depth.downsample", "Depth downsampling factor");
  conditioning->callback([&] { status = runConditioning(g, cond); });

  PreprocessArgs prep;
  auto* preprocess = app.add_subcommand("preprocess", "Center-crop a scene and adjust its field of view");
  preprocess->add_option("--input", prep.input, "Scene directory")->required()->check(CLI::ExistingDirectory);
  preprocess->add_option("--out", prep.out, "Output directory");
  configFlag(preprocess, g, "--size", "preprocess.size", "Output side length");
  preprocess->add_flag("--dtu", prep.dtu, "Emit 400x300 letterboxed evaluation crops");
  preprocess->callback([&] { status = runPreprocess(g, prep); });

  auto* plan = app.add_subcommand("plan", "Distillation planning")->require_subcommand(1);
  std::string planOut;
  auto* planDistill = plan->add_subcommand("distill", "Write the step-by-step distillation plan as NDJSON");
  planDistill->add_option("--config", g.configPath, "TOML configuration file")->check(CLI::ExistingFile);
  planDistill->add_option("--out", planOut, "Output file (default: stdout)");
  planDistill->callback([&] { status = runPlanDistill(g, planOut); });

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predicted images against ground truth");
  eval->add_option("--pred", ev.pred, "Directory of predicted PNGs")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--gt", ev.gt, "Directory of ground-truth PNGs")->required()->check(CLI::ExistingDirectory);
  configFlag(eval, g, "--metrics", "metrics.list", "Comma-separated: psnr, ssim, lpips");
  configFlag(eval, g, "--lpips-cmd", "metrics.lpips_cmd", "Command template with {a} and {b} placeholders");
  eval->add_option("--out", ev.out, "CSV output (default: stdout)");
  eval->callback([&] { status = runEval(g, ev); });

  auto* config = app.add_subcommand("config", "Configuration")->require_subcommand(1);
  auto* dump = config->add_subcommand("dump", "Print the effective configuration as TOML");
  dump->callback([&] { std::cout << dumpConfig(effectiveConfig(g)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCode::InvalidArgument);
  } catch (const Error& e) {
    std::cerr << "condkit: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "condkit: IoFailure: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::IoFailure);
  } catch (const std::exception& e) {
    std::cerr << "condkit: " << e.what() << '\n';
    return 1;
  }
  return status;
}
