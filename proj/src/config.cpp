#include "condkit/config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "condkit/error.hpp"

namespace condkit {

namespace {

[[noreturn]] void configError(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, key + ": " + why);
}

double degToRad(double d) { return d * kPi / 180.0; }

// One settable key: how to write it into a TOML table, read it back from a
// TOML node, and parse it from a flag or environment string.
struct Field {
  std::string section;
  std::string key;
  std::function<void(toml::table&, const Config&)> write;
  std::function<void(Config&, const toml::node&)> read;
  std::function<void(Config&, const std::string&)> parse;

  std::string path() const { return section + "." + key; }
};

template <typename T>
T nodeAs(const toml::node& node, const std::string& path) {
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (node.is_boolean()) return *node.value<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (node.is_string()) return *node.value<std::string>();
  } else {
    if (node.is_integer()) return *node.value<std::int64_t>();
  }
  configError(path, "has the wrong type");
}

double parseDouble(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  configError(path, "expected a number, got '" + s + "'");
}

std::int64_t parseInt(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  configError(path, "expected an integer, got '" + s + "'");
}

bool parseBool(const std::string& s, const std::string& path) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  configError(path, "expected true or false, got '" + s + "'");
}

template <typename Get>
Field doubleField(std::string section, std::string key, Get get) {
  Field f{section, key, {}, {}, {}};
  const std::string path = f.path();
  f.write = [=](toml::table& t, const Config& c) { t.insert_or_assign(key, get(const_cast<Config&>(c))); };
  f.read = [=](Config& c, const toml::node& n) { get(c) = nodeAs<double>(n, path); };
  f.parse = [=](Config& c, const std::string& s) { get(c) = parseDouble(s, path); };
  return f;
}

template <typename Get>
Field intField(std::string section, std::string key, Get get) {
  Field f{section, key, {}, {}, {}};
  const std::string path = f.path();
  using T = std::remove_reference_t<decltype(get(std::declval<Config&>()))>;
  const auto check = [path](std::int64_t v) {
    if (v < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
        (std::is_signed_v<T> && v > static_cast<std::int64_t>(std::numeric_limits<T>::max()))) {
      configError(path, "integer out of range");
    }
    return static_cast<T>(v);
  };
  f.write = [=](toml::table& t, const Config& c) {
    t.insert_or_assign(key, static_cast<std::int64_t>(get(const_cast<Config&>(c))));
  };
  f.read = [=](Config& c, const toml::node& n) { get(c) = check(nodeAs<std::int64_t>(n, path)); };
  f.parse = [=](Config& c, const std::string& s) { get(c) = check(parseInt(s, path)); };
  return f;
}

template <typename Get>
Field boolField(std::string section, std::string key, Get get) {
  Field f{section, key, {}, {}, {}};
  const std::string path = f.path();
  f.write = [=](toml::table& t, const Config& c) { t.insert_or_assign(key, get(const_cast<Config&>(c))); };
  f.read = [=](Config& c, const toml::node& n) { get(c) = nodeAs<bool>(n, path); };
  f.parse = [=](Config& c, const std::string& s) { get(c) = parseBool(s, path); };
  return f;
}

// String-valued keys with a custom text <-> value mapping.
template <typename ToText, typename FromText>
Field textField(std::string section, std::string key, ToText toText, FromText fromText) {
  Field f{section, key, {}, {}, {}};
  const std::string path = f.path();
  f.write = [=](toml::table& t, const Config& c) { t.insert_or_assign(key, toText(c)); };
  f.read = [=](Config& c, const toml::node& n) { fromText(c, nodeAs<std::string>(n, path), path); };
  f.parse = [=](Config& c, const std::string& s) { fromText(c, s, path); };
  return f;
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(textField(
        "conditioning", "variant", [](const Config& c) { return std::string(variantName(c.variant)); },
        [](Config& c, const std::string& s, const std::string& path) {
          try {
            c.variant = parseVariant(s);
          } catch (const Error&) {
            configError(path, "unknown variant '" + s + "'");
          }
        }));
    f.push_back(textField(
        "depth", "quantile", [](const Config& c) { return std::string(quantileMethodName(c.quantile)); },
        [](Config& c, const std::string& s, const std::string& path) {
          if (s == "linear") {
            c.quantile = QuantileMethod::Linear;
          } else if (s == "nearest_rank") {
            c.quantile = QuantileMethod::NearestRank;
          } else {
            configError(path, "expected linear or nearest_rank");
          }
        }));
    f.push_back(intField("depth", "downsample", [](Config& c) -> int& { return c.downsample; }));
    f.push_back(doubleField("depth", "viewer_default_scale",
                            [](Config& c) -> double& { return c.viewerDefaultScale; }));
    f.push_back(doubleField("dataset", "rate", [](Config& c) -> double& { return c.rate; }));
    f.push_back(intField("dataset", "workers", [](Config& c) -> int& { return c.workers; }));
    f.push_back(intField("dataset", "scenes_per_shard", [](Config& c) -> int& { return c.scenesPerShard; }));
    f.push_back(intField("dataset", "queued_scenes", [](Config& c) -> int& { return c.queuedScenes; }));
    f.push_back(boolField("dataset", "one_epoch", [](Config& c) -> bool& { return c.oneEpoch; }));
    {
      // TOML integers are signed 64-bit; larger seeds are written as strings.
      Field seed = textField(
          "run", "seed", [](const Config& c) { return std::to_string(c.seed); },
          [](Config& c, const std::string& s, const std::string& path) {
            try {
              std::size_t used = 0;
              c.seed = std::stoull(s, &used);
              if (used == s.size() && s.front() != '-') return;
            } catch (const std::exception&) {
            }
            configError(path, "expected an unsigned integer");
          });
      const auto readText = seed.read;
      seed.read = [readText](Config& c, const toml::node& n) {
        if (!n.is_integer()) return readText(c, n);
        const auto v = *n.value<std::int64_t>();
        if (v < 0) configError("run.seed", "expected an unsigned integer");
        c.seed = static_cast<std::uint64_t>(v);
      };
      seed.write = [](toml::table& t, const Config& c) {
        if (c.seed <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
          t.insert_or_assign("seed", static_cast<std::int64_t>(c.seed));
        } else {
          t.insert_or_assign("seed", std::to_string(c.seed));
        }
      };
      f.push_back(seed);
    }
    f.push_back(doubleField("input", "radius", [](Config& c) -> double& { return c.inputRadius; }));
    f.push_back(doubleField("input", "elevation_deg", [](Config& c) -> double& { return c.inputElevationDeg; }));
    f.push_back(doubleField("input", "azimuth_deg", [](Config& c) -> double& { return c.inputAzimuthDeg; }));
    f.push_back(doubleField("input", "fov_deg", [](Config& c) -> double& { return c.fovDeg; }));
    f.push_back(doubleField("input", "viewer_scale", [](Config& c) -> double& { return c.inputViewerScale; }));
    f.push_back(boolField("anchoring", "enabled", [](Config& c) -> bool& { return c.anchoring; }));
    f.push_back(intField("anchoring", "k", [](Config& c) -> int& { return c.anchors; }));
    f.push_back(doubleField("anchoring", "anchor_probability",
                            [](Config& c) -> double& { return c.anchorProbability; }));
    f.push_back(doubleField("anchoring", "gating_threshold",
                            [](Config& c) -> double& { return c.gatingThreshold; }));
    f.push_back(textField(
        "anchoring", "nearest",
        [](const Config& c) { return std::string(c.nearest == NearestMetric::Rotation ? "rotation" : "center"); },
        [](Config& c, const std::string& s, const std::string& path) {
          if (s == "rotation") {
            c.nearest = NearestMetric::Rotation;
          } else if (s == "center") {
            c.nearest = NearestMetric::Center;
          } else {
            configError(path, "expected rotation or center");
          }
        }));
    f.push_back(intField("anchoring", "ddim_steps", [](Config& c) -> int& { return c.ddimSteps; }));
    f.push_back(doubleField("anchoring", "guidance_scale", [](Config& c) -> double& { return c.guidanceScale; }));
    f.push_back(doubleField("noise", "start", [](Config& c) -> double& { return c.noiseStart; }));
    f.push_back(doubleField("noise", "end", [](Config& c) -> double& { return c.noiseEnd; }));
    {
      Field a{"noise", "anisotropy", {}, {}, {}};
      a.write = [](toml::table& t, const Config& c) {
        if (c.anisotropy) t.insert_or_assign("anisotropy", *c.anisotropy);
      };
      a.read = [](Config& c, const toml::node& n) { c.anisotropy = nodeAs<double>(n, "noise.anisotropy"); };
      a.parse = [](Config& c, const std::string& s) {
        if (s == "auto") {
          c.anisotropy.reset();
        } else {
          c.anisotropy = parseDouble(s, "noise.anisotropy");
        }
      };
      f.push_back(a);
    }
    f.push_back(doubleField("sampling", "azimuth_start_deg", [](Config& c) -> double& { return c.azimuthStartDeg; }));
    f.push_back(doubleField("sampling", "elevation_start_deg",
                            [](Config& c) -> double& { return c.elevationStartDeg; }));
    f.push_back(doubleField("sampling", "elevation_min_deg", [](Config& c) -> double& { return c.elevationMinDeg; }));
    f.push_back(doubleField("sampling", "elevation_max_deg", [](Config& c) -> double& { return c.elevationMaxDeg; }));
    {
      Field m{"metrics", "list", {}, {}, {}};
      m.write = [](toml::table& t, const Config& c) {
        toml::array arr;
        for (const auto& s : c.metrics) arr.push_back(s);
        t.insert_or_assign("list", arr);
      };
      m.read = [](Config& c, const toml::node& n) {
        const auto* arr = n.as_array();
        if (arr == nullptr) configError("metrics.list", "expected an array of strings");
        c.metrics.clear();
        for (const auto& item : *arr) c.metrics.push_back(nodeAs<std::string>(item, "metrics.list"));
      };
      m.parse = [](Config& c, const std::string& s) { c.metrics = splitList(s); };
      f.push_back(m);
    }
    f.push_back(textField(
        "metrics", "lpips_cmd", [](const Config& c) { return c.lpipsCommand; },
        [](Config& c, const std::string& s, const std::string&) { c.lpipsCommand = s; }));
    f.push_back(intField("preprocess", "size", [](Config& c) -> int& { return c.cropSize; }));
    return f;
  }();
  return all;
}

void validateMetrics(const Config& c) {
  for (const auto& m : c.metrics) {
    if (m != "psnr" && m != "ssim" && m != "lpips") {
      configError("metrics.list", "unknown metric '" + m + "'");
    }
  }
}

std::vector<StageConfig> parseStagesText(const std::string& s) {
  std::vector<StageConfig> out;
  for (const auto& item : splitList(s)) {
    StageConfig st;
    char x1 = 0;
    char x2 = 0;
    std::istringstream in(item);
    if (!(in >> st.steps >> x1 >> st.resolution >> x2 >> st.batch) || x1 != ':' || x2 != ':' ||
        !in.eof()) {
      configError("stages", "expected steps:resolution:batch entries, got '" + item + "'");
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace

std::string_view quantileMethodName(QuantileMethod m) {
  return m == QuantileMethod::Linear ? "linear" : "nearest_rank";
}

DistillConfig Config::distillConfig() const {
  DistillConfig d;
  d.seed = seed;
  d.inputRadius = inputRadius;
  d.inputElevation = degToRad(inputElevationDeg);
  d.inputAzimuth = degToRad(inputAzimuthDeg);
  d.fov = degToRad(fovDeg);
  d.viewerScale = inputViewerScale;
  d.anchoring = anchoring;
  d.anchors = anchors;
  d.anchorProbability = anchorProbability;
  d.gatingThreshold = gatingThreshold;
  d.metric = nearest;
  d.ddimSteps = ddimSteps;
  d.guidanceScale = guidanceScale;
  d.noiseStart = noiseStart;
  d.noiseEnd = noiseEnd;
  d.anisotropy = anisotropy;
  d.sampling.azimuthStartHalfWidth = degToRad(azimuthStartDeg);
  d.sampling.elevationStartHalfWidth = degToRad(elevationStartDeg);
  d.sampling.elevationMin = degToRad(elevationMinDeg);
  d.sampling.elevationMax = degToRad(elevationMaxDeg);
  d.stages = stages;
  return d;
}

Config parseConfig(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw Error(ErrorCode::ConfigError, msg.str());
  }
  Config c;
  std::set<std::string> sections;
  for (const auto& f : fields()) sections.insert(f.section);

  for (const auto& [name, node] : root) {
    const std::string section(name.str());
    if (section == "stages") {
      const auto* arr = node.as_array();
      if (arr == nullptr) configError("stages", "expected an array of tables ([[stages]])");
      c.stages.clear();
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto* t = arr->get(i)->as_table();
        const std::string base = "stages[" + std::to_string(i) + "]";
        if (t == nullptr) configError(base, "expected a table");
        StageConfig st;
        for (const auto& [k, v] : *t) {
          const std::string key(k.str());
          const auto value = static_cast<int>(nodeAs<std::int64_t>(v, base + "." + key));
          if (key == "steps") {
            st.steps = value;
          } else if (key == "resolution") {
            st.resolution = value;
          } else if (key == "batch") {
            st.batch = value;
          } else {
            configError(base + "." + key, "unknown key");
          }
        }
        c.stages.push_back(st);
      }
      continue;
    }
    if (!sections.contains(section)) configError(section, "unknown section");
    const auto* table = node.as_table();
    if (table == nullptr) configError(section, "expected a table");
    for (const auto& [k, v] : *table) {
      const std::string key(k.str());
      const auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields().end()) configError(section + "." + key, "unknown key");
      it->read(c, v);
    }
  }
  validateMetrics(c);
  c.distillConfig().validate();
  return c;
}

Config loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parseConfig(ss.str());
}

std::string dumpConfig(const Config& config) {
  toml::table root;
  for (const auto& f : fields()) {
    if (!root.contains(f.section)) root.insert(f.section, toml::table{});
    f.write(*root[f.section].as_table(), config);
  }
  toml::array stages;
  for (const auto& s : config.stages) {
    stages.push_back(toml::table{{"steps", s.steps}, {"resolution", s.resolution}, {"batch", s.batch}});
  }
  root.insert("stages", stages);
  std::ostringstream out;
  out << "# condkit effective configuration\n" << toml::toml_formatter(root) << '\n';
  return out.str();
}

void setConfigValue(Config& config, const std::string& key, const std::string& value) {
  if (key == "stages") {
    config.stages = parseStagesText(value);
    return;
  }
  const auto it = std::find_if(fields().begin(), fields().end(),
                               [&](const Field& f) { return f.path() == key; });
  if (it == fields().end()) configError(key, "unknown key");
  it->parse(config, value);
  validateMetrics(config);
}

void applyEnvironment(Config& config,
                      const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  const auto get = [&](const std::string& name) -> std::optional<std::string> {
    if (lookup) return lookup(name);
    const char* v = std::getenv(name.c_str());
    return v == nullptr ? std::nullopt : std::optional<std::string>(v);
  };
  const auto envName = [](std::string path) {
    for (char& ch : path) ch = ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return "CONDKIT_" + path;
  };
  for (const auto& key : configKeys()) {
    if (auto v = get(envName(key))) setConfigValue(config, key, *v);
  }
  if (auto v = get("CONDKIT_STAGES")) setConfigValue(config, "stages", *v);
}

std::vector<std::string> configKeys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.path());
  return out;
}

}  // namespace condkit
