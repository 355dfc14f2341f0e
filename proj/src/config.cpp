#include "glidernav/config.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glidernav/dockserver.hpp"
#include "glidernav/error.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace glidernav {

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

// Thin typed accessors over the raw entries; every failure names its key.
class Entries {
 public:
  explicit Entries(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    auto it = raw_.find(key);
    return it == raw_.end() ? nullptr : &it->second;
  }

  std::string text(const std::string& key, std::string fallback) {
    const std::string* v = find(key);
    return v ? *v : fallback;
  }

  std::string required(const std::string& key) {
    const std::string* v = find(key);
    if (!v) throw ConfigError(key, "required");
    return *v;
  }

  double number(const std::string& key, double fallback, const std::function<bool(double)>& ok,
                std::string_view range) {
    const std::string* v = find(key);
    if (!v) return fallback;
    double x = 0.0;
    try {
      x = detail::to_double(*v);
    } catch (const ParseError&) {
      throw ConfigError(key, fmt::format("'{}' is not a number", *v));
    }
    if (!std::isfinite(x) || !ok(x)) throw ConfigError(key, fmt::format("{} is out of range ({})", *v, range));
    return x;
  }

  long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
    const std::string* v = find(key);
    if (!v) return fallback;
    long long x = 0;
    try {
      x = detail::to_int(*v);
    } catch (const ParseError&) {
      throw ConfigError(key, fmt::format("'{}' is not an integer", *v));
    }
    if (x < lo || x > hi) throw ConfigError(key, fmt::format("{} is out of range [{}, {}]", x, lo, hi));
    return x;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : raw_) {
      if (!used_.count(key)) throw ConfigError(key, "unknown key");
    }
  }

 private:
  std::map<std::string, std::string> raw_;
  std::set<std::string> used_;
};

bool positive(double x) { return x > 0.0; }

LatLon parse_position(const std::string& key, const std::string& value) {
  try {
    return parse_latlon(value);
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

FlowSourcePtr build_flow(const std::string& key, std::string& spec, const std::string& base_dir) {
  auto tokens = detail::split_ws(spec);
  if (tokens.size() == 2 && tokens[0] == "file") {
    std::string path = resolve(base_dir, std::string(tokens[1]));
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw ConfigError(key, "flow file not found: " + path);
    spec = "file " + path;
  }
  try {
    return make_flow(spec);
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace

std::optional<double> profile_speed(std::string_view profile) {
  if (profile == "franklin") return 0.28;
  if (profile == "usf-sam") return 0.25;
  return std::nullopt;
}

MissionConfig parse_config(std::string_view text, const std::string& base_dir) {
  std::map<std::string, std::string> raw;
  detail::LineReader reader(text);
  std::string_view line;
  int line_no = 0;
  while (reader.next(line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("line {}", line_no), "expected key = value");
    std::string key(detail::trim(line.substr(0, eq)));
    std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("line {}", line_no), "empty key");
    if (value.empty()) throw ConfigError(key, "empty value");
    if (!raw.emplace(key, value).second) throw ConfigError(key, "given more than once");
  }

  std::string canonical;
  for (const auto& [k, v] : raw) canonical += k + "=" + v + "\n";

  Entries e(raw);
  MissionConfig cfg;
  cfg.hash = fmt::format("{:016x}", detail::fnv1a(canonical));

  cfg.glider_id = e.text("glider.id", cfg.glider_id);
  if (!is_safe_name(cfg.glider_id)) throw ConfigError("glider.id", "must be a plain name without '/' or spaces");
  cfg.profile = e.text("glider.profile", "");
  if (!cfg.profile.empty()) {
    auto preset = profile_speed(cfg.profile);
    if (!preset) throw ConfigError("glider.profile", "unknown profile '" + cfg.profile + "' (franklin, usf-sam)");
    cfg.speed = *preset;
  }
  cfg.speed = e.number("glider.speed", cfg.speed, [](double x) { return x > 0.0 && x <= 2.0; }, "(0, 2] m/s");
  cfg.glide_angle_deg =
      e.number("glider.glide_angle_deg", cfg.glide_angle_deg, [](double x) { return x > 0.0 && x < 90.0; }, "(0, 90)");
  cfg.max_depth = e.number("glider.max_depth_m", cfg.max_depth, [](double x) { return x > 0.0 && x <= 1000.0; },
                           "(0, 1000] m");
  cfg.gps_noise = e.number("glider.gps_noise_m", cfg.gps_noise, [](double x) { return x >= 0.0 && x <= 1000.0; },
                           "[0, 1000] m");

  cfg.start = parse_position("deployment.start", e.required("deployment.start"));
  cfg.start_time = e.number("deployment.start_time", cfg.start_time, [](double x) { return x >= 0.0; }, ">= 0");
  cfg.shore_bearing = e.number("deployment.shore_bearing_deg", cfg.shore_bearing,
                               [](double x) { return x >= 0.0 && x < 360.0; }, "[0, 360)");
  cfg.surface_interval = e.number("deployment.surface_interval_s", cfg.surface_interval,
                                  [](double x) { return x >= 10.0 && x <= 86400.0; }, "[10, 86400] s");
  cfg.flow_spec = e.required("deployment.flow");
  cfg.truth_flow = build_flow("deployment.flow", cfg.flow_spec, base_dir);
  cfg.model_flow_spec = e.text("deployment.model_flow", cfg.flow_spec);
  FlowSourcePtr model = build_flow("deployment.model_flow", cfg.model_flow_spec, base_dir);
  if (const std::string* bias = e.find("deployment.model_bias")) {
    auto parts = detail::split_ws(*bias);
    try {
      if (parts.size() != 2) throw ParseError("expected 'u v'");
      cfg.model_bias = {detail::to_double(parts[0]), detail::to_double(parts[1])};
    } catch (const ParseError& err) {
      throw ConfigError("deployment.model_bias", err.what());
    }
    if (!(cfg.model_bias.speed() < kFlowSanityBound)) throw ConfigError("deployment.model_bias", "too large");
  }
  cfg.model_flow = cfg.model_bias == FlowVector{} ? model : std::make_shared<OffsetFlow>(model, cfg.model_bias);
  cfg.duration = e.number("deployment.duration_s", cfg.duration, [](double x) { return x > 0.0 && x <= 3.2e7; },
                          "(0, 3.2e7] s");
  cfg.seed = static_cast<std::uint64_t>(e.integer("deployment.seed", 1, 0, std::numeric_limits<long long>::max()));

  std::string mode = e.required("tracking.mode");
  if (mode == "virtual_mooring") {
    cfg.mode = TrackingKind::kVirtualMooring;
  } else if (mode == "line_control") {
    cfg.mode = TrackingKind::kLineControl;
  } else {
    throw ConfigError("tracking.mode", "expected virtual_mooring or line_control, got '" + mode + "'");
  }
  std::string targets = e.required("tracking.targets");
  for (std::size_t pos = 0;;) {
    auto semi = targets.find(';', pos);
    std::string item(detail::trim(std::string_view(targets).substr(pos, semi == std::string::npos ? semi : semi - pos)));
    cfg.targets.push_back(parse_position("tracking.targets", item));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  if (cfg.mode == TrackingKind::kVirtualMooring && cfg.targets.size() != 1) {
    throw ConfigError("tracking.targets", "virtual mooring takes exactly one target");
  }
  if (cfg.mode == TrackingKind::kLineControl && cfg.targets.size() < 2) {
    throw ConfigError("tracking.targets", "line control needs at least two targets");
  }
  cfg.horizon = e.number("tracking.horizon_s", cfg.horizon, [](double x) { return x == 43200.0 || x == 86400.0; },
                         "43200 or 86400");
  cfg.waypoint_spacing = e.number("tracking.waypoint_spacing_s", cfg.waypoint_spacing, positive, "> 0");
  cfg.arrival_radius = e.number("tracking.arrival_radius_m", cfg.arrival_radius,
                                [](double x) { return x > 0.0 && x <= 100000.0; }, "(0, 100000] m");
  cfg.predict_dt = e.number("tracking.predict_dt_s", cfg.predict_dt, [](double x) { return x > 0.0 && x <= 300.0; },
                            "(0, 300] s");
  cfg.transits = static_cast<int>(e.integer("tracking.transits", 0, 0, 100000));
  cfg.staleness = e.number("tracking.staleness_s", cfg.staleness, positive, "> 0");

  cfg.endpoint = e.text("dockserver.endpoint", "");
  if (!cfg.endpoint.empty()) {
    try {
      parse_endpoint(cfg.endpoint);
    } catch (const ParseError& err) {
      throw ConfigError("dockserver.endpoint", err.what());
    }
  }
  cfg.token = e.text("dockserver.token", "");
  if (cfg.token.find_first_of(" \t") != std::string::npos) throw ConfigError("dockserver.token", "must not contain spaces");
  cfg.poll_period = e.number("dockserver.poll_period_s", cfg.poll_period,
                             [](double x) { return x > 0.0 && x <= 3600.0; }, "(0, 3600] s");
  if (const std::string* cp = e.find("dockserver.checkpoint")) cfg.checkpoint = resolve(base_dir, *cp);

  cfg.half_life = e.number("fusion.half_life_s", cfg.half_life, positive, "> 0");

  if (const std::string* box = e.find("planner.bbox")) {
    auto semi = box->find(';');
    if (semi == std::string::npos) throw ConfigError("planner.bbox", "expected '<south-west>; <north-east>'");
    LatLon sw = parse_position("planner.bbox", std::string(detail::trim(std::string_view(*box).substr(0, semi))));
    LatLon ne = parse_position("planner.bbox", std::string(detail::trim(std::string_view(*box).substr(semi + 1))));
    if (!(sw.lat < ne.lat && sw.lon < ne.lon)) throw ConfigError("planner.bbox", "south-west must be below and left of north-east");
    cfg.plan_bbox = BBox{sw, ne};
  }
  cfg.plan_cell = e.number("planner.cell_m", cfg.plan_cell, [](double x) { return x >= 10.0; }, ">= 10 m");
  cfg.dt_plan = e.number("planner.dt_plan_s", cfg.dt_plan, positive, "> 0");
  cfg.plan_horizon = e.number("planner.horizon_s", cfg.plan_horizon, positive, "> 0");

  cfg.lattice_dt = e.number("flowcmp.lattice_dt_s", cfg.lattice_dt, [](double x) { return x >= 1.0; }, ">= 1 s");
  cfg.strong_flow_threshold = e.number("flowcmp.threshold", cfg.strong_flow_threshold, positive, "> 0");

  cfg.output_dir = resolve(base_dir, e.text("output.dir", "."));

  e.reject_unknown();
  return cfg;
}

MissionConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  fs::path dir = fs::path(path).parent_path();
  return parse_config(text, dir.empty() ? "." : dir.string());
}

TrackingMode MissionConfig::tracking_mode() const {
  if (mode == TrackingKind::kVirtualMooring) return VirtualMooring{targets.front()};
  return LineControl{targets, 0, +1};
}

TrackParams MissionConfig::track_params() const {
  TrackParams p;
  p.speed = speed;
  p.horizon = horizon;
  p.dt = predict_dt;
  p.arrival_radius = arrival_radius;
  p.waypoint_spacing = waypoint_spacing;
  p.staleness = staleness;
  return p;
}

DiveParams MissionConfig::dive_params() const {
  DiveParams p;
  p.max_depth = max_depth;
  p.glide_angle_deg = glide_angle_deg;
  p.surface_interval = surface_interval;
  p.gps_noise_sigma = gps_noise;
  return p;
}

// ---------------------------------------------------------------- checkpoint

std::string checkpoint_json(const Checkpoint& cp) {
  json gliders = json::object();
  for (const auto& [id, g] : cp.poll.gliders) {
    json files = json::object();
    for (const auto& [name, stamp] : g.files) files[name] = {stamp.size, stamp.mtime};
    json entry{{"files", files}};
    entry["last_event_t1"] = g.last_event_t1 ? json(*g.last_event_t1) : json(nullptr);
    entry["last_gps"] = g.last_gps ? json{g.last_gps->lat, g.last_gps->lon} : json(nullptr);
    gliders[id] = entry;
  }
  json doc{
      {"version", 1},
      {"config_hash", cp.config_hash},
      {"poll", {{"processed_events", cp.poll.processed_events}, {"gliders", gliders}}},
      {"fusion",
       {{"u", cp.fusion.residual_mean.u},
        {"v", cp.fusion.residual_mean.v},
        {"last_update", cp.fusion.last_update},
        {"half_life", cp.fusion.half_life},
        {"n_updates", cp.fusion.n_updates}}},
  };
  doc["line_control"] = cp.line_control
                            ? json{{"index", cp.line_control->index}, {"direction", cp.line_control->direction}}
                            : json(nullptr);
  doc["last_event"] = cp.last_t1 ? json{{"glider", cp.last_glider}, {"t1", *cp.last_t1}} : json(nullptr);
  return doc.dump(2) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  try {
    json doc = json::parse(text);
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported checkpoint version");
    Checkpoint cp;
    cp.config_hash = doc.at("config_hash").get<std::string>();
    const json& poll = doc.at("poll");
    cp.poll.processed_events = poll.at("processed_events").get<long long>();
    for (const auto& [id, entry] : poll.at("gliders").items()) {
      GliderPollState g;
      for (const auto& [name, stamp] : entry.at("files").items()) {
        g.files[name] = FileStamp{stamp.at(0).get<std::uint64_t>(), stamp.at(1).get<long long>()};
      }
      if (!entry.at("last_event_t1").is_null()) g.last_event_t1 = entry.at("last_event_t1").get<double>();
      if (!entry.at("last_gps").is_null()) {
        g.last_gps = LatLon{entry.at("last_gps").at(0).get<double>(), entry.at("last_gps").at(1).get<double>()};
      }
      cp.poll.gliders[id] = std::move(g);
    }
    const json& f = doc.at("fusion");
    cp.fusion.residual_mean = {f.at("u").get<double>(), f.at("v").get<double>()};
    cp.fusion.last_update = f.at("last_update").get<double>();
    cp.fusion.half_life = f.at("half_life").get<double>();
    cp.fusion.n_updates = f.at("n_updates").get<long long>();
    cp.fusion.validate();
    if (!doc.at("line_control").is_null()) {
      LineControl lc;
      lc.index = doc["line_control"].at("index").get<std::size_t>();
      lc.direction = doc["line_control"].at("direction").get<int>();
      if (lc.direction != 1 && lc.direction != -1) throw ParseError("line-control direction must be +-1");
      cp.line_control = lc;
    }
    if (!doc.at("last_event").is_null()) {
      cp.last_glider = doc["last_event"].at("glider").get<std::string>();
      cp.last_t1 = doc["last_event"].at("t1").get<double>();
    }
    return cp;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const RangeError& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
  detail::write_file_atomic(path, checkpoint_json(cp));
}

std::optional<Checkpoint> load_checkpoint(const std::string& path, const std::string& expected_hash) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  Checkpoint cp = parse_checkpoint(detail::read_file(path));
  if (cp.config_hash != expected_hash) {
    throw ConfigError("dockserver.checkpoint",
                      fmt::format("checkpoint {} was written under config {} but this config is {}", path,
                                  cp.config_hash, expected_hash));
  }
  return cp;
}

}  // namespace glidernav
