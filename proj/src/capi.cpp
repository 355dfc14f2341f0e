#include "glidernav/glidernav.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "glidernav/config.hpp"
#include "glidernav/dockserver.hpp"
#include "glidernav/error.hpp"
#include "glidernav/flow.hpp"
#include "glidernav/flowcmp.hpp"
#include "glidernav/geo.hpp"
#include "glidernav/mission.hpp"
#include "text_util.hpp"

using namespace glidernav;

struct gn_config {
  MissionConfig cfg;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

gn_status fail(gn_status status, std::string message, std::string key = {}) {
  g_error = std::move(message);
  g_error_key = std::move(key);
  return status;
}

// Maps the exception in flight to a status.
gn_status translate() {
  try {
    throw;
  } catch (const ConfigError& e) {
    return fail(GN_ERR_CONFIG, e.what(), e.key());
  } catch (const AuthError& e) {
    return fail(GN_ERR_AUTH, e.what());
  } catch (const ConnectionError& e) {
    return fail(GN_ERR_CONNECT, e.what());
  } catch (const ProtocolError& e) {
    return fail(GN_ERR_CONNECT, e.what());
  } catch (const ParseError& e) {
    return fail(GN_ERR_PARSE, e.what());
  } catch (const RangeError& e) {
    return fail(GN_ERR_RANGE, e.what());
  } catch (const DomainError& e) {
    return fail(GN_ERR_DOMAIN, e.what());
  } catch (const Error& e) {
    return fail(GN_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(GN_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GN_ERR_INTERNAL, "unknown error");
  }
}

template <typename F>
gn_status guarded(F&& body) {
  try {
    body();
    g_error.clear();
    g_error_key.clear();
    return GN_OK;
  } catch (...) {
    return translate();
  }
}

char* dup_string(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

// Real time, but every sleep wakes early once `stop` is raised.
class StoppableClock final : public Clock {
 public:
  explicit StoppableClock(const std::atomic<bool>& stop) : stop_(stop) {}
  double now() const override { return system_.now(); }
  void sleep_for(double seconds) override {
    const double until = system_.now() + seconds;
    while (!stop_.load()) {
      double left = until - system_.now();
      if (left <= 0.0) break;
      std::this_thread::sleep_for(std::chrono::duration<double>(std::min(left, 0.1)));
    }
  }

 private:
  SystemClock system_;
  const std::atomic<bool>& stop_;
};

}  // namespace

struct gn_remote {
  std::atomic<bool> stop{false};
  StoppableClock clock{stop};
  std::unique_ptr<RemoteMission> mission;
  gn_log_fn log = nullptr;
  void* log_user = nullptr;
};

struct gn_flow {
  FlowSourcePtr source;
};

struct gn_mock_server {
  std::unique_ptr<MockDockserver> server;
};

extern "C" {

const char* gn_version(void) { return "0.1.0"; }
const char* gn_last_error(void) { return g_error.c_str(); }
const char* gn_last_error_key(void) { return g_error_key.c_str(); }
void gn_string_free(char* s) { std::free(s); }

gn_status gn_parse_latlon(const char* text, double* lat, double* lon) {
  if (!text || !lat || !lon) return fail(GN_ERR_INVALID, "null argument");
  return guarded([&] {
    LatLon p = parse_latlon(text);
    *lat = p.lat;
    *lon = p.lon;
  });
}

gn_status gn_format_latlon(double lat, double lon, char** out) {
  if (!out) return fail(GN_ERR_INVALID, "null argument");
  return guarded([&] { *out = dup_string(format_latlon({lat, lon})); });
}

gn_status gn_config_load(const char* path, gn_config** out) {
  if (!path || !out) return fail(GN_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gn_config{load_config(path)}; });
}

gn_status gn_config_parse(const char* text, const char* base_dir, gn_config** out) {
  if (!text || !out) return fail(GN_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gn_config{parse_config(text, base_dir ? base_dir : ".")}; });
}

void gn_config_free(gn_config* cfg) { delete cfg; }

const char* gn_config_output_dir(const gn_config* cfg) { return cfg ? cfg->cfg.output_dir.c_str() : ""; }
const char* gn_config_hash(const gn_config* cfg) { return cfg ? cfg->cfg.hash.c_str() : ""; }

gn_status gn_run_sim(const gn_config* cfg, const char* out_dir, gn_sim_summary* summary, char** report_json) {
  if (!cfg) return fail(GN_ERR_INVALID, "null config");
  return guarded([&] {
    SimResult r = run_sim(cfg->cfg, out_dir ? out_dir : "");
    if (summary) {
      summary->status = static_cast<gn_sim_status>(r.status);
      summary->dives = r.events.size();
      summary->transits = r.transits;
      summary->final_distance_m = r.final_distance;
      summary->elapsed_s = r.elapsed;
    }
    if (report_json) *report_json = dup_string(r.report_json);
  });
}

gn_status gn_remote_create(const gn_config* cfg, gn_remote** out) {
  if (!cfg || !out) return fail(GN_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = std::make_unique<gn_remote>();
    r->mission = std::make_unique<RemoteMission>(cfg->cfg, r->clock);
    gn_remote* raw = r.get();
    r->mission->on_alert([raw](const std::string& msg) {
      if (raw->log) raw->log(("alert: " + msg).c_str(), raw->log_user);
    });
    r->mission->on_report([raw](const EventReport& rep) {
      if (!raw->log) return;
      std::string line = rep.goto_name.empty()
                             ? fmt::format("surfacing {} at {}: skipped ({})", rep.glider_id, rep.t_end, rep.skipped)
                             : fmt::format("surfacing {} at {}: uploaded {} ({:.1f} s after detection)",
                                           rep.glider_id, rep.t_end, rep.goto_name, rep.uploaded_at - rep.detected_at);
      raw->log(line.c_str(), raw->log_user);
    });
    *out = r.release();
  });
}

void gn_remote_set_log(gn_remote* r, gn_log_fn fn, void* user) {
  if (!r) return;
  r->log = fn;
  r->log_user = user;
}

gn_status gn_remote_poll_once(gn_remote* r) {
  if (!r) return fail(GN_ERR_INVALID, "null handle");
  return guarded([&] { r->mission->poll_once(); });
}

gn_status gn_remote_run(gn_remote* r) {
  if (!r) return fail(GN_ERR_INVALID, "null handle");
  return guarded([&] { r->mission->run([r] { return !r->stop.load(); }); });
}

void gn_remote_stop(gn_remote* r) {
  if (r) r->stop.store(true);
}

long long gn_remote_processed_events(const gn_remote* r) {
  return r ? r->mission->checkpoint().poll.processed_events : 0;
}

int gn_remote_resumed(const gn_remote* r) { return r && r->mission->resumed() ? 1 : 0; }

void gn_remote_free(gn_remote* r) { delete r; }

gn_status gn_plan(const gn_config* cfg, double start_lat, double start_lon, double goal_lat, double goal_lon,
                  char** csv, double* total_time_s) {
  if (!cfg) return fail(GN_ERR_INVALID, "null config");
  bool blocked = false;
  gn_status st = guarded([&] {
    PlanResult r = run_plan(cfg->cfg, {start_lat, start_lon}, {goal_lat, goal_lon});
    if (total_time_s) *total_time_s = r.total_time;
    blocked = r.blocked;
    if (csv && !r.blocked) *csv = dup_string(plan_csv(r));
  });
  if (st == GN_OK && blocked) {
    return fail(GN_ERR_BLOCKED, fmt::format("no path found within the {} s planning horizon", cfg->cfg.plan_horizon));
  }
  return st;
}

gn_status gn_flowcmp(const gn_config* cfg, const char* events_path, char** csv, char** svg, char** alerts,
                     size_t* n_alerts) {
  if (!cfg || !events_path) return fail(GN_ERR_INVALID, "null argument");
  return guarded([&] {
    auto events = load_events(detail::read_file(events_path));
    if (events.empty()) throw RangeError(fmt::format("{} holds no surfacing records", events_path));
    ComparisonTable table = run_flowcmp(cfg->cfg, events);
    auto found = detect_strong_flow(table, cfg->cfg.strong_flow_threshold);
    std::string lines;
    for (const auto& a : found) {
      lines += fmt::format("{} {} {} {}\n", a.t, a.glider_speed, a.fused_speed, a.model_speed);
    }
    if (csv) *csv = dup_string(emit_csv(table));
    if (svg) *svg = dup_string(emit_svg(table));
    if (alerts) *alerts = dup_string(lines);
    if (n_alerts) *n_alerts = found.size();
  });
}

gn_status gn_flow_create(const char* spec, gn_flow** out) {
  if (!spec || !out) return fail(GN_ERR_INVALID, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new gn_flow{make_flow(spec)}; });
}

void gn_flow_free(gn_flow* f) { delete f; }

gn_status gn_flow_sample(const gn_flow* f, double lat, double lon, double t, double* u, double* v) {
  if (!f || !u || !v) return fail(GN_ERR_INVALID, "null argument");
  return guarded([&] {
    FlowVector s = f->source->sample({lat, lon}, t);
    *u = s.u;
    *v = s.v;
  });
}

gn_status gn_flow_write_grid(const gn_flow* f, double lat0, double lon0, double dlat, double dlon, size_t ny,
                             size_t nx, double t0, double dt, size_t nt, const char* path) {
  if (!f || !path) return fail(GN_ERR_INVALID, "null argument");
  return guarded([&] {
    FlowGrid g = rasterize(*f->source, {lat0, lon0}, dlat, dlon, ny, nx, t0, dt, nt);
    write_grid_file(g, path);
  });
}

gn_status gn_mock_server_start(const char* root, const char* endpoint, const char* token, int latency_ms,
                               gn_mock_server** out) {
  if (!root || !endpoint || !token || !out) return fail(GN_ERR_INVALID, "null argument");
  if (latency_ms < 0) return fail(GN_ERR_RANGE, "latency must not be negative");
  *out = nullptr;
  return guarded([&] {
    MockServerOptions options;
    options.root = root;
    options.endpoint = endpoint;
    options.token = token;
    options.latency = std::chrono::milliseconds(latency_ms);
    *out = new gn_mock_server{std::make_unique<MockDockserver>(options)};
  });
}

int gn_mock_server_port(const gn_mock_server* s) { return s ? s->server->port() : 0; }

void gn_mock_server_stop(gn_mock_server* s) { delete s; }

}  // extern "C"
