// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "glidernav/error.hpp"
#include "glidernav/flowcmp.hpp"
#include "glidernav/mission.hpp"
#include "support.hpp"

using namespace glidernav;
namespace fs = std::filesystem;
using Wall = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) detail = why;
    pass = pass && ok;
  }
};

double seconds_since(Wall::time_point t0) {
  return std::chrono::duration<double>(Wall::now() - t0).count();
}

// Distance of p from the infinite line through a and b, metres.
double cross_track(const LatLon& p, const LatLon& a, const LatLon& b) {
  const LocalVec ab = to_local(b, a);
  const LocalVec ap = to_local(p, a);
  return std::abs(ab.east * ap.north - ab.north * ap.east) / std::hypot(ab.east, ab.north);
}

const LatLon kTarget = parse_latlon("3118.0N, -8008.0E");

// ------------------------------------------------------------------ A1

Verdict a1_virtual_mooring() {
  Verdict v;
  testsupport::Gen gen(1001);
  double worst_xt = 0.0, worst_final = 0.0, worst_wall = 0.0;
  for (int seed = 1; seed <= 10; ++seed) {
    const double flow_dir = gen.uniform(0.0, 2.0 * kPi);
    const double start_dir = gen.uniform(0.0, 2.0 * kPi);
    const LatLon start = from_local({1e4 * std::sin(start_dir), 1e4 * std::cos(start_dir)}, kTarget);
    const std::string text = fmt::format(
        "glider.speed = 0.3\n"
        "deployment.start = {}\n"
        "deployment.flow = uniform {:.17g} {:.17g}\n"
        "deployment.surface_interval_s = 3600\n"
        "deployment.seed = {}\n"
        "tracking.mode = virtual_mooring\n"
        "tracking.targets = 3118.0N, -8008.0E\n",
        format_latlon(start), 0.15 * std::sin(flow_dir), 0.15 * std::cos(flow_dir), seed);
    const MissionConfig cfg = parse_config(text);
    const auto t0 = Wall::now();
    const SimResult r = run_sim(cfg);
    const double wall = seconds_since(t0);
    double xt = 0.0;
    for (const auto& s : r.track) xt = std::max(xt, cross_track(s.pos, cfg.start, kTarget));
    worst_xt = std::max(worst_xt, xt);
    worst_final = std::max(worst_final, r.final_gps_distance);
    worst_wall = std::max(worst_wall, wall);
    v.require(r.status == SimStatus::kArrived, fmt::format("seed {} ended {}", seed, to_string(r.status)));
    v.require(r.final_gps_distance <= cfg.arrival_radius,
              fmt::format("seed {} final distance {:.1f} m", seed, r.final_gps_distance));
    v.require(xt < 500.0, fmt::format("seed {} cross-track {:.1f} m", seed, xt));
    v.require(wall < 5.0, fmt::format("seed {} took {:.2f} s", seed, wall));
  }
  if (v.pass) {
    v.detail = fmt::format("10 seeds arrived; worst final {:.1f} m, worst cross-track {:.1f} m, slowest {:.3f} s",
                           worst_final, worst_xt, worst_wall);
  }
  return v;
}

// ------------------------------------------------------------------ A2

Verdict a2_line_control() {
  Verdict v;
  testsupport::Gen gen(1002);
  const LatLon a = from_local({-2500.0, 0.0}, kTarget);
  const LatLon b = from_local({2500.0, 0.0}, kTarget);
  const double dir = gen.uniform(0.0, 2.0 * kPi);
  const std::string text = fmt::format(
      "glider.speed = 0.3\n"
      "deployment.start = {}\n"
      "deployment.flow = uniform {:.17g} {:.17g}\n"
      "deployment.surface_interval_s = 3600\n"
      "deployment.duration_s = 432000\n"
      "tracking.mode = line_control\n"
      "tracking.targets = {}; {}\n",
      format_latlon(from_local({0.0, -3000.0}, kTarget)), 0.15 * std::sin(dir), 0.15 * std::cos(dir),
      format_latlon(a), format_latlon(b));
  const SimResult r = run_sim(parse_config(text));
  int max_jump = 0;
  for (std::size_t k = 1; k < r.target_index.size(); ++k) {
    max_jump = std::max(max_jump, std::abs(static_cast<int>(r.target_index[k]) - static_cast<int>(r.target_index[k - 1])));
  }
  v.require(r.elapsed >= 432000.0 - 1e-6 || r.status == SimStatus::kTransitsDone,
            fmt::format("ended early: {}", to_string(r.status)));
  v.require(r.transits >= 3, fmt::format("{} transits", r.transits));
  v.require(max_jump <= 1, fmt::format("target index jumped by {}", max_jump));
  if (v.pass) v.detail = fmt::format("{} transits in 5 days, max index jump {}", r.transits, max_jump);
  return v;
}

// ------------------------------------------------------------------ A3

Verdict a3_flow_cancel() {
  Verdict v;
  testsupport::Gen gen(1003);
  const double speed = 0.3;
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double bearing = gen.uniform(0.0, 360.0);
    const double b = bearing * kPi / 180.0;
    const double along = gen.uniform(-0.5, 0.5);
    const double cross = gen.uniform(-speed, speed);
    // Unit vectors along and to the right of the bearing.
    const FlowVector f{along * std::sin(b) + cross * std::cos(b), along * std::cos(b) - cross * std::sin(b)};
    const HeadingCommand c = flow_cancel_heading_for_bearing(bearing, f, speed);
    const double h = c.heading * kPi / 180.0;
    const double ge = speed * std::sin(h) + f.u;
    const double gn = speed * std::cos(h) + f.v;
    worst = std::max(worst, std::abs(ge * std::cos(b) - gn * std::sin(b)));
  }
  v.require(worst < 1e-9, fmt::format("cross-track ground speed {:.3g} m/s", worst));
  double jump = 0.0;
  for (double sign : {1.0, -1.0}) {
    const HeadingCommand in = flow_cancel_heading_for_bearing(0.0, {sign * speed, 0.0}, speed);
    const HeadingCommand out = flow_cancel_heading_for_bearing(0.0, {sign * speed * (1.0 + 1e-12), 0.0}, speed);
    jump = std::max(jump, std::abs(out.offset - in.offset));
    v.require(std::abs(std::abs(in.offset) - kPi / 2.0) < 1e-6, "boundary offset is not +-90 deg");
  }
  v.require(jump < 1e-6, fmt::format("offset jumps {:.3g} rad at the boundary", jump));
  if (v.pass) v.detail = fmt::format("worst cross-track {:.2g} m/s over 1e4 samples, boundary jump {:.2g} rad", worst, jump);
  return v;
}

// ------------------------------------------------------------------ A4

Verdict a4_flow_estimate() {
  Verdict v;
  testsupport::Gen gen(1004);
  const LatLon origin{31.0, -80.0};
  DiveParams p;
  p.gps_noise_sigma = 0.0;
  double worst_clean = 0.0;
  for (int k = 0; k < 200; ++k) {
    const FlowVector f{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
    const DiveResult d = run_dive(make_glider(origin, 0.28, 0.0), gen.uniform(0, 360), UniformFlow(f), p, gen.bits(), "g");
    worst_clean = std::max(worst_clean, (d.event.flow_estimate - f).speed());
  }
  v.require(worst_clean < 1e-6, fmt::format("noise-free error {:.3g} m/s", worst_clean));

  p.gps_noise_sigma = 5.0;
  const double bound = 3.0 * (5.0 * std::sqrt(2.0)) / 3600.0;
  int within = 0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    const FlowVector f{gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)};
    const DiveResult d = run_dive(make_glider(origin, 0.28, 0.0), gen.uniform(0, 360), UniformFlow(f), p, gen.bits(), "g");
    within += (d.event.flow_estimate - f).speed() < bound;
  }
  v.require(within >= 0.99 * n, fmt::format("{} of {} noisy dives within bound", within, n));
  if (v.pass) {
    v.detail = fmt::format("noise-free error {:.2g} m/s; {}/{} noisy dives under {:.5f} m/s", worst_clean, within, n, bound);
  }
  return v;
}

// ------------------------------------------------------------------ A5

PlanGrid planner_grid(std::size_t nx, std::size_t ny, double cell) {
  PlanGrid g;
  g.bbox.south_west = {31.0, -80.0};
  g.bbox.north_east = from_local({nx * cell, ny * cell}, g.bbox.south_west);
  g.cell = cell;
  g.nx = nx;
  g.ny = ny;
  g.horizon = 86400.0;
  return g;
}

Verdict a5_planner() {
  Verdict v;
  testsupport::Gen gen(1005);
  const auto t0 = Wall::now();
  int routed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nx = gen.integer(2, 10), ny = gen.integer(2, 10);
    const PlanGrid g = planner_grid(nx, ny, 1000.0);
    FlowGrid f;
    f.origin = {g.bbox.south_west.lat - 0.01, g.bbox.south_west.lon - 0.01};
    f.ny = 4;
    f.nx = 4;
    f.dlat = (g.bbox.north_east.lat - f.origin.lat + 0.01) / 3.0;
    f.dlon = (g.bbox.north_east.lon - f.origin.lon + 0.01) / 3.0;
    f.t0 = 0.0;
    f.dt = 21600.0;
    f.nt = 5;
    for (std::size_t k = 0; k < f.nt * f.ny * f.nx; ++k) f.frames.push_back({gen.uniform(-0.3, 0.3), gen.uniform(-0.3, 0.3)});
    const GridFlow flow(f);
    const LatLon s = g.center(gen.integer(0, static_cast<int>(nx) - 1), gen.integer(0, static_cast<int>(ny) - 1));
    const LatLon e = g.center(gen.integer(0, static_cast<int>(nx) - 1), gen.integer(0, static_cast<int>(ny) - 1));
    const PlanResult a = astar_plan(s, e, flow, g, 0.25);
    const PlanResult d = dijkstra_oracle(s, e, flow, g, 0.25);
    v.require(a.blocked == d.blocked, fmt::format("trial {} blocked mismatch", trial));
    v.require(a.blocked || a.total_time == d.total_time,
              fmt::format("trial {}: {} vs {}", trial, a.total_time, d.total_time));
    routed += !a.blocked;
  }
  const PlanGrid g3 = planner_grid(3, 3, 1000.0);
  const PlanResult corner = astar_plan(g3.center(0, 0), g3.center(2, 2), UniformFlow({0.0, 0.0}), g3, 0.25);
  v.require(!corner.blocked && std::abs(corner.total_time - 11313.7) <= 0.1,
            fmt::format("corner time {:.3f} s", corner.total_time));
  const double wall = seconds_since(t0);
  v.require(wall < 10.0, fmt::format("took {:.2f} s", wall));
  if (v.pass) {
    v.detail = fmt::format("50 instances equal to the oracle ({} routed); corner {:.2f} s; {:.3f} s total", routed,
                           corner.total_time, wall);
  }
  return v;
}

// ------------------------------------------------------------------ A6

Verdict a6_fusion() {
  Verdict v;
  const auto truth = make_flow("tide 0.15 44712 0");
  const auto model = std::make_shared<OffsetFlow>(truth, FlowVector{0.1, 0.0});
  DiveParams p;
  p.gps_noise_sigma = 0.0;
  GliderState g = make_glider({31.0, -80.3}, 0.28, 0.0);
  FusionState fusion;
  LatLon fix = g.pos;
  for (int k = 0; k < 10; ++k) {
    DiveResult d = run_dive(g, 45.0, *truth, p, static_cast<std::uint64_t>(k), "g");
    d.event.start_pos = fix;
    fusion = update_residual(fusion, d.event, *model);
    g = d.state;
    fix = d.event.gps_pos;
  }
  const FusedFlow fused(model, fusion);
  double se_fused = 0.0, se_model = 0.0;
  int n = 0;
  for (double t = g.clock; t <= g.clock + 43200.0 + 1e-9; t += 600.0) {
    for (double de : {-5000.0, 0.0, 5000.0}) {
      for (double dn : {-5000.0, 0.0, 5000.0}) {
        const LatLon q = from_local({de, dn}, fix);
        const FlowVector tv = truth->sample(q, t);
        const FlowVector ef = fused.sample(q, t) - tv;
        const FlowVector em = model->sample(q, t) - tv;
        se_fused += ef.u * ef.u + ef.v * ef.v;
        se_model += em.u * em.u + em.v * em.v;
        ++n;
      }
    }
  }
  const double rf = std::sqrt(se_fused / n), rm = std::sqrt(se_model / n);
  v.require(rf < 0.2 * rm, fmt::format("RMSE fused {:.4f} vs model {:.4f} (ratio {:.3f})", rf, rm, rf / rm));
  if (v.pass) v.detail = fmt::format("RMSE fused {:.4f} m/s vs model {:.4f} m/s, ratio {:.3f}", rf, rm, rf / rm);
  return v;
}

// ------------------------------------------------------------- A7 / A8

// Counts PUTs per file name for the duplicate check.
class CountingLink final : public DockserverLink {
 public:
  CountingLink(std::unique_ptr<DockserverLink> inner, std::map<std::string, int>& puts)
      : inner_(std::move(inner)), puts_(puts) {}
  std::vector<RemoteFile> list(const std::string& glider) override { return inner_->list(glider); }
  std::string get(const std::string& glider, const std::string& name) override { return inner_->get(glider, name); }
  void put(const std::string& glider, const std::string& name, std::string_view bytes) override {
    inner_->put(glider, name, bytes);
    ++puts_[name];
  }

 private:
  std::unique_ptr<DockserverLink> inner_;
  std::map<std::string, int>& puts_;
};

struct Deployment {
  static constexpr double kT0 = 1.7e9;
  testsupport::TempDir root;
  std::unique_ptr<MockDockserver> server;
  ManualClock clock{kT0};

  explicit Deployment(bool line_control = false, bool checkpoint = false) {
    fs::create_directories(root.path() / "unit_1");
    MockServerOptions o;
    o.root = root.str();
    o.endpoint = "127.0.0.1:0";
    o.token = "tok";
    server = std::make_unique<MockDockserver>(o);
    config_text =
        "glider.id = unit_1\n"
        "deployment.start = 3100.0N, -8018.0E\n"
        "deployment.flow = tide 0.15 44712 0\n"
        "dockserver.token = tok\n"
        "dockserver.poll_period_s = 10\n"
        "dockserver.endpoint = " +
        server->endpoint() + "\n";
    if (line_control) {
      config_text += "tracking.mode = line_control\ntracking.targets = 3100.0N, -8018.0E; 3118.0N, -8008.0E\n";
    } else {
      config_text += "tracking.mode = virtual_mooring\ntracking.targets = 3118.0N, -8008.0E\n";
    }
    if (checkpoint) config_text += "dockserver.checkpoint = cp.json\n";
  }

  MissionConfig config() const { return parse_config(config_text, root.str()); }

  // Makes a SURF record visible at t_vis; the glider surfaced at t_vis.
  void schedule_surfacing(double t_vis, double dive_len, const LatLon& gps) {
    clock.at(t_vis, [this, t_vis, dive_len, gps] {
      SurfacingEvent e;
      e.glider_id = "unit_1";
      e.t_start = t_vis - dive_len;
      e.t_end = t_vis;
      e.gps_pos = gps;
      e.deadreckon_pos = from_local({-50.0, 80.0}, gps);
      testsupport::spit(root / "unit_1/unit_1.log", render_log_record(e, "replay"), true);
    });
  }

  std::string config_text;
};

Verdict a7_dockserver_timing() {
  Verdict v;
  Deployment dep;
  testsupport::Gen gen(1007);
  struct Planned {
    double t_vis;
    double window;
  };
  std::map<double, Planned> planned;
  double t = dep.kT0 + 35.0;
  LatLon pos = parse_latlon("3100.0N, -8018.0E");
  for (int k = 0; k < 100; ++k) {
    const bool short_window = k % 3 == 0;
    const double dive = short_window ? std::round(gen.uniform(60.0, 600.0)) : std::round(gen.uniform(600.0, 3600.0));
    t += dive + gen.uniform(0.0, 9.999);
    pos = from_local({gen.uniform(-300, 300), gen.uniform(200, 800)}, pos);
    dep.schedule_surfacing(t, dive, pos);
    planned[t] = {t, short_window ? 60.0 : 900.0};
  }
  std::map<std::string, int> puts;
  double max_link_latency = 0.0;
  LinkFactory factory = [&]() -> std::unique_ptr<DockserverLink> {
    auto tcp = std::make_unique<TcpDockserverClient>(dep.server->endpoint(), "tok");
    auto lat = std::make_unique<LatencyLink>(std::move(tcp), dep.clock, [&] {
      const double s = gen.uniform(0.0, 0.5);
      max_link_latency = std::max(max_link_latency, s);
      return s;
    });
    return std::make_unique<CountingLink>(std::move(lat), puts);
  };
  RemoteMission mission(dep.config(), dep.clock, factory);
  std::vector<EventReport> reports;
  mission.on_report([&](const EventReport& r) { reports.push_back(r); });
  const double give_up = t + 3600.0;
  mission.run([&] { return reports.size() < 100 && dep.clock.now() < give_up; });

  v.require(reports.size() == 100, fmt::format("{} of 100 events captured", reports.size()));
  double worst = 0.0, worst_short = 0.0;
  int short_events = 0;
  for (const auto& r : reports) {
    const auto it = planned.find(r.t_end);
    if (it == planned.end()) {
      v.require(false, fmt::format("unexpected event t1={}", r.t_end));
      continue;
    }
    v.require(!r.goto_name.empty(), fmt::format("event t1={} produced no goto: {}", r.t_end, r.skipped));
    const double lag = r.uploaded_at - it->second.t_vis;
    worst = std::max(worst, lag);
    if (it->second.window == 60.0) {
      ++short_events;
      worst_short = std::max(worst_short, lag);
      v.require(lag < it->second.window, fmt::format("60 s window missed by event t1={}", r.t_end));
    }
    v.require(lag < 30.0, fmt::format("event t1={} uploaded {:.2f} s after visibility", r.t_end, lag));
  }
  for (const auto& [name, n] : puts) v.require(n == 1, fmt::format("{} uploaded {} times", name, n));
  v.require(max_link_latency <= 0.5, "link latency above 500 ms");
  if (v.pass) {
    v.detail = fmt::format("100/100 captured; worst upload {:.2f} s after visibility ({:.2f} s over {} 60 s windows)",
                           worst, worst_short, short_events);
  }
  return v;
}

struct Killed {};

struct ReplayOutcome {
  std::map<std::string, std::string> gotos;  ///< name -> bytes on the server
  std::map<std::string, int> puts;
  std::size_t events = 0;
};

// Replays 20 surfacings; with kill_after > 0 the loop dies right after that
// event and a fresh mission resumes from the checkpoint.
ReplayOutcome replay(int kill_after) {
  Deployment dep(true, true);
  testsupport::Gen gen(1008);
  double t = dep.kT0 + 35.0;
  LatLon pos = parse_latlon("3100.0N, -8018.0E");
  for (int k = 0; k < 20; ++k) {
    const double dive = std::round(gen.uniform(600.0, 3600.0));
    t += dive;
    pos = from_local({gen.uniform(-500, 500), gen.uniform(500, 1500)}, pos);
    dep.schedule_surfacing(t, dive, pos);
  }
  ReplayOutcome out;
  LinkFactory factory = [&]() -> std::unique_ptr<DockserverLink> {
    return std::make_unique<CountingLink>(std::make_unique<TcpDockserverClient>(dep.server->endpoint(), "tok"),
                                          out.puts);
  };
  const double give_up = t + 3600.0;
  std::size_t handled = 0;
  auto keep_going = [&] { return handled < 20 && dep.clock.now() < give_up; };
  try {
    RemoteMission first(dep.config(), dep.clock, factory);
    first.on_report([&](const EventReport&) {
      ++handled;
      if (kill_after > 0 && handled == static_cast<std::size_t>(kill_after)) throw Killed{};
    });
    first.run(keep_going);
  } catch (const Killed&) {
    RemoteMission resumed(dep.config(), dep.clock, factory);
    if (!resumed.resumed()) return out;
    resumed.on_report([&](const EventReport&) { ++handled; });
    resumed.run(keep_going);
  }
  out.events = handled;
  for (const auto& entry : fs::directory_iterator(dep.root.path() / "unit_1")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("goto_", 0) == 0) out.gotos[name] = testsupport::slurp(entry.path().string());
  }
  return out;
}

Verdict a8_crash_recovery() {
  Verdict v;
  const ReplayOutcome reference = replay(0);
  v.require(reference.events == 20 && reference.gotos.size() == 20,
            fmt::format("uninterrupted run produced {} gotos", reference.gotos.size()));
  for (int k : {1, 5, 10, 13, 19}) {
    const ReplayOutcome r = replay(k);
    v.require(r.events == 20, fmt::format("kill after {}: {} events handled", k, r.events));
    v.require(r.gotos == reference.gotos, fmt::format("kill after {}: goto sequence differs", k));
    for (const auto& [name, n] : r.puts) {
      v.require(n == 1, fmt::format("kill after {}: {} uploaded {} times", k, name, n));
    }
  }
  if (v.pass) v.detail = "kills after events 1, 5, 10, 13, 19 of 20 reproduce all 20 gotos byte for byte";
  return v;
}

// ------------------------------------------------------------------ A9

Verdict a9_flowcmp() {
  Verdict v;
  testsupport::Gen gen(1009);
  int fired = 0;
  for (int k = 0; k < 5000; ++k) {
    const double g = gen.uniform(0.0, 0.6), f = gen.uniform(0.0, 0.6);
    const double gd = gen.uniform(0, 2 * kPi), fd = gen.uniform(0, 2 * kPi);
    ComparisonTable t;
    t.rows.push_back({0.0, FlowSourceKind::kFused, f * std::sin(fd), f * std::cos(fd), 0.0, 0.0});
    t.rows.push_back({50.0, FlowSourceKind::kGlider, g * std::sin(gd), g * std::cos(gd), 0.0, 0.0});
    t.rows.push_back({100.0, FlowSourceKind::kFused, f * std::sin(fd), f * std::cos(fd), 0.0, 0.0});
    const bool alert = !detect_strong_flow(t, 0.3).empty();
    fired += alert;
    v.require(alert == (g > 0.3 && f > 0.3), fmt::format("glider {:.4f} fused {:.4f}", g, f));
  }
  for (double dt : {600.0, 700.0, 3600.0}) {
    const MissionConfig cfg = parse_config(fmt::format(
        "deployment.start = 3100.0N, -8018.0E\n"
        "deployment.flow = tide 0.35 44712 0\n"
        "deployment.duration_s = 86400\n"
        "deployment.model_bias = 0.05 -0.02\n"
        "tracking.mode = virtual_mooring\n"
        "tracking.targets = 3118.0N, -8008.0E\n"
        "flowcmp.lattice_dt_s = {}\n",
        dt));
    const SimResult r = run_sim(cfg);
    const ComparisonTable table = run_flowcmp(cfg, r.events);
    double last_fused = -1.0;
    for (const auto& row : table.rows) {
      if (row.source == FlowSourceKind::kFused) last_fused = std::max(last_fused, row.t);
    }
    v.require(last_fused == r.events.back().t_end + 43200.0,
              fmt::format("fused series ends {} s after the last event", last_fused - r.events.back().t_end));
    const std::string csv = emit_csv(table);
    v.require(parse_csv(csv) == table && emit_csv(parse_csv(csv)) == csv, "CSV round trip changed the table");
  }
  if (v.pass) v.detail = fmt::format("alert rule exact over 5000 cases ({} fired); +12 h series and CSV identity hold", fired);
  return v;
}

// ------------------------------------------------------------------ A10

Verdict a10_journey_replay() {
  Verdict v;
  testsupport::TempDir out;
  const MissionConfig cfg = parse_config(
      "glider.id = journey\n"
      "deployment.start = 3100.0N, -8018.0E\n"
      "deployment.flow = tide 0.15 44712 0\n"
      "tracking.mode = virtual_mooring\n"
      "tracking.targets = 3118.0N, -8008.0E\n");
  v.require(std::abs(cfg.start.lat - 31.0) < 1e-12 && std::abs(cfg.start.lon + 80.3) < 1e-12, "start is not (31.0, -80.3)");
  const SimResult r = run_sim(cfg, out.str());
  v.require(r.status == SimStatus::kArrived, fmt::format("ended {}", to_string(r.status)));

  // Distance to target at each surfacing, read back from the trajectory CSV.
  std::map<double, LatLon> at;
  std::istringstream csv(testsupport::slurp(out / "trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    double t, lat, lon, depth;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &lat, &lon, &depth) == 4) at[t] = {lat, lon};
  }
  std::vector<double> dist{distance_m(cfg.start, kTarget)};
  for (const auto& ev : r.events) {
    const auto it = at.find(ev.t_end);
    if (it == at.end()) {
      v.require(false, fmt::format("no trajectory sample at surfacing {}", ev.t_end));
      break;
    }
    dist.push_back(distance_m(it->second, kTarget));
  }
  int decreasing = 0;
  for (std::size_t k = 1; k < dist.size(); ++k) decreasing += dist[k] < dist[k - 1];
  const int intervals = static_cast<int>(dist.size()) - 1;
  v.require(intervals > 0 && decreasing >= 0.9 * intervals,
            fmt::format("{} of {} intervals closed on the target", decreasing, intervals));
  if (v.pass) {
    v.detail = fmt::format("arrived after {} dives ({:.1f} h); {}/{} intervals closed on the target", r.events.size(),
                           r.elapsed / 3600.0, decreasing, intervals);
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"A1", a1_virtual_mooring}, {"A2", a2_line_control},       {"A3", a3_flow_cancel},
      {"A4", a4_flow_estimate},   {"A5", a5_planner},            {"A6", a6_fusion},
      {"A7", a7_dockserver_timing}, {"A8", a8_crash_recovery},   {"A9", a9_flowcmp},
      {"A10", a10_journey_replay},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = fmt::format("threw: {}", e.what());
    }
    std::printf("%s %s %s\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
