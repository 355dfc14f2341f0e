#include "glidernav/mission.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glidernav/error.hpp"
#include "glidernav/formats.hpp"
#include "text_util.hpp"

namespace fs = std::filesystem;

namespace glidernav {

namespace {

constexpr double kFlowAverageStep = 60.0;  // s

std::size_t target_index_of(const TrackingMode& mode) {
  if (const auto* lc = std::get_if<LineControl>(&mode)) return lc->index;
  return 0;
}

std::uint64_t dive_seed(std::uint64_t seed, std::uint64_t dive) {
  std::uint64_t z = seed + (dive + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FlowVector mean_flow_along(const Trajectory& traj, const FlowSource& flow, double t0, double len) {
  FlowVector sum;
  int n = 0;
  for (double tau = 0.0; tau <= len + 1e-9; tau += kFlowAverageStep) {
    sum = sum + flow.sample(position_at(traj, t0 + tau), t0 + tau, OutOfDomain::kClamp);
    ++n;
  }
  return (1.0 / n) * sum;
}

std::string sim_report(const MissionConfig& cfg, const SimResult& r, std::size_t alerts) {
  int max_jump = 0;
  for (std::size_t k = 1; k < r.target_index.size(); ++k) {
    int jump = std::abs(static_cast<int>(r.target_index[k]) - static_cast<int>(r.target_index[k - 1]));
    max_jump = std::max(max_jump, jump);
  }
  nlohmann::json doc{
      {"status", std::string(to_string(r.status))},
      {"glider", cfg.glider_id},
      {"config_hash", cfg.hash},
      {"seed", cfg.seed},
      {"dives", r.events.size()},
      {"transits", r.transits},
      {"max_target_jump", max_jump},
      {"final_distance_m", r.final_distance},
      {"final_gps_distance_m", r.final_gps_distance},
      {"start_time", cfg.start_time},
      {"elapsed_s", r.elapsed},
      {"strong_flow_alerts", alerts},
      {"fusion",
       {{"u", r.fusion.residual_mean.u},
        {"v", r.fusion.residual_mean.v},
        {"last_update", r.fusion.last_update},
        {"n_updates", r.fusion.n_updates}}},
  };
  if (!r.events.empty()) {
    doc["last_fix"] = {r.events.back().gps_pos.lat, r.events.back().gps_pos.lon};
  }
  return doc.dump(2) + "\n";
}

}  // namespace

std::string_view to_string(SimStatus status) {
  switch (status) {
    case SimStatus::kArrived: return "arrived";
    case SimStatus::kDurationElapsed: return "duration_elapsed";
    case SimStatus::kTransitsDone: return "transits_done";
    case SimStatus::kDomainExit: return "domain_exit";
  }
  return "duration_elapsed";
}

SimResult run_sim(const MissionConfig& cfg, const std::string& out_dir) {
  SimResult r;
  TrackingMode mode = cfg.tracking_mode();
  const TrackParams tp = cfg.track_params();
  const DiveParams dp = cfg.dive_params();
  dp.validate();
  r.fusion.half_life = cfg.half_life;

  GliderState glider = make_glider(cfg.start, cfg.speed, cfg.start_time);
  LatLon fix = cfg.start;
  double t = cfg.start_time;
  const double t_stop = cfg.start_time + cfg.duration;
  bool reached_a_target = false;
  int dives_since_advance = 0;
  std::uint64_t dive_no = 0;
  r.track.push_back({t, glider.pos, glider.depth});

  for (;;) {
    const FusedFlow fused(cfg.model_flow, r.fusion);
    PlanOutcome plan = plan_from(mode, fix, t, cfg.glider_id, fused, tp);
    r.target_index.push_back(target_index_of(mode));
    if (plan.mission_complete) {
      r.status = SimStatus::kArrived;
      break;
    }
    if (plan.advanced) {
      if (reached_a_target && dives_since_advance > 0) ++r.transits;
      reached_a_target = true;
      dives_since_advance = 0;
      if (cfg.transits > 0 && r.transits >= cfg.transits) {
        r.status = SimStatus::kTransitsDone;
        break;
      }
    }
    if (t >= t_stop) {
      r.status = SimStatus::kDurationElapsed;
      break;
    }

    // Head for the first waypoint, or straight for the target when the
    // prediction reaches it first; a dive that would overshoot is cut short.
    double dive_len = std::min(cfg.surface_interval, t_stop - t);
    LatLon aim = plan.waypoints.front().pos;
    const auto& arrivals = plan.trajectory.arrivals;
    if (!arrivals.empty() && arrivals.front().t <= plan.waypoints.front().eta) {
      aim = current_target(mode);
      const double to_arrival = arrivals.front().t - t;
      if (to_arrival < dive_len) dive_len = std::min(dive_len, std::max(dp.dt, std::ceil(to_arrival / dp.dt) * dp.dt));
    }
    if (distance_m(fix, aim) < 1.0) {
      if (plan.trajectory.domain_exit) {
        r.status = SimStatus::kDomainExit;
        break;
      }
      aim = current_target(mode);
    }
    const FlowVector mean = mean_flow_along(plan.trajectory, fused, t, dive_len);
    const HeadingCommand cmd = flow_cancel_heading(fix, aim, mean, cfg.speed);

    DiveParams this_dive = dp;
    this_dive.surface_interval = dive_len;
    DiveResult dive = run_dive(glider, cmd.heading, *cfg.truth_flow, this_dive, dive_seed(cfg.seed, dive_no++),
                               cfg.glider_id);
    r.track.insert(r.track.end(), dive.track.begin() + (dive.track.empty() ? 0 : 1), dive.track.end());
    SurfacingEvent ev = dive.event;
    ev.start_pos = fix;
    ev.waypoint_active = {aim, cfg.arrival_radius, ev.t_end};
    r.events.push_back(ev);
    glider = dive.state;
    fix = ev.gps_pos;
    t = ev.t_end;
    ++dives_since_advance;
    if (ev.aborted) {
      r.status = SimStatus::kDomainExit;
      break;
    }
    try {
      r.fusion = update_residual(r.fusion, ev, *cfg.model_flow);
    } catch (const DomainError&) {
    }
  }

  r.elapsed = t - cfg.start_time;
  r.final_distance = distance_m(glider.pos, current_target(mode));
  r.final_gps_distance = distance_m(fix, current_target(mode));

  std::optional<ComparisonTable> table;
  std::size_t alerts = 0;
  if (!r.events.empty()) {
    table = run_flowcmp(cfg, r.events);
    alerts = detect_strong_flow(*table, cfg.strong_flow_threshold).size();
  }
  r.report_json = sim_report(cfg, r, alerts);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    detail::write_file_atomic((dir / "trajectory.csv").string(), track_csv(r.track));
    std::string log;
    for (const auto& ev : r.events) log += render_log_record(ev, "sim");
    detail::write_file_atomic((dir / "events.log").string(), log);
    if (table) {
      detail::write_file_atomic((dir / "flowcmp.csv").string(), emit_csv(*table));
      detail::write_file_atomic((dir / "flowcmp.svg").string(), emit_svg(*table));
    }
    detail::write_file_atomic((dir / "report.json").string(), r.report_json);
  }
  return r;
}

// ---------------------------------------------------------------- remote

RemoteMission::RemoteMission(MissionConfig cfg, Clock& clock, LinkFactory connect)
    : cfg_(std::move(cfg)), clock_(clock), mode_(cfg_.tracking_mode()) {
  fusion_.half_life = cfg_.half_life;
  PollState poll;
  if (!cfg_.checkpoint.empty()) {
    if (auto cp = load_checkpoint(cfg_.checkpoint, cfg_.hash)) {
      poll = cp->poll;
      fusion_ = cp->fusion;
      if (auto* lc = std::get_if<LineControl>(&mode_); lc && cp->line_control) {
        if (cp->line_control->index >= lc->targets.size()) {
          throw ConfigError("dockserver.checkpoint", "line-control index beyond the configured targets");
        }
        lc->index = cp->line_control->index;
        lc->direction = cp->line_control->direction;
      }
      last_glider_ = cp->last_glider;
      last_t1_ = cp->last_t1;
      resumed_ = true;
    }
  }
  if (!connect) {
    if (cfg_.endpoint.empty()) throw ConfigError("dockserver.endpoint", "required for remote missions");
    connect = [endpoint = cfg_.endpoint, token = cfg_.token]() -> std::unique_ptr<DockserverLink> {
      return std::make_unique<TcpDockserverClient>(endpoint, token);
    };
  }
  PilotOptions options;
  options.gliders = {cfg_.glider_id};
  options.poll_period = cfg_.poll_period;
  loop_ = std::make_unique<PilotLoop>(
      options, std::move(connect), [this](const SurfacingEvent& ev) { return handle(ev); }, clock_, poll);
  loop_->on_event([this](const EventReport& report, const PollState&) {
    last_glider_ = report.glider_id;
    last_t1_ = report.t_end;
    if (!cfg_.checkpoint.empty()) save_checkpoint(checkpoint(), cfg_.checkpoint);
    if (report_hook_) report_hook_(report);
  });
}

Checkpoint RemoteMission::checkpoint() const {
  Checkpoint cp;
  cp.config_hash = cfg_.hash;
  cp.poll = loop_->state();
  cp.fusion = fusion_;
  if (const auto* lc = std::get_if<LineControl>(&mode_)) cp.line_control = LineControl{{}, lc->index, lc->direction};
  cp.last_glider = last_glider_;
  cp.last_t1 = last_t1_;
  return cp;
}

std::optional<GotoFile> RemoteMission::handle(const SurfacingEvent& ev) {
  try {
    fusion_ = update_residual(fusion_, ev, *cfg_.model_flow);
  } catch (const DomainError&) {
  }
  const FusedFlow fused(cfg_.model_flow, fusion_);
  return plan(mode_, ev, fused, cfg_.track_params(), clock_.now()).goto_file;
}

// ---------------------------------------------------------------- utilities

PlanResult run_plan(const MissionConfig& cfg, const LatLon& start, const LatLon& goal) {
  if (!cfg.plan_bbox) throw ConfigError("planner.bbox", "required for planning");
  PlanGrid grid = PlanGrid::covering(*cfg.plan_bbox, cfg.plan_cell, cfg.start_time);
  grid.dt_plan = cfg.dt_plan;
  grid.horizon = cfg.plan_horizon;
  return astar_plan(start, goal, *cfg.model_flow, grid, cfg.speed);
}

std::vector<SurfacingEvent> load_events(std::string_view log_bytes, const std::string& glider_id) {
  auto parsed = parse_surfacing_log(log_bytes);
  std::vector<SurfacingEvent> events;
  for (auto& rec : parsed.records) {
    if (glider_id.empty() || rec.event.glider_id == glider_id) events.push_back(std::move(rec.event));
  }
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.t_end < b.t_end; });
  events.erase(std::unique(events.begin(), events.end(),
                           [](const auto& a, const auto& b) {
                             return a.glider_id == b.glider_id && a.t_end == b.t_end;
                           }),
               events.end());
  std::map<std::string, LatLon> last_fix;
  for (auto& ev : events) {
    auto it = last_fix.find(ev.glider_id);
    if (it != last_fix.end()) ev.start_pos = it->second;
    last_fix[ev.glider_id] = ev.gps_pos;
  }
  return events;
}

ComparisonTable run_flowcmp(const MissionConfig& cfg, const std::vector<SurfacingEvent>& events) {
  FusionState fusion;
  fusion.half_life = cfg.half_life;
  return build_table(events, *cfg.model_flow, fusion, cfg.shore_bearing, cfg.lattice_dt);
}

}  // namespace glidernav
