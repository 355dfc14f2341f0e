#include "glidernav/track.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "glidernav/error.hpp"

namespace glidernav {
namespace {

// Closer than this counts as sitting on the target.
constexpr double kOnTargetM = 1e-3;

}  // namespace

HeadingCommand flow_cancel_heading_for_bearing(double bearing_deg, const FlowVector& flow, double speed) {
  if (!(speed > 0.0)) throw RangeError("speed must be positive");
  const double b = bearing_deg * kDegToRad;
  // Unit vector to the right of the line of sight.
  const double f_cross = flow.u * std::cos(b) - flow.v * std::sin(b);
  HeadingCommand cmd;
  if (std::fabs(f_cross) <= speed) {
    cmd.offset = std::asin(-f_cross / speed);
    cmd.status = CancelStatus::kFeasible;
  } else {
    cmd.offset = -std::copysign(kPi / 2.0, f_cross);
    cmd.status = CancelStatus::kFlowDominated;
  }
  cmd.heading = wrap_deg(bearing_deg + cmd.offset * kRadToDeg);
  return cmd;
}

HeadingCommand flow_cancel_heading(const LatLon& p, const LatLon& target, const FlowVector& flow,
                                   double speed) {
  if (p == target) throw RangeError("flow_cancel_heading: position equals target");
  return flow_cancel_heading_for_bearing(bearing_deg(p, target), flow, speed);
}

void LineControl::advance() {
  if (targets.size() < 2) throw RangeError("line control needs at least two targets");
  const auto next = static_cast<long long>(index) + direction;
  if (next < 0 || next >= static_cast<long long>(targets.size())) direction = -direction;
  index = static_cast<std::size_t>(static_cast<long long>(index) + direction);
}

const LatLon& current_target(const TrackingMode& mode) {
  if (const auto* vm = std::get_if<VirtualMooring>(&mode)) return vm->target;
  const auto& lc = std::get<LineControl>(mode);
  if (lc.index >= lc.targets.size()) throw RangeError("line control index out of range");
  return lc.targets[lc.index];
}

void TrackParams::validate() const {
  if (!(speed > 0.0)) throw RangeError("speed must be positive");
  if (!(horizon > 0.0)) throw RangeError("horizon must be positive");
  if (!(dt > 0.0) || dt > 300.0) throw RangeError("prediction dt must be in (0, 300] s");
  if (!(arrival_radius > 0.0)) throw RangeError("arrival radius must be positive");
  if (!(waypoint_spacing > 0.0)) throw RangeError("waypoint spacing must be positive");
  if (!(staleness > 0.0)) throw RangeError("staleness bound must be positive");
}

Trajectory predict_trajectory(const LatLon& p0, double t0, TrackingMode mode,
                              const FlowSource& flow, const TrackParams& params) {
  params.validate();
  Trajectory traj;
  traj.samples.push_back({t0, p0});
  LatLon p = p0;
  double t = t0;
  const double t_end = t0 + params.horizon;
  long long steps = 0;
  long long feasible = 0;
  int stalled = 0;
  auto* line = std::get_if<LineControl>(&mode);

  auto on_arrival = [&](double when) {
    traj.arrivals.push_back({when, line ? line->index : 0});
    if (line) {
      line->advance();
      return false;
    }
    traj.arrived = true;
    return true;
  };

  while (t < t_end) {
    const LatLon& target = current_target(mode);
    const LocalVec to_target = to_local(target, p);
    const double dist = to_target.norm();
    if (dist < kOnTargetM) {
      if (on_arrival(t)) break;
      // Coincident line-control targets would otherwise spin without advancing time.
      if (++stalled > static_cast<int>(line->targets.size())) break;
      continue;
    }
    stalled = 0;
    FlowVector f;
    try {
      f = flow.sample(p, t);
    } catch (const DomainError&) {
      traj.domain_exit = true;
      break;
    }
    const HeadingCommand cmd = flow_cancel_heading_for_bearing(
        wrap_deg(std::atan2(to_target.east, to_target.north) * kRadToDeg), f, params.speed);
    ++steps;
    if (cmd.status == CancelStatus::kFeasible) ++feasible;

    const double psi = cmd.heading * kDegToRad;
    const LocalVec v{params.speed * std::sin(psi) + f.u, params.speed * std::cos(psi) + f.v};
    const double g_along = (v.east * to_target.east + v.north * to_target.north) / dist;
    const double h = std::min(params.dt, t_end - t);
    if (g_along > 0.0 && dist <= g_along * h) {
      t += dist / g_along;
      p = target;
      traj.samples.push_back({t, p});
      if (on_arrival(t)) break;
      continue;
    }
    p = from_local(h * v, p);
    t = (h == params.dt) ? t + h : t_end;
    traj.samples.push_back({t, p});
    // A flow-dominated glider may hover inside the radius without ever landing on the target.
    if (cmd.status == CancelStatus::kFlowDominated && distance_m(p, target) <= params.arrival_radius) {
      if (on_arrival(t)) break;
    }
  }
  traj.feasible_fraction = steps == 0 ? 1.0 : static_cast<double>(feasible) / static_cast<double>(steps);
  return traj;
}

LatLon position_at(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (s.empty()) throw RangeError("empty trajectory");
  if (t <= s.front().t) return s.front().pos;
  if (t >= s.back().t) return s.back().pos;
  auto hi = std::lower_bound(s.begin(), s.end(), t,
                             [](const TimedPos& a, double x) { return a.t < x; });
  auto lo = std::prev(hi);
  const double w = (t - lo->t) / (hi->t - lo->t);
  return {lo->pos.lat + w * (hi->pos.lat - lo->pos.lat), lo->pos.lon + w * (hi->pos.lon - lo->pos.lon)};
}

std::vector<Waypoint> extract_waypoints(const Trajectory& traj, double spacing, double arrival_radius) {
  if (traj.samples.empty()) throw RangeError("cannot extract waypoints from an empty trajectory");
  if (!(spacing > 0.0)) throw RangeError("waypoint spacing must be positive");
  if (!(arrival_radius > 0.0)) throw RangeError("arrival radius must be positive");

  const double t0 = traj.samples.front().t;
  const double t_last = traj.samples.back().t;
  std::vector<Waypoint> out;
  auto add = [&](double t, const LatLon& pos) {
    if (!out.empty() && distance_m(out.back().pos, pos) < arrival_radius) {
      out.back() = {pos, arrival_radius, t};
    } else {
      out.push_back({pos, arrival_radius, t});
    }
  };
  for (long long k = 1;; ++k) {
    const double t = t0 + static_cast<double>(k) * spacing;
    if (t >= t_last) break;
    add(t, position_at(traj, t));
  }
  add(t_last, traj.samples.back().pos);
  return out;
}

PlanOutcome plan_from(TrackingMode& mode, const LatLon& pos, double t, const std::string& glider_id,
                      const FlowSource& flow, const TrackParams& params) {
  params.validate();
  PlanOutcome out;
  out.goto_file.glider_id = glider_id;
  out.goto_file.generated = t;

  if (const auto* vm = std::get_if<VirtualMooring>(&mode)) {
    if (distance_m(pos, vm->target) <= params.arrival_radius) {
      out.mission_complete = true;
      out.waypoints = {{vm->target, params.arrival_radius, t}};
      out.trajectory.samples = {{t, pos}};
      out.goto_file.waypoints = {{vm->target, params.arrival_radius}};
      return out;
    }
  } else {
    auto& lc = std::get<LineControl>(mode);
    if (distance_m(pos, current_target(mode)) <= params.arrival_radius) {
      lc.advance();
      out.advanced = true;
    }
  }

  out.trajectory = predict_trajectory(pos, t, mode, flow, params);
  out.waypoints = extract_waypoints(out.trajectory, params.waypoint_spacing, params.arrival_radius);
  for (const auto& w : out.waypoints) out.goto_file.waypoints.push_back({w.pos, w.arrival_radius});
  return out;
}

PlanOutcome plan(TrackingMode& mode, const SurfacingEvent& ev, const FlowSource& flow,
                 const TrackParams& params, double now) {
  if (now - ev.t_end > params.staleness) {
    throw StaleEventError(fmt::format("surfacing at {} is {} s old (bound {} s)", ev.t_end,
                                      now - ev.t_end, params.staleness));
  }
  return plan_from(mode, ev.gps_pos, ev.t_end, ev.glider_id, flow, params);
}

}  // namespace glidernav
