#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "glidernav/flow.hpp"
#include "glidernav/formats.hpp"
#include "glidernav/gsim.hpp"

namespace glidernav {

enum class CancelStatus { kFeasible, kFlowDominated };

struct HeadingCommand {
  double heading = 0.0;  ///< deg clockwise from north, [0, 360)
  double offset = 0.0;   ///< rad, heading minus bearing to target
  CancelStatus status = CancelStatus::kFeasible;
};

/// Flow-cancelling controller. Picks the heading whose water velocity nulls
/// the flow component across the line of sight to the target; when the
/// cross flow exceeds `speed` the offset saturates at +-90 degrees.
HeadingCommand flow_cancel_heading(const LatLon& p, const LatLon& target, const FlowVector& flow,
                                   double speed);
/// Same law given the bearing to the target directly.
HeadingCommand flow_cancel_heading_for_bearing(double bearing_deg, const FlowVector& flow, double speed);

struct VirtualMooring {
  LatLon target;
};

/// Shuttles through `targets` and back; `direction` flips only at the ends.
struct LineControl {
  std::vector<LatLon> targets;
  std::size_t index = 0;
  int direction = +1;

  void advance();
};

using TrackingMode = std::variant<VirtualMooring, LineControl>;

const LatLon& current_target(const TrackingMode& mode);

struct TrackParams {
  double speed = 0.28;               ///< m/s through water
  double horizon = 43200.0;          ///< s
  double dt = 60.0;                  ///< prediction step, s
  double arrival_radius = 200.0;     ///< m
  double waypoint_spacing = 14400.0; ///< s
  double staleness = 1800.0;         ///< max age of a surfacing to plan from, s

  void validate() const;
};

struct TimedPos {
  double t = 0.0;
  LatLon pos;
};

struct TargetArrival {
  double t = 0.0;
  std::size_t target_index = 0;
};

struct Trajectory {
  std::vector<TimedPos> samples;
  double feasible_fraction = 1.0;
  bool arrived = false;      ///< virtual mooring target reached
  bool domain_exit = false;  ///< truncated at the flow domain boundary
  std::vector<TargetArrival> arrivals;
};

/// Forward-Euler Newtonian-particle prediction under the flow-cancelling
/// controller. The mode is copied; target advances are not persisted.
Trajectory predict_trajectory(const LatLon& p0, double t0, TrackingMode mode,
                              const FlowSource& flow, const TrackParams& params);

/// Points at t0 + k*spacing plus the final point, with consecutive points
/// closer than `arrival_radius` merged (the later one wins).
std::vector<Waypoint> extract_waypoints(const Trajectory& traj, double spacing, double arrival_radius);

/// Position on the trajectory at time t (linear between samples, clamped).
LatLon position_at(const Trajectory& traj, double t);

struct PlanOutcome {
  GotoFile goto_file;
  std::vector<Waypoint> waypoints;
  Trajectory trajectory;
  bool mission_complete = false;  ///< virtual mooring and already inside the arrival radius
  bool advanced = false;          ///< line control moved to its next target
};

/// Plans from a position/time. Line-control advances are written back into `mode`.
PlanOutcome plan_from(TrackingMode& mode, const LatLon& pos, double t, const std::string& glider_id,
                      const FlowSource& flow, const TrackParams& params);

/// Plans from a surfacing. Throws StaleEventError when `now - ev.t_end`
/// exceeds the staleness bound.
PlanOutcome plan(TrackingMode& mode, const SurfacingEvent& ev, const FlowSource& flow,
                 const TrackParams& params, double now);

}  // namespace glidernav
