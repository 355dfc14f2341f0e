#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glidernav/flow.hpp"
#include "glidernav/geo.hpp"

namespace glidernav {

struct Waypoint {
  LatLon pos;
  double arrival_radius = 200.0;  ///< m
  double eta = 0.0;               ///< epoch s, advisory

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// One GPS fix plus what the glider learned during the preceding dive.
struct SurfacingEvent {
  std::string glider_id;
  double t_start = 0.0;  ///< dive start, epoch s
  double t_end = 0.0;    ///< surfacing, epoch s
  LatLon start_pos;      ///< position the dive started from (best known)
  LatLon gps_pos;
  LatLon deadreckon_pos;
  FlowVector flow_estimate;
  Waypoint waypoint_active;
  bool aborted = false;  ///< dive cut short at the flow domain boundary

  double mid_time() const { return 0.5 * (t_start + t_end); }
  friend bool operator==(const SurfacingEvent&, const SurfacingEvent&) = default;
};

enum class Phase { kAtSurface, kDiving };

struct GliderState {
  LatLon pos;                ///< truth
  double depth = 0.0;        ///< m, down positive
  double heading = 0.0;      ///< deg clockwise from north
  double speed = 0.28;       ///< horizontal speed through water, m/s
  double clock = 0.0;        ///< epoch s
  Phase phase = Phase::kAtSurface;
  bool descending = true;

  // Dive-local accumulators. pos == from_local(drift, from_local(dead_reckoned, dive_origin)).
  LatLon dive_origin;
  LocalVec dead_reckoned;  ///< through-water displacement since dive start
  LocalVec drift;          ///< flow displacement since dive start
  double vertical_travel = 0.0;

  friend bool operator==(const GliderState&, const GliderState&) = default;
};

GliderState make_glider(LatLon pos, double speed, double clock);

struct DiveParams {
  double max_depth = 30.0;         ///< m
  double glide_angle_deg = 26.0;   ///< from horizontal
  double surface_interval = 3600;  ///< commanded underwater duration, s
  double gps_noise_sigma = 5.0;    ///< m, per axis
  double dt = 10.0;                ///< integration step, s

  void validate() const;
};

/// One first-order kinematic step: ground velocity = water velocity + flow.
GliderState step(const GliderState& s, double heading_cmd, const FlowSource& flow,
                 const DiveParams& params, double dt);

struct TrackSample {
  double t = 0.0;
  LatLon pos;
  double depth = 0.0;
};

struct DiveResult {
  GliderState state;
  SurfacingEvent event;
  std::vector<TrackSample> track;  ///< one sample per integration step, dive start included
};

/// Flies one dive holding `heading_cmd`. Deterministic for a given seed.
DiveResult run_dive(const GliderState& s, double heading_cmd, const FlowSource& flow,
                    const DiveParams& params, std::uint64_t seed, const std::string& glider_id);

/// (gps - deadreckon) in the tangent plane at deadreckon, divided by dive length.
FlowVector estimate_flow(const SurfacingEvent& ev);

/// CSV with header `t,lat,lon,depth`.
std::string track_csv(const std::vector<TrackSample>& track);

}  // namespace glidernav
