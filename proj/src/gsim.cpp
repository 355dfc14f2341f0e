#include "glidernav/gsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "glidernav/error.hpp"

namespace glidernav {

GliderState make_glider(LatLon pos, double speed, double clock) {
  validate(pos);
  if (!(speed > 0.0)) throw RangeError("glider speed must be positive");
  GliderState s;
  s.pos = pos;
  s.dive_origin = pos;
  s.speed = speed;
  s.clock = clock;
  return s;
}

void DiveParams::validate() const {
  if (!(glide_angle_deg > 0.0 && glide_angle_deg < 90.0)) {
    throw RangeError("glide angle must be in (0, 90) degrees");
  }
  if (!(max_depth > 0.0)) throw RangeError("max depth must be positive");
  if (!(surface_interval > 0.0)) throw RangeError("surface interval must be positive");
  if (!(gps_noise_sigma >= 0.0)) throw RangeError("gps noise sigma must be non-negative");
  if (!(dt > 0.0)) throw RangeError("integration step must be positive");
}

GliderState step(const GliderState& s, double heading_cmd, const FlowSource& flow,
                 const DiveParams& params, double dt) {
  if (dt < 0.0) throw RangeError("negative time step");
  if (dt == 0.0) return s;

  const FlowVector f = flow.sample(s.pos, s.clock);
  const double psi = heading_cmd * kDegToRad;
  GliderState n = s;
  n.heading = wrap_deg(heading_cmd);
  n.dead_reckoned += LocalVec{dt * s.speed * std::sin(psi), dt * s.speed * std::cos(psi)};
  n.drift += LocalVec{dt * f.u, dt * f.v};
  n.pos = from_local(n.drift, from_local(n.dead_reckoned, n.dive_origin));
  n.clock = s.clock + dt;

  // Sawtooth between the surface and max_depth.
  const double w = s.speed * std::tan(params.glide_angle_deg * kDegToRad);
  double dz = w * dt;
  n.vertical_travel += dz;
  double depth = s.depth;
  bool down = s.descending;
  while (dz > 0.0) {
    const double room = down ? params.max_depth - depth : depth;
    if (dz <= room) {
      depth += down ? dz : -dz;
      dz = 0.0;
    } else {
      depth = down ? params.max_depth : 0.0;
      dz -= room;
      down = !down;
    }
  }
  n.depth = depth;
  n.descending = down;
  return n;
}

DiveResult run_dive(const GliderState& s, double heading_cmd, const FlowSource& flow,
                    const DiveParams& params, std::uint64_t seed, const std::string& glider_id) {
  params.validate();
  if (s.phase != Phase::kAtSurface) throw RangeError("run_dive requires a glider at the surface");

  GliderState cur = s;
  cur.dive_origin = s.pos;
  cur.dead_reckoned = {};
  cur.drift = {};
  cur.vertical_travel = 0.0;
  cur.depth = 0.0;
  cur.descending = true;
  cur.phase = Phase::kDiving;

  DiveResult result;
  result.track.push_back({cur.clock, cur.pos, cur.depth});
  const double t_start = s.clock;
  const double t_stop = t_start + params.surface_interval;
  bool aborted = false;
  const auto steps = static_cast<long long>(std::ceil(params.surface_interval / params.dt - 1e-9));
  for (long long k = 0; k < steps; ++k) {
    const double h = std::min(params.dt, t_stop - cur.clock);
    try {
      cur = step(cur, heading_cmd, flow, params, h);
    } catch (const DomainError&) {
      aborted = true;
      break;
    }
    if (k + 1 == steps) cur.clock = t_stop;
    result.track.push_back({cur.clock, cur.pos, cur.depth});
  }
  if (cur.clock <= t_start) {
    throw DomainError(fmt::format("dive from ({}, {}) left the flow domain immediately", s.pos.lat,
                                  s.pos.lon));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  LocalVec gps_offset = cur.drift;
  if (params.gps_noise_sigma > 0.0) {
    const double ne = noise(rng) * params.gps_noise_sigma;
    const double nn = noise(rng) * params.gps_noise_sigma;
    gps_offset += LocalVec{ne, nn};
  }

  SurfacingEvent& ev = result.event;
  ev.glider_id = glider_id;
  ev.t_start = t_start;
  ev.t_end = cur.clock;
  ev.start_pos = s.pos;
  ev.deadreckon_pos = from_local(cur.dead_reckoned, cur.dive_origin);
  ev.gps_pos = from_local(gps_offset, ev.deadreckon_pos);
  ev.aborted = aborted;
  ev.flow_estimate = estimate_flow(ev);

  cur.phase = Phase::kAtSurface;
  cur.depth = 0.0;
  cur.descending = true;
  result.state = cur;
  result.state.dive_origin = cur.pos;
  result.state.dead_reckoned = {};
  result.state.drift = {};
  return result;
}

FlowVector estimate_flow(const SurfacingEvent& ev) {
  const double span = ev.t_end - ev.t_start;
  if (!(span > 0.0)) throw RangeError("flow estimate needs a dive of positive duration");
  const LocalVec d = to_local(ev.gps_pos, ev.deadreckon_pos);
  return {d.east / span, d.north / span};
}

std::string track_csv(const std::vector<TrackSample>& track) {
  std::string out = "t,lat,lon,depth\n";
  for (const auto& s : track) {
    out += fmt::format("{},{},{},{}\n", s.t, s.pos.lat, s.pos.lon, s.depth);
  }
  return out;
}

}  // namespace glidernav
