#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "glidernav/gsim.hpp"

namespace glidernav {

/// One `wpt` line of a goto file.
struct GotoEntry {
  LatLon pos;
  double arrival_radius = 200.0;

  friend bool operator==(const GotoEntry&, const GotoEntry&) = default;
};

/// Waypoint mission file uploaded to the dockserver.
///
///   GENIOS-GOTO 1
///   glider: <id>
///   generated: <epoch>
///   num_waypoints: <n>
///   wpt <lon DDMM.mmm> <lat DDMM.mmm> <radius_m>      (n times)
///
/// Coordinates carry three minute decimals, so rendering snaps positions to
/// a 0.001' lattice; parse(render(g)) is exact for lattice positions.
struct GotoFile {
  std::string glider_id;
  double generated = 0.0;
  std::vector<GotoEntry> waypoints;

  friend bool operator==(const GotoFile&, const GotoFile&) = default;
};

std::string render_goto(const GotoFile& g);
std::string render_goto(const std::vector<Waypoint>& wps, const std::string& glider_id, double t);
GotoFile parse_goto(std::string_view bytes);

/// Name under which the goto for a surfacing at `t_end` is stored.
std::string goto_file_name(double t_end);

/// One `SURF` line of a glider log:
///   SURF id=<glider> t0=<epoch> t1=<epoch> gps=<lat>,<lon> dr=<lat>,<lon> mission=<name>
struct LogRecord {
  std::string raw;
  SurfacingEvent event;
  std::string mission;
};

std::string render_log_record(const SurfacingEvent& ev, std::string_view mission);

struct LogParseResult {
  std::vector<LogRecord> records;
  std::size_t malformed = 0;
};

/// Tolerant parser: unrelated lines are skipped, a torn trailing line is
/// ignored, and bad SURF records only bump `malformed`. Events come back
/// with start_pos = gps_pos since the log does not carry the dive start.
LogParseResult parse_surfacing_log(std::string_view bytes);

}  // namespace glidernav
