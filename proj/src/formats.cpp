#include "glidernav/formats.hpp"

#include <cmath>

#include <fmt/format.h>

#include "glidernav/error.hpp"
#include "text_util.hpp"

namespace glidernav {
namespace {

constexpr int kGotoMinuteDecimals = 3;

void check_word(std::string_view s, std::string_view what) {
  if (s.empty()) throw RangeError(fmt::format("{} must not be empty", what));
  for (char c : s) {
    if (static_cast<unsigned char>(c) <= ' ' || c == '/') {
      throw RangeError(fmt::format("{} '{}' contains whitespace or '/'", what, s));
    }
  }
}

std::string_view expect_prefix(std::string_view line, std::string_view prefix) {
  if (line.substr(0, prefix.size()) != prefix) {
    throw ParseError(fmt::format("goto: expected '{}' line, got '{}'", prefix, line));
  }
  return detail::trim(line.substr(prefix.size()));
}

}  // namespace

std::string render_goto(const GotoFile& g) {
  check_word(g.glider_id, "glider id");
  if (g.waypoints.empty()) throw RangeError("goto file needs at least one waypoint");
  std::string out = "GENIOS-GOTO 1\n";
  out += fmt::format("glider: {}\n", g.glider_id);
  out += fmt::format("generated: {}\n", g.generated);
  out += fmt::format("num_waypoints: {}\n", g.waypoints.size());
  for (const auto& w : g.waypoints) {
    if (!(w.arrival_radius > 0.0) || !std::isfinite(w.arrival_radius)) {
      throw RangeError("waypoint arrival radius must be positive");
    }
    out += fmt::format("wpt {} {} {}\n", format_ddmm(w.pos.lon, Axis::kLon, kGotoMinuteDecimals),
                       format_ddmm(w.pos.lat, Axis::kLat, kGotoMinuteDecimals), w.arrival_radius);
  }
  return out;
}

std::string render_goto(const std::vector<Waypoint>& wps, const std::string& glider_id, double t) {
  GotoFile g{glider_id, t, {}};
  for (const auto& w : wps) g.waypoints.push_back({w.pos, w.arrival_radius});
  return render_goto(g);
}

GotoFile parse_goto(std::string_view bytes) {
  detail::LineReader lines(bytes);
  std::string_view line;
  auto need = [&](const char* what) {
    if (!lines.next(line) || !lines.terminated()) {
      throw ParseError(fmt::format("goto: truncated before {}", what));
    }
  };
  need("magic");
  if (line != "GENIOS-GOTO 1") throw ParseError("goto: bad magic");
  GotoFile g;
  need("glider line");
  g.glider_id = std::string(expect_prefix(line, "glider:"));
  need("generated line");
  g.generated = detail::to_double(expect_prefix(line, "generated:"));
  need("waypoint count");
  const std::size_t n = detail::to_size(expect_prefix(line, "num_waypoints:"));
  if (n == 0) throw ParseError("goto: zero waypoints");
  for (std::size_t i = 0; i < n; ++i) {
    need("waypoint line");
    auto tok = detail::split_ws(line);
    if (tok.size() != 4 || tok[0] != "wpt") throw ParseError(fmt::format("goto: bad waypoint line '{}'", line));
    GotoEntry e;
    e.pos.lon = parse_ddmm(tok[1], Axis::kLon);
    e.pos.lat = parse_ddmm(tok[2], Axis::kLat);
    e.arrival_radius = detail::to_double(tok[3]);
    if (!(e.arrival_radius > 0.0)) throw ParseError("goto: non-positive arrival radius");
    g.waypoints.push_back(e);
  }
  if (lines.next(line)) throw ParseError("goto: trailing data after waypoints");
  return g;
}

std::string goto_file_name(double t_end) {
  return fmt::format("goto_{}.ma", std::llround(t_end));
}

std::string render_log_record(const SurfacingEvent& ev, std::string_view mission) {
  check_word(ev.glider_id, "glider id");
  check_word(mission, "mission name");
  return fmt::format("SURF id={} t0={} t1={} gps={} dr={} mission={}\n", ev.glider_id, ev.t_start,
                     ev.t_end, format_latlon(ev.gps_pos), format_latlon(ev.deadreckon_pos), mission);
}

LogParseResult parse_surfacing_log(std::string_view bytes) {
  LogParseResult result;
  detail::LineReader lines(bytes);
  std::string_view line;
  static constexpr std::string_view kKeys[] = {"id=", "t0=", "t1=", "gps=", "dr=", "mission="};
  while (lines.next(line)) {
    if (!lines.terminated()) break;  // torn trailing line, still being written
    if (line.substr(0, 5) != "SURF ") continue;
    try {
      auto tok = detail::split_ws(line.substr(5));
      if (tok.size() != std::size(kKeys)) throw ParseError("field count");
      std::string_view val[std::size(kKeys)];
      for (std::size_t i = 0; i < tok.size(); ++i) {
        if (tok[i].substr(0, kKeys[i].size()) != kKeys[i]) throw ParseError("field order");
        val[i] = tok[i].substr(kKeys[i].size());
        if (val[i].empty()) throw ParseError("empty field");
      }
      LogRecord rec;
      rec.raw = std::string(line);
      SurfacingEvent& ev = rec.event;
      ev.glider_id = std::string(val[0]);
      ev.t_start = detail::to_double(val[1]);
      ev.t_end = detail::to_double(val[2]);
      ev.gps_pos = parse_latlon(val[3]);
      ev.deadreckon_pos = parse_latlon(val[4]);
      ev.start_pos = ev.gps_pos;
      rec.mission = std::string(val[5]);
      if (!std::isfinite(ev.t_start) || !(ev.t_end > ev.t_start)) throw ParseError("dive span");
      ev.flow_estimate = estimate_flow(ev);
      result.records.push_back(std::move(rec));
    } catch (const Error&) {
      ++result.malformed;
    }
  }
  return result;
}

}  // namespace glidernav
