#include "glidernav/flow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "glidernav/error.hpp"
#include "text_util.hpp"

namespace glidernav {
namespace {

constexpr double kIndexSlack = 1e-9;
constexpr int kProbesPerAxis = 64;

void check_window(const TimeWindow& w) {
  if (!(w.begin <= w.end)) throw RangeError("empty time window");
}

void check_finite_flow(const FlowVector& f, std::string_view what) {
  if (!std::isfinite(f.u) || !std::isfinite(f.v)) {
    throw RangeError(fmt::format("{}: non-finite flow sample", what));
  }
  if (!(f.speed() < kFlowSanityBound)) {
    throw RangeError(fmt::format("{}: flow sample ({}, {}) exceeds {} m/s", what, f.u, f.v,
                                 kFlowSanityBound));
  }
}

// Fractional index on one axis; clamps or throws when outside [0, n-1].
double axis_fraction(double x, double x0, double dx, std::size_t n, OutOfDomain mode,
                     const char* axis) {
  double f = (x - x0) / dx;
  const double hi = static_cast<double>(n - 1);
  if (f < -kIndexSlack || f > hi + kIndexSlack || std::isnan(f)) {
    if (mode == OutOfDomain::kError) {
      throw DomainError(fmt::format("{} {} outside flow grid [{}, {}]", axis, x, x0, x0 + hi * dx));
    }
  }
  return std::clamp(f, 0.0, hi);
}

// Splits a fractional index into a base cell in [0, n-2] and weight.
std::pair<std::size_t, double> cell_of(double f, std::size_t n) {
  auto i = static_cast<std::size_t>(std::floor(f));
  if (i > n - 2) i = n - 2;
  return {i, f - static_cast<double>(i)};
}

std::pair<std::size_t, std::size_t> covering_range(double lo, double hi, double x0, double dx,
                                                   std::size_t n) {
  const double top = static_cast<double>(n - 1);
  const double a = std::clamp(std::floor((lo - x0) / dx), 0.0, top);
  const double b = std::clamp(std::ceil((hi - x0) / dx), 0.0, top);
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(std::max(a, b))};
}

}  // namespace

double FlowVector::speed() const { return std::hypot(u, v); }

bool BBox::contains(const LatLon& p) const {
  return p.lat >= south_west.lat && p.lat <= north_east.lat && p.lon >= south_west.lon &&
         p.lon <= north_east.lon;
}

double FlowSource::max_speed(const BBox& box, const TimeWindow& window) const {
  return probe_max_speed(box, window);
}

double FlowSource::probe_max_speed(const BBox& box, const TimeWindow& window) const {
  check_window(window);
  const bool timed = std::isfinite(window.begin) && std::isfinite(window.end);
  const int nt = timed ? kProbesPerAxis : 1;
  double best = 0.0;
  for (int k = 0; k < nt; ++k) {
    const double t = timed ? window.begin + (window.end - window.begin) * k / (kProbesPerAxis - 1) : 0.0;
    for (int j = 0; j < kProbesPerAxis; ++j) {
      const double lat = box.south_west.lat +
                         (box.north_east.lat - box.south_west.lat) * j / (kProbesPerAxis - 1);
      for (int i = 0; i < kProbesPerAxis; ++i) {
        const double lon = box.south_west.lon +
                           (box.north_east.lon - box.south_west.lon) * i / (kProbesPerAxis - 1);
        best = std::max(best, sample({lat, lon}, t, OutOfDomain::kClamp).speed());
      }
    }
  }
  return best;
}

UniformFlow::UniformFlow(FlowVector f) : f_(f) { check_finite_flow(f, "uniform flow"); }

FlowVector UniformFlow::sample(const LatLon&, double, OutOfDomain) const { return f_; }

double UniformFlow::max_speed(const BBox&, const TimeWindow& window) const {
  check_window(window);
  return f_.speed();
}

RotatingTide::RotatingTide(double amplitude, double period_s, double phase_rad)
    : amplitude_(amplitude), period_(period_s), phase_(phase_rad) {
  if (!std::isfinite(amplitude) || !std::isfinite(period_s) || !std::isfinite(phase_rad)) {
    throw RangeError("tide parameters must be finite");
  }
  if (!(period_s > 0.0)) throw RangeError("tide period must be positive");
  if (!(std::fabs(amplitude) < kFlowSanityBound)) throw RangeError("tide amplitude too large");
}

FlowVector RotatingTide::sample(const LatLon&, double t, OutOfDomain) const {
  const double arg = 2.0 * kPi * t / period_ + phase_;
  return {amplitude_ * std::cos(arg), amplitude_ * std::sin(arg)};
}

double RotatingTide::max_speed(const BBox&, const TimeWindow& window) const {
  check_window(window);
  return std::fabs(amplitude_);
}

Gyre::Gyre(LatLon center, double omega, double r_max_m)
    : center_(center), omega_(omega), r_max_(r_max_m) {
  validate(center);
  if (!std::isfinite(omega) || !std::isfinite(r_max_m) || !(r_max_m > 0.0)) {
    throw RangeError("gyre needs finite omega and positive r_max");
  }
  if (!(std::fabs(omega) * r_max_m < kFlowSanityBound)) throw RangeError("gyre too fast");
}

FlowVector Gyre::sample(const LatLon& p, double, OutOfDomain) const {
  LocalVec r = to_local(p, center_);
  const double dist = r.norm();
  if (dist > r_max_) r = (r_max_ / dist) * r;
  return {-omega_ * r.north, omega_ * r.east};
}

void FlowGrid::validate() const {
  if (nx < 2 || ny < 2) throw RangeError("flow grid needs nx, ny >= 2");
  if (nt < 1) throw RangeError("flow grid needs nt >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw RangeError("flow grid dt must be positive");
  if (!(dlat > 0.0) || !(dlon > 0.0) || !std::isfinite(dlat) || !std::isfinite(dlon)) {
    throw RangeError("flow grid spacing must be positive");
  }
  if (!std::isfinite(t0)) throw RangeError("flow grid t0 must be finite");
  glidernav::validate(origin);
  if (frames.size() != nt * ny * nx) throw RangeError("flow grid frame count mismatch");
  for (const auto& f : frames) check_finite_flow(f, "flow grid");
}

FlowGrid load_grid(std::string_view bytes) {
  detail::LineReader lines(bytes);
  std::string_view line;
  if (!lines.next(line) || line != "GFLOW 1") throw ParseError("GFLOW: bad magic");

  FlowGrid g;
  if (!lines.next(line)) throw ParseError("GFLOW: truncated header");
  auto h2 = detail::split_ws(line);
  if (h2.size() != 11 || h2[0] != "origin" || h2[3] != "dlat" || h2[5] != "dlon" ||
      h2[7] != "ny" || h2[9] != "nx") {
    throw ParseError("GFLOW: malformed origin line");
  }
  g.origin = {detail::to_double(h2[1]), detail::to_double(h2[2])};
  g.dlat = detail::to_double(h2[4]);
  g.dlon = detail::to_double(h2[6]);
  g.ny = detail::to_size(h2[8]);
  g.nx = detail::to_size(h2[10]);

  if (!lines.next(line)) throw ParseError("GFLOW: truncated header");
  auto h3 = detail::split_ws(line);
  if (h3.size() != 6 || h3[0] != "t0" || h3[2] != "dt" || h3[4] != "nt") {
    throw ParseError("GFLOW: malformed time line");
  }
  g.t0 = detail::to_double(h3[1]);
  g.dt = detail::to_double(h3[3]);
  g.nt = detail::to_size(h3[5]);
  if (!(g.dt > 0.0)) throw RangeError("GFLOW: dt must be positive");
  if (g.nx < 2 || g.ny < 2 || g.nt < 1) throw RangeError("GFLOW: bad grid dimensions");
  if (g.nx > (1u << 20) || g.ny > (1u << 20) || g.nt > (1u << 20) ||
      g.nx * g.ny > (std::size_t{1} << 26) / g.nt) {
    throw RangeError("GFLOW: grid too large");
  }

  const std::size_t expected = g.nt * g.ny * g.nx;
  g.frames.reserve(expected);
  while (lines.next(line)) {
    if (line.empty()) continue;
    if (g.frames.size() == expected) throw ParseError("GFLOW: more records than declared");
    auto rec = detail::split_ws(line);
    if (rec.size() != 2) throw ParseError("GFLOW: malformed record");
    g.frames.push_back({detail::to_double(rec[0]), detail::to_double(rec[1])});
  }
  if (g.frames.size() != expected) {
    throw ParseError(fmt::format("GFLOW: truncated payload ({} of {} records)", g.frames.size(),
                                 expected));
  }
  g.validate();
  return g;
}

std::string save_grid(const FlowGrid& grid) {
  grid.validate();
  std::string out;
  out.reserve(32 + grid.frames.size() * 16);
  out += "GFLOW 1\n";
  out += fmt::format("origin {} {} dlat {} dlon {} ny {} nx {}\n", grid.origin.lat, grid.origin.lon,
                     grid.dlat, grid.dlon, grid.ny, grid.nx);
  out += fmt::format("t0 {} dt {} nt {}\n", grid.t0, grid.dt, grid.nt);
  for (const auto& f : grid.frames) out += fmt::format("{:.6g} {:.6g}\n", f.u, f.v);
  return out;
}

FlowGrid read_grid_file(const std::string& path) {
  return load_grid(detail::read_file(path));
}

void write_grid_file(const FlowGrid& grid, const std::string& path) {
  detail::write_file_atomic(path, save_grid(grid));
}

FlowGrid rasterize(const FlowSource& src, LatLon origin, double dlat, double dlon, std::size_t ny,
                   std::size_t nx, double t0, double dt, std::size_t nt) {
  FlowGrid g;
  g.origin = origin;
  g.dlat = dlat;
  g.dlon = dlon;
  g.ny = ny;
  g.nx = nx;
  g.t0 = t0;
  g.dt = dt;
  g.nt = nt;
  g.frames.resize(nt * ny * nx);
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        g.at(k, j, i) = src.sample({origin.lat + j * dlat, origin.lon + i * dlon}, t0 + k * dt);
      }
    }
  }
  g.validate();
  return g;
}

GridFlow::GridFlow(FlowGrid grid) : grid_(std::move(grid)) { grid_.validate(); }

FlowVector GridFlow::sample(const LatLon& p, double t, OutOfDomain mode) const {
  const auto& g = grid_;
  const double fx = axis_fraction(p.lon, g.origin.lon, g.dlon, g.nx, mode, "longitude");
  const double fy = axis_fraction(p.lat, g.origin.lat, g.dlat, g.ny, mode, "latitude");
  const auto [i, wx] = cell_of(fx, g.nx);
  const auto [j, wy] = cell_of(fy, g.ny);

  auto spatial = [&](std::size_t k) {
    const FlowVector& a = g.at(k, j, i);
    const FlowVector& b = g.at(k, j, i + 1);
    const FlowVector& c = g.at(k, j + 1, i);
    const FlowVector& d = g.at(k, j + 1, i + 1);
    return FlowVector{
        (1 - wy) * ((1 - wx) * a.u + wx * b.u) + wy * ((1 - wx) * c.u + wx * d.u),
        (1 - wy) * ((1 - wx) * a.v + wx * b.v) + wy * ((1 - wx) * c.v + wx * d.v)};
  };

  if (g.nt == 1) return spatial(0);
  const double ft = axis_fraction(t, g.t0, g.dt, g.nt, mode, "time");
  const auto [k, wt] = cell_of(ft, g.nt);
  const FlowVector f0 = spatial(k);
  if (wt == 0.0) return f0;
  const FlowVector f1 = spatial(k + 1);
  return {(1 - wt) * f0.u + wt * f1.u, (1 - wt) * f0.v + wt * f1.v};
}

double GridFlow::max_speed(const BBox& box, const TimeWindow& window) const {
  check_window(window);
  const auto& g = grid_;
  const auto [i0, i1] = covering_range(box.south_west.lon, box.north_east.lon, g.origin.lon, g.dlon, g.nx);
  const auto [j0, j1] = covering_range(box.south_west.lat, box.north_east.lat, g.origin.lat, g.dlat, g.ny);
  std::size_t k0 = 0;
  std::size_t k1 = g.nt - 1;
  if (g.nt > 1) {
    const double b = std::isfinite(window.begin) ? window.begin : g.t0;
    const double e = std::isfinite(window.end) ? window.end : g.t0 + (g.nt - 1) * g.dt;
    std::tie(k0, k1) = covering_range(b, e, g.t0, g.dt, g.nt);
  }
  double best = 0.0;
  for (std::size_t k = k0; k <= k1; ++k) {
    for (std::size_t j = j0; j <= j1; ++j) {
      for (std::size_t i = i0; i <= i1; ++i) best = std::max(best, g.at(k, j, i).speed());
    }
  }
  return best;
}

OffsetFlow::OffsetFlow(FlowSourcePtr inner, FlowVector offset) : inner_(std::move(inner)), offset_(offset) {
  if (!inner_) throw RangeError("offset flow needs an inner source");
  check_finite_flow(offset, "flow offset");
}

FlowVector OffsetFlow::sample(const LatLon& p, double t, OutOfDomain mode) const {
  return inner_->sample(p, t, mode) + offset_;
}

double OffsetFlow::max_speed(const BBox& box, const TimeWindow& window) const {
  return inner_->max_speed(box, window) + offset_.speed();
}

FlowSourcePtr make_analytic(std::string_view kind, const std::vector<double>& params) {
  auto need = [&](std::size_t n) {
    if (params.size() != n) {
      throw RangeError(fmt::format("flow '{}' expects {} parameters, got {}", kind, n, params.size()));
    }
  };
  if (kind == "uniform") {
    need(2);
    return std::make_shared<UniformFlow>(FlowVector{params[0], params[1]});
  }
  if (kind == "tide" || kind == "rotating_tide") {
    need(3);
    return std::make_shared<RotatingTide>(params[0], params[1], params[2]);
  }
  if (kind == "gyre") {
    need(4);
    return std::make_shared<Gyre>(LatLon{params[0], params[1]}, params[2], params[3]);
  }
  throw ParseError(fmt::format("unknown flow kind '{}'", kind));
}

FlowSourcePtr make_flow(std::string_view spec) {
  auto tokens = detail::split_ws(spec);
  if (tokens.empty()) throw ParseError("empty flow description");
  if (tokens[0] == "file") {
    if (tokens.size() != 2) throw ParseError("flow 'file' expects a path");
    return std::make_shared<GridFlow>(read_grid_file(std::string(tokens[1])));
  }
  std::vector<double> params;
  for (std::size_t i = 1; i < tokens.size(); ++i) params.push_back(detail::to_double(tokens[i]));
  return make_analytic(tokens[0], params);
}

}  // namespace glidernav
