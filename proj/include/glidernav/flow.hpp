#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "glidernav/geo.hpp"

namespace glidernav {

/// Depth-averaged current in m/s.
struct FlowVector {
  double u = 0.0;  ///< east
  double v = 0.0;  ///< north

  double speed() const;
  friend FlowVector operator+(const FlowVector& a, const FlowVector& b) { return {a.u + b.u, a.v + b.v}; }
  friend FlowVector operator-(const FlowVector& a, const FlowVector& b) { return {a.u - b.u, a.v - b.v}; }
  friend FlowVector operator*(double s, const FlowVector& f) { return {s * f.u, s * f.v}; }
  friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

/// Samples wilder than this are treated as data errors.
inline constexpr double kFlowSanityBound = 5.0;

inline ShoreComponents decompose_shore(const FlowVector& f, double shore_bearing_deg) {
  return decompose_shore(f.u, f.v, shore_bearing_deg);
}

struct BBox {
  LatLon south_west;
  LatLon north_east;

  bool contains(const LatLon& p) const;
};

struct TimeWindow {
  double begin = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
};

enum class OutOfDomain { kError, kClamp };

/// Immutable, thread-safe source of flow over a space-time domain.
class FlowSource {
 public:
  virtual ~FlowSource() = default;

  /// Throws DomainError outside the domain unless `mode` is kClamp.
  virtual FlowVector sample(const LatLon& p, double t,
                            OutOfDomain mode = OutOfDomain::kError) const = 0;

  /// Upper bound on |sample| over the box and window. Throws RangeError for
  /// an empty window.
  virtual double max_speed(const BBox& box, const TimeWindow& window) const;

 protected:
  /// Dense 64x64x64 probe lattice, endpoints included.
  double probe_max_speed(const BBox& box, const TimeWindow& window) const;
};

using FlowSourcePtr = std::shared_ptr<const FlowSource>;

class UniformFlow final : public FlowSource {
 public:
  explicit UniformFlow(FlowVector f);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;
  double max_speed(const BBox& box, const TimeWindow& window) const override;

 private:
  FlowVector f_;
};

/// Tidal ellipse degenerated to a circle: (A cos(2πt/T+φ), A sin(2πt/T+φ)).
class RotatingTide final : public FlowSource {
 public:
  RotatingTide(double amplitude, double period_s, double phase_rad);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;
  double max_speed(const BBox& box, const TimeWindow& window) const override;

 private:
  double amplitude_;
  double period_;
  double phase_;
};

/// Solid-body rotation about `center` with angular rate omega (rad/s,
/// positive counter-clockwise); speed saturates at omega * r_max beyond r_max.
class Gyre final : public FlowSource {
 public:
  Gyre(LatLon center, double omega, double r_max_m);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;

 private:
  LatLon center_;
  double omega_;
  double r_max_;
};

/// Regular lon/lat/time grid. Node (j, i) of frame k sits at
/// (origin.lat + j*dlat, origin.lon + i*dlon) at time t0 + k*dt.
struct FlowGrid {
  LatLon origin;
  double dlat = 0.0;
  double dlon = 0.0;
  std::size_t ny = 0;
  std::size_t nx = 0;
  double t0 = 0.0;
  double dt = 3600.0;
  std::size_t nt = 0;
  std::vector<FlowVector> frames;  ///< nt * ny * nx, frame-major then row (y) then x

  std::size_t index(std::size_t k, std::size_t j, std::size_t i) const { return (k * ny + j) * nx + i; }
  const FlowVector& at(std::size_t k, std::size_t j, std::size_t i) const { return frames[index(k, j, i)]; }
  FlowVector& at(std::size_t k, std::size_t j, std::size_t i) { return frames[index(k, j, i)]; }

  /// Throws RangeError when an invariant is broken.
  void validate() const;
  friend bool operator==(const FlowGrid&, const FlowGrid&) = default;
};

/// Parses a GFLOW 1 document.
FlowGrid load_grid(std::string_view bytes);
/// Serializes to GFLOW 1. Header values round-trip exactly; u/v carry six
/// significant digits, so save(load(save(g))) == save(g) byte for byte.
std::string save_grid(const FlowGrid& grid);

FlowGrid read_grid_file(const std::string& path);
void write_grid_file(const FlowGrid& grid, const std::string& path);

/// Samples `src` at every node of the given lattice.
FlowGrid rasterize(const FlowSource& src, LatLon origin, double dlat, double dlon, std::size_t ny,
                   std::size_t nx, double t0, double dt, std::size_t nt);

/// Bilinear in space, linear in time. A single-frame grid is steady.
class GridFlow final : public FlowSource {
 public:
  explicit GridFlow(FlowGrid grid);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;
  double max_speed(const BBox& box, const TimeWindow& window) const override;
  const FlowGrid& grid() const { return grid_; }

 private:
  FlowGrid grid_;
};

/// Another source plus a constant offset; models a biased prediction.
class OffsetFlow final : public FlowSource {
 public:
  OffsetFlow(FlowSourcePtr inner, FlowVector offset);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;
  double max_speed(const BBox& box, const TimeWindow& window) const override;

 private:
  FlowSourcePtr inner_;
  FlowVector offset_;
};

/// Flow source description as used in configs and the CLI:
///   uniform <u> <v>
///   tide <amplitude> <period_s> <phase_rad>
///   gyre <lat> <lon> <omega> <r_max_m>
///   file <path>
FlowSourcePtr make_flow(std::string_view spec);

FlowSourcePtr make_analytic(std::string_view kind, const std::vector<double>& params);

}  // namespace glidernav
