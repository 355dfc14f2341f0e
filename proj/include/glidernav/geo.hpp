#pragma once

#include <string>
#include <string_view>

namespace glidernav {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Geodetic position in decimal degrees (north, east).
struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

/// Tangent-plane offset in meters from a declared origin.
struct LocalVec {
  double east = 0.0;
  double north = 0.0;

  LocalVec& operator+=(const LocalVec& o) {
    east += o.east;
    north += o.north;
    return *this;
  }
  LocalVec& operator-=(const LocalVec& o) {
    east -= o.east;
    north -= o.north;
    return *this;
  }
  friend LocalVec operator+(LocalVec a, const LocalVec& b) { return a += b; }
  friend LocalVec operator-(LocalVec a, const LocalVec& b) { return a -= b; }
  friend LocalVec operator*(double s, const LocalVec& v) { return {s * v.east, s * v.north}; }
  friend bool operator==(const LocalVec&, const LocalVec&) = default;

  double norm() const;
};

enum class Axis { kLat, kLon };

/// Throws RangeError when the position is off the globe.
void validate(const LatLon& p);

/// Parses a degrees-minutes token such as "3118.0N" or "-8008.0E".
///
/// The hemisphere letter (N/S/E/W) is required and must match `axis`.
/// A leading '-' and a S/W letter both negate; combining them is rejected
/// as ambiguous. Any number of minute decimals is accepted on input.
double parse_nmea(std::string_view token, Axis axis);

/// Same as above, with the axis inferred from the hemisphere letter.
double parse_nmea(std::string_view token);

/// Parses a bare signed DDMM.mmm token (no hemisphere letter), as used in
/// goto files where position in the line determines the axis.
double parse_ddmm(std::string_view token, Axis axis);

/// Formats decimal degrees as DDMM.M plus hemisphere letter. Latitudes use
/// N/S; longitudes keep the "negative E" convention ("-8008.0E").
/// Minutes carry the fewest decimals (at least one, at most six) that
/// reproduce the value to 1e-6 degrees.
std::string format_nmea(double degrees, Axis axis);

/// Signed DDMM.mmm with exactly `decimals` minute digits and no letter.
std::string format_ddmm(double degrees, Axis axis, int decimals);

/// Parses "<lat>,<lon>" where each side is an NMEA token.
LatLon parse_latlon(std::string_view text);
std::string format_latlon(const LatLon& p);

/// Equirectangular tangent plane at `origin`. Throws RangeError beyond 500 km.
LocalVec to_local(const LatLon& p, const LatLon& origin);
LatLon from_local(const LocalVec& v, const LatLon& origin);

/// Planar distance in meters using the tangent plane at `a`.
double distance_m(const LatLon& a, const LatLon& b);

/// Bearing from `a` to `b`, degrees clockwise from north in [0, 360).
double bearing_deg(const LatLon& a, const LatLon& b);

/// Wraps any angle into [0, 360).
double wrap_deg(double deg);

struct ShoreComponents {
  double along = 0.0;
  double cross = 0.0;
};

/// Projects an (east, north) vector onto the shoreline frame given by
/// `shore_bearing_deg` (clockwise from north). Cross-shore is positive to
/// the right of the alongshore direction.
ShoreComponents decompose_shore(double east, double north, double shore_bearing_deg);

}  // namespace glidernav
