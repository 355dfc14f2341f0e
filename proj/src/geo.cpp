#include "glidernav/geo.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "glidernav/error.hpp"

namespace glidernav {
namespace {

constexpr double kMaxLocalRangeM = 500000.0;

double axis_limit(Axis axis) { return axis == Axis::kLat ? 90.0 : 180.0; }

const char* axis_name(Axis axis) { return axis == Axis::kLat ? "latitude" : "longitude"; }

// Shared body of parse_nmea/parse_ddmm once sign and letter are stripped.
double parse_magnitude(std::string_view digits, std::string_view token, Axis axis) {
  if (digits.empty() || !std::isdigit(static_cast<unsigned char>(digits.front()))) {
    throw ParseError(fmt::format("malformed coordinate token '{}'", token));
  }
  const auto dot = digits.find('.');
  const auto int_part = digits.substr(0, dot);
  if (int_part.size() < 3) {
    throw ParseError(fmt::format("coordinate token '{}' lacks DDMM digits", token));
  }
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') {
      throw ParseError(fmt::format("malformed coordinate token '{}'", token));
    }
  }
  if (dot != std::string_view::npos &&
      (dot + 1 == digits.size() || digits.find('.', dot + 1) != std::string_view::npos)) {
    throw ParseError(fmt::format("malformed coordinate token '{}'", token));
  }

  const auto deg_digits = int_part.substr(0, int_part.size() - 2);
  const auto min_digits = digits.substr(int_part.size() - 2);
  int degrees = 0;
  auto [p1, e1] = std::from_chars(deg_digits.data(), deg_digits.data() + deg_digits.size(), degrees);
  double minutes = 0.0;
  auto [p2, e2] = std::from_chars(min_digits.data(), min_digits.data() + min_digits.size(), minutes);
  if (e1 != std::errc{} || e2 != std::errc{} || p1 != deg_digits.data() + deg_digits.size() ||
      p2 != min_digits.data() + min_digits.size()) {
    throw ParseError(fmt::format("malformed coordinate token '{}'", token));
  }
  if (minutes >= 60.0) {
    throw RangeError(fmt::format("minutes >= 60 in coordinate token '{}'", token));
  }
  const double value = degrees + minutes / 60.0;
  if (value > axis_limit(axis)) {
    throw RangeError(fmt::format("{} out of range in '{}'", axis_name(axis), token));
  }
  return value;
}

// Decimal degrees -> integral count of 10^-decimals minutes, with carry.
struct DdMm {
  bool negative;
  std::int64_t degrees;
  std::int64_t minute_units;  // minutes * 10^decimals
};

DdMm split_ddmm(double degrees, int decimals) {
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const std::int64_t per_degree = 60 * scale;
  const std::int64_t total = std::llround(std::fabs(degrees) * 60.0 * static_cast<double>(scale));
  return {degrees < 0.0 && total != 0, total / per_degree, total % per_degree};
}

std::string render_ddmm(const DdMm& v, int decimals) {
  std::int64_t scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const std::int64_t whole_min = v.minute_units / scale;
  const std::int64_t frac = v.minute_units % scale;
  return fmt::format("{}{:02d}{:02d}.{:0{}d}", v.negative ? "-" : "", v.degrees, whole_min, frac,
                     decimals);
}

}  // namespace

double LocalVec::norm() const { return std::hypot(east, north); }

void validate(const LatLon& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::fabs(p.lat) > 90.0 ||
      std::fabs(p.lon) > 180.0) {
    throw RangeError(fmt::format("position ({}, {}) out of range", p.lat, p.lon));
  }
}

double parse_nmea(std::string_view token, Axis axis) {
  if (token.size() < 2) throw ParseError(fmt::format("malformed coordinate token '{}'", token));
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(token.back())));
  const bool lat_letter = letter == 'N' || letter == 'S';
  const bool lon_letter = letter == 'E' || letter == 'W';
  if (!lat_letter && !lon_letter) {
    throw ParseError(fmt::format("coordinate token '{}' lacks a hemisphere letter", token));
  }
  if ((axis == Axis::kLat) != lat_letter) {
    throw ParseError(fmt::format("hemisphere letter in '{}' does not match {}", token,
                                 axis_name(axis)));
  }
  std::string_view body = token.substr(0, token.size() - 1);
  bool minus = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    minus = body.front() == '-';
    body.remove_prefix(1);
  }
  const bool letter_negative = letter == 'S' || letter == 'W';
  if (minus && letter_negative) {
    throw ParseError(fmt::format("ambiguous double negation in '{}'", token));
  }
  const double magnitude = parse_magnitude(body, token, axis);
  return (minus || letter_negative) ? -magnitude : magnitude;
}

double parse_nmea(std::string_view token) {
  if (token.empty()) throw ParseError("empty coordinate token");
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(token.back())));
  return parse_nmea(token, (letter == 'E' || letter == 'W') ? Axis::kLon : Axis::kLat);
}

double parse_ddmm(std::string_view token, Axis axis) {
  std::string_view body = token;
  bool minus = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    minus = body.front() == '-';
    body.remove_prefix(1);
  }
  const double magnitude = parse_magnitude(body, token, axis);
  return minus ? -magnitude : magnitude;
}

std::string format_nmea(double degrees, Axis axis) {
  if (!std::isfinite(degrees) || std::fabs(degrees) > axis_limit(axis)) {
    throw RangeError(fmt::format("{} {} out of range", axis_name(axis), degrees));
  }
  constexpr int kMaxDecimals = 6;
  DdMm v = split_ddmm(degrees, kMaxDecimals);
  std::string text = render_ddmm(v, kMaxDecimals);
  // Trim trailing zeros but keep one minute decimal.
  const auto dot = text.find('.');
  auto last = text.find_last_not_of('0');
  if (last == dot) ++last;
  text.erase(last + 1);
  if (axis == Axis::kLat) {
    if (v.negative) {
      text.erase(0, 1);
      return text + "S";
    }
    return text + "N";
  }
  return text + "E";
}

std::string format_ddmm(double degrees, Axis axis, int decimals) {
  if (!std::isfinite(degrees) || std::fabs(degrees) > axis_limit(axis)) {
    throw RangeError(fmt::format("{} {} out of range", axis_name(axis), degrees));
  }
  if (decimals < 1 || decimals > 9) throw RangeError("minute decimals must be in [1, 9]");
  return render_ddmm(split_ddmm(degrees, decimals), decimals);
}

LatLon parse_latlon(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw ParseError(fmt::format("expected '<lat>,<lon>' but got '{}'", text));
  }
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  return {parse_nmea(trim(text.substr(0, comma)), Axis::kLat),
          parse_nmea(trim(text.substr(comma + 1)), Axis::kLon)};
}

std::string format_latlon(const LatLon& p) {
  return format_nmea(p.lat, Axis::kLat) + "," + format_nmea(p.lon, Axis::kLon);
}

LocalVec to_local(const LatLon& p, const LatLon& origin) {
  const double k = kEarthRadiusM * kDegToRad;
  LocalVec v{(p.lon - origin.lon) * std::cos(origin.lat * kDegToRad) * k, (p.lat - origin.lat) * k};
  if (!(v.norm() < kMaxLocalRangeM)) {
    throw RangeError(fmt::format("point ({}, {}) is more than 500 km from origin ({}, {})", p.lat,
                                 p.lon, origin.lat, origin.lon));
  }
  return v;
}

LatLon from_local(const LocalVec& v, const LatLon& origin) {
  if (!(v.norm() < kMaxLocalRangeM)) {
    throw RangeError(fmt::format("offset ({}, {}) m exceeds the 500 km tangent-plane bound",
                                 v.east, v.north));
  }
  const double k = kEarthRadiusM * kDegToRad;
  return {origin.lat + v.north / k, origin.lon + v.east / (std::cos(origin.lat * kDegToRad) * k)};
}

double distance_m(const LatLon& a, const LatLon& b) { return to_local(b, a).norm(); }

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

double bearing_deg(const LatLon& a, const LatLon& b) {
  const LocalVec d = to_local(b, a);
  return wrap_deg(std::atan2(d.east, d.north) * kRadToDeg);
}

ShoreComponents decompose_shore(double east, double north, double shore_bearing_deg) {
  const double th = shore_bearing_deg * kDegToRad;
  const double s = std::sin(th);
  const double c = std::cos(th);
  return {east * s + north * c, east * c - north * s};
}

}  // namespace glidernav
