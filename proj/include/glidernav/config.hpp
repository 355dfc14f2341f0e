#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glidernav/flow.hpp"
#include "glidernav/fusion.hpp"
#include "glidernav/gsim.hpp"
#include "glidernav/pilot.hpp"
#include "glidernav/planner.hpp"
#include "glidernav/track.hpp"

namespace glidernav {

enum class TrackingKind { kVirtualMooring, kLineControl };

/// Parsed and validated mission configuration.
///
/// Text form is one `key = value` per line with dotted keys; `#` starts a
/// comment. Unknown or repeated keys are rejected, as is any value out of
/// range. Relative paths resolve against the config file's directory.
struct MissionConfig {
  // glider.*
  std::string glider_id = "glider";
  std::string profile;
  double speed = 0.28;
  double glide_angle_deg = 26.0;
  double max_depth = 30.0;
  double gps_noise = 5.0;

  // deployment.*
  LatLon start;
  double start_time = 0.0;
  double shore_bearing = 45.0;
  double surface_interval = 3600.0;
  std::string flow_spec;
  std::string model_flow_spec;
  FlowVector model_bias;
  double duration = 432000.0;
  std::uint64_t seed = 1;

  // tracking.*
  TrackingKind mode = TrackingKind::kVirtualMooring;
  std::vector<LatLon> targets;
  double horizon = 43200.0;
  double waypoint_spacing = 14400.0;
  double arrival_radius = 200.0;
  double predict_dt = 60.0;
  int transits = 0;  ///< line-control stop condition; 0 runs for the full duration
  double staleness = 1800.0;

  // dockserver.*
  std::string endpoint;
  std::string token;
  double poll_period = 10.0;
  std::string checkpoint;

  // fusion.*
  double half_life = kDefaultHalfLife;

  // planner.*
  std::optional<BBox> plan_bbox;
  double plan_cell = 1000.0;
  double dt_plan = 600.0;
  double plan_horizon = 259200.0;

  // flowcmp.*
  double lattice_dt = 600.0;
  double strong_flow_threshold = 0.3;

  // output.*
  std::string output_dir = ".";

  /// Sources built at load time.
  FlowSourcePtr truth_flow;
  FlowSourcePtr model_flow;  ///< model_flow_spec (default: the truth) plus model_bias

  /// FNV-1a of the canonical (sorted, trimmed) key/value text.
  std::string hash;

  TrackingMode tracking_mode() const;
  TrackParams track_params() const;
  DiveParams dive_params() const;
};

/// Parses config text. `base_dir` anchors relative paths. Throws ConfigError.
MissionConfig parse_config(std::string_view text, const std::string& base_dir = ".");
MissionConfig load_config(const std::string& path);

/// Speed preset for a named glider profile, if known.
std::optional<double> profile_speed(std::string_view profile);

/// Resumable remote-mission state.
struct Checkpoint {
  std::string config_hash;
  PollState poll;
  FusionState fusion;
  std::optional<LineControl> line_control;  ///< targets are not stored; only index and direction
  std::string last_glider;
  std::optional<double> last_t1;
};

std::string checkpoint_json(const Checkpoint& cp);
/// Throws ParseError on malformed input.
Checkpoint parse_checkpoint(std::string_view json);
/// Atomic write (temporary + rename).
void save_checkpoint(const Checkpoint& cp, const std::string& path);
/// nullopt when the file does not exist. Throws ConfigError when it belongs
/// to a different configuration.
std::optional<Checkpoint> load_checkpoint(const std::string& path, const std::string& expected_hash);

}  // namespace glidernav
