#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glidernav/clock.hpp"
#include "glidernav/config.hpp"
#include "glidernav/dockserver.hpp"
#include "glidernav/flowcmp.hpp"
#include "glidernav/fusion.hpp"
#include "glidernav/gsim.hpp"
#include "glidernav/pilot.hpp"
#include "glidernav/planner.hpp"
#include "glidernav/track.hpp"

namespace glidernav {

enum class SimStatus { kArrived, kDurationElapsed, kTransitsDone, kDomainExit };

std::string_view to_string(SimStatus status);

struct SimResult {
  SimStatus status = SimStatus::kDurationElapsed;
  std::vector<TrackSample> track;        ///< truth, all dives
  std::vector<SurfacingEvent> events;
  std::vector<std::size_t> target_index; ///< current target after each plan
  FusionState fusion;
  int transits = 0;
  double final_distance = 0.0;           ///< truth position to current target, m
  double final_gps_distance = 0.0;       ///< last fix to current target, m
  double elapsed = 0.0;                  ///< simulated s
  std::string report_json;               ///< deterministic summary
};

/// Closed loop: plan, fly one dive, fold the surfacing into the fusion,
/// replan, until arrival (virtual mooring), the transit count (line
/// control) or the configured duration. When `out_dir` is non-empty writes
/// trajectory.csv, events.log, flowcmp.csv, flowcmp.svg and report.json.
SimResult run_sim(const MissionConfig& cfg, const std::string& out_dir = {});

/// Pilot loop wired to the tracking planner on fused flow, checkpointing
/// after every handled event when the config names a checkpoint file.
class RemoteMission {
 public:
  /// `connect` defaults to a TCP client for the configured endpoint.
  /// Resumes from the checkpoint if one exists.
  RemoteMission(MissionConfig cfg, Clock& clock, LinkFactory connect = {});

  void run(const std::function<bool()>& keep_going = {}) { loop_->run(keep_going); }
  void poll_once() { loop_->poll_once(); }
  void stop() { loop_->stop(); }
  void on_alert(std::function<void(const std::string&)> hook) { loop_->on_alert(std::move(hook)); }
  /// Called after each handled event, once its checkpoint is on disk.
  void on_report(std::function<void(const EventReport&)> hook) { report_hook_ = std::move(hook); }

  PilotLoop& loop() { return *loop_; }
  const FusionState& fusion() const { return fusion_; }
  const TrackingMode& mode() const { return mode_; }
  bool resumed() const { return resumed_; }
  Checkpoint checkpoint() const;

 private:
  std::optional<GotoFile> handle(const SurfacingEvent& ev);

  MissionConfig cfg_;
  Clock& clock_;
  FusionState fusion_;
  TrackingMode mode_;
  bool resumed_ = false;
  std::string last_glider_;
  std::optional<double> last_t1_;
  std::unique_ptr<PilotLoop> loop_;
  std::function<void(const EventReport&)> report_hook_;
};

/// Planner run from the config's bbox, cell size and model flow.
/// Throws ConfigError when no planner.bbox is configured.
PlanResult run_plan(const MissionConfig& cfg, const LatLon& start, const LatLon& goal);

/// Events parsed from SURF logs, each dive's start taken from the previous fix.
std::vector<SurfacingEvent> load_events(std::string_view log_bytes, const std::string& glider_id = {});

/// Comparison table of the events against the configured model.
ComparisonTable run_flowcmp(const MissionConfig& cfg, const std::vector<SurfacingEvent>& events);

}  // namespace glidernav
