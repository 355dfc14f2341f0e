#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glidernav/clock.hpp"
#include "glidernav/dockserver.hpp"
#include "glidernav/formats.hpp"

namespace glidernav {

struct FileStamp {
  std::uint64_t size = 0;
  long long mtime = 0;

  friend bool operator==(const FileStamp&, const FileStamp&) = default;
};

struct GliderPollState {
  std::map<std::string, FileStamp> files;  ///< log files already read
  std::optional<double> last_event_t1;     ///< newest surfacing handled
  std::optional<LatLon> last_gps;          ///< its fix; the next dive starts there

  friend bool operator==(const GliderPollState&, const GliderPollState&) = default;
};

/// Everything the loop needs to resume without repeating or missing events.
struct PollState {
  std::map<std::string, GliderPollState> gliders;
  long long processed_events = 0;

  friend bool operator==(const PollState&, const PollState&) = default;
};

struct PilotOptions {
  std::vector<std::string> gliders;
  double poll_period = 10.0;   ///< s between poll starts
  double backoff_base = 2.0;   ///< s
  double backoff_cap = 60.0;   ///< s
  int alert_after = 10;        ///< consecutive failures before alerting
  std::string log_suffix = ".log";
};

struct EventReport {
  std::string glider_id;
  double t_end = 0.0;        ///< surfacing time
  double detected_at = 0.0;  ///< clock time the log was fetched
  double uploaded_at = 0.0;  ///< clock time the goto PUT completed; 0 when nothing was sent
  std::string goto_name;     ///< empty when nothing was sent
  std::string skipped;       ///< reason the event produced no goto
};

/// Produces the goto to upload for a surfacing, or nullopt for none.
/// Exceptions are caught by the loop and reported as a skip.
using EventPlanner = std::function<std::optional<GotoFile>(const SurfacingEvent&)>;

/// Polls the dockserver for new surfacings and answers each with a goto.
/// Events are identified by (glider, t1) and handled at most once per t1.
class PilotLoop {
 public:
  PilotLoop(PilotOptions options, LinkFactory connect, EventPlanner planner, Clock& clock,
            PollState state = {});

  /// Called after every handled event with the updated state; use it to checkpoint.
  void on_event(std::function<void(const EventReport&, const PollState&)> hook) { event_hook_ = std::move(hook); }
  void on_alert(std::function<void(const std::string&)> hook) { alert_hook_ = std::move(hook); }

  /// One LIST/GET/PUT pass over every glider. Throws ConnectionError or
  /// ProtocolError; the link is dropped so the next call reconnects.
  void poll_once();

  /// Polls on the period, backing off exponentially on failures, until
  /// `keep_going` returns false or stop() is called. AuthError is rethrown.
  void run(const std::function<bool()>& keep_going = {});
  void stop() { stop_.store(true); }

  const PollState& state() const { return state_; }
  const std::vector<EventReport>& reports() const { return reports_; }
  int consecutive_failures() const { return failures_; }
  /// Delay before retry number `failures` (1-based).
  double backoff_delay(int failures) const;

 private:
  void poll_glider(const std::string& glider);
  void alert(const std::string& message);

  PilotOptions options_;
  LinkFactory connect_;
  EventPlanner planner_;
  Clock& clock_;
  PollState state_;
  std::unique_ptr<DockserverLink> link_;
  std::vector<EventReport> reports_;
  std::function<void(const EventReport&, const PollState&)> event_hook_;
  std::function<void(const std::string&)> alert_hook_;
  std::atomic<bool> stop_{false};
  int failures_ = 0;
};

}  // namespace glidernav
