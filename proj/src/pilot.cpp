#include "glidernav/pilot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "glidernav/error.hpp"

namespace glidernav {

PilotLoop::PilotLoop(PilotOptions options, LinkFactory connect, EventPlanner planner, Clock& clock,
                     PollState state)
    : options_(std::move(options)),
      connect_(std::move(connect)),
      planner_(std::move(planner)),
      clock_(clock),
      state_(std::move(state)) {
  if (options_.gliders.empty()) throw RangeError("pilot loop needs at least one glider");
  if (!(options_.poll_period > 0.0)) throw RangeError("poll period must be positive");
  if (!(options_.backoff_base > 0.0) || options_.backoff_cap < options_.backoff_base) {
    throw RangeError("backoff base must be positive and not above the cap");
  }
  for (const auto& g : options_.gliders) {
    if (!is_safe_name(g)) throw RangeError("bad glider id: " + g);
    state_.gliders.try_emplace(g);
  }
}

double PilotLoop::backoff_delay(int failures) const {
  if (failures <= 0) return 0.0;
  double d = options_.backoff_base * std::ldexp(1.0, std::min(failures - 1, 30));
  return std::min(d, options_.backoff_cap);
}

void PilotLoop::alert(const std::string& message) {
  if (alert_hook_) alert_hook_(message);
}

void PilotLoop::poll_once() {
  try {
    if (!link_) link_ = connect_();
    for (const auto& g : options_.gliders) poll_glider(g);
  } catch (const ConnectionError&) {
    link_.reset();
    throw;
  } catch (const ProtocolError&) {
    link_.reset();
    throw;
  }
}

void PilotLoop::poll_glider(const std::string& glider) {
  GliderPollState& gs = state_.gliders[glider];
  auto listing = link_->list(glider);

  std::vector<RemoteFile> changed;
  for (const auto& f : listing) {
    if (f.name.size() <= options_.log_suffix.size() || !f.name.ends_with(options_.log_suffix)) continue;
    auto it = gs.files.find(f.name);
    if (it == gs.files.end() || it->second != FileStamp{f.size, f.mtime}) changed.push_back(f);
  }
  if (changed.empty()) return;

  std::vector<SurfacingEvent> fresh;
  for (const auto& f : changed) {
    std::string bytes = link_->get(glider, f.name);
    auto parsed = parse_surfacing_log(bytes);
    if (parsed.malformed > 0) alert(fmt::format("{}/{}: {} malformed records", glider, f.name, parsed.malformed));
    for (auto& rec : parsed.records) {
      if (rec.event.glider_id != glider) continue;
      if (gs.last_event_t1 && !(rec.event.t_end > *gs.last_event_t1)) continue;
      fresh.push_back(std::move(rec.event));
    }
  }
  double detected_at = clock_.now();
  std::sort(fresh.begin(), fresh.end(), [](const auto& a, const auto& b) { return a.t_end < b.t_end; });
  fresh.erase(std::unique(fresh.begin(), fresh.end(),
                          [](const auto& a, const auto& b) { return a.t_end == b.t_end; }),
              fresh.end());

  for (auto& ev : fresh) {
    if (gs.last_gps) ev.start_pos = *gs.last_gps;
    EventReport report{glider, ev.t_end, detected_at, 0.0, {}, {}};
    std::optional<GotoFile> goto_file;
    try {
      goto_file = planner_(ev);
      if (!goto_file) report.skipped = "no goto";
    } catch (const Error& e) {
      report.skipped = e.what();
      alert(fmt::format("{} surfacing at {}: {}", glider, ev.t_end, e.what()));
    }
    if (goto_file) {
      std::string name = goto_file_name(ev.t_end);
      link_->put(glider, name, render_goto(*goto_file));
      report.goto_name = name;
      report.uploaded_at = clock_.now();
    }
    gs.last_event_t1 = ev.t_end;
    gs.last_gps = ev.gps_pos;
    ++state_.processed_events;
    reports_.push_back(report);
    if (event_hook_) event_hook_(reports_.back(), state_);
  }
  for (const auto& f : changed) gs.files[f.name] = FileStamp{f.size, f.mtime};
}

void PilotLoop::run(const std::function<bool()>& keep_going) {
  double next_poll = clock_.now();
  while (!stop_.load() && (!keep_going || keep_going())) {
    double wait = 0.0;
    try {
      poll_once();
      failures_ = 0;
      next_poll += options_.poll_period;
      double now = clock_.now();
      if (next_poll < now) next_poll = now;
      wait = next_poll - now;
    } catch (const AuthError&) {
      throw;
    } catch (const Error& e) {
      ++failures_;
      if (failures_ % options_.alert_after == 0) {
        alert(fmt::format("dockserver unreachable after {} attempts: {}", failures_, e.what()));
      }
      wait = backoff_delay(failures_);
      next_poll = clock_.now() + wait;
    }
    if (stop_.load()) break;
    clock_.sleep_for(wait);
  }
}

}  // namespace glidernav
