#include "glidernav/clock.hpp"

#include <chrono>
#include <thread>

namespace glidernav {

double SystemClock::now() const {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

void ManualClock::sleep_for(double seconds) {
  if (seconds > 0.0) advance_to(now_ + seconds);
}

void ManualClock::advance_to(double t) {
  while (!actions_.empty() && actions_.begin()->first <= t) {
    auto node = actions_.extract(actions_.begin());
    if (node.key() > now_) now_ = node.key();
    node.mapped()();
  }
  if (t > now_) now_ = t;
}

void ManualClock::at(double t, std::function<void()> action) { actions_.emplace(t, std::move(action)); }

}  // namespace glidernav
