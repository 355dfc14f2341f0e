#pragma once

#include <functional>
#include <map>

namespace glidernav {

/// Time source for everything that waits. Times are epoch seconds.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  virtual void sleep_for(double seconds) = 0;
};

class SystemClock final : public Clock {
 public:
  double now() const override;
  void sleep_for(double seconds) override;
};

/// Virtual time that only moves when someone sleeps. Actions scheduled with
/// `at` fire, in time order, as sleeps carry the clock past them.
/// Single-threaded use only.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(double start = 0.0) : now_(start) {}

  double now() const override { return now_; }
  void sleep_for(double seconds) override;
  void advance_to(double t);
  void at(double t, std::function<void()> action);
  std::size_t pending() const { return actions_.size(); }

 private:
  double now_;
  std::multimap<double, std::function<void()>> actions_;
};

}  // namespace glidernav
