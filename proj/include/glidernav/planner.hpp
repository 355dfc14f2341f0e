#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glidernav/flow.hpp"
#include "glidernav/geo.hpp"

namespace glidernav {

/// Square-cell planning lattice anchored at the south-west corner of `bbox`.
/// Cell (i, j) is centred (i + 0.5, j + 0.5) * cell meters east/north of it.
struct PlanGrid {
  BBox bbox;
  double cell = 1000.0;      ///< m
  std::size_t nx = 0;
  std::size_t ny = 0;
  double t0 = 0.0;           ///< departure time, epoch s
  double dt_plan = 600.0;    ///< arrival-time bucket width, s
  double horizon = 259200.0; ///< states arriving after t0 + horizon are dropped, s

  /// Derives nx, ny from the bbox extent.
  static PlanGrid covering(const BBox& bbox, double cell, double t0);

  void validate() const;
  LatLon center(std::size_t i, std::size_t j) const;
  /// Cell containing p. Throws RangeError outside the bbox.
  std::pair<std::size_t, std::size_t> cell_of(const LatLon& p) const;
};

struct PlanResult {
  std::vector<LatLon> path;          ///< cell centres, start to goal
  std::vector<double> arrival_times; ///< cumulative seconds since t0, per path entry
  double total_time = 0.0;           ///< s
  std::size_t expanded_nodes = 0;
  bool blocked = false;
};

/// Time to cross one edge, or nullopt when the edge is impassable
/// (cross flow stronger than the glider, or no forward ground speed).
/// `di`, `dj` in {-1, 0, 1} select the neighbour; flow is taken at the tail.
std::optional<double> edge_time(int di, int dj, double cell, const FlowVector& flow, double speed);

/// Internal edge cost in whole milliseconds, rounded up so path sums are
/// exact and the heuristic stays admissible.
std::optional<std::int64_t> edge_time_ms(int di, int dj, double cell, const FlowVector& flow, double speed);

struct ExpandedState {
  std::size_t i = 0;
  std::size_t j = 0;
  double time = 0.0;       ///< s since t0
  double heuristic = 0.0;  ///< s
};

using ExpansionObserver = std::function<void(const ExpandedState&)>;

/// Time-expanded A* over (cell, arrival bucket) states with 8-neighbour
/// moves and time-varying edge costs.
PlanResult astar_plan(const LatLon& start, const LatLon& goal, const FlowSource& flow,
                      const PlanGrid& grid, double speed, const ExpansionObserver& observer = {});

/// Same search space and costs without a heuristic, run until every
/// reachable state inside the horizon is settled.
PlanResult dijkstra_oracle(const LatLon& start, const LatLon& goal, const FlowSource& flow,
                           const PlanGrid& grid, double speed);

/// Resamples a planned path to roughly one target per `spacing_m`, keeping the goal.
std::vector<LatLon> path_to_targets(const PlanResult& result, double spacing_m);

/// CSV with header `lat,lon,cumulative_time`.
std::string plan_csv(const PlanResult& result);

}  // namespace glidernav
