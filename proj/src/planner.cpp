#include "glidernav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "glidernav/error.hpp"

namespace glidernav {
namespace {

constexpr int kMoves[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

struct StateInfo {
  std::int64_t label = std::numeric_limits<std::int64_t>::max();  // ms since t0
  std::uint64_t parent = std::numeric_limits<std::uint64_t>::max();
  bool closed = false;
};

// Shared geometry and bookkeeping for both searches.
class SearchSpace {
 public:
  SearchSpace(const PlanGrid& grid, const FlowSource& flow, double speed)
      : grid_(grid), flow_(flow), speed_(speed) {
    grid_.validate();
    if (!(speed > 0.0)) throw RangeError("planner speed must be positive");
    bucket_ms_ = static_cast<std::int64_t>(std::llround(grid.dt_plan * 1000.0));
    horizon_ms_ = static_cast<std::int64_t>(std::llround(grid.horizon * 1000.0));
    buckets_ = static_cast<std::uint64_t>(horizon_ms_ / bucket_ms_) + 1;
  }

  std::uint64_t key(std::size_t cell, std::int64_t label) const {
    return static_cast<std::uint64_t>(cell) * buckets_ + static_cast<std::uint64_t>(label / bucket_ms_);
  }
  std::size_t cell_of_key(std::uint64_t k) const { return static_cast<std::size_t>(k / buckets_); }
  std::size_t cell(std::size_t i, std::size_t j) const { return j * grid_.nx + i; }
  std::size_t ci(std::size_t c) const { return c % grid_.nx; }
  std::size_t cj(std::size_t c) const { return c / grid_.nx; }
  std::int64_t horizon_ms() const { return horizon_ms_; }
  const PlanGrid& grid() const { return grid_; }

  // Calls visit(neighbour_cell, arrival_label) for each passable move out of (c, label).
  template <typename Visit>
  void expand(std::size_t c, std::int64_t label, Visit&& visit) const {
    const auto i = static_cast<long long>(ci(c));
    const auto j = static_cast<long long>(cj(c));
    const FlowVector f = flow_.sample(grid_.center(ci(c), cj(c)),
                                      grid_.t0 + static_cast<double>(label) / 1000.0);
    for (const auto& m : kMoves) {
      const long long ni = i + m[0];
      const long long nj = j + m[1];
      if (ni < 0 || nj < 0 || ni >= static_cast<long long>(grid_.nx) ||
          nj >= static_cast<long long>(grid_.ny)) {
        continue;
      }
      const auto cost = edge_time_ms(m[0], m[1], grid_.cell, f, speed_);
      if (!cost) continue;
      const std::int64_t arrival = label + *cost;
      if (arrival > horizon_ms_) continue;
      visit(cell(static_cast<std::size_t>(ni), static_cast<std::size_t>(nj)), arrival);
    }
  }

  PlanResult reconstruct(const std::unordered_map<std::uint64_t, StateInfo>& states,
                         std::uint64_t goal_key) const {
    PlanResult r;
    std::vector<std::uint64_t> chain;
    for (std::uint64_t k = goal_key; k != std::numeric_limits<std::uint64_t>::max();
         k = states.at(k).parent) {
      chain.push_back(k);
    }
    std::reverse(chain.begin(), chain.end());
    for (auto k : chain) {
      const std::size_t c = cell_of_key(k);
      r.path.push_back(grid_.center(ci(c), cj(c)));
      r.arrival_times.push_back(static_cast<double>(states.at(k).label) / 1000.0);
    }
    r.total_time = r.arrival_times.back();
    return r;
  }

 private:
  PlanGrid grid_;
  const FlowSource& flow_;
  double speed_;
  std::int64_t bucket_ms_ = 1;
  std::int64_t horizon_ms_ = 0;
  std::uint64_t buckets_ = 1;
};

PlanResult trivial_or_blocked(bool blocked, const LatLon& at) {
  PlanResult r;
  r.blocked = blocked;
  if (blocked) {
    r.total_time = std::numeric_limits<double>::infinity();
  } else {
    r.path = {at};
    r.arrival_times = {0.0};
  }
  return r;
}

}  // namespace

PlanGrid PlanGrid::covering(const BBox& bbox, double cell, double t0) {
  if (!(cell > 0.0)) throw RangeError("plan cell size must be positive");
  const LocalVec extent = to_local(bbox.north_east, bbox.south_west);
  if (!(extent.east > 0.0) || !(extent.north > 0.0)) throw RangeError("plan bbox is degenerate");
  PlanGrid g;
  g.bbox = bbox;
  g.cell = cell;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(extent.east / cell)));
  g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(extent.north / cell)));
  g.t0 = t0;
  g.validate();
  return g;
}

void PlanGrid::validate() const {
  if (!(cell > 0.0)) throw RangeError("plan cell size must be positive");
  if (nx == 0 || ny == 0) throw RangeError("plan grid needs at least one cell");
  if (nx * ny > 1000000) throw RangeError("plan grid exceeds 10^6 cells");
  if (!(dt_plan > 0.0)) throw RangeError("dt_plan must be positive");
  if (!(horizon > 0.0)) throw RangeError("plan horizon must be positive");
  glidernav::validate(bbox.south_west);
  glidernav::validate(bbox.north_east);
}

LatLon PlanGrid::center(std::size_t i, std::size_t j) const {
  return from_local({(static_cast<double>(i) + 0.5) * cell, (static_cast<double>(j) + 0.5) * cell},
                    bbox.south_west);
}

std::pair<std::size_t, std::size_t> PlanGrid::cell_of(const LatLon& p) const {
  if (!bbox.contains(p)) {
    throw RangeError(fmt::format("position ({}, {}) outside planning bbox", p.lat, p.lon));
  }
  const LocalVec v = to_local(p, bbox.south_west);
  auto idx = [&](double x, std::size_t n) {
    const auto k = static_cast<long long>(std::floor(x / cell));
    return static_cast<std::size_t>(std::clamp<long long>(k, 0, static_cast<long long>(n) - 1));
  };
  return {idx(v.east, nx), idx(v.north, ny)};
}

std::optional<double> edge_time(int di, int dj, double cell, const FlowVector& flow, double speed) {
  if (std::abs(di) > 1 || std::abs(dj) > 1 || (di == 0 && dj == 0)) {
    throw RangeError("edge_time: cells are not 8-neighbours");
  }
  if (!(speed > 0.0)) throw RangeError("edge_time: speed must be positive");
  const double norm = std::hypot(static_cast<double>(di), static_cast<double>(dj));
  const double length = cell * norm;
  const double de = di / norm;
  const double dn = dj / norm;
  const double f_along = flow.u * de + flow.v * dn;
  const double f_cross = flow.u * dn - flow.v * de;
  if (std::fabs(f_cross) > speed) return std::nullopt;
  const double ground = speed * std::cos(std::asin(f_cross / speed)) + f_along;
  if (!(ground > 0.0)) return std::nullopt;
  return length / ground;
}

std::optional<std::int64_t> edge_time_ms(int di, int dj, double cell, const FlowVector& flow, double speed) {
  const auto s = edge_time(di, dj, cell, flow, speed);
  if (!s) return std::nullopt;
  return static_cast<std::int64_t>(std::ceil(*s * 1000.0));
}

PlanResult astar_plan(const LatLon& start, const LatLon& goal, const FlowSource& flow,
                      const PlanGrid& grid, double speed, const ExpansionObserver& observer) {
  SearchSpace space(grid, flow, speed);
  const auto [si, sj] = grid.cell_of(start);
  const auto [gi, gj] = grid.cell_of(goal);
  if (si == gi && sj == gj) return trivial_or_blocked(false, grid.center(si, sj));

  const double f_max = flow.max_speed(grid.bbox, {grid.t0, grid.t0 + grid.horizon});
  const double top_speed = speed + f_max;
  auto heuristic_ms = [&](std::size_t c) {
    const double di = static_cast<double>(space.ci(c)) - static_cast<double>(gi);
    const double dj = static_cast<double>(space.cj(c)) - static_cast<double>(gj);
    return static_cast<std::int64_t>(std::floor(grid.cell * std::hypot(di, dj) / top_speed * 1000.0));
  };

  // (f, h, cell, label): smaller f, then smaller h, then lower cell index.
  using Entry = std::tuple<std::int64_t, std::int64_t, std::size_t, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::unordered_map<std::uint64_t, StateInfo> states;

  const std::size_t start_cell = space.cell(si, sj);
  const std::size_t goal_cell = space.cell(gi, gj);
  states[space.key(start_cell, 0)].label = 0;
  open.emplace(heuristic_ms(start_cell), heuristic_ms(start_cell), start_cell, 0);

  std::size_t expanded = 0;
  while (!open.empty()) {
    const auto [f, h, c, g] = open.top();
    open.pop();
    const std::uint64_t k = space.key(c, g);
    StateInfo& info = states[k];
    if (info.closed || info.label != g) continue;
    info.closed = true;
    ++expanded;
    if (observer) {
      observer({space.ci(c), space.cj(c), static_cast<double>(g) / 1000.0, static_cast<double>(h) / 1000.0});
    }
    if (c == goal_cell) {
      PlanResult r = space.reconstruct(states, k);
      r.expanded_nodes = expanded;
      return r;
    }
    space.expand(c, g, [&](std::size_t nc, std::int64_t arrival) {
      const std::uint64_t nk = space.key(nc, arrival);
      StateInfo& next = states[nk];
      if (arrival < next.label) {
        next.label = arrival;
        next.parent = k;
        next.closed = false;
        const std::int64_t nh = heuristic_ms(nc);
        open.emplace(arrival + nh, nh, nc, arrival);
      }
    });
  }
  PlanResult r = trivial_or_blocked(true, start);
  r.expanded_nodes = expanded;
  return r;
}

PlanResult dijkstra_oracle(const LatLon& start, const LatLon& goal, const FlowSource& flow,
                           const PlanGrid& grid, double speed) {
  SearchSpace space(grid, flow, speed);
  const auto [si, sj] = grid.cell_of(start);
  const auto [gi, gj] = grid.cell_of(goal);
  if (si == gi && sj == gj) return trivial_or_blocked(false, grid.center(si, sj));

  using Entry = std::pair<std::int64_t, std::uint64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::unordered_map<std::uint64_t, StateInfo> states;
  const std::size_t goal_cell = space.cell(gi, gj);
  const std::uint64_t k0 = space.key(space.cell(si, sj), 0);
  states[k0].label = 0;
  queue.emplace(0, k0);

  std::size_t settled = 0;
  std::optional<std::uint64_t> best_goal;
  while (!queue.empty()) {
    const auto [label, k] = queue.top();
    queue.pop();
    StateInfo& info = states[k];
    if (info.closed || info.label != label) continue;
    info.closed = true;
    ++settled;
    const std::size_t c = space.cell_of_key(k);
    if (c == goal_cell) {
      if (!best_goal || label < states.at(*best_goal).label) best_goal = k;
      continue;  // paths through the goal cannot reach it sooner
    }
    space.expand(c, label, [&](std::size_t nc, std::int64_t arrival) {
      const std::uint64_t nk = space.key(nc, arrival);
      StateInfo& next = states[nk];
      if (!next.closed && arrival < next.label) {
        next.label = arrival;
        next.parent = k;
        queue.emplace(arrival, nk);
      }
    });
  }
  if (!best_goal) {
    PlanResult r = trivial_or_blocked(true, start);
    r.expanded_nodes = settled;
    return r;
  }
  PlanResult r = space.reconstruct(states, *best_goal);
  r.expanded_nodes = settled;
  return r;
}

std::vector<LatLon> path_to_targets(const PlanResult& result, double spacing_m) {
  if (!(spacing_m > 0.0)) throw RangeError("target spacing must be positive");
  std::vector<LatLon> out;
  if (result.blocked || result.path.size() < 2) return out;
  double run = 0.0;
  for (std::size_t i = 1; i < result.path.size(); ++i) {
    run += distance_m(result.path[i - 1], result.path[i]);
    if (run >= spacing_m && i + 1 < result.path.size()) {
      out.push_back(result.path[i]);
      run = 0.0;
    }
  }
  out.push_back(result.path.back());
  return out;
}

std::string plan_csv(const PlanResult& result) {
  std::string out = "lat,lon,cumulative_time\n";
  for (std::size_t i = 0; i < result.path.size(); ++i) {
    out += fmt::format("{},{},{}\n", result.path[i].lat, result.path[i].lon, result.arrival_times[i]);
  }
  return out;
}

}  // namespace glidernav
