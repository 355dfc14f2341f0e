#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "glidernav/error.hpp"
#include "glidernav/planner.hpp"
#include "support.hpp"

using namespace glidernav;

namespace {

const LatLon kSouthWest{31.0, -80.0};

PlanGrid make_grid(std::size_t nx, std::size_t ny, double cell = 1000.0) {
  PlanGrid g;
  g.bbox = {kSouthWest, from_local({nx * cell, ny * cell}, kSouthWest)};
  g.cell = cell;
  g.nx = nx;
  g.ny = ny;
  g.t0 = 0.0;
  g.horizon = 86400.0;
  return g;
}

// Flow chosen per planning cell.
class CellFlow final : public FlowSource {
 public:
  CellFlow(PlanGrid grid, std::function<FlowVector(std::size_t, std::size_t)> fn)
      : grid_(std::move(grid)), fn_(std::move(fn)) {}
  FlowVector sample(const LatLon& p, double, OutOfDomain) const override {
    const auto [i, j] = grid_.cell_of(p);
    return fn_(i, j);
  }
  double max_speed(const BBox&, const TimeWindow&) const override {
    double best = 0.0;
    for (std::size_t j = 0; j < grid_.ny; ++j) {
      for (std::size_t i = 0; i < grid_.nx; ++i) best = std::max(best, fn_(i, j).speed());
    }
    return best;
  }

 private:
  PlanGrid grid_;
  std::function<FlowVector(std::size_t, std::size_t)> fn_;
};

std::shared_ptr<GridFlow> random_field(testsupport::Gen& gen, const PlanGrid& g, double amplitude) {
  FlowGrid f;
  f.origin = {g.bbox.south_west.lat - 0.01, g.bbox.south_west.lon - 0.01};
  f.ny = 4;
  f.nx = 4;
  f.dlat = (g.bbox.north_east.lat - f.origin.lat + 0.01) / 3.0;
  f.dlon = (g.bbox.north_east.lon - f.origin.lon + 0.01) / 3.0;
  f.t0 = g.t0;
  f.dt = 21600.0;
  f.nt = 5;
  for (std::size_t k = 0; k < f.nt * f.ny * f.nx; ++k) {
    f.frames.push_back({gen.uniform(-amplitude, amplitude), gen.uniform(-amplitude, amplitude)});
  }
  return std::make_shared<GridFlow>(f);
}

// Lattice length: straight steps cost one cell, diagonal steps sqrt(2).
double path_length(const PlanResult& r, const PlanGrid& g) {
  double len = 0.0;
  for (std::size_t k = 1; k < r.path.size(); ++k) {
    const auto [i0, j0] = g.cell_of(r.path[k - 1]);
    const auto [i1, j1] = g.cell_of(r.path[k]);
    len += (i0 != i1 && j0 != j1) ? g.cell * std::sqrt(2.0) : g.cell;
  }
  return len;
}

}  // namespace

TEST(EdgeTime, Examples) {
  EXPECT_NEAR(*edge_time(1, 0, 1000.0, {0.0, 0.0}, 0.25), 4000.0, 1e-9);
  EXPECT_NEAR(*edge_time(1, 0, 1000.0, {0.25, 0.0}, 0.25), 2000.0, 1e-9);
  EXPECT_FALSE(edge_time(1, 0, 1000.0, {-0.3, 0.0}, 0.25).has_value());
  EXPECT_FALSE(edge_time(0, 1, 1000.0, {0.3, 0.0}, 0.25).has_value());
  EXPECT_NEAR(*edge_time(1, 1, 1000.0, {0.0, 0.0}, 0.25), std::sqrt(2.0) * 4000.0, 1e-9);
  EXPECT_EQ(*edge_time_ms(1, 1, 1000.0, {0.0, 0.0}, 0.25), 5656855);
  EXPECT_THROW(edge_time(2, 0, 1000.0, {}, 0.25), RangeError);
  EXPECT_THROW(edge_time(0, 0, 1000.0, {}, 0.25), RangeError);
}

TEST(Astar, ZeroFlowCornerToCorner) {
  const PlanGrid g = make_grid(3, 3);
  const UniformFlow still({0.0, 0.0});
  const PlanResult r = astar_plan(g.center(0, 0), g.center(2, 2), still, g, 0.25);
  ASSERT_FALSE(r.blocked);
  EXPECT_NEAR(r.total_time, 11313.7, 0.1);
  ASSERT_EQ(r.path.size(), 3u);
  EXPECT_EQ(r.path[1], g.center(1, 1));
  EXPECT_EQ(r.total_time, dijkstra_oracle(g.center(0, 0), g.center(2, 2), still, g, 0.25).total_time);
}

TEST(Astar, StartEqualsGoal) {
  const PlanGrid g = make_grid(3, 3);
  const PlanResult r = astar_plan(g.center(1, 1), g.center(1, 1), UniformFlow({0.0, 0.0}), g, 0.25);
  EXPECT_FALSE(r.blocked);
  EXPECT_EQ(r.total_time, 0.0);
  EXPECT_EQ(r.path, std::vector<LatLon>{g.center(1, 1)});
}

TEST(Astar, OutsideBboxRejected) {
  const PlanGrid g = make_grid(3, 3);
  EXPECT_THROW(astar_plan({30.0, -80.0}, g.center(1, 1), UniformFlow({0.0, 0.0}), g, 0.25), RangeError);
}

TEST(Astar, RoutesThroughGapInWall) {
  const PlanGrid g = make_grid(5, 5);
  const CellFlow flow(g, [](std::size_t i, std::size_t j) {
    return (j == 2 && i != 4) ? FlowVector{0.0, -0.5} : FlowVector{0.0, 0.0};
  });
  const PlanResult r = astar_plan(g.center(0, 0), g.center(0, 4), flow, g, 0.25);
  ASSERT_FALSE(r.blocked);
  bool through_gap = false;
  for (const auto& p : r.path) {
    const auto [i, j] = g.cell_of(p);
    if (j == 2) {
      EXPECT_EQ(i, 4u);
      through_gap = true;
    }
  }
  EXPECT_TRUE(through_gap);
  EXPECT_EQ(r.total_time, dijkstra_oracle(g.center(0, 0), g.center(0, 4), flow, g, 0.25).total_time);
}

TEST(Astar, ImpassableRingBlocksBoth) {
  const PlanGrid g = make_grid(5, 5);
  const CellFlow flow(g, [](std::size_t i, std::size_t j) {
    const double di = static_cast<double>(i) - 2.0;
    const double dj = static_cast<double>(j) - 2.0;
    if (di == 0.0 && dj == 0.0) return FlowVector{0.0, 0.0};
    if (std::fabs(di) > 1.0 || std::fabs(dj) > 1.0) return FlowVector{0.0, 0.0};
    const double n = std::hypot(di, dj);
    return FlowVector{0.5 * di / n, 0.5 * dj / n};
  });
  const PlanResult a = astar_plan(g.center(0, 0), g.center(2, 2), flow, g, 0.25);
  const PlanResult d = dijkstra_oracle(g.center(0, 0), g.center(2, 2), flow, g, 0.25);
  EXPECT_TRUE(a.blocked);
  EXPECT_TRUE(d.blocked);
  EXPECT_TRUE(a.path.empty());
}

TEST(Astar, HorizonBoundsSearch) {
  PlanGrid g = make_grid(10, 1);
  g.horizon = 3600.0;
  const PlanResult r = astar_plan(g.center(0, 0), g.center(9, 0), UniformFlow({0.0, 0.0}), g, 0.25);
  EXPECT_TRUE(r.blocked);
}

TEST(Astar, ZeroFlowTimeIsPathLengthOverSpeed) {
  testsupport::Gen gen(61);
  for (int trial = 0; trial < 20; ++trial) {
    const auto nx = static_cast<std::size_t>(gen.integer(2, 10));
    const auto ny = static_cast<std::size_t>(gen.integer(2, 10));
    const PlanGrid g = make_grid(nx, ny, gen.uniform(200.0, 2000.0));
    const LatLon s = g.center(gen.integer(0, nx - 1), gen.integer(0, ny - 1));
    const LatLon e = g.center(gen.integer(0, nx - 1), gen.integer(0, ny - 1));
    const PlanResult r = astar_plan(s, e, UniformFlow({0.0, 0.0}), g, 0.25);
    ASSERT_FALSE(r.blocked);
    const double edges = static_cast<double>(r.path.size() - 1);
    EXPECT_NEAR(r.total_time, path_length(r, g) / 0.25, 1e-3 * edges + 1e-3);
  }
}

TEST(Astar, MatchesOracleOnRandomInstances) {
  testsupport::Gen gen(62);
  int routed = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto nx = static_cast<std::size_t>(gen.integer(2, 10));
    const auto ny = static_cast<std::size_t>(gen.integer(2, 10));
    const PlanGrid g = make_grid(nx, ny);
    const auto flow = random_field(gen, g, 0.3);
    const LatLon s = g.center(gen.integer(0, nx - 1), gen.integer(0, ny - 1));
    const LatLon e = g.center(gen.integer(0, nx - 1), gen.integer(0, ny - 1));
    const PlanResult a = astar_plan(s, e, *flow, g, 0.25);
    const PlanResult d = dijkstra_oracle(s, e, *flow, g, 0.25);
    ASSERT_EQ(a.blocked, d.blocked) << "trial " << trial;
    if (a.blocked) continue;
    ++routed;
    EXPECT_EQ(a.total_time, d.total_time) << "trial " << trial;
    EXPECT_LE(a.expanded_nodes, d.expanded_nodes);
    EXPECT_EQ(a.path.front(), g.center(g.cell_of(s).first, g.cell_of(s).second));
    EXPECT_EQ(a.path.back(), e);
    for (std::size_t i = 1; i < a.arrival_times.size(); ++i) EXPECT_GT(a.arrival_times[i], a.arrival_times[i - 1]);
  }
  EXPECT_GT(routed, 25);
}

TEST(Astar, HeuristicNeverOverestimates) {
  testsupport::Gen gen(63);
  for (int trial = 0; trial < 8; ++trial) {
    const auto nx = static_cast<std::size_t>(gen.integer(3, 6));
    const auto ny = static_cast<std::size_t>(gen.integer(3, 6));
    const PlanGrid g = make_grid(nx, ny);
    const auto flow = random_field(gen, g, 0.2);
    const LatLon e = g.center(nx - 1, ny - 1);
    std::vector<ExpandedState> seen;
    astar_plan(g.center(0, 0), e, *flow, g, 0.25, [&](const ExpandedState& s) { seen.push_back(s); });
    ASSERT_FALSE(seen.empty());
    for (const auto& s : seen) {
      PlanGrid from = g;
      from.t0 = g.t0 + s.time;
      from.horizon = g.horizon - s.time;
      const PlanResult rest = dijkstra_oracle(g.center(s.i, s.j), e, *flow, from, 0.25);
      if (rest.blocked) continue;
      EXPECT_LE(s.heuristic, rest.total_time + 1e-3);
    }
  }
}

TEST(PlanGrid, CoveringAndValidation) {
  const BBox box{kSouthWest, from_local({5500.0, 3200.0}, kSouthWest)};
  const PlanGrid g = PlanGrid::covering(box, 1000.0, 0.0);
  EXPECT_EQ(g.nx, 5u);
  EXPECT_EQ(g.ny, 3u);
  EXPECT_THROW(PlanGrid::covering(box, 0.0, 0.0), RangeError);
  EXPECT_THROW(PlanGrid::covering(box, 1.0, 0.0), RangeError);
  PlanGrid bad = g;
  bad.dt_plan = 0.0;
  EXPECT_THROW(bad.validate(), RangeError);
}

TEST(PlanOutput, TargetsAndCsv) {
  const PlanGrid g = make_grid(6, 6);
  const PlanResult r = astar_plan(g.center(0, 0), g.center(5, 5), UniformFlow({0.0, 0.0}), g, 0.25);
  const auto targets = path_to_targets(r, 2500.0);
  ASSERT_FALSE(targets.empty());
  EXPECT_EQ(targets.back(), g.center(5, 5));
  EXPECT_LT(targets.size(), r.path.size());
  const std::string csv = plan_csv(r);
  EXPECT_EQ(csv.rfind("lat,lon,cumulative_time\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.path.size() + 1));
}
