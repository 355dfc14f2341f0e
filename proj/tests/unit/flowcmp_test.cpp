#include <cmath>

#include <gtest/gtest.h>

#include "glidernav/error.hpp"
#include "glidernav/flowcmp.hpp"
#include "support.hpp"

using namespace glidernav;

namespace {

std::vector<SurfacingEvent> events_with(const std::vector<FlowVector>& estimates, double t0 = 1e6) {
  std::vector<SurfacingEvent> out;
  LatLon pos{31.0, -80.0};
  double t = t0;
  for (const auto& f : estimates) {
    SurfacingEvent ev;
    ev.glider_id = "g";
    ev.t_start = t;
    ev.t_end = t + 3600.0;
    ev.start_pos = pos;
    ev.gps_pos = from_local({300.0, 500.0}, pos);
    ev.deadreckon_pos = ev.gps_pos;
    ev.flow_estimate = f;
    out.push_back(ev);
    pos = ev.gps_pos;
    t = ev.t_end + 600.0;
  }
  return out;
}

std::vector<ComparisonRow> rows_of(const ComparisonTable& t, FlowSourceKind k) {
  std::vector<ComparisonRow> out;
  for (const auto& r : t.rows) {
    if (r.source == k) out.push_back(r);
  }
  return out;
}

ComparisonTable alert_table(double glider_speed, double fused_speed) {
  ComparisonTable t;
  t.rows.push_back({0.0, FlowSourceKind::kModel, 0.0, 0.0, 0.0, 0.0});
  t.rows.push_back({0.0, FlowSourceKind::kFused, fused_speed, 0.0, 0.0, 0.0});
  t.rows.push_back({100.0, FlowSourceKind::kGlider, 0.0, glider_speed, 0.0, 0.0});
  t.rows.push_back({200.0, FlowSourceKind::kModel, 0.0, 0.0, 0.0, 0.0});
  t.rows.push_back({200.0, FlowSourceKind::kFused, fused_speed, 0.0, 0.0, 0.0});
  return t;
}

}  // namespace

TEST(BuildTable, FusedSeriesEndsTwelveHoursAfterLastSurfacing) {
  const auto events = events_with({{0.1, 0.0}, {0.2, 0.0}, {0.1, 0.1}});
  const UniformFlow model({0.05, 0.0});
  for (double dt : {600.0, 700.0, 1000.0, 3600.0}) {
    const ComparisonTable t = build_table(events, model, {}, 45.0, dt);
    const auto fused = rows_of(t, FlowSourceKind::kFused);
    const auto modeled = rows_of(t, FlowSourceKind::kModel);
    EXPECT_EQ(fused.back().t, events.back().t_end + 43200.0);
    EXPECT_EQ(modeled.back().t, events.back().t_end + 43200.0);
    EXPECT_EQ(fused.front().t, events.front().t_start);
    for (std::size_t k = 1; k < fused.size(); ++k) EXPECT_LE(fused[k].t - fused[k - 1].t, dt + 1e-9);
  }
}

TEST(BuildTable, NoResidualMeansFusedEqualsModel) {
  const UniformFlow model({0.1, -0.05});
  const auto events = events_with({{0.1, -0.05}, {0.1, -0.05}});
  const ComparisonTable t = build_table(events, model, {}, 30.0);
  const auto fused = rows_of(t, FlowSourceKind::kFused);
  const auto modeled = rows_of(t, FlowSourceKind::kModel);
  ASSERT_EQ(fused.size(), modeled.size());
  for (std::size_t k = 0; k < fused.size(); ++k) {
    EXPECT_EQ(fused[k].u, modeled[k].u);
    EXPECT_EQ(fused[k].v, modeled[k].v);
  }
}

TEST(BuildTable, GliderRowDecomposition) {
  const ComparisonTable t = build_table(events_with({{0.1, 0.0}}), UniformFlow({0.0, 0.0}), {}, 90.0);
  const auto glider = rows_of(t, FlowSourceKind::kGlider);
  ASSERT_EQ(glider.size(), 1u);
  EXPECT_NEAR(glider[0].along, 0.1, 1e-12);
  EXPECT_NEAR(glider[0].cross, 0.0, 1e-12);
  EXPECT_EQ(glider[0].t, 1e6 + 1800.0);
}

TEST(BuildTable, FusedOnlyUsesPastSurfacings) {
  const UniformFlow model({0.0, 0.0});
  const auto events = events_with({{0.2, 0.0}});
  const ComparisonTable t = build_table(events, model, {}, 0.0);
  for (const auto& r : rows_of(t, FlowSourceKind::kFused)) {
    if (r.t < events[0].t_end) {
      EXPECT_EQ(r.u, 0.0);
    } else {
      EXPECT_GT(r.u, 0.0);
    }
  }
}

TEST(BuildTable, RowsSortedByTimeThenSource) {
  const ComparisonTable t = build_table(events_with({{0.1, 0.0}, {0.2, 0.1}}), UniformFlow({0.0, 0.0}), {}, 0.0, 900.0);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const auto& a = t.rows[k - 1];
    const auto& b = t.rows[k];
    EXPECT_TRUE(a.t < b.t || (a.t == b.t && static_cast<int>(a.source) < static_cast<int>(b.source)));
  }
}

TEST(BuildTable, Rejections) {
  const UniformFlow model({0.0, 0.0});
  EXPECT_THROW(build_table({}, model, {}, 0.0), RangeError);
  auto events = events_with({{0.1, 0.0}, {0.1, 0.0}});
  EXPECT_THROW(build_table(events, model, {}, 0.0, 0.0), RangeError);
  std::swap(events[0], events[1]);
  EXPECT_THROW(build_table(events, model, {}, 0.0), RangeError);
}

TEST(StrongFlow, Conjunction) {
  EXPECT_EQ(detect_strong_flow(alert_table(0.35, 0.32)).size(), 1u);
  EXPECT_TRUE(detect_strong_flow(alert_table(0.35, 0.25)).empty());
  EXPECT_TRUE(detect_strong_flow(alert_table(0.25, 0.35)).empty());
  EXPECT_TRUE(detect_strong_flow(alert_table(0.0, 0.0)).empty());
  EXPECT_TRUE(detect_strong_flow(alert_table(0.3, 0.3)).empty());
  const auto a = detect_strong_flow(alert_table(0.35, 0.32));
  EXPECT_EQ(a[0].t, 100.0);
  EXPECT_NEAR(a[0].glider_speed, 0.35, 1e-12);
  EXPECT_NEAR(a[0].fused_speed, 0.32, 1e-12);
}

TEST(StrongFlow, FiresIffBothExceedThreshold) {
  testsupport::Gen gen(81);
  for (int k = 0; k < 2000; ++k) {
    const double g = gen.uniform(0.0, 0.6);
    const double f = gen.uniform(0.0, 0.6);
    const bool fired = !detect_strong_flow(alert_table(g, f)).empty();
    EXPECT_EQ(fired, g > 0.3 && f > 0.3);
  }
}

TEST(Csv, OneRowTableIsTwoLines) {
  ComparisonTable t;
  t.rows.push_back({1.0, FlowSourceKind::kGlider, 0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(emit_csv(t), "t,source,u,v,along,cross\n1,glider,0.1,0.2,0.3,0.4\n");
}

TEST(Csv, RoundTripIsExact) {
  testsupport::Gen gen(82);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FlowVector> est;
    for (int k = gen.integer(1, 10); k > 0; --k) est.push_back({gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)});
    const auto flow = make_flow("tide 0.15 44712 0.7");
    const ComparisonTable t = build_table(events_with(est, gen.uniform(0, 1e9)), *flow, {}, gen.uniform(0, 360));
    EXPECT_EQ(parse_csv(emit_csv(t)), t);
  }
}

TEST(Csv, ParserHandlesQuotingAndCrlf) {
  const auto t = parse_csv("t,source,u,v,along,cross\r\n1,\"glider\",0.1,0.2,0.3,0.4\r\n\n");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].source, FlowSourceKind::kGlider);
  EXPECT_THROW(parse_csv("t,source,u,v,along,cross\n1,\"glider,0.1\n"), ParseError);
  EXPECT_THROW(parse_csv("t,src\n"), ParseError);
  EXPECT_THROW(parse_csv("t,source,u,v,along,cross\n1,buoy,0,0,0,0\n"), ParseError);
  EXPECT_THROW(parse_csv("t,source,u,v,along,cross\n1,model,0,0,0\n"), ParseError);
}

TEST(Svg, DashedRuleAtLastSurfacingWithFusedCrossingIt) {
  const auto events = events_with({{0.1, 0.0}, {0.2, 0.0}});
  const ComparisonTable t = build_table(events, UniformFlow({0.05, 0.02}), {}, 45.0);
  const std::string svg = emit_svg(t);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("class=\"last-surfacing\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  for (const char* cls : {"class=\"glider\"", "class=\"model\"", "class=\"fused\""}) {
    EXPECT_NE(svg.find(cls), std::string::npos) << cls;
  }
  // The rule sits strictly inside the fused series' time span.
  const auto fused = rows_of(t, FlowSourceKind::kFused);
  const double rule_t = fused.back().t - 43200.0;
  EXPECT_EQ(rule_t, events.back().t_end);
  EXPECT_GT(rule_t, fused.front().t);
  EXPECT_LT(rule_t, fused.back().t);
  EXPECT_THROW(emit_svg({}), RangeError);
}
