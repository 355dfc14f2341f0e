#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "glidernav/flow.hpp"
#include "glidernav/fusion.hpp"
#include "glidernav/gsim.hpp"

namespace glidernav {

enum class FlowSourceKind { kGlider, kModel, kFused };

std::string_view to_string(FlowSourceKind kind);
FlowSourceKind flow_source_kind(std::string_view name);

struct ComparisonRow {
  double t = 0.0;  ///< epoch s
  FlowSourceKind source = FlowSourceKind::kModel;
  double u = 0.0;
  double v = 0.0;
  double along = 0.0;
  double cross = 0.0;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

/// Rows sorted by time, then glider, model, fused.
struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  friend bool operator==(const ComparisonTable&, const ComparisonTable&) = default;
};

/// How far the model and fused series run past the last surfacing.
inline constexpr double kForecastExtension = 43200.0;

/// Glider rows at each mid-dive time; model and fused rows every `lattice_dt`
/// from the first dive start to exactly last surfacing + 12 h. The fused
/// series at time t folds every event that had surfaced by t into `fusion`.
/// Positions between fixes are interpolated linearly in time.
/// Throws RangeError for an empty event list or lattice_dt <= 0.
ComparisonTable build_table(const std::vector<SurfacingEvent>& events, const FlowSource& model,
                            const FusionState& fusion, double shore_bearing_deg, double lattice_dt = 600.0);

struct StrongFlowAlert {
  double t = 0.0;
  double glider_speed = 0.0;
  double fused_speed = 0.0;
  double model_speed = 0.0;
};

/// One alert per glider row whose magnitude and the fused magnitude at that
/// time (linear between lattice rows) both exceed `threshold`.
std::vector<StrongFlowAlert> detect_strong_flow(const ComparisonTable& table, double threshold = 0.3);

/// `t,source,u,v,along,cross` with a header row. Numbers use the shortest
/// exact representation, so parse_csv(emit_csv(t)) == t.
std::string emit_csv(const ComparisonTable& table);
ComparisonTable parse_csv(std::string_view bytes);

/// Along-shore and cross-shore panels, one polyline per source, dashed rule
/// where the forecast extension begins.
std::string emit_svg(const ComparisonTable& table);

}  // namespace glidernav
