#pragma once

#include "glidernav/flow.hpp"
#include "glidernav/gsim.hpp"

namespace glidernav {

inline constexpr double kDefaultHalfLife = 86400.0;

/// Exponentially weighted residual between glider-derived and model flow.
struct FusionState {
  FlowVector residual_mean;
  double last_update = 0.0;  ///< epoch s of the most recent residual (mid-dive)
  double half_life = kDefaultHalfLife;
  long long n_updates = 0;

  void validate() const;
  friend bool operator==(const FusionState&, const FusionState&) = default;
};

/// Folds one surfacing into the state. The model is evaluated at the dive's
/// spatial and temporal midpoint, since the glider estimate is a dive average.
FusionState update_residual(const FusionState& state, const SurfacingEvent& ev,
                            const FlowSource& model);

/// Model sample plus the residual mean decayed by the time since the last update.
FlowVector fused_sample(const FusionState& state, const FlowSource& model, const LatLon& p, double t,
                        OutOfDomain mode = OutOfDomain::kError);

/// Snapshot of a model corrected by a fixed FusionState.
class FusedFlow final : public FlowSource {
 public:
  FusedFlow(FlowSourcePtr model, FusionState state);
  FlowVector sample(const LatLon& p, double t, OutOfDomain mode = OutOfDomain::kError) const override;
  /// Model bound plus the (undecayed) residual magnitude.
  double max_speed(const BBox& box, const TimeWindow& window) const override;

  const FusionState& state() const { return state_; }
  const FlowSourcePtr& model() const { return model_; }

 private:
  FlowSourcePtr model_;
  FusionState state_;
};

}  // namespace glidernav
