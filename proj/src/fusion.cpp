#include "glidernav/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "glidernav/error.hpp"

namespace glidernav {

void FusionState::validate() const {
  if (!(half_life > 0.0) || !std::isfinite(half_life)) throw RangeError("half_life must be positive");
  if (!std::isfinite(residual_mean.u) || !std::isfinite(residual_mean.v)) {
    throw RangeError("residual mean must be finite");
  }
  if (n_updates < 0) throw RangeError("n_updates must be non-negative");
}

FusionState update_residual(const FusionState& state, const SurfacingEvent& ev,
                            const FlowSource& model) {
  state.validate();
  const LocalVec span = to_local(ev.gps_pos, ev.start_pos);
  const LatLon mid = from_local(0.5 * span, ev.start_pos);
  const double t_mid = ev.mid_time();
  const FlowVector r = ev.flow_estimate - model.sample(mid, t_mid);

  FusionState next = state;
  if (state.n_updates == 0) {
    next.residual_mean = r;
  } else {
    const double elapsed = std::max(0.0, t_mid - state.last_update);
    const double lambda = std::exp2(-elapsed / state.half_life);
    next.residual_mean = lambda * state.residual_mean + (1.0 - lambda) * r;
  }
  next.last_update = std::max(state.n_updates == 0 ? t_mid : state.last_update, t_mid);
  ++next.n_updates;
  return next;
}

FlowVector fused_sample(const FusionState& state, const FlowSource& model, const LatLon& p, double t,
                        OutOfDomain mode) {
  const FlowVector base = model.sample(p, t, mode);
  if (state.n_updates == 0) return base;
  const double decay = std::exp2(-std::max(0.0, t - state.last_update) / state.half_life);
  return base + decay * state.residual_mean;
}

FusedFlow::FusedFlow(FlowSourcePtr model, FusionState state)
    : model_(std::move(model)), state_(state) {
  if (!model_) throw RangeError("fused flow needs a model");
  state_.validate();
}

FlowVector FusedFlow::sample(const LatLon& p, double t, OutOfDomain mode) const {
  return fused_sample(state_, *model_, p, t, mode);
}

double FusedFlow::max_speed(const BBox& box, const TimeWindow& window) const {
  const double base = model_->max_speed(box, window);
  return state_.n_updates == 0 ? base : base + state_.residual_mean.speed();
}

}  // namespace glidernav
