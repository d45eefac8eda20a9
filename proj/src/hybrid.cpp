#include "robkf/hybrid.hpp"

#include <algorithm>
#include <cmath>

namespace robkf {

int HybridConfig::switch_count() const {
  // ceil with a guard so that e.g. 0.8 * 5 does not round up to 5
  return static_cast<int>(std::ceil(switch_fraction * window - 1e-9));
}

void HybridConfig::check() const {
  if (window < 1) throw DomainError("hybrid window must be >= 1");
  if (!(switch_fraction > 0.0 && switch_fraction <= 1.0)) throw DomainError("hybrid switch fraction must lie in (0,1]");
  if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("hybrid quantile must lie in (0,1)");
}

bool hybrid_flag(const Vector& innovation, const Matrix& innovation_cov, double quantile) {
  const double stat = innovation.dot(solve_spd(innovation_cov, innovation).col(0));
  return stat > chi_square_quantile(static_cast<int>(innovation.size()), quantile);
}

HybridState HybridState::start(const ModelSpec& model) {
  HybridState s;
  s.ao_track = init(model);
  s.io_track = s.ao_track;
  return s;
}

HybridStepResult hybrid_step(HybridState& state, const Vector& y, const HybridConfig& cfg, const ModelSpec& model) {
  const std::size_t w = static_cast<std::size_t>(cfg.window);

  state.ao_track = correct_rls_ao(predict(state.ao_track, model), y, cfg.ao_policy, model);
  state.io_track = correct_rls_io(predict(state.io_track, model), y, cfg.io_policy, model);

  HybridStepResult result;
  result.flagged = hybrid_flag(state.ao_track.innovation, state.ao_track.innovation_cov, cfg.quantile);

  state.io_history.push_back(state.io_track);
  state.flag_window.push_back(result.flagged);
  while (state.io_history.size() > w) state.io_history.pop_front();
  while (state.flag_window.size() > w) state.flag_window.pop_front();

  const auto flags = std::count(state.flag_window.begin(), state.flag_window.end(), true);
  if (cfg.switching && flags >= cfg.switch_count()) {
    Revision rev;
    rev.switch_t = state.io_track.t;
    rev.to_t = state.io_track.t;
    rev.from_t = state.io_history.front().t;
    rev.replacements.assign(state.io_history.begin(), state.io_history.end());
    result.revision = std::move(rev);

    // covariances coincide on both tracks, so this only moves x_filt/x_pred
    state.ao_track = state.io_track;
    std::fill(state.flag_window.begin(), state.flag_window.end(), false);
  }
  result.emitted = state.ao_track;
  return result;
}

HybridRunResult hybrid_run(const ModelSpec& model, std::span<const Vector> observations, const HybridConfig& cfg) {
  cfg.check();
  HybridRunResult out;
  out.outputs.reserve(observations.size());
  HybridState state = HybridState::start(model);
  for (const Vector& y : observations) {
    HybridStepResult step = hybrid_step(state, y, cfg, model);
    out.outputs.push_back(step.emitted);
    out.revised.push_back(false);
    out.flags.push_back(step.flagged);
    if (step.revision) {
      for (const FilterState& r : step.revision->replacements) {
        const auto idx = static_cast<std::size_t>(r.t - 1);
        out.outputs[idx] = r;
        out.revised[idx] = true;
      }
      out.revisions.push_back(std::move(*step.revision));
    }
  }
  return out;
}

}  // namespace robkf
