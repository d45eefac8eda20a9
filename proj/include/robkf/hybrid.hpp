#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "robkf/robust.hpp"

namespace robkf {

/// Tuning of the hybrid rLS.IOAO filter.
struct HybridConfig {
  int window = 5;               // w
  double switch_fraction = 0.8;  // h
  double quantile = 0.99;
  ClippingPolicy io_policy;
  ClippingPolicy ao_policy;
  bool switching = true;

  /// ceil(h w): flags needed within the window to switch.
  int switch_count() const;
  void check() const;
};

/// True iff ΔYᵀ Δ⁻¹ ΔY exceeds the `quantile` of χ²_q.
bool hybrid_flag(const Vector& innovation, const Matrix& innovation_cov, double quantile);

/// Streaming state: the rLS.AO track, the rLS.IO track, and the last w IO
/// outputs and AO-innovation flags (aligned by time).
struct HybridState {
  FilterState ao_track;
  FilterState io_track;
  std::deque<FilterState> io_history;
  std::deque<bool> flag_window;

  static HybridState start(const ModelSpec& model);
};

/// Outputs [from_t, to_t] were replaced by rLS.IO values at switch time
/// `switch_t` (== to_t).
struct Revision {
  int from_t = 0;
  int to_t = 0;
  int switch_t = 0;
  std::vector<FilterState> replacements;
};

struct HybridStepResult {
  FilterState emitted;
  bool flagged = false;
  std::optional<Revision> revision;
};

/// Advances both tracks by one observation. When at least ceil(h w) of the
/// last w flags are set, the last w outputs are revised to the stored IO
/// values, the AO track continues from the current IO state and the flags are
/// reset.
HybridStepResult hybrid_step(HybridState& state, const Vector& y, const HybridConfig& cfg, const ModelSpec& model);

struct HybridRunResult {
  std::vector<FilterState> outputs;  // final (revised) series, t = 1..T
  std::vector<bool> revised;
  std::vector<Revision> revisions;
  std::vector<bool> flags;
};

HybridRunResult hybrid_run(const ModelSpec& model, std::span<const Vector> observations, const HybridConfig& cfg);

}  // namespace robkf
