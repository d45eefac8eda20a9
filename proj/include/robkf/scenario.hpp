#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robkf/ssm.hpp"

namespace robkf {

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class OutOfHorizonError : public Error {
 public:
  using Error::Error;
};

struct AoPatch {
  enum class Mode { replace, add };
  int t = 0;
  Mode mode = Mode::add;
  Vector value;
};

/// Random substitutive outliers: at each t, with probability r, Y_t is
/// replaced by a draw from the contaminating law.
struct RandomSo {
  enum class Law { point, gauss };
  double radius = 0.0;
  Law law = Law::point;
  Vector point;
  double mean = 0.0;
  double scale = 1.0;
};

/// Innovation outlier over [t_start, t_end]. A level shift holds the state
/// `magnitude` above its ideal path throughout the window; a linear trend
/// moves it k * magnitude above at the k-th step. Afterwards the offset
/// propagates through the transition.
struct IoEvent {
  enum class Kind { level_shift, linear_trend };
  int t_start = 0;
  int t_end = 0;
  Kind kind = Kind::level_shift;
  Vector magnitude;
};

struct Scenario {
  std::vector<AoPatch> ao_patches;
  std::optional<RandomSo> so_random;
  std::vector<IoEvent> io_events;

  bool empty() const { return ao_patches.empty() && !so_random && io_events.empty(); }
};

/// One directive per line:
///   ao <replace|add> <t> <v1> [<v2> ...]
///   io <level-shift|linear-trend> <t_start> <t_end> <m1> [<m2> ...]
///   so <r> <point c1 ... | gauss mean scale>
/// `#` starts a comment.
Scenario parse_scenario(const std::string& text);

std::string format_scenario(const Scenario& sc);

enum class RegimeVariant { ideal, io, ao, io_and_ao };

RegimeVariant parse_variant(const std::string& name);
std::string to_string(RegimeVariant v);

/// Default magnitudes of the built-in scenario.
struct RegimeMagnitudes {
  double ao_sd_multiple = 8.0;  // AO adds this many sqrt(Δ_∞) to Y
  double level_shift = 8.0;
  double trend_slope = 2.0;
};

/// AOs at t = 10, 15, 23; a linear trend over [20, 25] and a level shift over
/// [37, 42]. AO sizes are scaled by the steady-state innovation sd of `model`.
Scenario builtin_scenario(RegimeVariant variant, const ModelSpec& model = steady_state_model(),
                        const RegimeMagnitudes& mag = {});

/// Applies `sc` to an ideal trajectory. IO events are injected into the
/// state recursion, which is then re-run with the trajectory's own noise
/// draws; AO patches and random SOs touch observations only. Throws
/// OutOfHorizonError for events outside 1..T and NonConformalError for
/// vectors of the wrong dimension.
Trajectory contaminate(const Trajectory& traj, const Scenario& sc, const ModelSpec& model, const RngStream& stream);

}  // namespace robkf
