#pragma once

#include <string>
#include <vector>

#include "robkf/harness.hpp"

namespace robkf {

/// Header `t,x_1..x_p,y_1..y_q,mark`; the t = 0 row has empty y fields.
std::string write_trajectory_csv(const Trajectory& traj);

/// Inverse of write_trajectory_csv. Noise draws are not stored, so the
/// returned trajectory has empty noise vectors.
Trajectory read_trajectory_csv(const std::string& text);

/// Header `t,filter,xfilt_1..p,xpred_1..p,revised`.
std::string write_estimates_csv(FilterKind filter, const FilterOutput& out);

/// Header `from_t,to_t,switch_t`.
std::string write_revisions_csv(const std::vector<Revision>& revisions);

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// `key = value` lines; `#` starts a comment, blank lines are skipped. A
/// line without `=` continues the previous value (multi-row matrices).
std::vector<KeyValue> parse_key_values(const std::string& text);

/// Time-invariant model from keys p, q, F, Z, Q, V, a0, Q0. Matrices are
/// given row-major as whitespace or comma separated numbers. a0 defaults to
/// zero and Q0 to the identity.
ModelSpec parse_model(const std::string& text);
std::string format_model(const ModelSpec& model);

/// A benchmark run as read from a config file and the command line.
struct BenchmarkInputs {
  BenchmarkConfig config;
  std::string model_file;                // empty: built-in steady-state model
  std::vector<std::string> regime_names;  // empty: all four built-in regimes
  std::string scenario_file;             // adds a "custom" regime
  RegimeMagnitudes magnitudes;
  std::string output;
  std::string format = "csv";
};

/// Applies config entries. Keys: model, horizon, replications, seed,
/// filters, regimes, scenario_file, exclude, single_realization, threads,
/// ao_radius, io_radius, ao_delta, io_delta, ao_height, io_height,
/// steady_state, window, switch_fraction, quantile, switching,
/// ao_sd_multiple, level_shift, trend_slope, output, format. Unknown keys
/// raise ParseError.
void apply_config(BenchmarkInputs& in, const std::vector<KeyValue>& entries);

/// Loads the model and builds the regime list. Relative paths resolve
/// against the working directory.
void finalize_inputs(BenchmarkInputs& in);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

std::vector<std::string> split_list(const std::string& s, char sep = ',');
std::vector<int> parse_index_list(const std::string& s);
bool parse_bool(const std::string& s);

}  // namespace robkf
