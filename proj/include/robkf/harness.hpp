#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robkf/calibration.hpp"
#include "robkf/hybrid.hpp"
#include "robkf/scenario.hpp"

namespace robkf {

class EmptyAfterExclusionError : public Error {
 public:
  using Error::Error;
};

enum class FilterKind { kalman, rls_ao, rls_io, rls_ioao };

std::string to_string(FilterKind f);
FilterKind parse_filter(const std::string& name);
std::vector<FilterKind> all_filters();

/// Time-averaged |X_t - estimate_t|² over t = 1..T, skipping the 1-based time
/// indices in `exclude`.
double empirical_mse(std::span<const Vector> truth, std::span<const Vector> estimates,
                     const std::vector<int>& exclude = {});

/// How each track's clipping heights are chosen. An unset height means
/// calibration from the corresponding Calibration.
struct FilterSettings {
  Calibration ao = Calibration::radius(0.1);
  Calibration io = Calibration::radius(0.1);
  std::optional<double> ao_height;
  std::optional<double> io_height;
  int window = 5;
  double switch_fraction = 0.8;
  double quantile = 0.99;
  bool switching = true;
};

/// Clipping policies resolved once for a model and horizon; the covariance
/// recursion is data independent, so every replication shares them.
struct ResolvedFilters {
  ClippingPolicy ao;
  ClippingPolicy io;
  HybridConfig hybrid;
};

ResolvedFilters resolve_filters(const ModelSpec& model, int horizon, const FilterSettings& settings,
                                const std::vector<FilterKind>& filters);

struct FilterOutput {
  std::vector<Vector> filtered;   // t = 1..T
  std::vector<Vector> predicted;  // t = 1..T
  std::vector<bool> revised;
  std::vector<Revision> revisions;
};

FilterOutput run_filter(FilterKind kind, const ModelSpec& model, std::span<const Vector> observations,
                        const ResolvedFilters& filters);

struct Regime {
  std::string label;
  Scenario scenario;
};

struct BenchmarkConfig {
  ModelSpec model = steady_state_model();
  int horizon = 50;
  int replications = 200;
  std::uint64_t seed = 20100701;
  std::vector<FilterKind> filters = all_filters();
  std::vector<Regime> regimes;  // empty: the four built-in regimes
  FilterSettings settings;
  std::vector<int> exclude;
  bool single_realization = false;
  int threads = 1;

  void check() const;
};

std::vector<Regime> builtin_regimes(const ModelSpec& model, const RegimeMagnitudes& mag = {});

struct MseCell {
  FilterKind filter = FilterKind::kalman;
  std::string kind;  // "filter" or "pred"
  double mse = 0.0;
  double se = 0.0;
};

struct MseReport {
  std::string regime;
  int replications = 0;
  std::vector<int> excluded;
  std::vector<MseCell> cells;
  /// Per-replication MSEs, keyed by filter; used for paired comparisons.
  std::map<FilterKind, std::vector<double>> filter_samples;
  std::map<FilterKind, std::vector<double>> pred_samples;

  const MseCell* find(FilterKind f, const std::string& kind) const;
};

/// Simulates each replication once per regime (regimes share the ideal path of
/// a replication), runs every filter and aggregates the time-averaged MSEs.
/// Replications run on `cfg.threads` workers with independent derived
/// streams; results do not depend on the thread count.
std::vector<MseReport> run_benchmark(const BenchmarkConfig& cfg);

/// Mean and SE of a - b over replications.
struct PairedDiff {
  double mean = 0.0;
  double se = 0.0;
};
PairedDiff paired_difference(const std::vector<double>& a, const std::vector<double>& b);

enum class ReportFormat { table, csv };

/// csv columns: regime,filter,kind,mse,se,replications,excluded. The table
/// marks the smallest MSE of each row with '*'.
std::string emit_report(const std::vector<MseReport>& reports, ReportFormat format);

/// Reads the csv produced by emit_report (cells only, no per-replication data).
std::vector<MseReport> parse_report_csv(const std::string& text);

/// Pairwise summation with a fixed reduction order.
double pairwise_sum(std::span<const double> xs);

}  // namespace robkf
