#pragma once

// Repetition harness: calibrate on change-free training data, monitor a test
// stream, and summarise detection delay and the proportion of false alarms.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcp/detector.hpp"
#include "netcp/profile.hpp"
#include "netcp/simulation.hpp"

namespace netcp {

enum class ProfileSource { calibrate_per_run, shared_profile };

std::string to_string(ProfileSource source);
ProfileSource profile_source_from_string(const std::string& name);

struct RunRecord {
  std::uint64_t seed = 0;
  std::uint64_t spec_hash = 0;
  std::optional<int> alarm_time;
  std::optional<int> delta;  // empty: no change point
  int total_t = 0;
  bool false_alarm = false;
  bool censored = false;     // no alarm by total_t; alarm time taken as total_t
  std::optional<int> delay;  // defined when min(total_t, alarm) >= delta
  bool valid = true;         // false when calibration failed
  std::string error;
};

/// Classifies one run with alarm time clipped at total_t.
RunRecord classify_run(std::optional<int> alarm_time, std::optional<int> delta, int total_t);

struct MetricRow {
  std::string scenario;
  double pi = 0.0;
  double alpha = 0.0;
  int n_runs = 0;     // valid runs
  int n_invalid = 0;  // excluded after calibration failure
  double mean_delay = 0.0;  // NaN when no run qualifies
  double delay_stderr = 0.0;
  double pfa = 0.0;
  int censored = 0;
};

MetricRow aggregate_runs(const std::string& scenario, double pi, double alpha,
                         std::span<const RunRecord> runs);

struct ExperimentConfig {
  int n_reps = 100;
  ProfileSource profile_source = ProfileSource::calibrate_per_run;
  std::uint64_t base_seed = 0;
  double alpha = 0.05;
  int train_length = 200;
  int permutations = 100;
  GridMode grid_mode = GridMode::dyadic;
  DetectorOptions detector;
  /// Threads across repetitions (0: hardware concurrency).
  unsigned workers = 1;
  /// Skips calibration and uses this profile (must carry c_eps) for every run.
  std::optional<CalibrationProfile> fixed_profile;
  /// Replaces the fitted C_eps after calibration.
  std::optional<double> c_eps_override;
};

struct ExperimentResult {
  MetricRow row;
  std::vector<RunRecord> runs;  // in repetition order
};

/// Seed of repetition `rep` under `base_seed`.
std::uint64_t repetition_seed(std::uint64_t base_seed, int rep);

/// Full calibration (profile estimate plus permutation fit) on a training stream.
CalibrationProfile calibrate(std::span<const MaskedSnapshot> training, double alpha, int permutations,
                             std::uint64_t seed, GridMode grid_mode,
                             const DetectorOptions& detector = {}, unsigned workers = 1);

ExperimentResult run_experiment(const ScenarioSpec& spec, const ExperimentConfig& config);

std::uint64_t spec_hash(const ScenarioSpec& spec);

inline constexpr const char* kMetricCsvHeader =
    "scenario,pi,alpha,n_runs,mean_delay,delay_stderr,pfa,censored";

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows);
nlohmann::json metric_table_json(std::span<const MetricRow> rows);

}  // namespace netcp
