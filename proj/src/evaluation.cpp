#include "netcp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "netcp/calibration.hpp"
#include "netcp/error.hpp"
#include "netcp/parallel.hpp"
#include "netcp/random.hpp"

namespace netcp {

namespace {

constexpr std::uint64_t kRepetitionDomain = 0x726570ULL;
constexpr std::uint64_t kCalibrationDomain = 0x63616cULL;
constexpr std::uint64_t kSharedDomain = 0x736872ULL;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CalibrationProfile profile_for(const ScenarioSpec& spec, const ExperimentConfig& config,
                               std::uint64_t seed) {
  const GeneratedStream training = generate_training_stream(spec, config.train_length);
  CalibrationProfile profile =
      calibrate(training.snapshots, config.alpha, config.permutations,
                derive_seed(seed, kCalibrationDomain, 0), config.grid_mode, config.detector);
  if (config.c_eps_override) profile.c_eps = *config.c_eps_override;
  return profile;
}

}  // namespace

std::string to_string(ProfileSource source) {
  return source == ProfileSource::calibrate_per_run ? "calibrate-per-run" : "shared-profile";
}

ProfileSource profile_source_from_string(const std::string& name) {
  if (name == "calibrate-per-run") return ProfileSource::calibrate_per_run;
  if (name == "shared-profile") return ProfileSource::shared_profile;
  throw ConfigError("unknown profile source '" + name + "'");
}

RunRecord classify_run(std::optional<int> alarm_time, std::optional<int> delta, int total_t) {
  RunRecord rec;
  rec.alarm_time = alarm_time;
  rec.delta = delta;
  rec.total_t = total_t;
  const bool alarmed = alarm_time && *alarm_time <= total_t;
  const int clipped = alarmed ? *alarm_time : total_t;
  if (alarmed && (!delta || clipped < *delta)) {
    rec.false_alarm = true;
    return rec;
  }
  rec.censored = !alarmed;
  if (delta && clipped >= *delta) rec.delay = clipped - *delta;
  return rec;
}

MetricRow aggregate_runs(const std::string& scenario, double pi, double alpha,
                         std::span<const RunRecord> runs) {
  MetricRow row;
  row.scenario = scenario;
  row.pi = pi;
  row.alpha = alpha;
  std::vector<double> delays;
  int false_alarms = 0;
  for (const auto& run : runs) {
    if (!run.valid) {
      ++row.n_invalid;
      continue;
    }
    ++row.n_runs;
    if (run.false_alarm) ++false_alarms;
    if (run.censored) ++row.censored;
    if (run.delay) delays.push_back(*run.delay);
  }
  // Sorting first makes the sums independent of repetition order.
  std::sort(delays.begin(), delays.end());
  row.pfa = row.n_runs ? static_cast<double>(false_alarms) / row.n_runs : 0.0;
  if (delays.empty()) {
    row.mean_delay = std::numeric_limits<double>::quiet_NaN();
    row.delay_stderr = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  double sum = 0.0;
  for (double d : delays) sum += d;
  row.mean_delay = sum / static_cast<double>(delays.size());
  if (delays.size() > 1) {
    double ss = 0.0;
    for (double d : delays) ss += (d - row.mean_delay) * (d - row.mean_delay);
    const double var = ss / static_cast<double>(delays.size() - 1);
    row.delay_stderr = std::sqrt(var / static_cast<double>(delays.size()));
  } else {
    row.delay_stderr = 0.0;
  }
  return row;
}

std::uint64_t repetition_seed(std::uint64_t base_seed, int rep) {
  return derive_seed(base_seed, kRepetitionDomain, static_cast<std::uint64_t>(rep));
}

CalibrationProfile calibrate(std::span<const MaskedSnapshot> training, double alpha,
                             int permutations, std::uint64_t seed, GridMode grid_mode,
                             const DetectorOptions& detector, unsigned workers) {
  EstimateOptions est;
  est.max_iters = detector.max_iters;
  est.fro_tol = detector.fro_tol;
  est.grid_mode = grid_mode;
  CalibrationProfile profile = estimate_profile(training, alpha, est);
  const PermutationReport report =
      fit_ceps(training, profile, permutations, seed, detector, workers);
  profile.c_eps = report.chosen_ceps;
  return profile;
}

std::uint64_t spec_hash(const ScenarioSpec& spec) {
  // FNV-1a over the canonical JSON form.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : nlohmann::json(spec).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentResult run_experiment(const ScenarioSpec& spec, const ExperimentConfig& config) {
  spec.validate();
  if (config.n_reps < 1) throw ConfigError("run_experiment: n_reps must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("run_experiment: alpha must lie in (0, 1)");
  }

  std::optional<CalibrationProfile> shared = config.fixed_profile;
  if (shared) shared->validate(true);
  std::string shared_error;
  if (!shared && config.profile_source == ProfileSource::shared_profile) {
    ScenarioSpec train_spec = spec;
    train_spec.seed = derive_seed(config.base_seed, kSharedDomain, 0);
    try {
      shared = profile_for(train_spec, config, train_spec.seed);
    } catch (const CalibrationError& e) {
      shared_error = e.what();
    }
  }

  const std::uint64_t hash = spec_hash(spec);
  ExperimentResult result;
  result.runs.resize(static_cast<std::size_t>(config.n_reps));
  parallel_for(result.runs.size(), config.workers, [&](std::size_t rep) {
    ScenarioSpec rep_spec = spec;
    rep_spec.seed = repetition_seed(config.base_seed, static_cast<int>(rep));
    RunRecord record;
    try {
      if (!shared_error.empty()) throw CalibrationError(shared_error);
      const CalibrationProfile profile =
          shared ? *shared : profile_for(rep_spec, config, rep_spec.seed);
      const GeneratedStream stream = generate_stream(rep_spec);
      const OfflineResult run = run_offline(stream.snapshots, profile, config.detector);
      record = classify_run(run.alarm_time(), spec.delta, spec.total_t);
    } catch (const CalibrationError& e) {
      record = RunRecord{};
      record.delta = spec.delta;
      record.total_t = spec.total_t;
      record.valid = false;
      record.error = e.what();
    }
    record.seed = rep_spec.seed;
    record.spec_hash = hash;
    result.runs[rep] = std::move(record);
  });

  result.row = aggregate_runs(spec.name, spec.pi, config.alpha, result.runs);
  return result;
}

void write_metric_csv(std::ostream& out, std::span<const MetricRow> rows) {
  out << kMetricCsvHeader << '\n';
  for (const auto& row : rows) {
    out << row.scenario << ',' << format_number(row.pi) << ',' << format_number(row.alpha) << ','
        << row.n_runs << ',' << format_number(row.mean_delay) << ','
        << format_number(row.delay_stderr) << ',' << format_number(row.pfa) << ',' << row.censored
        << '\n';
  }
}

nlohmann::json metric_table_json(std::span<const MetricRow> rows) {
  auto table = nlohmann::json::array();
  const auto number = [](double v) { return std::isnan(v) ? nlohmann::json() : nlohmann::json(v); };
  for (const auto& row : rows) {
    table.push_back({{"scenario", row.scenario},
                     {"pi", row.pi},
                     {"alpha", row.alpha},
                     {"n_runs", row.n_runs},
                     {"n_invalid", row.n_invalid},
                     {"mean_delay", number(row.mean_delay)},
                     {"delay_stderr", number(row.delay_stderr)},
                     {"pfa", row.pfa},
                     {"censored", row.censored}});
  }
  return table;
}

}  // namespace netcp
