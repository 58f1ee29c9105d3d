// Acceptance gate. `acceptance <k>` runs criterion k (1-9), `acceptance`
// runs them all. Each criterion prints one PASS/FAIL line; the exit status is
// nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "netcp/completion.hpp"
#include "netcp/detector.hpp"
#include "netcp/evaluation.hpp"
#include "netcp/linalg.hpp"
#include "netcp/simulation.hpp"
#include "oracles.hpp"

using namespace netcp;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Snapshot with independent Bernoulli(pi) masks over a fixed graphon.
MaskedSnapshot sample_snapshot(const Matrix& graphon, double pi, int t, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = graphon.rows();
  MaskedSnapshot s{t, Matrix::Zero(n, n), Mask(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const bool edge = unif(gen) < graphon(i, j);
      if (unif(gen) >= pi) continue;
      s.omega.set(i, j, true);
      if (edge) s.y(i, j) = s.y(j, i) = 1.0;
    }
  }
  return s;
}

Matrix rank3_graphon(int n) {
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.n = n;
  return sbm_graphon(spec).pre;
}

// ---------------------------------------------------------------------------

Verdict proximal_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(seed % 20);
    const Matrix w = oracle::random_symmetric(n, 1000 + seed);
    const double lambda = std::uniform_real_distribution<double>(0.0, 1.2)(gen) * oracle::op_norm(w);
    worst = std::max(worst, sup_norm(svd_soft_threshold(w, lambda) - oracle::shrink(w, lambda)));
  }
  const double took = seconds_since(start);
  return {worst <= 1e-8 && took < 5.0,
          fmt("max entry error %.3g over 200 matrices (tol 1e-8), %.2f s (budget 5 s)", worst, took)};
}

Verdict convergence_suite() {
  const auto start = Clock::now();
  const int n = 40;
  const Matrix graphon = rank3_graphon(n);
  std::mt19937_64 pick(77);
  int monotone_violations = 0, capped = 0;
  double worst_rise = 0.0;
  for (int run = 0; run < 50; ++run) {
    const int len = 1 + static_cast<int>(pick() % 32);
    const double missing = 0.1 + 0.4 * static_cast<double>(pick() % 1001) / 1000.0;
    std::mt19937_64 gen(5000 + static_cast<std::uint64_t>(run));
    std::vector<MaskedSnapshot> window;
    for (int t = 1; t <= len; ++t) window.push_back(sample_snapshot(graphon, 1.0 - missing, t, gen));
    CalibrationProfile profile;
    profile.n = n;
    profile.rho = 0.5;
    profile.m = 1.0 - missing;
    profile.p = 1.0 - missing;
    SolverConfig cfg;
    cfg.lambda = lambda_for_window(len, profile);
    const GraphonEstimate est = soft_impute_window(window, cfg);
    for (std::size_t k = 1; k < est.step_norms.size(); ++k) {
      const double rise = est.step_norms[k] - est.step_norms[k - 1];
      worst_rise = std::max(worst_rise, rise);
      if (rise > 1e-9) ++monotone_violations;
    }
    if (est.converged_by == StopReason::iter_cap) ++capped;
  }
  const double took = seconds_since(start);
  return {monotone_violations == 0 && capped == 0 && took < 120.0,
          fmt("50 runs: %d step-norm increases beyond 1e-9 (largest rise %.3g), %d hit the "
              "iteration cap, %.1f s (budget 120 s)",
              monotone_violations, worst_rise, capped, took)};
}

Verdict estimation_rate() {
  const auto start = Clock::now();
  const int n = 40;
  const double pi = 0.8;
  const Matrix truth = rank3_graphon(n);
  CalibrationProfile profile;
  profile.n = n;
  profile.rho = 0.5;
  profile.m = pi;
  profile.p = pi;
  profile.r = 3;
  const std::vector<int> lengths{4, 16, 64, 256};
  std::vector<double> xs, ys;
  std::string medians;
  for (int len : lengths) {
    std::vector<double> errors;
    for (int seed = 0; seed < 20; ++seed) {
      std::mt19937_64 gen(static_cast<std::uint64_t>(len) * 1000 + static_cast<std::uint64_t>(seed));
      std::vector<MaskedSnapshot> window;
      for (int t = 1; t <= len; ++t) window.push_back(sample_snapshot(truth, pi, t, gen));
      SolverConfig cfg;
      cfg.lambda = lambda_for_window(len, profile);
      errors.push_back(std::pow(fro_norm(soft_impute_window(window, cfg).m_hat - truth), 2));
    }
    std::sort(errors.begin(), errors.end());
    const double median = 0.5 * (errors[9] + errors[10]);
    xs.push_back(std::log(static_cast<double>(len)));
    ys.push_back(std::log(median));
    medians += fmt(" L=%d:%.4g", len, median);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;
  const double took = seconds_since(start);
  return {slope >= -1.4 && slope <= -0.6 && took < 300.0,
          fmt("log-log slope %.3f (band [-1.4, -0.6]); median squared error%s; %.1f s",
              slope, medians.c_str(), took)};
}

ExperimentConfig shared_config(std::uint64_t seed, int reps) {
  ExperimentConfig config;
  config.n_reps = reps;
  config.profile_source = ProfileSource::shared_profile;
  config.base_seed = seed;
  config.alpha = 0.05;
  config.train_length = 200;
  config.permutations = 100;
  config.workers = workers();
  return config;
}

std::string describe(const ExperimentResult& r) {
  return fmt("n_runs=%d mean_delay=%.3f (se %.3f) pfa=%.3f censored=%d", r.row.n_runs,
             r.row.mean_delay, r.row.delay_stderr, r.row.pfa, r.row.censored);
}

Verdict false_alarm_control() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.delta.reset();
  spec.pi = 0.9;
  // Permutation replays only certify the horizon they cover; these streams are
  // monitored for total_t steps, so the training stream is as long.
  ExperimentConfig config = shared_config(4001, 100);
  config.train_length = spec.total_t;
  const auto result = run_experiment(spec, config);
  const double bound = 0.05 + 2.0 * std::sqrt(0.05 * 0.95 / 100.0);
  const double took = seconds_since(start);
  return {result.row.n_runs == 100 && result.row.pfa <= bound,
          fmt("alarm fraction %.3f on 100 change-free streams of length %d, training length %d "
              "(bound %.4f), %.0f s",
              result.row.pfa, spec.total_t, config.train_length, bound, took)};
}

Verdict scenario1_delay() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.pi = 0.9;
  const auto result = run_experiment(spec, shared_config(5001, 50));
  const bool ok = result.row.n_runs == 50 && std::isfinite(result.row.mean_delay) &&
                  result.row.mean_delay <= 8.0 && result.row.pfa <= 0.06;
  return {ok, describe(result) + fmt(" (need delay <= 8, pfa <= 0.06), %.0f s", seconds_since(start))};
}

Verdict missingness_monotonicity() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.pi = 0.7;
  const auto sparse = run_experiment(spec, shared_config(6001, 50));
  spec.pi = 0.95;
  const auto dense = run_experiment(spec, shared_config(6001, 50));
  const bool ok = std::isfinite(sparse.row.mean_delay) && std::isfinite(dense.row.mean_delay) &&
                  sparse.row.mean_delay >= dense.row.mean_delay - 1.0;
  return {ok, fmt("mean delay %.3f at pi=0.7 vs %.3f at pi=0.95 (need first >= second - 1); "
                  "pfa %.3f / %.3f, %.0f s",
                  sparse.row.mean_delay, dense.row.mean_delay, sparse.row.pfa, dense.row.pfa,
                  seconds_since(start))};
}

Verdict scenario2_smoke() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario2_rdpg();
  spec.pi = 0.9;
  const auto result = run_experiment(spec, shared_config(7001, 25));
  const bool ok = result.row.n_runs == 25 && std::isfinite(result.row.mean_delay) &&
                  result.row.mean_delay <= 20.0 && result.row.pfa <= 0.08;
  return {ok, describe(result) + fmt(" (need delay <= 20, pfa <= 0.08), %.0f s", seconds_since(start))};
}

Verdict grid_agreement() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.total_t = 40;
  spec.delta = 20;
  spec.pi = 0.9;
  // One profile calibrated on a change-free training stream of the same length.
  const auto training = generate_training_stream(spec, 40);
  const CalibrationProfile dyadic =
      calibrate(training.snapshots, 0.05, 100, 8001, GridMode::dyadic, {}, workers());
  CalibrationProfile full = dyadic;
  full.grid_mode = GridMode::full;

  int agree = 0, both = 0, order_violations = 0;
  for (int rep = 0; rep < 20; ++rep) {
    spec.seed = repetition_seed(8002, rep);
    const auto stream = generate_stream(spec);
    const auto d = run_offline(stream.snapshots, dyadic);
    const auto f = run_offline(stream.snapshots, full);
    if (d.alarm.has_value() == f.alarm.has_value()) ++agree;
    if (d.alarm && f.alarm) {
      ++both;
      if (d.alarm->t < f.alarm->t) ++order_violations;
    }
  }
  return {agree >= 18 && order_violations == 0,
          fmt("alarm/no-alarm agreement %d/20 (need >= 18); %d runs where both fire, %d with the "
              "dyadic alarm earlier; %.0f s",
              agree, both, order_violations, seconds_since(start))};
}

std::string experiment_csv(const ScenarioSpec& spec, const ExperimentConfig& config) {
  const auto result = run_experiment(spec, config);
  std::ostringstream out;
  write_metric_csv(out, std::span(&result.row, 1));
  return out.str();
}

Verdict reproducibility() {
  const auto start = Clock::now();
  auto spec = ScenarioSpec::scenario1_sbm();
  spec.n = 40;
  spec.total_t = 80;
  spec.delta = 40;
  ExperimentConfig config;
  config.n_reps = 6;
  config.base_seed = 9001;
  config.train_length = 40;
  config.permutations = 20;
  config.profile_source = ProfileSource::calibrate_per_run;
  config.workers = 1;
  const std::string first = experiment_csv(spec, config);
  const std::string second = experiment_csv(spec, config);
  config.workers = 4;  // scheduling must not matter
  const std::string threaded = experiment_csv(spec, config);
  config.profile_source = ProfileSource::shared_profile;
  const std::string shared_a = experiment_csv(spec, config);
  const std::string shared_b = experiment_csv(spec, config);
  const bool ok = first == second && first == threaded && shared_a == shared_b;
  return {ok, fmt("per-run CSV identical across reruns: %s, across worker counts: %s; shared-profile "
                  "CSV identical: %s; %.0f s",
                  first == second ? "yes" : "no", first == threaded ? "yes" : "no",
                  shared_a == shared_b ? "yes" : "no", seconds_since(start))};
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"proximal operator matches dense-SVD oracle", proximal_oracle},
      {"soft-impute step norms non-increasing and converge", convergence_suite},
      {"estimation error decays like 1/window length", estimation_rate},
      {"false-alarm rate controlled on change-free streams", false_alarm_control},
      {"scenario 1 delay and false-alarm proportion", scenario1_delay},
      {"more missingness does not shorten delay", missingness_monotonicity},
      {"scenario 2 (RDPG) smoke", scenario2_smoke},
      {"dyadic and full grids agree", grid_agreement},
      {"experiments are byte-reproducible", reproducibility},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria().size()); ++k) selected.push_back(k);
  }
  int failures = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria().size())) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const Criterion& c = criteria()[static_cast<std::size_t>(k - 1)];
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d [%s] %s: %s\n", k, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
