#include "netcp/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netcp/error.hpp"
#include "netcp/parallel.hpp"

namespace netcp {

std::vector<int> candidate_grid(int t, GridMode mode) {
  std::vector<int> grid;
  if (t < 2) return grid;
  if (mode == GridMode::full) {
    grid.resize(static_cast<std::size_t>(t - 1));
    for (int s = 1; s < t; ++s) grid[static_cast<std::size_t>(s - 1)] = s;
    return grid;
  }
  for (long long step = 1;; step *= 2) {
    const long long s = std::max<long long>(t - step, 1);
    grid.push_back(static_cast<int>(s));
    if (s == 1) break;
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double threshold_scale(const CalibrationProfile& profile) {
  if (!(profile.p > 0.0)) throw ConfigError("threshold: p must be > 0");
  return std::sqrt(profile.r * profile.rho * profile.n * profile.m / (profile.p * profile.p));
}

double threshold_shape(int s, int t, const CalibrationProfile& profile) {
  if (s < 1 || s >= t) throw ConfigError("threshold: need 1 <= s < t");
  if (!(profile.alpha > 0.0 && profile.alpha < 1.0)) {
    throw ConfigError("threshold: alpha must lie in (0, 1)");
  }
  const double ds = s;
  const double dt = t;
  const double prefix_term = std::sqrt(std::log(ds / profile.alpha) / ds);
  const double suffix_term = std::sqrt(std::log(dt / profile.alpha) / (dt - ds));
  return threshold_scale(profile) * (prefix_term + suffix_term);
}

double threshold_eps(int s, int t, const CalibrationProfile& profile) {
  if (!profile.c_eps) throw ConfigError("threshold: c_eps is not set");
  return std::sqrt(*profile.c_eps) * threshold_shape(s, t, profile);
}

Detector::Detector(CalibrationProfile profile, DetectorOptions options)
    : profile_(std::move(profile)), options_(options) {
  profile_.validate(true);
  const Eigen::Index n = profile_.n;
  cum_y_.push_back(Matrix::Zero(n, n));
  cum_obs_.push_back(Matrix::Zero(n, n));
}

WindowSums Detector::window(int s, int e) const {
  const auto lo = static_cast<std::size_t>(s);
  const auto hi = static_cast<std::size_t>(e);
  return {cum_y_[hi] - cum_y_[lo], cum_obs_[hi] - cum_obs_[lo], e - s};
}

SolverConfig Detector::solver_config(int length) const {
  SolverConfig config;
  config.lambda = lambda_for_window(length, profile_);
  config.a = profile_.a;
  config.max_iters = options_.max_iters;
  config.fro_tol = options_.fro_tol;
  return config;
}

const GraphonEstimate& Detector::prefix_estimate(int s) {
  if (auto it = prefix_cache_.find(s); it != prefix_cache_.end()) return it->second;
  SolverConfig config = solver_config(s);
  if (options_.warm_start) {
    // Closest shorter prefix already solved.
    if (auto it = prefix_cache_.lower_bound(s); it != prefix_cache_.begin()) {
      config.init = std::prev(it)->second.m_hat;
    }
  }
  return prefix_cache_.emplace(s, soft_impute(window(0, s), config)).first->second;
}

DetectionOutcome Detector::step(const MaskedSnapshot& snapshot) {
  if (alarm_) throw StateError("detector already alarmed at t=" + std::to_string(alarm_->t));
  if (snapshot.t != t_ + 1) {
    throw StateError("expected snapshot t=" + std::to_string(t_ + 1) + ", got t=" +
                     std::to_string(snapshot.t));
  }
  if (snapshot.size() != profile_.n) {
    throw DimensionError("snapshot side " + std::to_string(snapshot.size()) +
                         " does not match profile n=" + std::to_string(profile_.n));
  }
  snapshot.validate();

  cum_y_.push_back(cum_y_.back() + snapshot.y);
  cum_obs_.push_back(cum_obs_.back() + snapshot.omega.weights());
  t_ = snapshot.t;

  DetectionOutcome outcome;
  outcome.t = t_;
  const std::vector<int> grid = candidate_grid(t_, profile_.grid_mode);
  if (grid.empty()) return outcome;

  // Prefix solves mutate the cache, so they run first and sequentially.
  std::vector<const GraphonEstimate*> prefixes;
  prefixes.reserve(grid.size());
  for (int s : grid) prefixes.push_back(&prefix_estimate(s));

  std::vector<Matrix> suffixes(grid.size());
  outcome.evaluated_pairs.resize(grid.size());
  parallel_for(grid.size(), options_.workers, [&](std::size_t k) {
    const int s = grid[k];
    const int length = t_ - s;
    SolverConfig config = solver_config(length);
    if (options_.warm_start) {
      if (auto it = suffix_by_length_.find(length); it != suffix_by_length_.end()) {
        config.init = it->second;
      } else if (auto shorter = suffix_by_length_.find(length - 1);
                 shorter != suffix_by_length_.end()) {
        config.init = shorter->second;
      } else {
        config.init = prefixes[k]->m_hat;
      }
    }
    suffixes[k] = soft_impute(window(s, t_), config).m_hat;
    PairStatistic& pair = outcome.evaluated_pairs[k];
    pair.s = s;
    pair.statistic = fro_norm(prefixes[k]->m_hat - suffixes[k]);
    pair.shape = threshold_shape(s, t_, profile_);
    pair.threshold = std::sqrt(*profile_.c_eps) * pair.shape;
  });

  suffix_by_length_.clear();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    suffix_by_length_.emplace(t_ - grid[k], std::move(suffixes[k]));
  }

  // Grid is increasing, so the first crossing is the smallest s.
  for (const auto& pair : outcome.evaluated_pairs) {
    if (pair.statistic >= pair.threshold) {
      alarm_ = Alarm{t_, pair.s, pair.statistic, pair.threshold};
      outcome.alarm = alarm_;
      break;
    }
  }
  return outcome;
}

double OfflineResult::required_c_eps() const {
  double worst = 0.0;
  for (const auto& step : trace) {
    for (const auto& pair : step.evaluated_pairs) {
      const double ratio = pair.statistic / pair.shape;
      worst = std::max(worst, ratio * ratio);
    }
  }
  return worst;
}

OfflineResult run_offline(std::span<const MaskedSnapshot> sequence,
                          const CalibrationProfile& profile, const DetectorOptions& options) {
  if (sequence.empty()) throw FormatError("run_offline: empty sequence");
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    if (sequence[k].t != static_cast<int>(k) + 1) {
      throw FormatError("run_offline: snapshot " + std::to_string(k) + " has t=" +
                        std::to_string(sequence[k].t) + ", expected " + std::to_string(k + 1));
    }
  }
  Detector detector(profile, options);
  OfflineResult result;
  result.trace.reserve(sequence.size());
  for (const auto& snapshot : sequence) {
    result.trace.push_back(detector.step(snapshot));
    if (detector.alarmed()) break;
  }
  result.alarm = detector.alarm();
  return result;
}

}  // namespace netcp
