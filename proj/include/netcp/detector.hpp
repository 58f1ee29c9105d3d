#pragma once

// Online change-point detection: at every time t the detector compares the
// prefix estimate M_hat(0:s] with the suffix estimate M_hat(s:t] for each
// candidate split s and raises an alarm the first time
//
//   || M_hat(0:s] - M_hat(s:t] ||_F >= eps(s, t)
//
// for some s. Once alarmed the detector accepts no further snapshots.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "netcp/completion.hpp"
#include "netcp/profile.hpp"

namespace netcp {

/// Split points {max(t - 2^j, 1) : j >= 0} in increasing order, or every s in
/// [1, t-1] in full mode. Empty for t < 2.
std::vector<int> candidate_grid(int t, GridMode mode = GridMode::dyadic);

/// sqrt(r rho n m / p^2), the constant part of the threshold.
double threshold_scale(const CalibrationProfile& profile);
/// eps(s, t) / sqrt(C_eps).
double threshold_shape(int s, int t, const CalibrationProfile& profile);
/// eps(s, t) = sqrt(C_eps r rho n m / p^2) (sqrt(log(s/alpha)/s) + sqrt(log(t/alpha)/(t-s))).
double threshold_eps(int s, int t, const CalibrationProfile& profile);

struct PairStatistic {
  int s = 0;
  double statistic = 0.0;  // || M_hat(0:s] - M_hat(s:t] ||_F
  double threshold = 0.0;
  double shape = 0.0;      // threshold / sqrt(C_eps)
};

struct Alarm {
  int t = 0;
  int s = 0;
  double statistic = 0.0;
  double threshold = 0.0;

  bool operator==(const Alarm&) const = default;
};

struct DetectionOutcome {
  int t = 0;
  std::optional<Alarm> alarm;
  std::vector<PairStatistic> evaluated_pairs;
};

struct DetectorOptions {
  int max_iters = 500;
  double fro_tol = -1.0;  // negative: solver default
  bool warm_start = true;
  unsigned workers = 1;   // threads for the per-step suffix solves
};

class Detector {
 public:
  explicit Detector(CalibrationProfile profile, DetectorOptions options = {});

  /// Appends snapshot t = time() + 1 and evaluates every candidate split.
  DetectionOutcome step(const MaskedSnapshot& snapshot);

  int time() const { return t_; }
  bool alarmed() const { return alarm_.has_value(); }
  const std::optional<Alarm>& alarm() const { return alarm_; }
  const CalibrationProfile& profile() const { return profile_; }
  std::size_t cached_prefixes() const { return prefix_cache_.size(); }
  bool has_cached_prefix(int s) const { return prefix_cache_.contains(s); }

 private:
  WindowSums window(int s, int e) const;
  SolverConfig solver_config(int length) const;
  const GraphonEstimate& prefix_estimate(int s);

  CalibrationProfile profile_;
  DetectorOptions options_;
  int t_ = 0;
  // cum_y_[k], cum_obs_[k]: sums of Y and Omega over snapshots 1..k.
  std::vector<Matrix> cum_y_;
  std::vector<Matrix> cum_obs_;
  std::map<int, GraphonEstimate> prefix_cache_;
  // Suffix estimates of the previous step keyed by window length.
  std::map<int, Matrix> suffix_by_length_;
  std::optional<Alarm> alarm_;
};

struct OfflineResult {
  std::optional<Alarm> alarm;
  std::vector<DetectionOutcome> trace;  // one entry per step taken

  std::optional<int> alarm_time() const {
    return alarm ? std::optional<int>(alarm->t) : std::nullopt;
  }
  /// max over all evaluated pairs of (statistic / shape)^2: the smallest
  /// C_eps at which this run would not alarm.
  double required_c_eps() const;
};

/// Folds `step` over a sequence with contiguous t starting at 1, stopping at
/// the first alarm.
OfflineResult run_offline(std::span<const MaskedSnapshot> sequence, const CalibrationProfile& profile,
                          const DetectorOptions& options = {});

}  // namespace netcp
