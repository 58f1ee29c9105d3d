#pragma once

// Tuning from a change-free training prefix: model parameters (rho, p, m, r)
// from a soft-impute fit of the whole prefix, then C_eps from time
// permutations of the prefix so that at most a fraction alpha of the
// permuted replays would raise an alarm.

#include <cstdint>
#include <span>
#include <vector>

#include "netcp/completion.hpp"
#include "netcp/detector.hpp"
#include "netcp/profile.hpp"

namespace netcp {

/// Lower bound applied to C_eps when every permuted statistic is zero.
inline constexpr double kCepsFloor = 1e-6;
/// Relative margin placed above the selected order statistic so that the
/// permutation attaining it does not itself cross (ties count as crossings).
inline constexpr double kCepsMargin = 1e-9;

/// Inverse empirical CDF (type 1): the smallest sample x with F_n(x) >= q.
double quantile_lower(std::vector<double> values, double q);

struct EstimateOptions {
  int max_iters = 500;
  double fro_tol = -1.0;
  GridMode grid_mode = GridMode::dyadic;
};

/// Returns a profile with every field but c_eps filled in. Throws
/// CalibrationError when the estimated p or rho is zero.
CalibrationProfile estimate_profile(std::span<const MaskedSnapshot> training, double alpha,
                                    const EstimateOptions& options = {});

struct PermutationReport {
  int k = 0;
  std::vector<double> per_perm_required_ceps;
  double chosen_ceps = 0.0;
  double crossing_rate_at_chosen = 0.0;
  bool floored = false;
};

/// Fisher-Yates permutation of {0, ..., length-1} driven by `seed`.
std::vector<int> time_permutation(int length, std::uint64_t seed);

/// Seed of permutation `index` under root seed `rng_seed`.
std::uint64_t permutation_seed(std::uint64_t rng_seed, int index);

PermutationReport fit_ceps(std::span<const MaskedSnapshot> training,
                           const CalibrationProfile& profile, int k, std::uint64_t rng_seed,
                           const DetectorOptions& options = {}, unsigned workers = 1);

}  // namespace netcp
