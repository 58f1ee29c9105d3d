#include "netcp/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netcp/error.hpp"
#include "netcp/parallel.hpp"
#include "netcp/random.hpp"

namespace netcp {

namespace {

constexpr std::uint64_t kPermutationDomain = 0x7065726dULL;

// 1-based rank of the type-1 q-quantile among `count` sorted samples.
std::size_t quantile_rank(std::size_t count, double q) {
  const double target = std::ceil(q * static_cast<double>(count) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(target, 1.0)), 1, count);
}

std::vector<double> upper_triangle(const Matrix& a, bool with_diagonal) {
  std::vector<double> out;
  const Eigen::Index n = a.rows();
  out.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < (with_diagonal ? j + 1 : j); ++i) out.push_back(a(i, j));
  }
  return out;
}

}  // namespace

double quantile_lower(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  return values[quantile_rank(values.size(), q) - 1];
}

CalibrationProfile estimate_profile(std::span<const MaskedSnapshot> training, double alpha,
                                    const EstimateOptions& options) {
  if (training.size() < 2) throw CalibrationError("training sequence needs at least 2 snapshots");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

  const WindowSums sums = WindowSums::from_snapshots(training);
  const Eigen::Index n = sums.sum_y.rows();
  const Matrix frequency = sums.observed / static_cast<double>(sums.length);

  // Entries that are never observed on the diagonal mean the data carry no
  // self loops; those structural zeros are left out of the p / m quantiles.
  const bool diagonal_observed = frequency.diagonal().maxCoeff() > 0.0;
  const std::vector<double> freq_values = upper_triangle(frequency, diagonal_observed);

  CalibrationProfile profile;
  profile.n = static_cast<int>(n);
  profile.alpha = alpha;
  profile.c_lambda = 2.0 / 3.0;
  profile.a = 1.0;
  profile.grid_mode = options.grid_mode;
  profile.m = quantile_lower(freq_values, 0.95);
  profile.p = quantile_lower(freq_values, 0.05);
  if (!(profile.p > 0.0)) {
    throw CalibrationError("estimated p is 0: the 5% quantile of per-entry observation rates over " +
                           std::to_string(sums.length) + " snapshots is zero (max rate " +
                           std::to_string(frequency.maxCoeff()) + ")");
  }

  SolverConfig config;
  config.a = profile.a;
  config.max_iters = options.max_iters;
  config.fro_tol = options.fro_tol;

  // First pass: rho and m unknown, so the penalty uses rho = m = 1.
  CalibrationProfile bootstrap = profile;
  bootstrap.rho = 1.0;
  bootstrap.m = 1.0;
  config.lambda = lambda_for_window(sums.length, bootstrap);
  const GraphonEstimate first = soft_impute(sums, config);
  const auto entries = [](const Matrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
  };
  const double rho_first = quantile_lower(entries(first.m_hat), 0.95);
  if (!(rho_first > 0.0)) throw CalibrationError("estimated rho is 0 in the bootstrap pass");

  // Refinement with the estimated rho and m.
  CalibrationProfile refined = profile;
  refined.rho = std::min(rho_first, 1.0);
  config.lambda = lambda_for_window(sums.length, refined);
  config.init = first.m_hat;
  const GraphonEstimate second = soft_impute(sums, config);

  profile.rho = std::min(quantile_lower(entries(second.m_hat), 0.95), 1.0);
  if (!(profile.rho > 0.0)) throw CalibrationError("estimated rho is 0");
  profile.r = static_cast<int>(std::max<Eigen::Index>(second.numerical_rank, 1));
  profile.validate(false);
  return profile;
}

std::vector<int> time_permutation(int length, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) order[static_cast<std::size_t>(i)] = i;
  CounterRng rng(seed);
  for (int i = length - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_unit() * (i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return order;
}

std::uint64_t permutation_seed(std::uint64_t rng_seed, int index) {
  return derive_seed(rng_seed, kPermutationDomain, static_cast<std::uint64_t>(index));
}

PermutationReport fit_ceps(std::span<const MaskedSnapshot> training,
                           const CalibrationProfile& profile, int k, std::uint64_t rng_seed,
                           const DetectorOptions& options, unsigned workers) {
  if (k < 1) throw ConfigError("fit_ceps: k must be >= 1");
  if (training.size() < 2) throw CalibrationError("fit_ceps: training needs at least 2 snapshots");

  // With an infinite C_eps nothing alarms, so every replay sees all pairs.
  CalibrationProfile unbounded = profile;
  unbounded.c_eps = std::numeric_limits<double>::infinity();
  unbounded.validate(true);

  const int length = static_cast<int>(training.size());
  PermutationReport report;
  report.k = k;
  report.per_perm_required_ceps.assign(static_cast<std::size_t>(k), 0.0);
  parallel_for(static_cast<std::size_t>(k), workers, [&](std::size_t idx) {
    const auto order = time_permutation(length, permutation_seed(rng_seed, static_cast<int>(idx)));
    std::vector<MaskedSnapshot> permuted;
    permuted.reserve(training.size());
    for (int t = 0; t < length; ++t) {
      MaskedSnapshot snap = training[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])];
      snap.t = t + 1;
      permuted.push_back(std::move(snap));
    }
    report.per_perm_required_ceps[idx] = run_offline(permuted, unbounded, options).required_c_eps();
  });

  const double order_stat = quantile_lower(report.per_perm_required_ceps, 1.0 - profile.alpha);
  report.chosen_ceps = order_stat * (1.0 + kCepsMargin);
  if (!(report.chosen_ceps >= kCepsFloor)) {
    report.chosen_ceps = kCepsFloor;
    report.floored = true;
  }
  const auto crossings = std::count_if(report.per_perm_required_ceps.begin(),
                                       report.per_perm_required_ceps.end(),
                                       [&](double req) { return req >= report.chosen_ceps; });
  report.crossing_rate_at_chosen = static_cast<double>(crossings) / k;
  return report;
}

}  // namespace netcp
