#include "netcp/completion.hpp"

#include <cmath>
#include <sstream>

#include "netcp/error.hpp"

namespace netcp {

void MaskedSnapshot::validate() const {
  const Eigen::Index n = y.rows();
  if (y.cols() != n || omega.size() != n) {
    throw DimensionError("snapshot t=" + std::to_string(t) + ": y and omega sizes differ");
  }
  if (!is_symmetric(y)) throw FormatError("snapshot t=" + std::to_string(t) + ": y not symmetric");
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = y(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw FormatError("snapshot t=" + std::to_string(t) + ": y entry outside [0,1]");
      }
      if (!omega(i, j) && v != 0.0) {
        throw FormatError("snapshot t=" + std::to_string(t) + ": y nonzero at unobserved entry");
      }
    }
  }
}

WindowSums WindowSums::from_snapshots(std::span<const MaskedSnapshot> window) {
  if (window.empty()) throw DimensionError("soft_impute_window: empty window");
  const Eigen::Index n = window.front().size();
  // Neumaier-compensated accumulation of Y.
  Matrix sum = Matrix::Zero(n, n);
  Matrix carry = Matrix::Zero(n, n);
  Matrix observed = Matrix::Zero(n, n);
  for (const auto& snap : window) {
    if (snap.size() != n || snap.omega.size() != n) {
      throw DimensionError("soft_impute_window: snapshot t=" + std::to_string(snap.t) +
                           " has side " + std::to_string(snap.size()) + ", expected " +
                           std::to_string(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = snap.y(i, j);
        const double s = sum(i, j);
        const double total = s + x;
        carry(i, j) += std::abs(s) >= std::abs(x) ? (s - total) + x : (x - total) + s;
        sum(i, j) = total;
        if (snap.omega(i, j)) observed(i, j) += 1.0;
      }
    }
  }
  return {sum + carry, std::move(observed), static_cast<int>(window.size())};
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::op_norm_criterion:
      return "op_norm_criterion";
    case StopReason::fro_fallback:
      return "fro_fallback";
    case StopReason::iter_cap:
      return "iter_cap";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("solver: lambda must be > 0");
  if (!(a > 0.0 && a <= 1.0)) throw ConfigError("solver: a must lie in (0, 1]");
  if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
}

GraphonEstimate soft_impute(const WindowSums& sums, const SolverConfig& config) {
  config.validate();
  const Eigen::Index n = sums.sum_y.rows();
  if (sums.length < 1) throw DimensionError("soft_impute: empty window");
  if (sums.sum_y.cols() != n || sums.observed.rows() != n || sums.observed.cols() != n) {
    throw DimensionError("soft_impute: inconsistent window sums");
  }
  if (config.init.size() != 0 && (config.init.rows() != n || config.init.cols() != n)) {
    throw DimensionError("soft_impute: warm start has wrong size");
  }

  const double inv_len = 1.0 / sums.length;
  const double fro_tol = config.fro_tol < 0.0 ? 1e-7 * static_cast<double>(n) : config.fro_tol;
  const Matrix mean_y = sums.sum_y * inv_len;
  // Fraction of the window in which each entry was missing.
  const Matrix missing = (Matrix::Constant(n, n, static_cast<double>(sums.length)) - sums.observed) *
                         inv_len;
  const double op_target = config.lambda / 3.0;

  Matrix tilde = config.init.size() ? config.init : Matrix::Zero(n, n);
  Matrix prev;
  GraphonEstimate est;

  for (int k = 1; k <= config.max_iters; ++k) {
    const Matrix w = mean_y + missing.cwiseProduct(tilde);
    Shrinkage shrink = svd_shrink(w, config.lambda);
    if (!all_finite(shrink.z)) {
      throw NumericalError("soft_impute: non-finite iterate at iteration " + std::to_string(k));
    }
    est.iters_used = k;

    double step = 0.0;
    if (k > 1) {
      step = fro_norm(shrink.z - prev);
      est.step_norms.push_back(step);
    }

    const Matrix diff = shrink.z - tilde;
    bool stop = false;
    if (sup_norm(diff) < config.a) {
      const Matrix masked = diff.cwiseProduct(missing);
      // ||X||_op <= ||X||_F avoids a decomposition in the common case.
      stop = fro_norm(masked) < op_target || op_norm(masked) < op_target;
    }
    if (stop) {
      est.converged_by = StopReason::op_norm_criterion;
    } else if (k > 1 && step < fro_tol) {
      stop = true;
      est.converged_by = StopReason::fro_fallback;
    }

    tilde = clip_entries(shrink.z, config.a);
    if (stop || k == config.max_iters) {
      if (!stop) est.converged_by = StopReason::iter_cap;
      est.singular_values = std::move(shrink.shrunk);
      break;
    }
    prev = std::move(shrink.z);
  }

  est.m_hat = std::move(tilde);
  est.numerical_rank = numerical_rank(est.singular_values);
  return est;
}

GraphonEstimate soft_impute_window(std::span<const MaskedSnapshot> window,
                                   const SolverConfig& config) {
  return soft_impute(WindowSums::from_snapshots(window), config);
}

double lambda_for_window(int window_len, const CalibrationProfile& profile) {
  if (window_len < 1) throw ConfigError("lambda_for_window: window length must be >= 1");
  if (!(profile.alpha > 0.0 && profile.alpha < 1.0)) {
    throw ConfigError("lambda_for_window: alpha must lie in (0, 1)");
  }
  const double noise = profile.m * std::sqrt(static_cast<double>(profile.n) * profile.rho) +
                       std::sqrt(std::log(4.0 / profile.alpha));
  return profile.c_lambda / std::sqrt(static_cast<double>(window_len)) * noise;
}

}  // namespace netcp
