#pragma once

// Multi-copy soft-impute: estimates the common graphon behind a window of
// partially observed adjacency matrices by iterating
//
//   M_hat <- S_lambda( mean_t [ Y(t) on Omega(t) + M_tilde off Omega(t) ] ),
//   M_tilde <- clip(M_hat, a),
//
// until the masked-difference operator norm drops below lambda / 3 and the
// entrywise change is below a (or a Frobenius fallback / iteration cap fires).

#include <span>
#include <vector>

#include "netcp/linalg.hpp"
#include "netcp/profile.hpp"

namespace netcp {

/// One time step: observed adjacency (zero off the mask) and the mask itself.
struct MaskedSnapshot {
  int t = 0;
  Matrix y;
  Mask omega;

  Eigen::Index size() const { return y.rows(); }
  /// Throws DimensionError / FormatError when the snapshot invariants fail.
  void validate() const;
  bool operator==(const MaskedSnapshot& other) const = default;
};

/// Sufficient statistics of a window: sum of Y(t), number of times each entry
/// was observed, and the window length. The solver only ever needs these.
struct WindowSums {
  Matrix sum_y;
  Matrix observed;  // integer-valued counts
  int length = 0;

  static WindowSums from_snapshots(std::span<const MaskedSnapshot> window);
};

enum class StopReason { op_norm_criterion, fro_fallback, iter_cap };
const char* to_string(StopReason reason);

struct SolverConfig {
  double lambda = 1.0;
  double a = 1.0;
  int max_iters = 500;
  /// Negative means "use the default 1e-7 * n".
  double fro_tol = -1.0;
  /// Warm start M_tilde; empty means the zero matrix.
  Matrix init;

  void validate() const;
};

struct GraphonEstimate {
  Matrix m_hat;            // truncated final iterate
  Vector singular_values;  // shrunken spectrum of the final iterate, descending
  Eigen::Index numerical_rank = 0;
  int iters_used = 0;
  StopReason converged_by = StopReason::iter_cap;
  /// ||M_{k+1} - M_k||_F for consecutive iterates.
  std::vector<double> step_norms;
};

GraphonEstimate soft_impute(const WindowSums& sums, const SolverConfig& config);
GraphonEstimate soft_impute_window(std::span<const MaskedSnapshot> window,
                                   const SolverConfig& config);

/// lambda = C_lambda * L^{-1/2} * (m * sqrt(n * rho) + sqrt(log(4 / alpha))).
double lambda_for_window(int window_len, const CalibrationProfile& profile);

}  // namespace netcp
