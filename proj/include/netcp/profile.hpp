#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace netcp {

enum class GridMode { dyadic, full };

std::string to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& name);

/// Model parameters and constants that instantiate the penalty and threshold
/// formulas. `c_eps` stays empty until permutation fitting has run.
struct CalibrationProfile {
  int n = 0;
  double rho = 1.0;  // entrywise sparsity
  double p = 1.0;    // minimum observation probability
  double m = 1.0;    // maximum observation probability
  int r = 1;         // rank
  double alpha = 0.05;
  double c_lambda = 2.0 / 3.0;
  std::optional<double> c_eps;
  double a = 1.0;  // entrywise truncation level
  GridMode grid_mode = GridMode::dyadic;

  /// Throws ConfigError when a field violates its range. With
  /// `require_c_eps`, an unset or non-positive c_eps is also rejected.
  void validate(bool require_c_eps) const;
};

void to_json(nlohmann::json& j, const CalibrationProfile& profile);
void from_json(const nlohmann::json& j, CalibrationProfile& profile);

CalibrationProfile read_profile(const std::string& path);
void write_profile(const std::string& path, const CalibrationProfile& profile);

}  // namespace netcp
