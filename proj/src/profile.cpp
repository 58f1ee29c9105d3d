#include "netcp/profile.hpp"

#include <fstream>

#include "netcp/error.hpp"

namespace netcp {

std::string to_string(GridMode mode) { return mode == GridMode::dyadic ? "dyadic" : "full"; }

GridMode grid_mode_from_string(const std::string& name) {
  if (name == "dyadic") return GridMode::dyadic;
  if (name == "full") return GridMode::full;
  throw ConfigError("unknown grid mode '" + name + "' (expected dyadic or full)");
}

void CalibrationProfile::validate(bool require_c_eps) const {
  if (n < 1) throw ConfigError("profile: n must be >= 1");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("profile: rho must lie in (0, 1]");
  if (!(p > 0.0)) throw ConfigError("profile: p must be > 0");
  if (!(p <= m && m <= 1.0)) throw ConfigError("profile: need p <= m <= 1");
  if (r < 1) throw ConfigError("profile: r must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("profile: alpha must lie in (0, 1)");
  if (!(c_lambda > 0.0)) throw ConfigError("profile: c_lambda must be > 0");
  if (!(a > 0.0 && a <= 1.0)) throw ConfigError("profile: a must lie in (0, 1]");
  if (c_eps && !(*c_eps > 0.0)) throw ConfigError("profile: c_eps must be > 0");
  if (require_c_eps && !c_eps) throw ConfigError("profile: c_eps is not set (run calibrate)");
}

void to_json(nlohmann::json& j, const CalibrationProfile& profile) {
  j = nlohmann::json{{"n", profile.n},
                     {"rho", profile.rho},
                     {"p", profile.p},
                     {"m", profile.m},
                     {"r", profile.r},
                     {"alpha", profile.alpha},
                     {"c_lambda", profile.c_lambda},
                     {"c_eps", nullptr},
                     {"a", profile.a},
                     {"grid_mode", to_string(profile.grid_mode)}};
  if (profile.c_eps) j["c_eps"] = *profile.c_eps;
}

void from_json(const nlohmann::json& j, CalibrationProfile& profile) {
  try {
    profile.n = j.at("n").get<int>();
    profile.rho = j.at("rho").get<double>();
    profile.p = j.at("p").get<double>();
    profile.m = j.at("m").get<double>();
    profile.r = j.at("r").get<int>();
    profile.alpha = j.at("alpha").get<double>();
    profile.c_lambda = j.value("c_lambda", 2.0 / 3.0);
    profile.a = j.value("a", 1.0);
    profile.grid_mode = grid_mode_from_string(j.value("grid_mode", std::string("dyadic")));
    if (j.contains("c_eps") && !j.at("c_eps").is_null()) {
      profile.c_eps = j.at("c_eps").get<double>();
    } else {
      profile.c_eps.reset();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("profile document: ") + e.what());
  }
}

CalibrationProfile read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open profile '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("profile '" + path + "': " + e.what());
  }
  auto profile = j.get<CalibrationProfile>();
  profile.validate(false);
  return profile;
}

void write_profile(const std::string& path, const CalibrationProfile& profile) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write profile '" + path + "'");
  out << nlohmann::json(profile).dump(2) << '\n';
}

}  // namespace netcp
