#pragma once

// Synthetic dynamic networks with a single change point and Bernoulli
// missingness: a three-community SBM whose block matrix swaps at the change,
// and an RDPG whose latent positions are partly redrawn.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcp/completion.hpp"
#include "netcp/linalg.hpp"

namespace netcp {

struct SbmParams {
  double rho = 0.5;
  Matrix b_pre;
  Matrix b_post;
  int communities = 3;
};

struct RdpgParams {
  int latent_dim = 5;
  double change_fraction = 0.25;
};

struct ScenarioSpec {
  std::string name = "scenario";
  std::variant<SbmParams, RdpgParams> kind;
  int n = 100;
  std::optional<int> delta = 150;  // empty: no change point
  int total_t = 300;
  double pi = 0.9;
  std::uint64_t seed = 0;
  bool self_loops = true;

  void validate() const;
  bool is_sbm() const { return std::holds_alternative<SbmParams>(kind); }

  /// Three-community SBM, rho = 0.5, n = 100, change at 150 of 300, with self loops.
  static ScenarioSpec scenario1_sbm();
  /// RDPG with 5-dimensional latent positions, a quarter of them redrawn, no self loops.
  static ScenarioSpec scenario2_rdpg();
};

void to_json(nlohmann::json& j, const ScenarioSpec& spec);
void from_json(const nlohmann::json& j, ScenarioSpec& spec);
ScenarioSpec read_scenario(const std::string& path);

struct GraphonPair {
  Matrix pre;
  Matrix post;
};

/// Community label (0-based) of node i: contiguous blocks z_i = ceil(K (i+1) / n) - 1.
int community_of(int i, int n, int communities);

GraphonPair sbm_graphon(const ScenarioSpec& spec);
/// Latent positions are drawn from the spec seed, once per stream.
GraphonPair rdpg_graphon(const ScenarioSpec& spec);
GraphonPair scenario_graphons(const ScenarioSpec& spec);

struct StreamTruth {
  std::optional<int> delta;
  double kappa = 0.0;
  Matrix graphon_pre;
  Matrix graphon_post;

  bool operator==(const StreamTruth& other) const = default;
};

struct GeneratedStream {
  int n = 0;
  bool self_loops = true;
  std::vector<MaskedSnapshot> snapshots;
  StreamTruth truth;
};

/// Samples a stream: A(t) ~ Bernoulli(graphon), Omega(t) ~ Bernoulli(pi),
/// Y = Omega * A, all on the upper triangle then mirrored. Diagonal entries
/// are unobserved when self loops are disabled.
GeneratedStream generate_stream(const ScenarioSpec& spec);

/// Change-free stream of `length` snapshots from the pre-change graphon of
/// `spec`, sampled independently of the test stream.
GeneratedStream generate_training_stream(const ScenarioSpec& spec, int length);

}  // namespace netcp
