#include "netcp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "netcp/error.hpp"
#include "netcp/random.hpp"

namespace netcp {

namespace {

enum DrawKind : std::uint64_t { kEdge = 0, kObserve = 1, kLatent = 2 };
enum StreamTag : std::uint64_t { kTestStream = 0, kTrainStream = 1 };

Matrix block_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix b(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) b(i, j++) = v;
    ++i;
  }
  return b;
}

void validate_block(const Matrix& b, int communities, double rho, const char* which) {
  if (b.rows() != communities || b.cols() != communities) {
    throw ConfigError(std::string("scenario: ") + which + " must be communities x communities");
  }
  if (!is_symmetric(b)) throw ConfigError(std::string("scenario: ") + which + " not symmetric");
  if (b.minCoeff() < 0.0 || b.maxCoeff() > 1.0) {
    throw ConfigError(std::string("scenario: ") + which + " entries must lie in [0,1]");
  }
  if (rho * b.maxCoeff() > 1.0) throw ConfigError("scenario: rho * max(B) exceeds 1");
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m.cols()) {
      throw FormatError("ragged matrix in scenario document");
    }
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix latent_positions(const ScenarioSpec& spec, const RdpgParams& params, std::uint64_t which) {
  const CounterRng rng(spec.seed);
  Matrix x(spec.n, params.latent_dim);
  for (int i = 0; i < spec.n; ++i) {
    // A zero row has probability zero; redraw it if it ever happens.
    for (std::uint64_t attempt = 0;; ++attempt) {
      for (int d = 0; d < params.latent_dim; ++d) {
        x(i, d) = rng.uniform({kLatent, which, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(d), attempt});
      }
      if (x.row(i).squaredNorm() > 0.0) break;
    }
  }
  return x;
}

Matrix cosine_graphon(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Vector norms = x.rowwise().norm();
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      double v = 1.0;
      if (x.row(i) != x.row(j)) {
        v = std::clamp(x.row(i).dot(x.row(j)) / (norms(i) * norms(j)), 0.0, 1.0);
      }
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

GeneratedStream sample(const ScenarioSpec& spec, const GraphonPair& graphons, int length,
                       std::optional<int> delta, std::uint64_t tag) {
  const CounterRng rng(spec.seed);
  const int n = spec.n;
  GeneratedStream out;
  out.n = n;
  out.self_loops = spec.self_loops;
  out.snapshots.reserve(static_cast<std::size_t>(length));
  for (int t = 1; t <= length; ++t) {
    const Matrix& graphon = (delta && t > *delta) ? graphons.post : graphons.pre;
    MaskedSnapshot snap{t, Matrix::Zero(n, n), Mask(n)};
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i <= j; ++i) {
        if (i == j && !spec.self_loops) continue;
        const auto ut = static_cast<std::uint64_t>(t);
        const auto ui = static_cast<std::uint64_t>(i);
        const auto uj = static_cast<std::uint64_t>(j);
        const bool edge = rng.uniform({tag, ut, ui, uj, kEdge}) < graphon(i, j);
        const bool seen = rng.uniform({tag, ut, ui, uj, kObserve}) < spec.pi;
        if (!seen) continue;
        snap.omega.set(i, j, true);
        if (edge) {
          snap.y(i, j) = 1.0;
          snap.y(j, i) = 1.0;
        }
      }
    }
    out.snapshots.push_back(std::move(snap));
  }
  return out;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (n < 1) throw ConfigError("scenario: n must be >= 1");
  if (total_t < 1) throw ConfigError("scenario: total_t must be >= 1");
  if (delta && (*delta < 1 || *delta >= total_t)) {
    throw ConfigError("scenario: delta must satisfy 1 <= delta < total_t");
  }
  if (!(pi > 0.0 && pi <= 1.0)) throw ConfigError("scenario: pi must lie in (0, 1]");
  if (const auto* sbm = std::get_if<SbmParams>(&kind)) {
    if (sbm->communities < 1) throw ConfigError("scenario: communities must be >= 1");
    if (!(sbm->rho > 0.0 && sbm->rho <= 1.0)) throw ConfigError("scenario: rho must lie in (0,1]");
    validate_block(sbm->b_pre, sbm->communities, sbm->rho, "b_pre");
    validate_block(sbm->b_post, sbm->communities, sbm->rho, "b_post");
  } else {
    const auto& rdpg = std::get<RdpgParams>(kind);
    if (rdpg.latent_dim < 1) throw ConfigError("scenario: latent_dim must be >= 1");
    if (!(rdpg.change_fraction >= 0.0 && rdpg.change_fraction <= 1.0)) {
      throw ConfigError("scenario: change_fraction must lie in [0, 1]");
    }
  }
}

ScenarioSpec ScenarioSpec::scenario1_sbm() {
  ScenarioSpec spec;
  spec.name = "scenario1_sbm";
  SbmParams sbm;
  sbm.rho = 0.5;
  sbm.communities = 3;
  sbm.b_pre = block_matrix({{0.6, 1.0, 0.6}, {1.0, 0.6, 0.5}, {0.6, 0.5, 0.6}});
  sbm.b_post = block_matrix({{0.6, 0.5, 0.6}, {0.5, 0.6, 1.0}, {0.6, 1.0, 0.6}});
  spec.kind = std::move(sbm);
  spec.self_loops = true;
  return spec;
}

ScenarioSpec ScenarioSpec::scenario2_rdpg() {
  ScenarioSpec spec;
  spec.name = "scenario2_rdpg";
  spec.kind = RdpgParams{};
  spec.self_loops = false;
  return spec;
}

void to_json(nlohmann::json& j, const ScenarioSpec& spec) {
  j = nlohmann::json{{"name", spec.name},
                     {"n", spec.n},
                     {"delta", nullptr},
                     {"total_t", spec.total_t},
                     {"pi", spec.pi},
                     {"seed", spec.seed},
                     {"self_loops", spec.self_loops}};
  if (spec.delta) j["delta"] = *spec.delta;
  if (const auto* sbm = std::get_if<SbmParams>(&spec.kind)) {
    j["kind"] = "sbm";
    j["sbm"] = {{"rho", sbm->rho},
                {"communities", sbm->communities},
                {"b_pre", matrix_to_json(sbm->b_pre)},
                {"b_post", matrix_to_json(sbm->b_post)}};
  } else {
    const auto& rdpg = std::get<RdpgParams>(spec.kind);
    j["kind"] = "rdpg";
    j["rdpg"] = {{"latent_dim", rdpg.latent_dim}, {"change_fraction", rdpg.change_fraction}};
  }
}

void from_json(const nlohmann::json& j, ScenarioSpec& spec) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "sbm") {
      spec = ScenarioSpec::scenario1_sbm();
      auto& sbm = std::get<SbmParams>(spec.kind);
      if (j.contains("sbm")) {
        const auto& s = j.at("sbm");
        sbm.rho = s.value("rho", sbm.rho);
        sbm.communities = s.value("communities", sbm.communities);
        if (s.contains("b_pre")) sbm.b_pre = matrix_from_json(s.at("b_pre"));
        if (s.contains("b_post")) sbm.b_post = matrix_from_json(s.at("b_post"));
      }
    } else if (kind == "rdpg") {
      spec = ScenarioSpec::scenario2_rdpg();
      auto& rdpg = std::get<RdpgParams>(spec.kind);
      if (j.contains("rdpg")) {
        const auto& r = j.at("rdpg");
        rdpg.latent_dim = r.value("latent_dim", rdpg.latent_dim);
        rdpg.change_fraction = r.value("change_fraction", rdpg.change_fraction);
      }
    } else {
      throw FormatError("scenario: unknown kind '" + kind + "'");
    }
    spec.name = j.value("name", spec.name);
    spec.n = j.value("n", spec.n);
    spec.total_t = j.value("total_t", spec.total_t);
    spec.pi = j.value("pi", spec.pi);
    spec.seed = j.value("seed", spec.seed);
    spec.self_loops = j.value("self_loops", spec.self_loops);
    if (j.contains("delta")) {
      if (j.at("delta").is_null()) {
        spec.delta.reset();
      } else {
        spec.delta = j.at("delta").get<int>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario document: ") + e.what());
  }
}

ScenarioSpec read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open scenario '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("scenario '" + path + "': " + e.what());
  }
  auto spec = j.get<ScenarioSpec>();
  spec.validate();
  return spec;
}

int community_of(int i, int n, int communities) {
  // ceil(K (i+1) / n) - 1 in integer arithmetic.
  return (communities * (i + 1) + n - 1) / n - 1;
}

GraphonPair sbm_graphon(const ScenarioSpec& spec) {
  const auto& sbm = std::get<SbmParams>(spec.kind);
  const int n = spec.n;
  GraphonPair g{Matrix(n, n), Matrix(n, n)};
  for (int j = 0; j < n; ++j) {
    const int zj = community_of(j, n, sbm.communities);
    for (int i = 0; i < n; ++i) {
      const int zi = community_of(i, n, sbm.communities);
      g.pre(i, j) = sbm.rho * sbm.b_pre(zi, zj);
      g.post(i, j) = sbm.rho * sbm.b_post(zi, zj);
    }
  }
  return g;
}

GraphonPair rdpg_graphon(const ScenarioSpec& spec) {
  const auto& rdpg = std::get<RdpgParams>(spec.kind);
  const Matrix x = latent_positions(spec, rdpg, 0);
  const Matrix x_new = latent_positions(spec, rdpg, 1);
  Matrix y = x;
  const auto replaced = static_cast<Eigen::Index>(std::floor(spec.n * rdpg.change_fraction));
  y.topRows(replaced) = x_new.topRows(replaced);
  return {cosine_graphon(x), cosine_graphon(y)};
}

GraphonPair scenario_graphons(const ScenarioSpec& spec) {
  return spec.is_sbm() ? sbm_graphon(spec) : rdpg_graphon(spec);
}

GeneratedStream generate_stream(const ScenarioSpec& spec) {
  spec.validate();
  GraphonPair g = scenario_graphons(spec);
  GeneratedStream out = sample(spec, g, spec.total_t, spec.delta, kTestStream);
  out.truth.delta = spec.delta;
  if (spec.delta) {
    out.truth.kappa = fro_norm(g.pre - g.post);
    out.truth.graphon_post = std::move(g.post);
  } else {
    out.truth.graphon_post = g.pre;
  }
  out.truth.graphon_pre = std::move(g.pre);
  return out;
}

GeneratedStream generate_training_stream(const ScenarioSpec& spec, int length) {
  spec.validate();
  if (length < 1) throw ConfigError("training stream length must be >= 1");
  GraphonPair g = scenario_graphons(spec);
  GeneratedStream out = sample(spec, g, length, std::nullopt, kTrainStream);
  out.truth.graphon_post = g.pre;
  out.truth.graphon_pre = std::move(g.pre);
  return out;
}

}  // namespace netcp
