// netcp: simulate, calibrate, detect and benchmark from the command line.
//
// Exit codes: 0 success / no alarm, 1 runtime error, 2 usage error,
// 3 alarm raised, 4 calibration failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "netcp/calibration.hpp"
#include "netcp/detector.hpp"
#include "netcp/error.hpp"
#include "netcp/evaluation.hpp"
#include "netcp/profile.hpp"
#include "netcp/simulation.hpp"
#include "netcp/stream_io.hpp"

namespace fs = std::filesystem;
using namespace netcp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAlarm = 3;
constexpr int kExitCalibration = 4;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("NETCP_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw UsageError(std::string("NETCP_SEED is not an unsigned integer: ") + raw);
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (auto env = env_seed()) return *env;
  return flag.value_or(fallback);
}

void print_alarm(std::ostream& out, const Alarm& alarm) {
  out << "ALARM t=" << alarm.t << " s=" << alarm.s << " stat=" << alarm.statistic
      << " thresh=" << alarm.threshold << '\n';
}

void print_truth(std::ostream& out, const StreamTruth& truth, std::optional<int> alarm_t, int t_max) {
  const RunRecord rec = classify_run(alarm_t, truth.delta, t_max);
  out << "truth delta=";
  if (truth.delta) {
    out << *truth.delta;
  } else {
    out << "none";
  }
  out << " false_alarm=" << (rec.false_alarm ? 1 : 0);
  if (rec.delay) out << " delay=" << *rec.delay;
  if (rec.censored) out << " censored=1";
  out << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string spec_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool full = false;
};

int cmd_simulate(const SimulateArgs& args) {
  ScenarioSpec spec = read_scenario(args.spec_path);
  spec.seed = resolve_seed(args.seed, spec.seed);
  const GeneratedStream stream = generate_stream(spec);
  const StreamHeader header{stream.n, static_cast<int>(stream.snapshots.size()), stream.self_loops};
  write_stream_file(args.out_path, header, stream.snapshots,
                    args.full ? EmitMode::full : EmitMode::observed);
  write_truth_file(truth_sidecar_path(args.out_path), stream.truth);
  std::cerr << "wrote " << stream.snapshots.size() << " snapshots (n=" << stream.n
            << ", kappa=" << stream.truth.kappa << ") to " << args.out_path << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string train_path;
  std::string out_path;
  double alpha = 0.05;
  int k = 100;
  std::optional<std::uint64_t> seed;
  std::string grid = "dyadic";
  int max_iters = 500;
  unsigned workers = 1;
};

int cmd_calibrate(const CalibrateArgs& args) {
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const StreamData data = read_stream_file(args.train_path);
  const GridMode grid = grid_mode_from_string(args.grid);
  DetectorOptions detector;
  detector.max_iters = args.max_iters;
  EstimateOptions est;
  est.max_iters = args.max_iters;
  est.grid_mode = grid;
  CalibrationProfile profile = estimate_profile(data.snapshots, args.alpha, est);
  const PermutationReport report =
      fit_ceps(data.snapshots, profile, args.k, resolve_seed(args.seed, 0), detector, args.workers);
  profile.c_eps = report.chosen_ceps;
  if (report.floored) {
    std::cerr << "warning: all permuted statistics were zero; c_eps set to floor " << kCepsFloor
              << '\n';
  }
  write_profile(args.out_path, profile);
  std::cerr << "profile: rho=" << profile.rho << " p=" << profile.p << " m=" << profile.m
            << " r=" << profile.r << " c_eps=" << *profile.c_eps
            << " crossing_rate=" << report.crossing_rate_at_chosen << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ detect

struct DetectArgs {
  std::string stream_path;
  std::string profile_path;
  bool follow = false;
  int poll_ms = 200;
  int idle_ms = 2000;
  std::optional<double> c_eps;
  std::optional<double> c_lambda;
  std::optional<std::string> grid;
  int max_iters = 500;
  bool verbose = false;
};

void print_status(std::ostream& out, const DetectionOutcome& outcome) {
  out << "t=" << outcome.t;
  if (outcome.evaluated_pairs.empty()) {
    out << " pairs=0\n";
    return;
  }
  // The pair closest to (or furthest over) its threshold is the binding one.
  const PairStatistic* binding = &outcome.evaluated_pairs.front();
  for (const auto& pair : outcome.evaluated_pairs) {
    if (pair.statistic / pair.threshold > binding->statistic / binding->threshold) binding = &pair;
  }
  out << " s=" << binding->s << " stat=" << binding->statistic << " thresh=" << binding->threshold
      << '\n';
}

int finish_detect(const DetectArgs& args, const Detector& detector) {
  const auto truth = read_truth_file(truth_sidecar_path(args.stream_path));
  std::optional<int> alarm_t;
  if (detector.alarm()) {
    print_alarm(std::cout, *detector.alarm());
    alarm_t = detector.alarm()->t;
  } else {
    std::cout << "NO-ALARM t_max=" << detector.time() << '\n';
  }
  if (truth) print_truth(std::cout, *truth, alarm_t, detector.time());
  return detector.alarm() ? kExitAlarm : kExitOk;
}

int follow_stream(const DetectArgs& args, Detector& detector) {
  std::ifstream in;
  std::string pending;
  std::optional<StreamParser> parser;
  auto last_growth = std::chrono::steady_clock::now();
  std::streamoff offset = 0;

  const auto consume = [&](std::vector<MaskedSnapshot> snapshots) {
    for (auto& snap : snapshots) {
      if (detector.alarmed()) return;
      print_status(std::cout, detector.step(snap));
      std::cout.flush();
    }
  };

  while (!detector.alarmed()) {
    in.open(args.stream_path, std::ios::binary);
    if (!in) throw FormatError("cannot open stream '" + args.stream_path + "'");
    in.seekg(offset);
    std::string chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    offset += static_cast<std::streamoff>(chunk.size());
    in.close();

    if (!chunk.empty()) {
      last_growth = std::chrono::steady_clock::now();
      pending += chunk;
      std::size_t start = 0;
      for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
        const std::string_view line(pending.data() + start, nl - start);
        start = nl + 1;
        if (!parser) {
          parser.emplace(parse_header(line));
          if (parser->header().n != detector.profile().n) {
            throw DimensionError("stream n=" + std::to_string(parser->header().n) +
                                 " does not match profile n=" +
                                 std::to_string(detector.profile().n));
          }
          continue;
        }
        consume(parser->push(line));
        if (detector.alarmed()) break;
      }
      pending.erase(0, start);
    } else if (std::chrono::steady_clock::now() - last_growth >=
               std::chrono::milliseconds(args.idle_ms)) {
      break;
    }
    if (!detector.alarmed()) std::this_thread::sleep_for(std::chrono::milliseconds(args.poll_ms));
  }
  if (parser && !detector.alarmed()) {
    if (!pending.empty()) consume(parser->push(pending));
    consume(parser->finish());
  }
  return finish_detect(args, detector);
}

int cmd_detect(const DetectArgs& args) {
  CalibrationProfile profile = read_profile(args.profile_path);
  if (args.c_eps) profile.c_eps = *args.c_eps;
  if (args.c_lambda) profile.c_lambda = *args.c_lambda;
  if (args.grid) profile.grid_mode = grid_mode_from_string(*args.grid);
  profile.validate(true);
  DetectorOptions options;
  options.max_iters = args.max_iters;
  Detector detector(profile, options);

  if (args.follow) return follow_stream(args, detector);

  const StreamData data = read_stream_file(args.stream_path);
  if (data.header.n != profile.n) {
    throw DimensionError("stream n=" + std::to_string(data.header.n) +
                         " does not match profile n=" + std::to_string(profile.n));
  }
  for (const auto& snap : data.snapshots) {
    const DetectionOutcome outcome = detector.step(snap);
    if (args.verbose) print_status(std::cout, outcome);
    if (detector.alarmed()) break;
  }
  return finish_detect(args, detector);
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string spec_dir;
  std::vector<double> alphas{0.05};
  std::vector<double> pis;
  int reps = 100;
  std::string out_csv;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  std::string profile_source = "calibrate-per-run";
  int k = 100;
  int train_length = 200;
  std::optional<double> c_eps;
};

int cmd_benchmark(const BenchmarkArgs& args) {
  if (args.pis.empty()) throw UsageError("benchmark: --pi needs at least one value");
  if (args.alphas.empty()) throw UsageError("benchmark: --alpha needs at least one value");
  // CLI11 reads an empty list element as 0, which these range checks reject.
  for (double pi : args.pis) {
    if (!(pi > 0.0 && pi <= 1.0)) throw UsageError("benchmark: every --pi value must lie in (0, 1]");
  }
  for (double alpha : args.alphas) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw UsageError("benchmark: every --alpha value must lie in (0, 1)");
    }
  }
  std::vector<fs::path> spec_files;
  for (const auto& entry : fs::directory_iterator(args.spec_dir)) {
    if (entry.path().extension() == ".json") spec_files.push_back(entry.path());
  }
  std::sort(spec_files.begin(), spec_files.end());
  if (spec_files.empty()) throw UsageError("benchmark: no *.json specs in " + args.spec_dir);

  const ProfileSource source = profile_source_from_string(args.profile_source);
  std::vector<MetricRow> rows;
  for (const auto& path : spec_files) {
    const ScenarioSpec base = read_scenario(path.string());
    for (double pi : args.pis) {
      for (double alpha : args.alphas) {
        ScenarioSpec spec = base;
        spec.pi = pi;
        ExperimentConfig config;
        config.n_reps = args.reps;
        config.alpha = alpha;
        config.profile_source = source;
        config.base_seed = resolve_seed(args.seed, base.seed);
        config.permutations = args.k;
        config.train_length = args.train_length;
        config.workers = args.workers;
        config.c_eps_override = args.c_eps;
        std::cerr << "[benchmark] " << spec.name << " pi=" << pi << " alpha=" << alpha << " reps="
                  << args.reps << " ..." << std::flush;
        const auto started = std::chrono::steady_clock::now();
        try {
          rows.push_back(run_experiment(spec, config).row);
          const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;
          std::cerr << " done in " << took.count() << " s\n";
        } catch (const Error& e) {
          std::cerr << " failed: " << e.what() << '\n';
          MetricRow failed;
          failed.scenario = spec.name;
          failed.pi = pi;
          failed.alpha = alpha;
          failed.n_invalid = args.reps;
          failed.mean_delay = std::nan("");
          failed.delay_stderr = std::nan("");
          rows.push_back(failed);
        }
      }
    }
  }

  std::ofstream out(args.out_csv);
  if (!out) throw FormatError("cannot write '" + args.out_csv + "'");
  write_metric_csv(out, rows);
  std::ofstream json_out(args.out_csv + ".json");
  json_out << metric_table_json(rows).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online change-point detection for networks with missing edges"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a stream from a scenario spec");
  simulate->add_option("--spec", sim.spec_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_path, "Output stream file")->required();
  simulate->add_option("--seed", sim.seed, "Override the spec seed");
  simulate->add_flag("--full", sim.full, "Emit every entry, observed or not");

  CalibrateArgs cal;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit a profile on change-free training data");
  calibrate_cmd->add_option("--train", cal.train_path, "Training stream")->required()->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--out", cal.out_path, "Output profile JSON")->required();
  calibrate_cmd->add_option("--alpha", cal.alpha, "Target false-alarm level in (0, 1)");
  calibrate_cmd->add_option("--k", cal.k, "Number of permutations")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--seed", cal.seed, "Permutation seed");
  calibrate_cmd->add_option("--grid", cal.grid, "dyadic or full")->check(CLI::IsMember({"dyadic", "full"}));
  calibrate_cmd->add_option("--max-iters", cal.max_iters, "Solver iteration cap")->check(CLI::PositiveNumber);
  calibrate_cmd->add_option("--workers", cal.workers, "Threads for permutation replays (0: auto)");

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Monitor a stream with a calibrated profile");
  detect->add_option("--stream", det.stream_path, "Stream file")->required();
  detect->add_option("--profile", det.profile_path, "Profile JSON")->required()->check(CLI::ExistingFile);
  detect->add_flag("--follow", det.follow, "Poll the stream file for appended records");
  detect->add_option("--poll-ms", det.poll_ms, "Follow-mode poll interval")->check(CLI::PositiveNumber);
  detect->add_option("--idle-ms", det.idle_ms, "Follow mode stops after this long without new data");
  detect->add_option("--c-eps", det.c_eps, "Override the profile's C_eps")->check(CLI::PositiveNumber);
  detect->add_option("--c-lambda", det.c_lambda, "Override the profile's C_lambda")->check(CLI::PositiveNumber);
  detect->add_option("--grid", det.grid, "dyadic or full")->check(CLI::IsMember({"dyadic", "full"}));
  detect->add_option("--max-iters", det.max_iters, "Solver iteration cap")->check(CLI::PositiveNumber);
  detect->add_flag("--verbose", det.verbose, "Print one status line per t in batch mode");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Delay / false-alarm tables over repetitions");
  benchmark->add_option("--spec-dir", bench.spec_dir, "Directory of scenario JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  benchmark->add_option("--alpha", bench.alphas, "Comma-separated alpha values")->delimiter(',');
  benchmark->add_option("--pi", bench.pis, "Comma-separated observation probabilities")
      ->delimiter(',')
      ->required();
  benchmark->add_option("--reps", bench.reps, "Repetitions per setting")->check(CLI::PositiveNumber);
  benchmark->add_option("--out", bench.out_csv, "Output CSV (JSON written alongside)")->required();
  benchmark->add_option("--workers", bench.workers, "Threads across repetitions (0: auto)");
  benchmark->add_option("--seed", bench.seed, "Root seed (default: spec seed)");
  benchmark->add_option("--profile-source", bench.profile_source, "calibrate-per-run or shared-profile")
      ->check(CLI::IsMember({"calibrate-per-run", "shared-profile"}));
  benchmark->add_option("--k", bench.k, "Permutations per calibration")->check(CLI::PositiveNumber);
  benchmark->add_option("--train-length", bench.train_length, "Training snapshots")->check(CLI::PositiveNumber);
  benchmark->add_option("--c-eps", bench.c_eps, "Override fitted C_eps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*calibrate_cmd) return cmd_calibrate(cal);
    if (*detect) return cmd_detect(det);
    if (*benchmark) return cmd_benchmark(bench);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration failed: " << e.what() << '\n';
    return kExitCalibration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
