#include "netcp/stream_io.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "netcp/error.hpp"

namespace netcp {

namespace {

constexpr std::string_view kMagic = "netcp-stream v1";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

int parse_int(std::string_view text, std::string_view what, int line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("line " + std::to_string(line) + ": bad " + std::string(what) + " '" +
                      std::string(text) + "'");
  }
  return value;
}

int header_field(std::string_view line, std::string_view key) {
  const std::string needle = " " + std::string(key) + "=";
  const auto pos = line.find(needle);
  if (pos == std::string_view::npos) {
    throw FormatError("stream header: missing " + std::string(key));
  }
  auto rest = line.substr(pos + needle.size());
  rest = rest.substr(0, rest.find(' '));
  return parse_int(rest, key, 1);
}

Matrix matrix_from_rows(const nlohmann::json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw FormatError("truth: graphon must be square");
    for (std::size_t k = 0; k < rows.size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
  }
  return m;
}

nlohmann::json rows_from_matrix(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(i, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_header(const StreamHeader& header) {
  return std::string(kMagic) + " n=" + std::to_string(header.n) +
         " t_max=" + std::to_string(header.t_max) +
         " self_loops=" + (header.self_loops ? "1" : "0");
}

StreamHeader parse_header(std::string_view line) {
  line = trim(line);
  if (line.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("stream header: expected '" + std::string(kMagic) + " ...'");
  }
  StreamHeader h;
  h.n = header_field(line, "n");
  h.t_max = header_field(line, "t_max");
  const int loops = header_field(line, "self_loops");
  if (h.n < 1) throw FormatError("stream header: n must be >= 1");
  if (h.t_max < 0) throw FormatError("stream header: t_max must be >= 0");
  if (loops != 0 && loops != 1) throw FormatError("stream header: self_loops must be 0 or 1");
  h.self_loops = loops == 1;
  return h;
}

void write_stream(std::ostream& out, const StreamHeader& header,
                  const std::vector<MaskedSnapshot>& snapshots, EmitMode mode) {
  out << format_header(header) << '\n';
  std::string line;
  for (const auto& snap : snapshots) {
    if (snap.size() != header.n) throw DimensionError("write_stream: snapshot size mismatch");
    // i outer, j inner: records come out sorted by (i, j).
    for (int i = 0; i < header.n; ++i) {
      for (int j = i; j < header.n; ++j) {
        const bool seen = snap.omega(i, j);
        if (!seen && mode == EmitMode::observed) continue;
        line.clear();
        line += std::to_string(snap.t);
        line += ',';
        line += std::to_string(i + 1);
        line += ',';
        line += std::to_string(j + 1);
        line += snap.y(i, j) != 0.0 ? ",1," : ",0,";
        line += seen ? '1' : '0';
        line += '\n';
        out << line;
      }
    }
  }
}

StreamParser::StreamParser(StreamHeader header) : header_(header) {}

MaskedSnapshot StreamParser::empty_snapshot(int t) const {
  return MaskedSnapshot{t, Matrix::Zero(header_.n, header_.n), Mask(header_.n)};
}

std::vector<MaskedSnapshot> StreamParser::complete_until(int t) {
  std::vector<MaskedSnapshot> done;
  while (emitted_ < t) {
    const int next = emitted_ + 1;
    if (current_ && current_->t == next) {
      done.push_back(std::move(*current_));
      current_.reset();
    } else {
      done.push_back(empty_snapshot(next));
    }
    ++emitted_;
  }
  return done;
}

std::vector<MaskedSnapshot> StreamParser::push(std::string_view line) {
  ++line_;
  line = trim(line);
  if (line.empty()) return {};

  std::array<int, 5> f{};
  std::size_t start = 0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto comma = line.find(',', start);
    const bool last = k + 1 == f.size();
    if (last != (comma == std::string_view::npos)) {
      throw FormatError("line " + std::to_string(line_) + ": expected 5 comma-separated fields");
    }
    f[k] = parse_int(line.substr(start, last ? std::string_view::npos : comma - start), "field",
                     line_);
    start = comma + 1;
  }
  const auto [t, i, j, y, omega] = f;
  const auto fail = [&](const std::string& why) {
    throw FormatError("line " + std::to_string(line_) + ": " + why);
  };
  if (t < 1 || (header_.t_max > 0 && t > header_.t_max)) fail("t out of range");
  if (i < 1 || j < i || j > header_.n) fail("need 1 <= i <= j <= n");
  if ((y != 0 && y != 1) || (omega != 0 && omega != 1)) fail("y and omega must be 0 or 1");
  if (omega == 0 && y != 0) fail("y must be 0 where omega is 0");
  if (i == j && omega == 1 && !header_.self_loops) fail("diagonal observed but self_loops=0");

  const int current_t = current_ ? current_->t : emitted_;
  if (t < current_t || (t == current_t && (i < last_i_ || (i == last_i_ && j <= last_j_))) ||
      t <= emitted_) {
    fail("records must be strictly sorted by (t, i, j)");
  }

  std::vector<MaskedSnapshot> done;
  if (!current_ || current_->t != t) {
    done = complete_until(t - 1);
    current_ = empty_snapshot(t);
  }
  last_i_ = i;
  last_j_ = j;
  if (omega == 1) {
    current_->omega.set(i - 1, j - 1, true);
    current_->y(i - 1, j - 1) = y;
    current_->y(j - 1, i - 1) = y;
  }
  return done;
}

std::vector<MaskedSnapshot> StreamParser::finish() {
  const int through = header_.t_max > 0 ? header_.t_max : (current_ ? current_->t : emitted_);
  return complete_until(through);
}

StreamData read_stream(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty stream");
  StreamData data;
  data.header = parse_header(line);
  StreamParser parser(data.header);
  while (std::getline(in, line)) {
    for (auto& snap : parser.push(line)) data.snapshots.push_back(std::move(snap));
  }
  for (auto& snap : parser.finish()) data.snapshots.push_back(std::move(snap));
  return data;
}

StreamData read_stream_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open stream '" + path + "'");
  return read_stream(in);
}

void write_stream_file(const std::string& path, const StreamHeader& header,
                       const std::vector<MaskedSnapshot>& snapshots, EmitMode mode) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write stream '" + path + "'");
  write_stream(out, header, snapshots, mode);
  if (!out) throw FormatError("write failed for '" + path + "'");
}

nlohmann::json truth_to_json(const StreamTruth& truth) {
  nlohmann::json j{{"delta", nullptr},
                   {"kappa", truth.kappa},
                   {"graphon_pre", rows_from_matrix(truth.graphon_pre)},
                   {"graphon_post", rows_from_matrix(truth.graphon_post)}};
  if (truth.delta) j["delta"] = *truth.delta;
  return j;
}

StreamTruth truth_from_json(const nlohmann::json& j) {
  try {
    StreamTruth truth;
    if (!j.at("delta").is_null()) truth.delta = j.at("delta").get<int>();
    truth.kappa = j.at("kappa").get<double>();
    truth.graphon_pre = matrix_from_rows(j.at("graphon_pre"));
    truth.graphon_post = matrix_from_rows(j.at("graphon_post"));
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("truth document: ") + e.what());
  }
}

std::string truth_sidecar_path(const std::string& stream_path) {
  return stream_path + ".truth.json";
}

void write_truth_file(const std::string& path, const StreamTruth& truth) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write truth sidecar '" + path + "'");
  out << truth_to_json(truth).dump() << '\n';
}

std::optional<StreamTruth> read_truth_file(const std::string& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("truth sidecar '" + path + "': " + e.what());
  }
  return truth_from_json(j);
}

}  // namespace netcp
