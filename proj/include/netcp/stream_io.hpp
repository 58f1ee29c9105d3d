#pragma once

// Text stream format:
//
//   netcp-stream v1 n=<n> t_max=<T> self_loops=<0|1>
//   t,i,j,y,omega
//   ...
//
// One record per observed (or, in full emission, every) entry with 1-based
// indices and i <= j, sorted by (t, i, j). Omitted entries are unobserved.
// t_max=0 marks an open-ended stream (follow mode).

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcp/completion.hpp"
#include "netcp/simulation.hpp"

namespace netcp {

struct StreamHeader {
  int n = 0;
  int t_max = 0;
  bool self_loops = true;

  bool operator==(const StreamHeader&) const = default;
};

std::string format_header(const StreamHeader& header);
StreamHeader parse_header(std::string_view line);

enum class EmitMode { observed, full };

void write_stream(std::ostream& out, const StreamHeader& header,
                  const std::vector<MaskedSnapshot>& snapshots, EmitMode mode = EmitMode::observed);

struct StreamData {
  StreamHeader header;
  std::vector<MaskedSnapshot> snapshots;
};

/// Incremental record parser. Snapshot t is complete once a record with a
/// later t arrives, or when finish() is called.
class StreamParser {
 public:
  explicit StreamParser(StreamHeader header);

  /// Parses one record line; returns the snapshots completed by it.
  std::vector<MaskedSnapshot> push(std::string_view line);
  /// Flushes everything up to t_max (or the last seen t when open-ended).
  std::vector<MaskedSnapshot> finish();

  const StreamHeader& header() const { return header_; }
  int line_number() const { return line_; }

 private:
  std::vector<MaskedSnapshot> complete_until(int t);
  MaskedSnapshot empty_snapshot(int t) const;

  StreamHeader header_;
  int line_ = 1;
  int emitted_ = 0;  // last t handed out
  std::optional<MaskedSnapshot> current_;
  int last_i_ = 0;
  int last_j_ = 0;
};

StreamData read_stream(std::istream& in);
StreamData read_stream_file(const std::string& path);
void write_stream_file(const std::string& path, const StreamHeader& header,
                       const std::vector<MaskedSnapshot>& snapshots,
                       EmitMode mode = EmitMode::observed);

nlohmann::json truth_to_json(const StreamTruth& truth);
StreamTruth truth_from_json(const nlohmann::json& j);
std::string truth_sidecar_path(const std::string& stream_path);
void write_truth_file(const std::string& path, const StreamTruth& truth);
std::optional<StreamTruth> read_truth_file(const std::string& path);

}  // namespace netcp
