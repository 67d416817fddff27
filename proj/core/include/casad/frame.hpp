#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace casad {

constexpr std::uint32_t kMaxStandardId = 0x7FF;
constexpr std::uint32_t kMaxExtendedId = 0x1FFFFFFF;
constexpr std::size_t kMaxPayloadBytes = 8;

/// One bus frame. Timestamps are seconds with microsecond resolution.
struct CanFrame {
  double timestamp = 0.0;
  std::uint32_t id = 0;
  bool extended = false;  // 29-bit identifier when set, else 11-bit
  std::vector<std::uint8_t> payload;
  std::string channel = "can0";

  bool operator==(const CanFrame&) const = default;
};

/// Validates id range against the format flag and payload length <= 8.
void validate_frame(const CanFrame& frame);

/// Labeled time interval, typically one attack window.
struct Annotation {
  std::string label;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const Annotation&) const = default;
};

/// Frame stream ordered by non-decreasing timestamp plus ground-truth
/// metadata. `senders` is a per-frame ECU label filled in by the simulator
/// (empty for parsed logs); it never appears in candump output.
struct FrameLog {
  std::vector<CanFrame> frames;
  std::string source;
  std::vector<Annotation> annotations;
  std::vector<std::string> senders;

  void validate() const;  // ordering + annotation bounds
};

/// Decodes one candump text line: `(<ts>) <channel> <ID>#<HEXBYTES>`,
/// ID being 3 (standard) or 8 (extended) uppercase hex digits.
/// Throws MalformedLine / PayloadTooLong / BadId.
CanFrame parse_log_line(const std::string& line);

/// Inverse of parse_log_line: timestamp with 6 decimals, uppercase hex.
/// Round-trips bit-exactly for microsecond-resolution timestamps.
std::string serialize_frame(const CanFrame& frame);

struct ReadOptions {
  bool skip_bad_lines = false;
};

/// Reads a log file, auto-detecting candump text or the CSV variant
/// `timestamp,id,hexdata` per line. Errors carry 1-based line numbers;
/// with skip_bad_lines the offending lines are reported into `skipped`
/// (if given) and dropped instead.
FrameLog read_log(const std::string& path, const ReadOptions& opts = {},
                  std::vector<std::string>* skipped = nullptr);
FrameLog read_log(std::istream& in, const std::string& source_label,
                  const ReadOptions& opts = {},
                  std::vector<std::string>* skipped = nullptr);

void write_candump(const FrameLog& log, const std::string& path);
void write_candump(const FrameLog& log, std::ostream& out);

/// Annotation sidecar CSV: header `label,start_ts,end_ts`, one row per
/// labeled interval.
void write_annotations(const std::vector<Annotation>& annotations,
                       const std::string& path);
std::vector<Annotation> read_annotations(const std::string& path);

}  // namespace casad
