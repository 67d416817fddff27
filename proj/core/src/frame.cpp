#include "casad/frame.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "casad/errors.hpp"

namespace casad {

namespace {

bool is_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F') ||
         (c >= 'a' && c <= 'f');
}

bool is_upper_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F');
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return c - 'a' + 10;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

[[noreturn]] void malformed(const std::string& field, const std::string& line) {
  throw MalformedLine("malformed " + field + " in log line: '" + line + "'");
}

double parse_timestamp_token(const std::string& token, const std::string& line) {
  if (token.empty()) malformed("timestamp", line);
  char* end = nullptr;
  const double ts = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || !std::isfinite(ts) || ts < 0.0) {
    malformed("timestamp", line);
  }
  return ts;
}

std::vector<std::uint8_t> parse_hex_payload(const std::string& hex,
                                            const std::string& line) {
  if (hex.size() > 2 * kMaxPayloadBytes) {
    throw PayloadTooLong("payload of " + std::to_string(hex.size()) +
                         " hex digits exceeds 16 in log line: '" + line + "'");
  }
  if (hex.size() % 2 != 0) malformed("payload (odd hex count)", line);
  std::vector<std::uint8_t> payload;
  payload.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    if (!is_hex_digit(hex[i]) || !is_hex_digit(hex[i + 1])) {
      malformed("payload (non-hex digit)", line);
    }
    payload.push_back(
        static_cast<std::uint8_t>(hex_value(hex[i]) * 16 + hex_value(hex[i + 1])));
  }
  return payload;
}

CanFrame parse_csv_line(const std::string& line) {
  // timestamp,id,hexdata — normalized onto the candump model.
  std::string ts_tok, id_tok, hex_tok;
  std::istringstream ss(line);
  if (!std::getline(ss, ts_tok, ',') || !std::getline(ss, id_tok, ',')) {
    malformed("csv record", line);
  }
  std::getline(ss, hex_tok, ',');  // may be empty (dlc 0)
  std::string rest;
  if (std::getline(ss, rest, ',')) malformed("csv record (extra field)", line);

  CanFrame frame;
  frame.timestamp = parse_timestamp_token(ts_tok, line);
  if (id_tok.rfind("0x", 0) == 0 || id_tok.rfind("0X", 0) == 0) {
    id_tok = id_tok.substr(2);
  }
  if (id_tok.empty() || id_tok.size() > 8) malformed("id", line);
  std::uint32_t id = 0;
  for (char c : id_tok) {
    if (!is_hex_digit(c)) malformed("id", line);
    id = id * 16 + static_cast<std::uint32_t>(hex_value(c));
  }
  frame.id = id;
  frame.extended = id > kMaxStandardId;
  if (id > kMaxExtendedId) {
    throw BadId("id 0x" + id_tok + " out of range in log line: '" + line + "'");
  }
  frame.payload = parse_hex_payload(hex_tok, line);
  return frame;
}

}  // namespace

void validate_frame(const CanFrame& frame) {
  const std::uint32_t max_id = frame.extended ? kMaxExtendedId : kMaxStandardId;
  if (frame.id > max_id) {
    throw BadId("frame id 0x" + std::to_string(frame.id) +
                " exceeds the range of its format");
  }
  if (frame.payload.size() > kMaxPayloadBytes) {
    throw PayloadTooLong("payload of " + std::to_string(frame.payload.size()) +
                         " bytes exceeds 8");
  }
  if (!(frame.timestamp >= 0.0)) {
    throw MalformedLine("negative frame timestamp");
  }
}

void FrameLog::validate() const {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].timestamp < frames[i - 1].timestamp) {
      throw MalformedLine("frame timestamps decrease at record " +
                          std::to_string(i + 1));
    }
  }
  if (!senders.empty() && senders.size() != frames.size()) {
    throw MalformedLine("sender metadata does not match frame count");
  }
  if (!annotations.empty() && !frames.empty()) {
    const double first = frames.front().timestamp;
    const double last = frames.back().timestamp;
    for (const auto& a : annotations) {
      if (a.end_s < a.start_s || a.start_s < first || a.end_s > last + 1e-9) {
        throw MalformedLine("annotation '" + a.label +
                            "' lies outside the logged time span");
      }
    }
  }
}

CanFrame parse_log_line(const std::string& raw) {
  const std::string line = strip_cr(raw);
  // (<ts>) <channel> <ID>#<HEXBYTES>
  if (line.empty() || line.front() != '(') malformed("timestamp", line);
  const std::size_t close = line.find(')');
  if (close == std::string::npos) malformed("timestamp", line);

  CanFrame frame;
  frame.timestamp = parse_timestamp_token(line.substr(1, close - 1), line);

  std::size_t pos = close + 1;
  if (pos >= line.size() || line[pos] != ' ') malformed("channel", line);
  ++pos;
  const std::size_t chan_end = line.find(' ', pos);
  if (chan_end == std::string::npos || chan_end == pos) {
    malformed("channel", line);
  }
  frame.channel = line.substr(pos, chan_end - pos);

  pos = chan_end + 1;
  const std::size_t hash = line.find('#', pos);
  if (hash == std::string::npos) malformed("frame body (missing '#')", line);
  const std::string id_tok = line.substr(pos, hash - pos);
  if (id_tok.size() != 3 && id_tok.size() != 8) malformed("id", line);
  std::uint32_t id = 0;
  for (char c : id_tok) {
    if (!is_upper_hex_digit(c)) malformed("id", line);
    id = id * 16 + static_cast<std::uint32_t>(hex_value(c));
  }
  frame.id = id;
  frame.extended = id_tok.size() == 8;
  const std::uint32_t max_id = frame.extended ? kMaxExtendedId : kMaxStandardId;
  if (id > max_id) {
    throw BadId("id " + id_tok + " out of range in log line: '" + line + "'");
  }

  frame.payload = parse_hex_payload(line.substr(hash + 1), line);
  return frame;
}

std::string serialize_frame(const CanFrame& frame) {
  validate_frame(frame);
  char head[64];
  std::snprintf(head, sizeof(head), "(%.6f) ", frame.timestamp);
  std::string out = head;
  out += frame.channel;
  out += ' ';
  char idbuf[16];
  if (frame.extended) {
    std::snprintf(idbuf, sizeof(idbuf), "%08X", frame.id);
  } else {
    std::snprintf(idbuf, sizeof(idbuf), "%03X", frame.id);
  }
  out += idbuf;
  out += '#';
  static const char* kHex = "0123456789ABCDEF";
  for (std::uint8_t b : frame.payload) {
    out += kHex[b >> 4];
    out += kHex[b & 0xF];
  }
  return out;
}

FrameLog read_log(std::istream& in, const std::string& source_label,
                  const ReadOptions& opts, std::vector<std::string>* skipped) {
  FrameLog log;
  log.source = source_label;
  std::string line;
  std::size_t line_no = 0;
  bool format_known = false;
  bool csv = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip_cr(line);
    if (stripped.empty()) continue;
    if (!format_known) {
      csv = stripped.front() != '(';
      format_known = true;
      if (csv && stripped.rfind("timestamp,", 0) == 0) continue;  // header
    }
    try {
      log.frames.push_back(csv ? parse_csv_line(stripped)
                               : parse_log_line(stripped));
    } catch (const Error& e) {
      const std::string msg =
          source_label + ":" + std::to_string(line_no) + ": " + e.what();
      if (!opts.skip_bad_lines) throw MalformedLine(msg);
      if (skipped) skipped->push_back(msg);
    }
  }
  log.validate();
  return log;
}

FrameLog read_log(const std::string& path, const ReadOptions& opts,
                  std::vector<std::string>* skipped) {
  std::ifstream in(path);
  if (!in) throw EmptyResult("cannot open log file: " + path);
  return read_log(in, path, opts, skipped);
}

void write_candump(const FrameLog& log, std::ostream& out) {
  for (const auto& frame : log.frames) {
    out << serialize_frame(frame) << '\n';
  }
}

void write_candump(const FrameLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EmptyResult("cannot open output file: " + path);
  write_candump(log, out);
}

void write_annotations(const std::vector<Annotation>& annotations,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EmptyResult("cannot open output file: " + path);
  out << "label,start_ts,end_ts\n";
  char buf[64];
  for (const auto& a : annotations) {
    std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", a.start_s, a.end_s);
    out << a.label << buf;
  }
}

std::vector<Annotation> read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmptyResult("cannot open annotation file: " + path);
  std::vector<Annotation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = strip_cr(line);
    if (stripped.empty()) continue;
    if (line_no == 1 && stripped.rfind("label,", 0) == 0) continue;
    std::istringstream ss(stripped);
    Annotation a;
    std::string start_tok, end_tok;
    if (!std::getline(ss, a.label, ',') || !std::getline(ss, start_tok, ',') ||
        !std::getline(ss, end_tok, ',')) {
      throw MalformedLine(path + ":" + std::to_string(line_no) +
                          ": malformed annotation row");
    }
    a.start_s = parse_timestamp_token(start_tok, stripped);
    a.end_s = parse_timestamp_token(end_tok, stripped);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace casad
