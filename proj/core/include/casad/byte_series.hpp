#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "casad/frame.hpp"

namespace casad {

/// Origin of one extracted byte: frame index in the source log and byte
/// offset within that frame's payload.
struct ByteOrigin {
  std::uint32_t frame = 0;
  std::uint8_t offset = 0;

  bool operator==(const ByteOrigin&) const = default;
};

/// The monitored signal: payload bytes concatenated in bus order.
struct ByteSeries {
  std::vector<std::uint8_t> values;
  std::vector<ByteOrigin> index_map;  // parallel to values

  std::size_t size() const { return values.size(); }
};

/// Flattens a frame stream into one byte series. Frames with empty
/// payloads contribute nothing. With a filter, only frames whose id is in
/// the set are used. Throws EmptyResult when nothing is extracted.
ByteSeries extract_byte_series(
    const FrameLog& log,
    const std::optional<std::set<std::uint32_t>>& id_filter = std::nullopt);

/// Timestamp of the frame a byte came from; byte_index is 0-based.
double byte_timestamp(const FrameLog& log, const ByteSeries& series,
                      std::size_t byte_index);

/// Converts labeled time intervals into half-open byte-index intervals
/// [first, last): a byte belongs to an interval when its frame timestamp
/// lies in [start_s, end_s). Empty conversions are dropped.
std::vector<std::pair<std::size_t, std::size_t>> annotation_byte_intervals(
    const FrameLog& log, const ByteSeries& series,
    const std::vector<Annotation>& annotations);

}  // namespace casad
