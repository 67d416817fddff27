#include "casad/byte_series.hpp"

#include <algorithm>

#include "casad/errors.hpp"

namespace casad {

ByteSeries extract_byte_series(
    const FrameLog& log,
    const std::optional<std::set<std::uint32_t>>& id_filter) {
  if (id_filter && id_filter->empty()) {
    throw InvalidConfig("id filter must be non-empty when given");
  }
  ByteSeries series;
  bool any_frame_passed = false;
  for (std::size_t f = 0; f < log.frames.size(); ++f) {
    const CanFrame& frame = log.frames[f];
    if (id_filter && id_filter->count(frame.id) == 0) continue;
    any_frame_passed = true;
    for (std::size_t o = 0; o < frame.payload.size(); ++o) {
      series.values.push_back(frame.payload[o]);
      series.index_map.push_back(
          {static_cast<std::uint32_t>(f), static_cast<std::uint8_t>(o)});
    }
  }
  if (!any_frame_passed) {
    throw EmptyResult(id_filter ? "no frame matches the id filter"
                                : "log contains no frames");
  }
  if (series.values.empty()) {
    throw EmptyResult("matching frames carry no payload bytes");
  }
  return series;
}

double byte_timestamp(const FrameLog& log, const ByteSeries& series,
                      std::size_t byte_index) {
  return log.frames[series.index_map[byte_index].frame].timestamp;
}

std::vector<std::pair<std::size_t, std::size_t>> annotation_byte_intervals(
    const FrameLog& log, const ByteSeries& series,
    const std::vector<Annotation>& annotations) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : annotations) {
    // Bytes belong when their frame timestamp falls in [start, end).
    const std::size_t n = series.size();
    std::size_t first = n, last = n;
    for (std::size_t i = 0; i < n; ++i) {
      const double ts = byte_timestamp(log, series, i);
      if (ts >= a.start_s) {
        first = i;
        break;
      }
    }
    if (first == n) continue;
    last = first;
    for (std::size_t i = first; i < n; ++i) {
      const double ts = byte_timestamp(log, series, i);
      if (ts < a.end_s) {
        last = i + 1;
      } else {
        break;
      }
    }
    if (last > first) out.emplace_back(first, last);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace casad
