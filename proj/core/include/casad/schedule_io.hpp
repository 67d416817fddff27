#pragma once

#include <iosfwd>
#include <string>

#include "casad/simulator.hpp"

namespace casad {

/// Plain-text schedule grammar, versioned by the first line:
///
///   casad-schedule v1
///
///   [bus]
///   bitrate = 500000
///   duration_s = 60
///   seed = 1
///
///   [ecu]
///   name = A
///
///   [message]
///   ecu = A
///   id = 0x1C
///   period_ms = 30
///   payload = const:1C sine16:c=2400,a=1800,p=64 const:7F
///
///   [attack]
///   kind = conquest
///   target_id = 0x05
///   start_s = 20
///   duration_s = 20
///   mutate = pool:6 pool:7
///   constrained = true
///
/// Payload fields: const:HH | counter | sine8:c=..,a=..,p=.. |
/// sine16:c=..,a=..,p=.. | replay:<path> (whole payload, file of hex
/// rows). Mutations: set:OFF=HH | add:OFF=D | pool:OFF. Blank lines and
/// `#` comments are ignored. Parse errors carry 1-based line numbers.
BusSchedule parse_schedule(std::istream& in);
BusSchedule parse_schedule_file(const std::string& path);

std::string serialize_schedule(const BusSchedule& schedule);

/// Parses a space-separated mutation list (`set:OFF=HH add:OFF=D
/// pool:OFF`), the same syntax the schedule's `mutate =` key uses.
std::vector<ByteMutation> parse_mutation_list(const std::string& text);

}  // namespace casad
