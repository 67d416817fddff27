#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "casad/frame.hpp"

namespace casad {

// --- payload generators -----------------------------------------------
// A message payload is a sequence of fields evaluated per transmission
// index k; field widths add up to the dlc. Replay payloads cycle through
// recorded rows instead.

struct ConstField {
  std::uint8_t value = 0;
  bool operator==(const ConstField&) const = default;
};

/// k mod 256.
struct CounterField {
  bool operator==(const CounterField&) const = default;
};

/// round(center + amplitude * sin(2*pi*k / period)) clamped to the byte
/// range; width 2 emits the 16-bit value big-endian.
struct SineField {
  double center = 0.0;
  double amplitude = 0.0;
  std::uint32_t period = 1;  // in transmissions
  std::uint8_t width = 1;    // 1 or 2 bytes
  bool operator==(const SineField&) const = default;
};

using PayloadField = std::variant<ConstField, CounterField, SineField>;

struct MessageSpec {
  std::uint32_t id = 0;
  bool extended = false;
  double period_ms = 0.0;
  std::uint8_t dlc = 8;
  std::vector<PayloadField> fields;          // empty when replaying
  std::vector<std::vector<std::uint8_t>> replay_rows;

  /// Payload of the k-th transmission (deterministic).
  std::vector<std::uint8_t> payload_at(std::uint64_t k) const;
  bool operator==(const MessageSpec&) const = default;
};

struct EcuSpec {
  std::string name;
  std::vector<MessageSpec> messages;
  bool operator==(const EcuSpec&) const = default;
};

// --- attacks ------------------------------------------------------------

enum class AttackKind { Suspension, Fabrication, Masquerade, Conquest };

const char* attack_kind_name(AttackKind kind);
std::optional<AttackKind> attack_kind_from_name(const std::string& name);

struct ByteMutation {
  enum class Rule { SetConst, AddDelta, PoolReplace };
  Rule rule = Rule::SetConst;
  std::uint8_t offset = 0;
  std::uint8_t value = 0;  // constant for SetConst, delta for AddDelta
  bool operator==(const ByteMutation&) const = default;
};

struct AttackSchedule {
  AttackKind kind = AttackKind::Suspension;
  std::string target_ecu;            // owner of target_id when empty
  std::uint32_t target_id = 0;       // unused for suspension
  double start_s = 0.0;
  std::optional<double> duration_s;  // open-ended when absent
  std::string injector_ecu;          // fabrication / masquerade
  double rate_multiplier = 1.0;      // fabrication, >= 1
  std::vector<ByteMutation> mutations;
  bool constrained_to_observed_range = true;  // conquest PoolReplace pools
  bool operator==(const AttackSchedule&) const = default;
};

struct BusSchedule {
  std::vector<EcuSpec> ecus;
  std::int64_t bitrate = 500000;
  double sim_duration_s = 60.0;
  std::uint64_t rng_seed = 1;
  std::vector<AttackSchedule> attacks;

  /// Checks schedule invariants (unique names/ids, windows inside the
  /// run, mutation offsets within dlc, ...). Throws InvalidSchedule /
  /// UnknownEcu / OffsetOutOfRange.
  void validate() const;
  const EcuSpec* find_ecu(const std::string& name) const;
  const MessageSpec* find_message(std::uint32_t id,
                                  const EcuSpec** owner = nullptr) const;
  bool operator==(const BusSchedule&) const = default;
};

/// The three-ECU reference bus: A sends 0x1C every 30 ms, B sends 0x01
/// every 15 ms and 0x05 every 25 ms, C only listens; 500 kbps, 60 s,
/// seed 1. Payloads are synthetic quantized signals chosen so the
/// attack-free byte stream repeats exactly every 9.6 s.
BusSchedule default_prototype();

/// Runs the schedule: periodic releases, lowest-id-first arbitration when
/// frames are pending together (the loser waits out the winner's wire
/// time of 47 + 8*dlc bits), attacks applied to the release stream.
/// Deterministic: identical schedules (seed included) give byte-identical
/// logs. Annotations carry one labeled interval per attack.
FrameLog run_simulation(const BusSchedule& schedule);

}  // namespace casad
