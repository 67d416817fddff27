#include "casad/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "casad/errors.hpp"

namespace casad {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::size_t field_width(const PayloadField& field) {
  if (std::holds_alternative<SineField>(field)) {
    return std::get<SineField>(field).width;
  }
  return 1;
}

std::int64_t to_us(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1e6));
}

std::int64_t period_us_of(const MessageSpec& msg) {
  return static_cast<std::int64_t>(std::llround(msg.period_ms * 1000.0));
}

}  // namespace

std::vector<std::uint8_t> MessageSpec::payload_at(std::uint64_t k) const {
  std::vector<std::uint8_t> out;
  out.reserve(dlc);
  if (!replay_rows.empty()) {
    return replay_rows[k % replay_rows.size()];
  }
  for (const auto& field : fields) {
    if (const auto* c = std::get_if<ConstField>(&field)) {
      out.push_back(c->value);
    } else if (std::holds_alternative<CounterField>(field)) {
      out.push_back(static_cast<std::uint8_t>(k & 0xFF));
    } else {
      const auto& sine = std::get<SineField>(field);
      const double phase =
          kTwoPi * static_cast<double>(k % sine.period) / sine.period;
      const double raw = sine.center + sine.amplitude * std::sin(phase);
      if (sine.width == 1) {
        const long v = std::lround(std::clamp(raw, 0.0, 255.0));
        out.push_back(static_cast<std::uint8_t>(v));
      } else {
        const long v = std::lround(std::clamp(raw, 0.0, 65535.0));
        out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
      }
    }
  }
  return out;
}

const char* attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::Suspension: return "suspension";
    case AttackKind::Fabrication: return "fabrication";
    case AttackKind::Masquerade: return "masquerade";
    case AttackKind::Conquest: return "conquest";
  }
  return "unknown";
}

std::optional<AttackKind> attack_kind_from_name(const std::string& name) {
  if (name == "suspension") return AttackKind::Suspension;
  if (name == "fabrication") return AttackKind::Fabrication;
  if (name == "masquerade") return AttackKind::Masquerade;
  if (name == "conquest") return AttackKind::Conquest;
  return std::nullopt;
}

const EcuSpec* BusSchedule::find_ecu(const std::string& name) const {
  for (const auto& ecu : ecus) {
    if (ecu.name == name) return &ecu;
  }
  return nullptr;
}

const MessageSpec* BusSchedule::find_message(std::uint32_t id,
                                             const EcuSpec** owner) const {
  for (const auto& ecu : ecus) {
    for (const auto& msg : ecu.messages) {
      if (msg.id == id) {
        if (owner) *owner = &ecu;
        return &msg;
      }
    }
  }
  return nullptr;
}

void BusSchedule::validate() const {
  if (bitrate <= 0) throw InvalidSchedule("bitrate must be positive");
  if (!(sim_duration_s > 0.0)) {
    throw InvalidSchedule("simulation duration must be positive");
  }

  std::set<std::string> names;
  std::set<std::uint32_t> ids;
  for (const auto& ecu : ecus) {
    if (ecu.name.empty()) throw InvalidSchedule("ECU with empty name");
    if (!names.insert(ecu.name).second) {
      throw InvalidSchedule("duplicate ECU name: " + ecu.name);
    }
    for (const auto& msg : ecu.messages) {
      if (!ids.insert(msg.id).second) {
        throw InvalidSchedule("message id owned by two ECUs: 0x" +
                              std::to_string(msg.id));
      }
      if (!(msg.period_ms > 0.0) || period_us_of(msg) < 1) {
        throw InvalidSchedule("message period must be at least 1 microsecond");
      }
      if (msg.dlc < 1 || msg.dlc > 8) {
        throw InvalidSchedule("dlc must lie in [1, 8]");
      }
      const std::uint32_t max_id = msg.extended ? kMaxExtendedId : kMaxStandardId;
      if (msg.id > max_id) throw InvalidSchedule("message id out of range");
      if (!msg.replay_rows.empty()) {
        for (const auto& row : msg.replay_rows) {
          if (row.size() != msg.dlc) {
            throw InvalidSchedule("replay row width does not match dlc");
          }
        }
      } else {
        std::size_t width = 0;
        for (const auto& field : msg.fields) {
          if (const auto* sine = std::get_if<SineField>(&field)) {
            if (sine->period < 1 || (sine->width != 1 && sine->width != 2)) {
              throw InvalidSchedule("invalid sine field parameters");
            }
          }
          width += field_width(field);
        }
        if (width != msg.dlc) {
          throw InvalidSchedule("payload fields cover " + std::to_string(width) +
                                " bytes but dlc is " + std::to_string(msg.dlc));
        }
      }
    }
  }

  for (const auto& attack : attacks) {
    if (attack.start_s < 0.0 || attack.start_s >= sim_duration_s) {
      throw InvalidSchedule("attack start outside the simulation window");
    }
    if (attack.duration_s && *attack.duration_s <= 0.0) {
      throw InvalidSchedule("attack duration must be positive");
    }

    const EcuSpec* target_ecu = nullptr;
    const MessageSpec* target_msg = nullptr;
    if (attack.kind != AttackKind::Suspension || attack.target_ecu.empty()) {
      target_msg = find_message(attack.target_id, &target_ecu);
    }
    if (!attack.target_ecu.empty()) {
      const EcuSpec* named = find_ecu(attack.target_ecu);
      if (!named) throw UnknownEcu("unknown target ECU: " + attack.target_ecu);
      target_ecu = named;
    }
    if (attack.kind == AttackKind::Suspension) {
      if (!target_ecu) {
        throw UnknownEcu("suspension attack needs a resolvable target ECU");
      }
      continue;
    }
    if (!target_msg) {
      throw InvalidSchedule("attack targets unknown message id");
    }
    for (const auto& m : attack.mutations) {
      if (m.offset >= target_msg->dlc) {
        throw OffsetOutOfRange("mutation offset " + std::to_string(m.offset) +
                               " outside dlc " + std::to_string(target_msg->dlc));
      }
    }
    if (attack.kind == AttackKind::Fabrication ||
        attack.kind == AttackKind::Masquerade) {
      const EcuSpec* injector = find_ecu(attack.injector_ecu);
      if (!injector) {
        throw UnknownEcu("unknown injector ECU: " + attack.injector_ecu);
      }
      if (target_ecu && injector->name == target_ecu->name) {
        throw InvalidSchedule("injector must differ from the target ECU");
      }
      if (attack.kind == AttackKind::Fabrication && attack.rate_multiplier < 1.0) {
        throw InvalidSchedule("fabrication rate multiplier must be >= 1");
      }
    }
  }
}

BusSchedule default_prototype() {
  // Payloads are mostly static status bytes (the common case on real
  // buses) plus quantized signals: two slow low-amplitude ones and, on
  // 0x05, a phase-locked fast pair occupying the last two bytes — the
  // sensor signal the reference attacks target. Signal cycles (1920 ms,
  // 400 ms) and the 150 ms bus pattern share a 9.6 s common period, so
  // an attack-free training prefix of 10+ s sees every normal window.
  BusSchedule s;
  s.bitrate = 500000;
  s.sim_duration_s = 60.0;
  s.rng_seed = 1;

  EcuSpec a{"A", {}};
  MessageSpec m1c;
  m1c.id = 0x1C;
  m1c.period_ms = 30.0;
  m1c.dlc = 8;
  m1c.fields = {
      ConstField{0x1C},
      ConstField{0xA0},
      SineField{128.0, 8.0, 64, 1},
      ConstField{0x00},
      ConstField{0x7F},
      ConstField{0x40},
      ConstField{0x55},
      ConstField{0x03},
  };
  a.messages.push_back(std::move(m1c));

  EcuSpec b{"B", {}};
  MessageSpec m01;
  m01.id = 0x01;
  m01.period_ms = 15.0;
  m01.dlc = 8;
  m01.fields = {
      ConstField{0xFE},
      SineField{64.0, 6.0, 128, 1},
      ConstField{0x10},
      ConstField{0x88},
      ConstField{0x00},
      ConstField{0xD2},
      ConstField{0x31},
      ConstField{0xC8},
  };
  b.messages.push_back(std::move(m01));
  MessageSpec m05;
  m05.id = 0x05;
  m05.period_ms = 25.0;
  m05.dlc = 8;
  m05.fields = {
      ConstField{0x05},
      ConstField{0x20},
      ConstField{0x5A},
      ConstField{0x33},
      ConstField{0x0A},
      ConstField{0x66},
      SineField{110.0, 110.0, 16, 1},
      SineField{140.0, 100.0, 16, 1},
  };
  b.messages.push_back(std::move(m05));

  EcuSpec c{"C", {}};  // listen-only capture node

  s.ecus = {std::move(a), std::move(b), std::move(c)};
  return s;
}

namespace {

struct Release {
  std::int64_t t_us = 0;
  std::uint32_t id = 0;
  bool extended = false;
  std::uint64_t k = 0;  // transmission index on the owning message
  std::vector<std::uint8_t> payload;
  std::string sender;
  std::uint32_t seq = 0;
  bool dropped = false;
};

struct AttackWindow {
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  bool contains(std::int64_t t) const { return t >= start_us && t < end_us; }
};

AttackWindow window_of(const AttackSchedule& attack, std::int64_t duration_us) {
  AttackWindow w;
  w.start_us = to_us(attack.start_s);
  w.end_us = attack.duration_s
                 ? std::min(duration_us, w.start_us + to_us(*attack.duration_s))
                 : duration_us;
  return w;
}

/// Applies set/add mutations directly; pool mutations draw from `pools`
/// (one value list per mutation, parallel order) via the simulation RNG.
void apply_mutations(std::vector<std::uint8_t>& payload,
                     const std::vector<ByteMutation>& mutations,
                     const std::vector<std::vector<std::uint8_t>>& pools,
                     std::mt19937_64& rng) {
  for (std::size_t i = 0; i < mutations.size(); ++i) {
    const auto& m = mutations[i];
    switch (m.rule) {
      case ByteMutation::Rule::SetConst:
        payload[m.offset] = m.value;
        break;
      case ByteMutation::Rule::AddDelta:
        payload[m.offset] =
            static_cast<std::uint8_t>((payload[m.offset] + m.value) & 0xFF);
        break;
      case ByteMutation::Rule::PoolReplace: {
        const auto& pool = pools[i];
        payload[m.offset] = pool[rng() % pool.size()];
        break;
      }
    }
  }
}

/// Observed-value pools for the pool mutations of one attack: every value
/// the mutated byte position exhibited before the window (the generators
/// are deterministic, so enumeration equals observation). Unconstrained
/// attacks draw from the full byte range instead.
std::vector<std::vector<std::uint8_t>> build_pools(
    const AttackSchedule& attack, const MessageSpec& msg,
    std::int64_t window_start_us) {
  std::vector<std::vector<std::uint8_t>> pools(attack.mutations.size());
  const std::int64_t period = period_us_of(msg);
  const std::uint64_t first_attacked_k = static_cast<std::uint64_t>(
      (window_start_us + period - 1) / period);
  for (std::size_t i = 0; i < attack.mutations.size(); ++i) {
    if (attack.mutations[i].rule != ByteMutation::Rule::PoolReplace) continue;
    if (!attack.constrained_to_observed_range) {
      pools[i].resize(256);
      for (int v = 0; v < 256; ++v) pools[i][v] = static_cast<std::uint8_t>(v);
      continue;
    }
    std::set<std::uint8_t> seen;
    for (std::uint64_t k = 0; k < first_attacked_k; ++k) {
      seen.insert(msg.payload_at(k)[attack.mutations[i].offset]);
    }
    if (seen.empty()) {
      throw EmptyValuePool(
          "no pre-attack values observed for pool mutation at offset " +
          std::to_string(attack.mutations[i].offset));
    }
    pools[i].assign(seen.begin(), seen.end());
  }
  return pools;
}

}  // namespace

FrameLog run_simulation(const BusSchedule& schedule) {
  schedule.validate();
  const std::int64_t duration_us = to_us(schedule.sim_duration_s);
  std::mt19937_64 rng(schedule.rng_seed);

  // Periodic releases for every message, in deterministic creation order.
  std::vector<Release> releases;
  std::map<std::uint32_t, const MessageSpec*> by_id;
  std::map<std::uint32_t, std::string> owner_of;
  for (const auto& ecu : schedule.ecus) {
    for (const auto& msg : ecu.messages) {
      by_id[msg.id] = &msg;
      owner_of[msg.id] = ecu.name;
      const std::int64_t period = period_us_of(msg);
      for (std::uint64_t k = 0;; ++k) {
        const std::int64_t t = static_cast<std::int64_t>(k) * period;
        if (t >= duration_us) break;
        Release r;
        r.t_us = t;
        r.id = msg.id;
        r.extended = msg.extended;
        r.k = k;
        r.payload = msg.payload_at(k);
        r.sender = ecu.name;
        releases.push_back(std::move(r));
      }
    }
  }

  for (const auto& attack : schedule.attacks) {
    const AttackWindow window = window_of(attack, duration_us);
    const EcuSpec* target_owner = nullptr;
    const MessageSpec* target_msg =
        by_id.count(attack.target_id)
            ? schedule.find_message(attack.target_id, &target_owner)
            : nullptr;
    std::string target_ecu = attack.target_ecu;
    if (target_ecu.empty() && target_owner) target_ecu = target_owner->name;

    switch (attack.kind) {
      case AttackKind::Suspension: {
        for (auto& r : releases) {
          if (r.sender == target_ecu && window.contains(r.t_us)) {
            r.dropped = true;
          }
        }
        break;
      }
      case AttackKind::Masquerade: {
        // The target falls silent entirely; the injector keeps the target
        // id on its original grid with the mutated payload.
        const auto pools = build_pools(attack, *target_msg, window.start_us);
        for (auto& r : releases) {
          if (r.sender != target_ecu || !window.contains(r.t_us)) continue;
          if (r.id == attack.target_id) {
            r.sender = attack.injector_ecu;
            apply_mutations(r.payload, attack.mutations, pools, rng);
          } else {
            r.dropped = true;
          }
        }
        break;
      }
      case AttackKind::Fabrication: {
        const auto pools = build_pools(attack, *target_msg, window.start_us);
        const std::int64_t period = period_us_of(*target_msg);
        const std::int64_t inj_period = std::max<std::int64_t>(
            1, std::llround(period / attack.rate_multiplier));
        const std::uint64_t max_genuine_k = static_cast<std::uint64_t>(
            (duration_us - 1) / period);
        for (std::uint64_t j = 0;; ++j) {
          const std::int64_t t =
              window.start_us + static_cast<std::int64_t>(j) * inj_period;
          if (t >= window.end_us || t >= duration_us) break;
          // Forged payload mirrors the most recent genuine transmission.
          const std::uint64_t k = std::min<std::uint64_t>(
              static_cast<std::uint64_t>(t / period), max_genuine_k);
          Release r;
          r.t_us = t;
          r.id = attack.target_id;
          r.extended = target_msg->extended;
          r.k = k;
          r.payload = target_msg->payload_at(k);
          apply_mutations(r.payload, attack.mutations, pools, rng);
          r.sender = attack.injector_ecu;
          releases.push_back(std::move(r));
        }
        break;
      }
      case AttackKind::Conquest: {
        const auto pools = build_pools(attack, *target_msg, window.start_us);
        for (auto& r : releases) {
          if (r.id == attack.target_id && !r.dropped &&
              window.contains(r.t_us)) {
            apply_mutations(r.payload, attack.mutations, pools, rng);
          }
        }
        break;
      }
    }
  }

  // Arbitration sweep: among pending frames the lowest id wins the bus;
  // the loser waits out the winner's wire time.
  std::vector<Release*> order;
  order.reserve(releases.size());
  for (auto& r : releases) {
    if (!r.dropped) order.push_back(&r);
  }
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i]->seq = i;
  std::sort(order.begin(), order.end(), [](const Release* a, const Release* b) {
    if (a->t_us != b->t_us) return a->t_us < b->t_us;
    if (a->id != b->id) return a->id < b->id;
    return a->seq < b->seq;
  });

  auto pending_before = [](const Release* a, const Release* b) {
    // std::priority_queue is a max-heap; invert for lowest-id-first.
    if (a->id != b->id) return a->id > b->id;
    if (a->t_us != b->t_us) return a->t_us > b->t_us;
    return a->seq > b->seq;
  };
  std::priority_queue<Release*, std::vector<Release*>,
                      decltype(pending_before)>
      pending(pending_before);

  FrameLog log;
  log.source = "simulator";
  log.frames.reserve(order.size());
  log.senders.reserve(order.size());

  std::size_t next = 0;
  std::int64_t bus_free_us = 0;
  while (next < order.size() || !pending.empty()) {
    if (pending.empty()) {
      bus_free_us = std::max(bus_free_us, order[next]->t_us);
    }
    while (next < order.size() && order[next]->t_us <= bus_free_us) {
      pending.push(order[next]);
      ++next;
    }
    const Release* tx = pending.top();
    pending.pop();

    CanFrame frame;
    frame.timestamp = static_cast<double>(bus_free_us) / 1e6;
    frame.id = tx->id;
    frame.extended = tx->extended;
    frame.payload = tx->payload;
    log.frames.push_back(std::move(frame));
    log.senders.push_back(tx->sender);

    const std::int64_t bits =
        47 + 8 * static_cast<std::int64_t>(tx->payload.size());
    const std::int64_t wire_us =
        (bits * 1000000 + schedule.bitrate / 2) / schedule.bitrate;
    bus_free_us += std::max<std::int64_t>(1, wire_us);
  }

  // One labeled interval per attack; ends clamped into the logged span.
  const double last_ts = log.frames.empty() ? 0.0 : log.frames.back().timestamp;
  for (const auto& attack : schedule.attacks) {
    const AttackWindow w = window_of(attack, duration_us);
    Annotation a;
    a.label = attack_kind_name(attack.kind);
    a.start_s = static_cast<double>(w.start_us) / 1e6;
    a.end_s = std::min(static_cast<double>(w.end_us) / 1e6, last_ts);
    log.annotations.push_back(std::move(a));
  }
  log.validate();
  return log;
}

}  // namespace casad
