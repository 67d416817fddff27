#include "casad/schedule_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "casad/errors.hpp"

namespace casad {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
  if (line_no == 0) throw InvalidSchedule(msg);
  throw InvalidSchedule("schedule line " + std::to_string(line_no) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::uint64_t parse_uint(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    std::uint64_t v;
    if (tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0) {
      v = std::stoull(tok.substr(2), &used, 16);
      used += 2;
    } else {
      v = std::stoull(tok, &used, 10);
    }
    if (used != tok.size()) fail(line_no, "bad integer '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    fail(line_no, "bad integer '" + tok + "'");
  }
}

double parse_num(const std::string& tok, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) fail(line_no, "bad number '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    fail(line_no, "bad number '" + tok + "'");
  }
}

bool parse_bool(const std::string& tok, std::size_t line_no) {
  if (tok == "true" || tok == "1" || tok == "yes") return true;
  if (tok == "false" || tok == "0" || tok == "no") return false;
  fail(line_no, "bad boolean '" + tok + "'");
}

std::uint8_t parse_hex_byte(const std::string& tok, std::size_t line_no) {
  const bool prefixed = tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0;
  const std::uint64_t v = parse_uint(prefixed ? tok : "0x" + tok, line_no);
  if (v > 0xFF) fail(line_no, "byte value out of range: " + tok);
  return static_cast<std::uint8_t>(v);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

SineField parse_sine(const std::string& params, std::uint8_t width,
                     std::size_t line_no) {
  SineField f;
  f.width = width;
  bool have_c = false, have_a = false, have_p = false;
  std::istringstream ss(params);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) fail(line_no, "bad sine parameter: " + part);
    const std::string key = part.substr(0, eq);
    const std::string val = part.substr(eq + 1);
    if (key == "c") {
      f.center = parse_num(val, line_no);
      have_c = true;
    } else if (key == "a") {
      f.amplitude = parse_num(val, line_no);
      have_a = true;
    } else if (key == "p") {
      f.period = static_cast<std::uint32_t>(parse_uint(val, line_no));
      have_p = true;
    } else {
      fail(line_no, "unknown sine parameter: " + key);
    }
  }
  if (!have_c || !have_a || !have_p) {
    fail(line_no, "sine fields need c=, a= and p=");
  }
  return f;
}

std::vector<PayloadField> parse_payload_fields(const std::string& value,
                                               std::size_t line_no) {
  std::vector<PayloadField> fields;
  for (const auto& tok : split_ws(value)) {
    if (tok == "counter") {
      fields.push_back(CounterField{});
    } else if (tok.rfind("const:", 0) == 0) {
      fields.push_back(ConstField{parse_hex_byte(tok.substr(6), line_no)});
    } else if (tok.rfind("sine8:", 0) == 0) {
      fields.push_back(parse_sine(tok.substr(6), 1, line_no));
    } else if (tok.rfind("sine16:", 0) == 0) {
      fields.push_back(parse_sine(tok.substr(7), 2, line_no));
    } else {
      fail(line_no, "unknown payload field: " + tok);
    }
  }
  return fields;
}

std::vector<ByteMutation> parse_mutations(const std::string& value,
                                          std::size_t line_no) {
  std::vector<ByteMutation> out;
  for (const auto& tok : split_ws(value)) {
    ByteMutation m;
    std::string rest;
    if (tok.rfind("set:", 0) == 0) {
      m.rule = ByteMutation::Rule::SetConst;
      rest = tok.substr(4);
    } else if (tok.rfind("add:", 0) == 0) {
      m.rule = ByteMutation::Rule::AddDelta;
      rest = tok.substr(4);
    } else if (tok.rfind("pool:", 0) == 0) {
      m.rule = ByteMutation::Rule::PoolReplace;
      m.offset = static_cast<std::uint8_t>(parse_uint(tok.substr(5), line_no));
      out.push_back(m);
      continue;
    } else {
      fail(line_no, "unknown mutation: " + tok);
    }
    const std::size_t eq = rest.find('=');
    if (eq == std::string::npos) fail(line_no, "mutation needs OFF=VALUE: " + tok);
    m.offset = static_cast<std::uint8_t>(parse_uint(rest.substr(0, eq), line_no));
    if (m.rule == ByteMutation::Rule::SetConst) {
      m.value = parse_hex_byte(rest.substr(eq + 1), line_no);
    } else {
      m.value = static_cast<std::uint8_t>(parse_uint(rest.substr(eq + 1), line_no) & 0xFF);
    }
    out.push_back(m);
  }
  return out;
}

std::vector<std::uint8_t> parse_hex_row(const std::string& value,
                                        std::size_t line_no) {
  std::vector<std::uint8_t> row;
  if (value.size() % 2 != 0) fail(line_no, "odd hex digit count in replay row");
  for (std::size_t i = 0; i < value.size(); i += 2) {
    row.push_back(parse_hex_byte(value.substr(i, 2), line_no));
  }
  return row;
}

std::vector<std::vector<std::uint8_t>> load_replay_file(
    const std::string& path, std::size_t line_no) {
  std::ifstream in(path);
  if (!in) fail(line_no, "cannot open replay file: " + path);
  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(parse_hex_row(t, n));
  }
  if (rows.empty()) fail(line_no, "replay file is empty: " + path);
  return rows;
}

struct PendingMessage {
  std::string ecu;
  MessageSpec spec;
  bool have_dlc = false;
  std::size_t line_no = 0;
};

std::size_t fields_width(const std::vector<PayloadField>& fields) {
  std::size_t w = 0;
  for (const auto& f : fields) {
    w += std::holds_alternative<SineField>(f) ? std::get<SineField>(f).width : 1;
  }
  return w;
}

}  // namespace

BusSchedule parse_schedule(std::istream& in) {
  BusSchedule schedule;
  schedule.ecus.clear();

  enum class Section { None, Bus, Ecu, Message, Attack };
  Section section = Section::None;

  std::vector<PendingMessage> messages;
  EcuSpec* current_ecu = nullptr;
  PendingMessage* current_msg = nullptr;
  AttackSchedule* current_attack = nullptr;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;

    if (!header_seen) {
      if (t != "casad-schedule v1") {
        fail(line_no, "expected header 'casad-schedule v1'");
      }
      header_seen = true;
      continue;
    }

    if (t.front() == '[') {
      if (t.back() != ']') fail(line_no, "unterminated section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      current_ecu = nullptr;
      current_msg = nullptr;
      current_attack = nullptr;
      if (name == "bus") {
        section = Section::Bus;
      } else if (name == "ecu") {
        section = Section::Ecu;
        schedule.ecus.emplace_back();
        current_ecu = &schedule.ecus.back();
      } else if (name == "message") {
        section = Section::Message;
        messages.emplace_back();
        messages.back().line_no = line_no;
        current_msg = &messages.back();
      } else if (name == "attack") {
        section = Section::Attack;
        schedule.attacks.emplace_back();
        current_attack = &schedule.attacks.back();
      } else {
        fail(line_no, "unknown section [" + name + "]");
      }
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));

    switch (section) {
      case Section::None:
        fail(line_no, "key outside any section");
      case Section::Bus:
        if (key == "bitrate") {
          schedule.bitrate = static_cast<std::int64_t>(parse_uint(value, line_no));
        } else if (key == "duration_s") {
          schedule.sim_duration_s = parse_num(value, line_no);
        } else if (key == "seed") {
          schedule.rng_seed = parse_uint(value, line_no);
        } else {
          fail(line_no, "unknown bus key: " + key);
        }
        break;
      case Section::Ecu:
        if (key == "name") {
          current_ecu->name = value;
        } else {
          fail(line_no, "unknown ecu key: " + key);
        }
        break;
      case Section::Message: {
        PendingMessage& pm = *current_msg;
        if (key == "ecu") {
          pm.ecu = value;
        } else if (key == "id") {
          pm.spec.id = static_cast<std::uint32_t>(parse_uint(value, line_no));
        } else if (key == "extended") {
          pm.spec.extended = parse_bool(value, line_no);
        } else if (key == "period_ms") {
          pm.spec.period_ms = parse_num(value, line_no);
        } else if (key == "dlc") {
          pm.spec.dlc = static_cast<std::uint8_t>(parse_uint(value, line_no));
          pm.have_dlc = true;
        } else if (key == "payload") {
          pm.spec.fields = parse_payload_fields(value, line_no);
        } else if (key == "replay") {
          pm.spec.replay_rows = load_replay_file(value, line_no);
        } else if (key == "replay_row") {
          pm.spec.replay_rows.push_back(parse_hex_row(value, line_no));
        } else {
          fail(line_no, "unknown message key: " + key);
        }
        break;
      }
      case Section::Attack: {
        AttackSchedule& a = *current_attack;
        if (key == "kind") {
          const auto kind = attack_kind_from_name(value);
          if (!kind) fail(line_no, "unknown attack kind: " + value);
          a.kind = *kind;
        } else if (key == "target_ecu") {
          a.target_ecu = value;
        } else if (key == "target_id") {
          a.target_id = static_cast<std::uint32_t>(parse_uint(value, line_no));
        } else if (key == "start_s") {
          a.start_s = parse_num(value, line_no);
        } else if (key == "duration_s") {
          a.duration_s = parse_num(value, line_no);
        } else if (key == "injector") {
          a.injector_ecu = value;
        } else if (key == "rate_multiplier") {
          a.rate_multiplier = parse_num(value, line_no);
        } else if (key == "mutate") {
          a.mutations = parse_mutations(value, line_no);
        } else if (key == "constrained") {
          a.constrained_to_observed_range = parse_bool(value, line_no);
        } else {
          fail(line_no, "unknown attack key: " + key);
        }
        break;
      }
    }
  }
  if (!header_seen) fail(line_no, "missing 'casad-schedule v1' header");

  for (auto& pm : messages) {
    if (pm.ecu.empty()) fail(pm.line_no, "message without an owning ecu");
    if (!pm.have_dlc) {
      pm.spec.dlc = static_cast<std::uint8_t>(
          pm.spec.replay_rows.empty() ? fields_width(pm.spec.fields)
                                      : pm.spec.replay_rows.front().size());
    }
    bool placed = false;
    for (auto& ecu : schedule.ecus) {
      if (ecu.name == pm.ecu) {
        ecu.messages.push_back(std::move(pm.spec));
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw UnknownEcu("schedule line " + std::to_string(pm.line_no) +
                       ": message references unknown ecu '" + pm.ecu + "'");
    }
  }

  schedule.validate();
  return schedule;
}

BusSchedule parse_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSchedule("cannot open schedule file: " + path);
  return parse_schedule(in);
}

std::vector<ByteMutation> parse_mutation_list(const std::string& text) {
  return parse_mutations(text, 0);
}

namespace {

void serialize_fields(std::ostream& out,
                      const std::vector<PayloadField>& fields) {
  char buf[96];
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out << ' ';
    first = false;
    if (const auto* c = std::get_if<ConstField>(&f)) {
      std::snprintf(buf, sizeof(buf), "const:%02X", c->value);
      out << buf;
    } else if (std::holds_alternative<CounterField>(f)) {
      out << "counter";
    } else {
      const auto& s = std::get<SineField>(f);
      std::snprintf(buf, sizeof(buf), "sine%d:c=%g,a=%g,p=%u",
                    s.width == 2 ? 16 : 8, s.center, s.amplitude, s.period);
      out << buf;
    }
  }
}

}  // namespace

std::string serialize_schedule(const BusSchedule& schedule) {
  std::ostringstream out;
  out << "casad-schedule v1\n\n[bus]\n";
  out << "bitrate = " << schedule.bitrate << '\n';
  out << "duration_s = " << schedule.sim_duration_s << '\n';
  out << "seed = " << schedule.rng_seed << '\n';

  char idbuf[16];
  static const char* kHex = "0123456789ABCDEF";
  for (const auto& ecu : schedule.ecus) {
    out << "\n[ecu]\nname = " << ecu.name << '\n';
  }
  for (const auto& ecu : schedule.ecus) {
    for (const auto& msg : ecu.messages) {
      out << "\n[message]\n";
      out << "ecu = " << ecu.name << '\n';
      std::snprintf(idbuf, sizeof(idbuf), "0x%X", msg.id);
      out << "id = " << idbuf << '\n';
      if (msg.extended) out << "extended = true\n";
      out << "period_ms = " << msg.period_ms << '\n';
      out << "dlc = " << static_cast<int>(msg.dlc) << '\n';
      if (!msg.replay_rows.empty()) {
        for (const auto& row : msg.replay_rows) {
          out << "replay_row = ";
          for (std::uint8_t b : row) {
            out << kHex[b >> 4] << kHex[b & 0xF];
          }
          out << '\n';
        }
      } else {
        out << "payload = ";
        serialize_fields(out, msg.fields);
        out << '\n';
      }
    }
  }
  for (const auto& a : schedule.attacks) {
    out << "\n[attack]\n";
    out << "kind = " << attack_kind_name(a.kind) << '\n';
    if (!a.target_ecu.empty()) out << "target_ecu = " << a.target_ecu << '\n';
    if (a.kind != AttackKind::Suspension) {
      std::snprintf(idbuf, sizeof(idbuf), "0x%X", a.target_id);
      out << "target_id = " << idbuf << '\n';
    }
    out << "start_s = " << a.start_s << '\n';
    if (a.duration_s) out << "duration_s = " << *a.duration_s << '\n';
    if (!a.injector_ecu.empty()) out << "injector = " << a.injector_ecu << '\n';
    if (a.kind == AttackKind::Fabrication) {
      out << "rate_multiplier = " << a.rate_multiplier << '\n';
    }
    if (!a.mutations.empty()) {
      out << "mutate =";
      char buf[32];
      for (const auto& m : a.mutations) {
        switch (m.rule) {
          case ByteMutation::Rule::SetConst:
            std::snprintf(buf, sizeof(buf), " set:%u=%02X", m.offset, m.value);
            break;
          case ByteMutation::Rule::AddDelta:
            std::snprintf(buf, sizeof(buf), " add:%u=%u", m.offset, m.value);
            break;
          case ByteMutation::Rule::PoolReplace:
            std::snprintf(buf, sizeof(buf), " pool:%u", m.offset);
            break;
        }
        out << buf;
      }
      out << '\n';
    }
    if (a.kind == AttackKind::Conquest) {
      out << "constrained = "
          << (a.constrained_to_observed_range ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

}  // namespace casad
