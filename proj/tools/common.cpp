#include "common.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "casad/errors.hpp"

namespace casadcli {

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("CASAD_LOG_LEVEL");
    if (!env) return 1;
    const std::string v = env;
    if (v == "debug") return 0;
    if (v == "info") return 1;
    if (v == "warn") return 2;
    if (v == "error") return 3;
    if (v == "quiet") return 4;
    return 1;
  }();
  return level;
}

void emit(int level, const char* tag, const std::string& msg) {
  if (level >= log_level()) {
    std::cerr << "casad: " << tag << msg << '\n';
  }
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

}  // namespace

void log_debug(const std::string& msg) { emit(0, "debug: ", msg); }
void log_info(const std::string& msg) { emit(1, "", msg); }
void log_warn(const std::string& msg) { emit(2, "warning: ", msg); }
void log_error(const std::string& msg) { emit(3, "error: ", msg); }

ConfigSection ConfigSection::load(const std::string& path,
                                  const std::string& section) {
  std::ifstream in(path);
  if (!in) {
    throw casad::InvalidConfig("cannot open config file: " + path);
  }
  ConfigSection out;
  std::string line;
  std::string current;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      if (t != "casad-config v1") {
        throw casad::InvalidConfig(path + ":1: expected header 'casad-config v1'");
      }
      header_seen = true;
      continue;
    }
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw casad::InvalidConfig(path + ":" + std::to_string(line_no) +
                                   ": unterminated section header");
      }
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw casad::InvalidConfig(path + ":" + std::to_string(line_no) +
                                 ": expected key = value");
    }
    if (current == section) {
      out.values_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
  }
  return out;
}

void ConfigSection::apply_string(const CLI::App* cmd, const std::string& flag,
                                 const std::string& key,
                                 std::string& var) const {
  const auto it = values_.find(key);
  if (it != values_.end() && cmd->count(flag) == 0) var = it->second;
}

void ConfigSection::apply_double(const CLI::App* cmd, const std::string& flag,
                                 const std::string& key, double& var) const {
  const auto it = values_.find(key);
  if (it != values_.end() && cmd->count(flag) == 0) {
    try {
      var = std::stod(it->second);
    } catch (const std::exception&) {
      throw casad::InvalidConfig("config key '" + key + "': bad number '" +
                                 it->second + "'");
    }
  }
}

void ConfigSection::apply_size(const CLI::App* cmd, const std::string& flag,
                               const std::string& key, std::size_t& var) const {
  const auto it = values_.find(key);
  if (it != values_.end() && cmd->count(flag) == 0) {
    try {
      var = std::stoull(it->second);
    } catch (const std::exception&) {
      throw casad::InvalidConfig("config key '" + key + "': bad integer '" +
                                 it->second + "'");
    }
  }
}

std::set<std::uint32_t> parse_id_list(const std::string& text) {
  std::set<std::uint32_t> ids;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = trim(
        comma == std::string::npos ? text.substr(pos)
                                   : text.substr(pos, comma - pos));
    if (!tok.empty()) {
      try {
        const bool hex = tok.rfind("0x", 0) == 0 || tok.rfind("0X", 0) == 0;
        ids.insert(static_cast<std::uint32_t>(
            std::stoul(hex ? tok.substr(2) : tok, nullptr, hex ? 16 : 10)));
      } catch (const std::exception&) {
        throw casad::InvalidConfig("bad frame id in list: '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (ids.empty()) throw casad::InvalidConfig("empty id list");
  return ids;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok = trim(
        comma == std::string::npos ? text.substr(pos)
                                   : text.substr(pos, comma - pos));
    if (!tok.empty()) {
      try {
        out.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        throw casad::InvalidConfig("bad integer in list: '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw casad::InvalidConfig("empty integer list");
  return out;
}

}  // namespace casadcli
