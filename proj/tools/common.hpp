#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace casadcli {

enum ExitCode {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

// Leveled stderr logger, level from CASAD_LOG_LEVEL
// (debug|info|warn|error|quiet; default info).
void log_debug(const std::string& msg);
void log_info(const std::string& msg);
void log_warn(const std::string& msg);
void log_error(const std::string& msg);

/// One [section] of a casad-config file; same line grammar as the
/// schedule format. Values only apply where the flag was not given.
class ConfigSection {
 public:
  ConfigSection() = default;
  static ConfigSection load(const std::string& path, const std::string& section);

  void apply_string(const CLI::App* cmd, const std::string& flag,
                    const std::string& key, std::string& var) const;
  void apply_double(const CLI::App* cmd, const std::string& flag,
                    const std::string& key, double& var) const;
  void apply_size(const CLI::App* cmd, const std::string& flag,
                  const std::string& key, std::size_t& var) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Comma-separated frame ids, hex with 0x or decimal.
std::set<std::uint32_t> parse_id_list(const std::string& text);

/// Comma-separated positive integers (candidate lag values).
std::vector<std::size_t> parse_size_list(const std::string& text);

int dispatch_main(int argc, char** argv);

void register_simulate(CLI::App& app);
void register_train(CLI::App& app);
void register_detect(CLI::App& app);
void register_tune(CLI::App& app);
void register_report(CLI::App& app);

}  // namespace casadcli
