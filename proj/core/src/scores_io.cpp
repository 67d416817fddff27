#include "casad/scores_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "casad/errors.hpp"

namespace casad {

void write_scores_csv(const DepartureSeries& series, std::ostream& out) {
  out << "byte_index,score,alarm\n";
  char buf[64];
  for (std::size_t i = 0; i < series.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%d", series.start_index + i,
                  series.scores[i],
                  series.threshold ? static_cast<int>(series.alarms[i]) : 0);
    out << buf << '\n';
  }
}

void write_scores_csv(const DepartureSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EmptyResult("cannot open score file for writing: " + path);
  write_scores_csv(series, out);
}

DepartureSeries read_scores_csv(std::istream& in) {
  DepartureSeries series;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("byte_index", 0) == 0) continue;
    std::istringstream ss(line);
    std::string idx_tok, score_tok, alarm_tok;
    if (!std::getline(ss, idx_tok, ',') || !std::getline(ss, score_tok, ',') ||
        !std::getline(ss, alarm_tok, ',')) {
      throw MalformedLine("score csv line " + std::to_string(line_no) +
                          ": expected byte_index,score,alarm");
    }
    try {
      const std::size_t idx = std::stoull(idx_tok);
      if (first_row) {
        series.start_index = idx;
        first_row = false;
      } else if (idx != series.start_index + series.scores.size()) {
        throw MalformedLine("score csv line " + std::to_string(line_no) +
                            ": byte indices must be contiguous");
      }
      series.scores.push_back(std::stod(score_tok));
      series.alarms.push_back(std::stoi(alarm_tok) != 0);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw MalformedLine("score csv line " + std::to_string(line_no) +
                          ": bad numeric field");
    }
  }
  // The file does not carry the threshold value; the recorded alarm flags
  // are preserved as written.
  series.threshold.reset();
  return series;
}

DepartureSeries read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmptyResult("cannot open score file: " + path);
  return read_scores_csv(in);
}

void write_curve_csv(const ThresholdCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EmptyResult("cannot open curve file for writing: " + path);
  out << "L,r,theta,delta\n";
  char buf[96];
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g", curve.lag,
                  curve.dimension, curve.thresholds[i], curve.delays[i]);
    out << buf << '\n';
  }
}

void write_result_kv(const std::map<std::string, std::string>& kv,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw EmptyResult("cannot open result file for writing: " + path);
  for (const auto& [key, value] : kv) {
    out << key << " = " << value << '\n';
  }
}

std::map<std::string, std::string> read_result_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmptyResult("cannot open result file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw MalformedLine("result file line without '=': " + line);
    }
    auto trim = [](std::string s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.pop_back();
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace casad
