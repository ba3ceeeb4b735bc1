/*
 Copyright 2026 The jfboc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "jfboc/cli/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "jfboc/errors.hpp"

namespace jfboc::cli {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

template <typename T>
T parse_cell(const std::string& s, const char* what) {
  T out{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError(std::string("csv: malformed ") + what + " '" + s + "'");
  }
  return out;
}

double parse_real(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  return parse_cell<double>(s, "number");
}

std::string g17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> state_names(const ControlProblem& problem) {
  std::vector<std::string> names;
  if (problem.name() == "bicycle") {
    const int bikes = problem.state_dim() / 4;
    for (int i = 1; i <= bikes; ++i) {
      for (const char* s : {"x_", "y_", "psi_", "v_"}) names.push_back(s + std::to_string(i));
    }
    for (int i = 1; i <= bikes; ++i) {
      for (const char* s : {"steer_", "accel_"}) names.push_back(s + std::to_string(i));
    }
    return names;
  }
  for (int i = 0; i < problem.state_dim(); ++i) names.push_back("z" + std::to_string(i));
  for (int i = 0; i < problem.control_dim(); ++i) names.push_back("u" + std::to_string(i));
  return names;
}

}  // namespace

std::string format_metrics_row(const EpochMetrics& m) {
  return std::to_string(m.epoch) + "," + g17(m.loss) + "," + g17(m.cum_runtime_s) + "," +
         std::to_string(m.cum_work_units) + "," + std::to_string(m.peak_tape_bytes) + "," +
         g17(m.lr);
}

EpochMetrics parse_metrics_row(const std::string& line) {
  const auto cells = split_csv(strip_cr(line));
  if (cells.size() != 6) throw IoError("metrics: expected 6 columns in '" + line + "'");
  EpochMetrics m;
  m.epoch = parse_cell<int>(cells[0], "epoch");
  m.loss = parse_real(cells[1]);
  m.failed = std::isnan(m.loss);
  m.cum_runtime_s = parse_real(cells[2]);
  m.cum_work_units = parse_cell<std::int64_t>(cells[3], "cum_work_units");
  m.peak_tape_bytes = parse_cell<std::int64_t>(cells[4], "peak_tape_bytes");
  m.lr = parse_real(cells[5]);
  return m;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw IoError("metrics: cannot open " + path.string());
  if (fresh) out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsWriter::append(const EpochMetrics& m) {
  out_ << format_metrics_row(m) << '\n';
  out_.flush();
  if (!out_) throw IoError("metrics: write failed");
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("metrics: cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const EpochMetrics& m : rows) out << format_metrics_row(m) << '\n';
  if (!out) throw IoError("metrics: write failed for " + path.string());
}

std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("metrics: cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kMetricsHeader) {
    throw IoError("metrics: " + path.string() + " does not start with the metrics header");
  }
  std::vector<EpochMetrics> rows;
  while (std::getline(in, line)) {
    if (strip_cr(line).empty()) continue;
    rows.push_back(parse_metrics_row(line));
  }
  return rows;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::vector<EpochMetrics>>& runs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("summary: cannot write " + path.string());
  out << "epoch,loss_mean,loss_min,loss_max,cum_runtime_s_mean,cum_work_units_mean,"
         "peak_tape_bytes_max\n";
  const auto bands = loss_bands(runs);
  for (std::size_t e = 0; e < bands.size(); ++e) {
    double runtime = 0.0, work = 0.0;
    std::int64_t tape = 0;
    for (const auto& run : runs) {
      runtime += run[e].cum_runtime_s;
      work += static_cast<double>(run[e].cum_work_units);
      tape = std::max(tape, run[e].peak_tape_bytes);
    }
    const double n = static_cast<double>(runs.size());
    out << bands[e].epoch << ',' << g17(bands[e].mean) << ',' << g17(bands[e].min) << ','
        << g17(bands[e].max) << ',' << g17(runtime / n) << ',' << g17(work / n) << ',' << tape
        << '\n';
  }
  if (!out) throw IoError("summary: write failed for " + path.string());
}

void write_trajectory_csv(const std::filesystem::path& path, const ControlProblem& problem,
                          const Trajectory& traj) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("trajectory: cannot write " + path.string());
  out << "t";
  for (const std::string& n : state_names(problem)) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << g17(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) out << ',' << g17(traj.states[k][i]);
    for (int i = 0; i < problem.control_dim(); ++i) {
      out << ',';
      if (k < traj.controls.size()) out << g17(traj.controls[k][i]);
    }
    out << '\n';
  }
  if (!out) throw IoError("trajectory: write failed for " + path.string());
}

int Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

Table read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: " + path.string() + " is empty");
  t.columns = split_csv(strip_cr(line));
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != t.columns.size()) {
      throw IoError("csv: row with " + std::to_string(cells.size()) + " cells in " +
                    path.string() + ", expected " + std::to_string(t.columns.size()));
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      row.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_real(c));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace jfboc::cli
