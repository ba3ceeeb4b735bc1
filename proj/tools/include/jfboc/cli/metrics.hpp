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

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jfboc/problems.hpp"
#include "jfboc/rollout.hpp"
#include "jfboc/training.hpp"

namespace jfboc::cli {

inline constexpr const char* kMetricsHeader =
    "epoch,loss,cum_runtime_s,cum_work_units,peak_tape_bytes,lr";

std::string format_metrics_row(const EpochMetrics& m);
EpochMetrics parse_metrics_row(const std::string& line);

/// Appends rows as epochs finish; creates the file with the header when missing.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void append(const EpochMetrics& m);

 private:
  std::ofstream out_;
};

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochMetrics>& rows);
/// Throws IoError on a missing file, a wrong header or a malformed row.
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

/// Per-epoch mean/min/max of the loss over runs, plus mean counters.
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<std::vector<EpochMetrics>>& runs);

/// One row per grid time: t, the state, then the control applied from that time
/// (blank on the last row). Bicycle columns are named x_i, y_i, psi_i, v_i,
/// steer_i, accel_i with i starting at 1.
void write_trajectory_csv(const std::filesystem::path& path, const ControlProblem& problem,
                          const Trajectory& trajectory);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // NaN where a cell was blank

  int column(const std::string& name) const;  // -1 when absent
};
Table read_csv_table(const std::filesystem::path& path);

}  // namespace jfboc::cli
