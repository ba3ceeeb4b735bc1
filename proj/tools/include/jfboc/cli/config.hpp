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
#include <memory>
#include <string>
#include <vector>

#include "jfboc/fixedpoint.hpp"
#include "jfboc/problems.hpp"
#include "jfboc/rollout.hpp"
#include "jfboc/training.hpp"
#include "jfboc/valuenet.hpp"

namespace jfboc::cli {

/// Problem block. Keys that do not apply to `name` are rejected on parse.
struct ProblemConfig {
  std::string name = "lqr";
  double horizon = 1.0;
  int steps = 20;
  Scheme scheme = Scheme::kEuler;
  bool rk4_resolve_stages = false;
  /// Empty means the problem's default target (lqr, quadrotor).
  std::vector<double> target;

  // lqr
  double state_weight = 0.0;
  double terminal_weight = 1.0;  // also quadrotor
  double rho_half_width = 1.0;

  // quadrotor
  std::vector<double> rho_position_center;
  double rho_position_half_width = 0.5;  // also bicycle
  double rho_velocity_half_width = 0.1;
  double rho_angle_half_width = 0.1;
  double rho_rate_half_width = 0.0;

  // bicycle
  int bikes = 1;
  double wheelbase = 1.0;
  double cost_scale = 1.0;
  double control_weight = 1.0;
  double layout_radius = 1.0;
  std::vector<double> starts;
  std::vector<double> targets;
  double rho_speed_min = 0.5;
  double rho_speed_max = 1.5;
  double steering_margin = 0.1;

  bool operator==(const ProblemConfig&) const = default;
};

struct NetConfig {
  std::vector<int> hidden_widths{128, 128, 128, 128};
  InitScheme init;

  bool operator==(const NetConfig& o) const {
    return hidden_widths == o.hidden_widths && init.weight_gain == o.init.weight_gain &&
           init.hidden_bias_bound == o.init.hidden_bias_bound;
  }
};

struct EvalConfig {
  int samples = 200;
  std::uint64_t seed = 987654321;

  bool operator==(const EvalConfig&) const = default;
};

struct ExperimentConfig {
  ProblemConfig problem;
  NetConfig net;
  FixedPointSettings fixedpoint;
  TrainSettings train;
  EvalConfig eval;

  /// Checks every block and builds the problem once to surface its errors.
  void validate() const;
};

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses the INI text. Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every applicable key, doubles written with 17 significant digits.
std::string serialize_config(const ExperimentConfig& config);

/// Resolves "preset:NAME" against the bundled config directories; other
/// arguments are returned unchanged. Throws ConfigError for unknown presets.
std::filesystem::path resolve_config_path(const std::string& arg);
std::vector<std::filesystem::path> preset_directories();

std::unique_ptr<ControlProblem> make_problem(const ProblemConfig& config);
NetArchitecture make_architecture(const ExperimentConfig& config, const ControlProblem& problem);
Discretization make_discretization(const ProblemConfig& config);
/// The train block with the net's init scheme and a worker count filled in.
TrainSettings make_train_settings(const ExperimentConfig& config, int workers);

}  // namespace jfboc::cli
