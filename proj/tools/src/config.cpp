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

#include "jfboc/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "jfboc/errors.hpp"

namespace jfboc::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError("config: key '" + key + "' expects " + what + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw, const char* what) {
  const std::string v = trim(raw);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, what);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  return parse_number<double>(key, v, "a number");
}
int parse_int(const std::string& key, const std::string& v) {
  return parse_number<int>(key, v, "an integer");
}
std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  return parse_number<std::uint64_t>(key, v, "a non-negative integer");
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  const std::string v = trim(raw);
  if (v.empty()) return items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const std::string& s : split_list(raw)) out.push_back(parse_double(key, s));
  return out;
}

std::vector<int> parse_widths(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "tiny") return NetArchitecture::tiny(2).hidden_widths;
  if (v == "standard") return NetArchitecture::standard(2).hidden_widths;
  std::vector<int> out;
  for (const std::string& s : split_list(v)) out.push_back(parse_int(key, s));
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
std::string fmt(bool b) { return b ? "true" : "false"; }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }
std::string fmt(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
  return s;
}
std::string fmt(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
  return s;
}

enum Applies : unsigned { kLqr = 1, kQuad = 2, kBike = 4, kAll = 7 };

unsigned problem_bit(const std::string& name) {
  if (name == "lqr") return kLqr;
  if (name == "quadrotor") return kQuad;
  if (name == "bicycle") return kBike;
  throw ConfigError("config: problem.name must be lqr, quadrotor or bicycle, got '" + name + "'");
}

struct Field {
  std::string section;
  std::string key;
  unsigned applies;
  std::function<void(ExperimentConfig&, const std::string& full_key, const std::string&)> read;
  std::function<std::string(const ExperimentConfig&)> write;
};

#define JFBOC_FIELD(SECTION, KEY, APPLIES, MEMBER, PARSE)                                  \
  Field {                                                                                \
    SECTION, KEY, APPLIES,                                                               \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {            \
          c.MEMBER = PARSE(k, v);                                                        \
        },                                                                               \
        [](const ExperimentConfig& c) { return fmt(c.MEMBER); }                          \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // problem.name is handled first, separately.
    f.push_back(Field{"problem", "scheme", kAll,
                      [](ExperimentConfig& c, const std::string&, const std::string& v) {
                        c.problem.scheme = scheme_from_string(trim(v));
                      },
                      [](const ExperimentConfig& c) { return to_string(c.problem.scheme); }});
    f.push_back(JFBOC_FIELD("problem", "horizon", kAll, problem.horizon, parse_double));
    f.push_back(JFBOC_FIELD("problem", "steps", kAll, problem.steps, parse_int));
    f.push_back(
        JFBOC_FIELD("problem", "rk4_resolve_stages", kAll, problem.rk4_resolve_stages, parse_bool));
    f.push_back(JFBOC_FIELD("problem", "target", kLqr | kQuad, problem.target, parse_doubles));
    f.push_back(JFBOC_FIELD("problem", "state_weight", kLqr, problem.state_weight, parse_double));
    f.push_back(JFBOC_FIELD("problem", "terminal_weight", kLqr | kQuad, problem.terminal_weight,
                            parse_double));
    f.push_back(
        JFBOC_FIELD("problem", "rho_half_width", kLqr, problem.rho_half_width, parse_double));
    f.push_back(JFBOC_FIELD("problem", "rho_position_center", kQuad, problem.rho_position_center,
                            parse_doubles));
    f.push_back(JFBOC_FIELD("problem", "rho_position_half_width", kQuad | kBike,
                            problem.rho_position_half_width, parse_double));
    f.push_back(JFBOC_FIELD("problem", "rho_velocity_half_width", kQuad,
                            problem.rho_velocity_half_width, parse_double));
    f.push_back(JFBOC_FIELD("problem", "rho_angle_half_width", kQuad,
                            problem.rho_angle_half_width, parse_double));
    f.push_back(JFBOC_FIELD("problem", "rho_rate_half_width", kQuad, problem.rho_rate_half_width,
                            parse_double));
    f.push_back(JFBOC_FIELD("problem", "bikes", kBike, problem.bikes, parse_int));
    f.push_back(JFBOC_FIELD("problem", "wheelbase", kBike, problem.wheelbase, parse_double));
    f.push_back(JFBOC_FIELD("problem", "cost_scale", kBike, problem.cost_scale, parse_double));
    f.push_back(
        JFBOC_FIELD("problem", "control_weight", kBike, problem.control_weight, parse_double));
    f.push_back(
        JFBOC_FIELD("problem", "layout_radius", kBike, problem.layout_radius, parse_double));
    f.push_back(JFBOC_FIELD("problem", "starts", kBike, problem.starts, parse_doubles));
    f.push_back(JFBOC_FIELD("problem", "targets", kBike, problem.targets, parse_doubles));
    f.push_back(
        JFBOC_FIELD("problem", "rho_speed_min", kBike, problem.rho_speed_min, parse_double));
    f.push_back(
        JFBOC_FIELD("problem", "rho_speed_max", kBike, problem.rho_speed_max, parse_double));
    f.push_back(
        JFBOC_FIELD("problem", "steering_margin", kBike, problem.steering_margin, parse_double));

    f.push_back(JFBOC_FIELD("net", "hidden_widths", kAll, net.hidden_widths, parse_widths));
    f.push_back(JFBOC_FIELD("net", "init_weight_gain", kAll, net.init.weight_gain, parse_double));
    f.push_back(JFBOC_FIELD("net", "init_hidden_bias_bound", kAll, net.init.hidden_bias_bound,
                            parse_double));

    f.push_back(JFBOC_FIELD("fixedpoint", "alpha", kAll, fixedpoint.alpha, parse_double));
    f.push_back(JFBOC_FIELD("fixedpoint", "tol", kAll, fixedpoint.tol, parse_double));
    f.push_back(JFBOC_FIELD("fixedpoint", "max_iter", kAll, fixedpoint.max_iter, parse_int));
    f.push_back(JFBOC_FIELD("fixedpoint", "warm_start", kAll, fixedpoint.warm_start, parse_bool));

    f.push_back(Field{"train", "mode", kAll,
                      [](ExperimentConfig& c, const std::string&, const std::string& v) {
                        c.train.mode = gradient_mode_from_string(trim(v));
                      },
                      [](const ExperimentConfig& c) { return to_string(c.train.mode); }});
    f.push_back(JFBOC_FIELD("train", "epochs", kAll, train.epochs, parse_int));
    f.push_back(JFBOC_FIELD("train", "batch_size", kAll, train.batch_size, parse_int));
    f.push_back(JFBOC_FIELD("train", "lr0", kAll, train.lr0, parse_double));
    f.push_back(Field{"train", "scheduler", kAll,
                      [](ExperimentConfig& c, const std::string&, const std::string& v) {
                        c.train.scheduler.kind = scheduler_kind_from_string(trim(v));
                      },
                      [](const ExperimentConfig& c) { return to_string(c.train.scheduler.kind); }});
    f.push_back(
        JFBOC_FIELD("train", "scheduler_factor", kAll, train.scheduler.factor, parse_double));
    f.push_back(
        JFBOC_FIELD("train", "scheduler_patience", kAll, train.scheduler.patience, parse_int));
    f.push_back(
        JFBOC_FIELD("train", "scheduler_min_lr", kAll, train.scheduler.min_lr, parse_double));
    f.push_back(JFBOC_FIELD("train", "scheduler_threshold", kAll, train.scheduler.threshold,
                            parse_double));
    f.push_back(JFBOC_FIELD("train", "seed", kAll, train.seed, parse_u64));
    f.push_back(JFBOC_FIELD("train", "runs", kAll, train.runs, parse_int));
    f.push_back(JFBOC_FIELD("train", "fixed_dataset", kAll, train.fixed_dataset, parse_bool));
    f.push_back(JFBOC_FIELD("train", "grad_clip", kAll, train.grad_clip, parse_double));
    f.push_back(
        JFBOC_FIELD("train", "max_failed_epochs", kAll, train.max_failed_epochs, parse_int));

    f.push_back(JFBOC_FIELD("eval", "samples", kAll, eval.samples, parse_int));
    f.push_back(JFBOC_FIELD("eval", "seed", kAll, eval.seed, parse_u64));
    return f;
  }();
  return table;
}

#undef JFBOC_FIELD

// The INI reader only knows ';' comments.
std::string strip_hash_comments(const std::string& text) {
  std::stringstream in(text);
  std::string out, line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t[0] == '#') continue;
    out += line + '\n';
  }
  return out;
}

Vector to_vector(const std::vector<double>& xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

}  // namespace

void ExperimentConfig::validate() const {
  problem_bit(problem.name);
  fixedpoint.validate();
  train.validate();
  make_discretization(problem).validate();
  if (net.hidden_widths.empty()) throw ConfigError("config: net.hidden_widths must not be empty");
  if (!(net.init.weight_gain >= 0.0) || !(net.init.hidden_bias_bound >= 0.0)) {
    throw ConfigError("config: net init bounds must be >= 0");
  }
  if (eval.samples < 1) throw ConfigError("config: eval.samples must be >= 1");
  const auto p = make_problem(problem);
  make_architecture(*this, *p).validate();
}

bool same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b) && a.problem == b.problem && a.net == b.net &&
         a.eval == b.eval;
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::stringstream in(strip_hash_comments(text));
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }

  ExperimentConfig cfg;
  std::map<std::string, const Field*> index;
  for (const Field& f : fields()) index[f.section + "." + f.key] = &f;

  if (const auto name = tree.get_optional<std::string>("problem.name")) {
    cfg.problem.name = trim(*name);
  }
  const unsigned bit = problem_bit(cfg.problem.name);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' must be inside a section");
    }
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (full == "problem.name") continue;
      const auto it = index.find(full);
      if (it == index.end()) throw ConfigError("config: unknown key '" + full + "'");
      if ((it->second->applies & bit) == 0) {
        throw ConfigError("config: key '" + full + "' does not apply to problem '" +
                          cfg.problem.name + "'");
      }
      try {
        it->second->read(cfg, full, node.data());
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError("config: key '" + full + "': " + e.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  const unsigned bit = problem_bit(config.problem.name);
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      section = f.section;
      out += (out.empty() ? "" : "\n") + ("[" + section + "]\n");
      if (section == "problem") out += "name = " + config.problem.name + "\n";
    }
    if ((f.applies & bit) == 0) continue;
    out += f.key + " = " + f.write(config) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> preset_directories() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("JFBOC_CONFIG_DIR")) dirs.emplace_back(env);
#ifdef JFBOC_SOURCE_CONFIG_DIR
  dirs.emplace_back(JFBOC_SOURCE_CONFIG_DIR);
#endif
#ifdef JFBOC_INSTALL_CONFIG_DIR
  dirs.emplace_back(JFBOC_INSTALL_CONFIG_DIR);
#endif
  return dirs;
}

std::filesystem::path resolve_config_path(const std::string& arg) {
  const std::string prefix = "preset:";
  if (arg.rfind(prefix, 0) != 0) return arg;
  const std::string name = arg.substr(prefix.size());
  for (const auto& dir : preset_directories()) {
    const auto p = dir / (name + ".ini");
    if (std::filesystem::exists(p)) return p;
  }
  throw ConfigError("config: unknown preset '" + name + "'");
}

std::unique_ptr<ControlProblem> make_problem(const ProblemConfig& c) {
  switch (problem_bit(c.name)) {
    case kLqr: {
      DoubleIntegratorProblem::Options o;
      o.horizon = c.horizon;
      o.state_weight = c.state_weight;
      o.terminal_weight = c.terminal_weight;
      if (!c.target.empty()) o.target = to_vector(c.target);
      o.rho_half_width = c.rho_half_width;
      return std::make_unique<DoubleIntegratorProblem>(o);
    }
    case kQuad: {
      QuadrotorProblem::Options o;
      o.horizon = c.horizon;
      o.terminal_weight = c.terminal_weight;
      if (!c.target.empty()) o.target = to_vector(c.target);
      o.rho_position_center = to_vector(c.rho_position_center);
      o.rho_position_half_width = c.rho_position_half_width;
      o.rho_velocity_half_width = c.rho_velocity_half_width;
      o.rho_angle_half_width = c.rho_angle_half_width;
      o.rho_rate_half_width = c.rho_rate_half_width;
      return std::make_unique<QuadrotorProblem>(o);
    }
    default: {
      BicycleProblem::Options o;
      o.bikes = c.bikes;
      o.wheelbase = c.wheelbase;
      o.horizon = c.horizon;
      o.cost_scale = c.cost_scale;
      o.control_weight = c.control_weight;
      o.layout_radius = c.layout_radius;
      o.starts = c.starts;
      o.targets = c.targets;
      o.rho_position_half_width = c.rho_position_half_width;
      o.rho_speed_min = c.rho_speed_min;
      o.rho_speed_max = c.rho_speed_max;
      o.steering_margin = c.steering_margin;
      return std::make_unique<BicycleProblem>(o);
    }
  }
}

NetArchitecture make_architecture(const ExperimentConfig& config, const ControlProblem& problem) {
  NetArchitecture arch;
  arch.input_dim = problem.state_dim() + 1;
  arch.hidden_widths = config.net.hidden_widths;
  return arch;
}

Discretization make_discretization(const ProblemConfig& config) {
  if (config.steps < 1) throw ConfigError("config: problem.steps must be >= 1");
  Discretization d = Discretization::uniform(config.horizon, config.steps, config.scheme);
  d.rk4_resolve_stages = config.rk4_resolve_stages;
  return d;
}

TrainSettings make_train_settings(const ExperimentConfig& config, int workers) {
  TrainSettings s = config.train;
  s.init = config.net.init;
  s.workers = workers;
  return s;
}

}  // namespace jfboc::cli
