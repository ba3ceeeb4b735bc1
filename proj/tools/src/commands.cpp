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

#include "jfboc/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>

#include "jfboc/cli/checkpoint.hpp"
#include "jfboc/cli/metrics.hpp"
#include "jfboc/cli/svg.hpp"
#include "jfboc/errors.hpp"
#include "jfboc/theory.hpp"

namespace jfboc::cli {
namespace fs = std::filesystem;

namespace {

std::string g6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

struct Loaded {
  ExperimentConfig config;
  std::unique_ptr<ControlProblem> problem;
  NetArchitecture arch;
};

Loaded load(const std::string& config_arg) {
  Loaded l;
  l.config = load_config(resolve_config_path(config_arg));
  l.problem = make_problem(l.config.problem);
  l.arch = make_architecture(l.config, *l.problem);
  return l;
}

void require_architecture(const NetArchitecture& expected, const ParamVector& theta) {
  if (!(theta.arch() == expected)) {
    throw ConfigError("checkpoint architecture does not match the config (expected " +
                      std::to_string(expected.parameter_count()) + " parameters, checkpoint has " +
                      std::to_string(theta.size()) + ")");
  }
}

std::vector<EpochMetrics> rows_before(const fs::path& path, int next_epoch) {
  std::vector<EpochMetrics> kept;
  if (!fs::exists(path)) return kept;
  for (const EpochMetrics& m : read_metrics_csv(path)) {
    if (m.epoch < next_epoch) kept.push_back(m);
  }
  return kept;
}

std::vector<fs::path> run_metrics_files(const fs::path& dir) {
  std::vector<std::pair<int, fs::path>> found;
  const std::regex pattern("run([0-9]+)");
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      std::smatch match;
      const std::string name = entry.path().filename().string();
      if (entry.is_directory() && std::regex_match(name, match, pattern) &&
          fs::exists(entry.path() / "metrics.csv")) {
        found.emplace_back(std::stoi(match[1]), entry.path() / "metrics.csv");
      }
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<fs::path> files;
  for (auto& f : found) files.push_back(f.second);
  return files;
}

std::string label_for(const fs::path& dir) {
  const fs::path cfg = dir / "config.ini";
  if (fs::exists(cfg)) {
    try {
      std::string mode = to_string(load_config(cfg).train.mode);
      std::transform(mode.begin(), mode.end(), mode.begin(), ::toupper);
      return mode;
    } catch (const Error&) {
    }
  }
  return dir.filename().string();
}

PlotSeries series_from(const std::string& label, const std::vector<std::vector<EpochMetrics>>& runs,
                       double (*x_of)(const EpochMetrics&), double (*y_of)(const EpochMetrics&)) {
  PlotSeries s;
  s.label = label;
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  for (std::size_t e = 0; e < len; ++e) {
    double x = 0.0, sum = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : runs) {
      x += x_of(r[e]);
      const double y = y_of(r[e]);
      sum += y;
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    const double n = static_cast<double>(runs.size());
    s.x.push_back(x / n);
    s.mean.push_back(std::clamp(sum / n, lo, hi));
    s.lo.push_back(lo);
    s.hi.push_back(hi);
  }
  return s;
}

std::vector<Polyline2D> bicycle_paths(const Table& table) {
  std::vector<Polyline2D> paths;
  for (int i = 1;; ++i) {
    const int xc = table.column("x_" + std::to_string(i));
    const int yc = table.column("y_" + std::to_string(i));
    if (xc < 0 || yc < 0) break;
    Polyline2D p;
    for (const auto& row : table.rows) {
      p.x.push_back(row[static_cast<std::size_t>(xc)]);
      p.y.push_back(row[static_cast<std::size_t>(yc)]);
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace

int cmd_train(const TrainCommand& cmd, std::ostream& out) {
  if (cmd.checkpoint_every < 1) throw ConfigError("--checkpoint-every must be >= 1");
  Loaded l = load(cmd.config);
  const ExperimentConfig& cfg = l.config;
  const Discretization disc = make_discretization(cfg.problem);
  TrainSettings settings = make_train_settings(cfg, cmd.workers);
  settings.verbose = cmd.verbose;

  ensure_dir(cmd.out_dir);
  write_text(cmd.out_dir / "config.ini", serialize_config(cfg));

  std::vector<std::vector<EpochMetrics>> histories;
  bool any_aborted = false;
  for (int r = 0; r < settings.runs; ++r) {
    const fs::path dir = cmd.out_dir / ("run" + std::to_string(r + 1));
    ensure_dir(dir);
    const fs::path ckpt_path = dir / "checkpoint.bin";
    const fs::path metrics_path = dir / "metrics.csv";

    TrainState state = initial_train_state(l.arch, settings, r);
    std::vector<EpochMetrics> previous;
    if (cmd.resume && fs::exists(ckpt_path)) {
      Checkpoint ck = load_checkpoint(ckpt_path);
      // Only the epoch budget may change between the original run and the resume.
      ExperimentConfig saved = parse_config(ck.config_text);
      saved.train.epochs = cfg.train.epochs;
      if (!same_config(saved, cfg)) {
        throw ConfigError("cannot resume " + dir.string() + ": checkpoint config differs");
      }
      if (ck.run != r) throw ConfigError("checkpoint in " + dir.string() + " is for another run");
      require_architecture(l.arch, ck.state.theta);
      state = std::move(ck.state);
      previous = rows_before(metrics_path, state.next_epoch);
    }
    write_metrics_csv(metrics_path, previous);
    MetricsWriter writer(metrics_path);

    const std::string config_text = serialize_config(cfg);
    const auto on_epoch = [&](int run, const EpochMetrics& m, const TrainState& st) {
      writer.append(m);
      if ((m.epoch + 1) % cmd.checkpoint_every == 0 || m.epoch + 1 == settings.epochs) {
        save_checkpoint(ckpt_path, Checkpoint{kCheckpointFormatVersion, config_text, run, st});
      }
    };
    RunResult result = train_run(*l.problem, disc, cfg.fixedpoint, settings, r, std::move(state),
                                 on_epoch);
    save_checkpoint(ckpt_path,
                    Checkpoint{kCheckpointFormatVersion, config_text, r, result.final_state});

    std::vector<EpochMetrics> history = previous;
    history.insert(history.end(), result.history.begin(), result.history.end());
    histories.push_back(history);

    out << "run " << (r + 1) << ": " << history.size() << " epochs";
    if (!history.empty()) out << ", final loss " << g6(history.back().loss);
    if (result.aborted) {
      any_aborted = true;
      out << ", " << result.abort_reason << '\n';
      continue;
    }
    try {
      const Vector x0 = l.problem->sample_initial(cfg.eval.seed, 1).front();
      const RolloutResult traj = rollout(result.final_state.theta, x0, *l.problem, disc,
                                         cfg.fixedpoint);
      write_trajectory_csv(dir / "trajectory.csv", *l.problem, traj.trajectory);
      const double cost = evaluate(result.final_state.theta, *l.problem, disc, cfg.fixedpoint,
                                   cfg.eval.samples, cfg.eval.seed, cmd.workers);
      out << ", held-out cost " << g6(cost);
    } catch (const Error& e) {
      any_aborted = true;
      out << ", evaluation failed: " << e.what();
    }
    out << '\n';
  }
  write_summary_csv(cmd.out_dir / "summary.csv", histories);
  out << "wrote " << cmd.out_dir.string() << '\n';
  return any_aborted ? kExitRuntime : kExitOk;
}

int cmd_eval(const EvalCommand& cmd, std::ostream& out) {
  Loaded l = load(cmd.config);
  const Checkpoint ck = load_checkpoint(cmd.checkpoint);
  require_architecture(l.arch, ck.state.theta);
  const double cost =
      evaluate(ck.state.theta, *l.problem, make_discretization(l.config.problem),
               l.config.fixedpoint, cmd.samples.value_or(l.config.eval.samples),
               cmd.seed.value_or(l.config.eval.seed), cmd.workers);
  out << "mean_cost " << g17(cost) << '\n';
  return kExitOk;
}

int cmd_check(const CheckCommand& cmd, std::ostream& out) {
  Loaded l = load(cmd.config);
  const Checkpoint ck = load_checkpoint(cmd.checkpoint);
  require_architecture(l.arch, ck.state.theta);

  TheoryCheckSettings ts;
  ts.contraction_pairs = cmd.pairs;
  ts.samples = cmd.samples;
  ts.seed = cmd.seed;
  ts.workers = cmd.workers;
  ts.dense = cmd.dense;
  const TheoryReport r = theory_report(ck.state.theta, *l.problem,
                                       make_discretization(l.config.problem),
                                       l.config.fixedpoint, ts);

  std::vector<std::pair<std::string, std::string>> rows = {
      {"gamma_hat", g17(r.gamma_hat)},
      {"eta_hat", g17(r.eta_hat)},
      {"dense_checks", r.dense_checks ? "1" : "0"},
      {"sigma_min", g17(r.sigma_min)},
      {"sigma_max", g17(r.sigma_max)},
      {"lambda_minus", g17(r.lambda_minus)},
      {"lambda_plus", g17(r.lambda_plus)},
      {"beta_hat", g17(r.beta_hat)},
      {"condition_ok", r.condition_ok ? "1" : "0"},
      {"duality_residual", g17(r.duality_residual)},
      {"c_surrogate", g17(r.c_surrogate)},
      {"steps_checked", std::to_string(r.steps_checked)},
      {"inner_product_bound_holds", std::to_string(r.inner_product_bound_holds)},
      {"variation_holds", std::to_string(r.variation_holds)},
      {"C_v_norm", g17(r.C_v_norm)},
      {"C_w_norm", g17(r.C_w_norm)},
      {"max_variation_v", g17(r.max_variation_v)},
      {"max_variation_w", g17(r.max_variation_w)},
      {"descent_inner_product", g17(r.descent.inner_product)},
      {"descent_cosine", g17(r.descent.cosine)},
      {"engine_inner_product", g17(r.descent.engine_inner_product)},
      {"engine_cosine", g17(r.descent.engine_cosine)},
      {"centered_identity_residual", g17(r.descent.centered_identity_residual)},
  };
  const fs::path csv =
      cmd.report_csv.empty() ? cmd.checkpoint.parent_path() / "theory_report.csv" : cmd.report_csv;
  std::string text = "quantity,value\n";
  for (const auto& [k, v] : rows) text += k + "," + v + "\n";
  write_text(csv, text);

  out << "contraction gamma_hat      " << g6(r.gamma_hat) << '\n';
  out << "cotangent floor eta_hat    " << g6(r.eta_hat) << '\n';
  if (r.dense_checks) {
    out << "sigma(M) in                [" << g6(r.sigma_min) << ", " << g6(r.sigma_max) << "]\n";
    out << "lambda_-, lambda_+         " << g6(r.lambda_minus) << ", " << g6(r.lambda_plus)
        << '\n';
    out << "lambda_- > gamma lambda_+  " << (r.condition_ok ? "yes" : "no") << '\n';
    out << "per-step bound holds       " << r.inner_product_bound_holds << " / " << r.steps_checked << '\n';
    out << "variation bound holds      " << r.variation_holds << " / " << r.steps_checked
        << '\n';
  }
  if (!r.notice.empty()) out << "notice: " << r.notice << '\n';
  out << "descent cosine             " << g17(r.descent.cosine) << '\n';
  out << "engine cosine              " << g17(r.descent.engine_cosine) << '\n';
  out << "report written to " << csv.string() << '\n';
  return kExitOk;
}

int cmd_plot(const PlotCommand& cmd, std::ostream& out) {
  if (cmd.series.empty() && cmd.trajectories.empty()) {
    throw ConfigError("plot: nothing to plot (give --series or --trajectory)");
  }
  ensure_dir(cmd.out_dir);

  std::vector<Panel> panels(4);
  panels[0] = {"Loss", "epoch", "loss", {}, true};
  panels[1] = {"Loss vs runtime", "cumulative runtime (min)", "loss", {}, true};
  panels[2] = {"Loss vs work", "cumulative work units", "loss", {}, true};
  panels[3] = {"Memory", "epoch", "tracked tape bytes", {}, false};

  std::vector<fs::path> trajectories = cmd.trajectories;
  for (const std::string& entry : cmd.series) {
    const auto eq = entry.find('=');
    const fs::path dir = eq == std::string::npos ? fs::path(entry) : fs::path(entry.substr(eq + 1));
    const std::string label = eq == std::string::npos ? label_for(dir) : entry.substr(0, eq);
    const auto files = run_metrics_files(dir);
    if (files.empty()) throw IoError("plot: no run*/metrics.csv under " + dir.string());
    std::vector<std::vector<EpochMetrics>> runs;
    for (const fs::path& f : files) {
      runs.push_back(read_metrics_csv(f));
      if (runs.back().empty()) throw IoError("plot: " + f.string() + " has no data rows");
    }
    const auto epoch = [](const EpochMetrics& m) { return static_cast<double>(m.epoch); };
    const auto loss = [](const EpochMetrics& m) { return m.loss; };
    const auto minutes = [](const EpochMetrics& m) { return m.cum_runtime_s / 60.0; };
    const auto work = [](const EpochMetrics& m) { return static_cast<double>(m.cum_work_units); };
    const auto tape = [](const EpochMetrics& m) { return static_cast<double>(m.peak_tape_bytes); };
    panels[0].series.push_back(series_from(label, runs, epoch, loss));
    panels[1].series.push_back(series_from(label, runs, minutes, loss));
    panels[2].series.push_back(series_from(label, runs, work, loss));
    panels[3].series.push_back(series_from(label, runs, epoch, tape));

    const fs::path traj = files.front().parent_path() / "trajectory.csv";
    if (cmd.trajectories.empty() && fs::exists(traj)) trajectories.push_back(traj);
  }
  if (!cmd.series.empty()) {
    const fs::path path = cmd.out_dir / "curves.svg";
    write_text(path, render_panels(panels, 2));
    out << "wrote " << path.string() << '\n';
  }

  int index = 0;
  for (const fs::path& t : trajectories) {
    const Table table = read_csv_table(t);
    const auto paths = bicycle_paths(table);
    if (paths.empty()) {
      if (!cmd.trajectories.empty()) {
        throw IoError("plot: " + t.string() + " has no x_i/y_i columns");
      }
      continue;
    }
    if (table.rows.size() < 2) throw IoError("plot: " + t.string() + " has fewer than 2 rows");
    const std::string name = trajectories.size() == 1
                                 ? "trajectory.svg"
                                 : "trajectory_" + std::to_string(++index) + ".svg";
    const std::string title =
        cmd.title.empty() ? std::to_string(paths.size()) + " bicycle trajectories" : cmd.title;
    write_text(cmd.out_dir / name, render_trajectories(paths, title));
    out << "wrote " << (cmd.out_dir / name).string() << '\n';
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train and analyse fixed-point feedback controllers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "jfboc 0.1.0");

  int workers = 1;
  fs::path out_dir = "jfboc_out";
  const auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", workers, "Rollout worker threads")
        ->envname("JFBOC_WORKERS")
        ->check(CLI::PositiveNumber);
  };

  TrainCommand train;
  CLI::App* train_app = app.add_subcommand("train", "Train every replicate run of a config");
  train_app->add_option("config", train.config, "Config file or preset:NAME")->required();
  train_app->add_option("--out", out_dir, "Output directory")->envname("JFBOC_OUT_DIR");
  train_app->add_flag("--resume", train.resume, "Continue from run*/checkpoint.bin");
  train_app->add_flag("--verbose", train.verbose, "Log clipping and failed epochs");
  train_app->add_option("--checkpoint-every", train.checkpoint_every, "Epochs between checkpoints")
      ->check(CLI::PositiveNumber);
  add_workers(train_app);

  EvalCommand eval;
  int eval_samples = 0;
  std::uint64_t eval_seed = 0;
  CLI::App* eval_app = app.add_subcommand("eval", "Held-out mean cost of a checkpoint");
  eval_app->add_option("config", eval.config, "Config file or preset:NAME")->required();
  eval_app->add_option("checkpoint", eval.checkpoint, "Checkpoint file")->required();
  CLI::Option* samples_opt = eval_app->add_option("--samples", eval_samples, "Number of samples")
                                 ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = eval_app->add_option("--seed", eval_seed, "Sampling seed");
  add_workers(eval_app);

  CheckCommand check;
  CLI::App* check_app = app.add_subcommand("check", "Numerical checks of the descent conditions");
  check_app->add_option("config", check.config, "Config file or preset:NAME")->required();
  check_app->add_option("checkpoint", check.checkpoint, "Checkpoint file")->required();
  check_app->add_option("--report", check.report_csv, "CSV output path");
  check_app->add_flag("--dense", check.dense, "Form dense dT/dtheta (small networks only)");
  check_app->add_option("--pairs", check.pairs, "Contraction sample pairs")
      ->check(CLI::PositiveNumber);
  check_app->add_option("--samples", check.samples, "Trajectories to examine")
      ->check(CLI::PositiveNumber);
  check_app->add_option("--seed", check.seed, "Sampling seed");
  add_workers(check_app);

  PlotCommand plot;
  CLI::App* plot_app = app.add_subcommand("plot", "Render SVG curves and trajectories");
  plot_app->add_option("--series", plot.series, "LABEL=DIR or DIR with run*/metrics.csv");
  plot_app->add_option("--trajectory", plot.trajectories, "trajectory.csv files");
  plot_app->add_option("--out", out_dir, "Output directory")->envname("JFBOC_OUT_DIR");
  plot_app->add_option("--title", plot.title, "Trajectory plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_app->parsed()) {
      train.out_dir = out_dir;
      train.workers = workers;
      return cmd_train(train, out);
    }
    if (eval_app->parsed()) {
      if (*samples_opt) eval.samples = eval_samples;
      if (*seed_opt) eval.seed = eval_seed;
      eval.workers = workers;
      return cmd_eval(eval, out);
    }
    if (check_app->parsed()) {
      check.workers = workers;
      return cmd_check(check, out);
    }
    plot.out_dir = out_dir;
    return cmd_plot(plot, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace jfboc::cli
