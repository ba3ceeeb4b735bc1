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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "jfboc/cli/checkpoint.hpp"
#include "jfboc/cli/commands.hpp"
#include "jfboc/cli/config.hpp"
#include "jfboc/cli/metrics.hpp"
#include "jfboc/cli/svg.hpp"
#include "jfboc/errors.hpp"

namespace jfboc::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("jfboc_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "jfboc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

const char* kSmallLqr = R"(
[problem]
name = lqr
steps = 10

[net]
hidden_widths = 8

[fixedpoint]
alpha = 0.5
tol = 1e-8
max_iter = 1000

[train]
epochs = 6
batch_size = 4
lr0 = 1e-2
seed = 3
)";

// ---------------------------------------------------------------- config

TEST(Config, BundledPresetsParse) {
  int found = 0;
  for (const auto& dir : preset_directories()) {
    if (!fs::is_directory(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() != ".ini") continue;
      SCOPED_TRACE(e.path().string());
      EXPECT_NO_THROW(load_config(e.path()));
      ++found;
    }
    break;
  }
  EXPECT_GE(found, 7);
}

TEST(Config, ExperimentPresetsCarryTheReportedHyperparameters) {
  const ExperimentConfig q = load_config(resolve_config_path("preset:quadrotor"));
  EXPECT_EQ(q.fixedpoint.alpha, 0.1);
  EXPECT_EQ(q.fixedpoint.tol, 1e-3);
  EXPECT_EQ(q.train.lr0, 1e-3);
  EXPECT_EQ(q.train.batch_size, 50);
  EXPECT_EQ(q.train.epochs, 600);
  EXPECT_EQ(q.train.runs, 3);
  EXPECT_EQ(q.train.scheduler.kind, SchedulerSettings::Kind::kConstant);
  EXPECT_EQ(q.net.hidden_widths, (std::vector<int>{128, 128, 128, 128}));

  const ExperimentConfig b5 = load_config(resolve_config_path("preset:bike5"));
  EXPECT_EQ(b5.problem.bikes, 5);
  EXPECT_EQ(b5.fixedpoint.alpha, 5e-4);
  EXPECT_EQ(b5.fixedpoint.tol, 1e-4);
  EXPECT_EQ(b5.train.lr0, 1e-2);
  EXPECT_EQ(b5.train.batch_size, 300);
  EXPECT_EQ(b5.train.epochs, 150);
  EXPECT_EQ(b5.train.scheduler.kind, SchedulerSettings::Kind::kReduceOnPlateau);

  const ExperimentConfig b20 = load_config(resolve_config_path("preset:bike20"));
  EXPECT_EQ(b20.problem.bikes, 20);
  EXPECT_EQ(b20.fixedpoint.alpha, 1e-4);
  EXPECT_EQ(b20.fixedpoint.tol, 1e-4);
  EXPECT_EQ(b20.train.lr0, 5e-3);
  EXPECT_EQ(b20.train.batch_size, 200);
  EXPECT_EQ(b20.train.epochs, 1500);
}

TEST(Config, RoundTripIsLossless) {
  ExperimentConfig c = parse_config(kSmallLqr);
  c.fixedpoint.alpha = 0.1 + 0.2;
  c.train.lr0 = 1e-300;
  c.problem.target = {1.0 / 3.0, -2.0 / 7.0};
  c.net.init.weight_gain = std::sqrt(2.0);
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_TRUE(same_config(back, c));
  EXPECT_EQ(back.fixedpoint.alpha, c.fixedpoint.alpha);
  EXPECT_EQ(back.train.lr0, c.train.lr0);
  EXPECT_EQ(back.problem.target, c.problem.target);
  EXPECT_EQ(serialize_config(back), text);

  for (const char* preset : {"quadrotor", "bike20", "tiny"}) {
    const ExperimentConfig p = load_config(resolve_config_path(std::string("preset:") + preset));
    EXPECT_TRUE(same_config(parse_config(serialize_config(p)), p)) << preset;
  }
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    parse_config("[train]\nepochz = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.epochz"), std::string::npos);
  }
}

TEST(Config, RejectsInapplicableAndMalformedValues) {
  EXPECT_THROW(parse_config("[problem]\nname = lqr\nbikes = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nname = rocket\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nepochs = ten\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nepochs = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nmode = magic\n"), ConfigError);
  EXPECT_THROW(parse_config("[fixedpoint]\nwarm_start = maybe\n"), ConfigError);
  EXPECT_THROW(parse_config("epochs = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nepochs = 3\nepochs = 4\n"), ConfigError);
  EXPECT_THROW(resolve_config_path("preset:does_not_exist"), ConfigError);
}

TEST(Config, CommentsAndDefaults) {
  const ExperimentConfig c = parse_config("# comment\n; another\n[net]\nhidden_widths = tiny\n");
  EXPECT_EQ(c.problem.name, "lqr");
  EXPECT_EQ(c.net.hidden_widths, (std::vector<int>{16, 16}));
}

// ---------------------------------------------------------------- checkpoint

Checkpoint sample_checkpoint() {
  const NetArchitecture arch{3, {5, 4}, Activation::kLogCosh};
  TrainSettings s;
  s.lr0 = 0.01;
  Checkpoint c{kCheckpointFormatVersion, "[train]\nepochs = 7\n", 2,
               initial_train_state(arch, s, 2)};
  c.state.adam.step = 11;
  c.state.adam.m = Vector::LinSpaced(static_cast<Eigen::Index>(arch.parameter_count()), -1, 1);
  c.state.adam.v = c.state.adam.m.cwiseAbs() / 3.0;
  c.state.scheduler.best = 0.123456789012345678;
  c.state.scheduler.bad_epochs = 4;
  c.state.next_epoch = 9;
  c.state.cum_runtime_s = 1.0 / 3.0;
  c.state.cum_work_units = 123456789012345;
  return c;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const Checkpoint d = decode_checkpoint(encode_checkpoint(c));
  EXPECT_EQ(d.format_version, c.format_version);
  EXPECT_EQ(d.config_text, c.config_text);
  EXPECT_EQ(d.run, 2);
  EXPECT_TRUE(d.state.theta.arch() == c.state.theta.arch());
  EXPECT_EQ(d.state.theta.values(), c.state.theta.values());
  EXPECT_EQ(d.state.adam.m, c.state.adam.m);
  EXPECT_EQ(d.state.adam.v, c.state.adam.v);
  EXPECT_EQ(d.state.adam.step, 11);
  EXPECT_EQ(d.state.scheduler.best, c.state.scheduler.best);
  EXPECT_EQ(d.state.scheduler.lr, c.state.scheduler.lr);
  EXPECT_EQ(d.state.scheduler.bad_epochs, 4);
  EXPECT_EQ(d.state.next_epoch, 9);
  EXPECT_EQ(d.state.cum_runtime_s, c.state.cum_runtime_s);
  EXPECT_EQ(d.state.cum_work_units, c.state.cum_work_units);
  EXPECT_EQ(encode_checkpoint(d), encode_checkpoint(c));
}

TEST(Checkpoint, NewerFormatIsRefused) {
  std::string bytes = encode_checkpoint(sample_checkpoint());
  bytes[8] = static_cast<char>(kCheckpointFormatVersion + 1);  // little-endian low byte
  EXPECT_THROW(decode_checkpoint(bytes), ConfigError);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const std::string bytes = encode_checkpoint(sample_checkpoint());
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), IoError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), IoError);
  EXPECT_THROW(load_checkpoint("/nonexistent/checkpoint.bin"), IoError);
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, RowsRoundTrip) {
  EpochMetrics m;
  m.epoch = 17;
  m.loss = 0.1 + 0.2;
  m.cum_runtime_s = 12.345678901234567;
  m.cum_work_units = 9876543210;
  m.peak_tape_bytes = 4242;
  m.lr = 5e-3;
  const EpochMetrics back = parse_metrics_row(format_metrics_row(m));
  EXPECT_EQ(back.epoch, m.epoch);
  EXPECT_EQ(back.loss, m.loss);
  EXPECT_EQ(back.cum_runtime_s, m.cum_runtime_s);
  EXPECT_EQ(back.cum_work_units, m.cum_work_units);
  EXPECT_EQ(back.peak_tape_bytes, m.peak_tape_bytes);
  EXPECT_EQ(back.lr, m.lr);

  m.loss = std::nan("");
  EXPECT_TRUE(parse_metrics_row(format_metrics_row(m)).failed);
}

TEST(Metrics, FileHeaderIsExactAndValidated) {
  const fs::path dir = scratch_dir("metrics");
  EpochMetrics m;
  write_metrics_csv(dir / "m.csv", {m, m});
  const std::string text = read_file(dir / "m.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,loss,cum_runtime_s,cum_work_units,peak_tape_bytes,lr");
  EXPECT_EQ(read_metrics_csv(dir / "m.csv").size(), 2u);

  write_file(dir / "bad.csv", "epoch,loss\n0,1\n");
  EXPECT_THROW(read_metrics_csv(dir / "bad.csv"), IoError);
  write_file(dir / "short.csv", std::string(kMetricsHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_metrics_csv(dir / "short.csv"), IoError);
  EXPECT_THROW(read_metrics_csv(dir / "missing.csv"), IoError);
}

// ---------------------------------------------------------------- svg

std::vector<std::string> attribute_values(const std::string& svg, const std::string& cls) {
  std::vector<std::string> out;
  const std::regex re("class=\"" + cls + "\" points=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator();
       ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

std::vector<std::string> split_points(const std::string& pts) {
  std::vector<std::string> out;
  std::stringstream ss(pts);
  std::string p;
  while (ss >> p) out.push_back(p);
  return out;
}

TEST(Svg, SingleRunBandDegeneratesToCurve) {
  PlotSeries s{"JFB", {0, 1, 2, 3}, {4, 3, 2.5, 2}, {4, 3, 2.5, 2}, {4, 3, 2.5, 2}};
  const std::string svg = render_panels({Panel{"Loss", "epoch", "loss", {s}, false}});
  const auto bands = attribute_values(svg, "band");
  const auto means = attribute_values(svg, "mean");
  ASSERT_EQ(bands.size(), 1u);
  ASSERT_EQ(means.size(), 1u);
  const auto band = split_points(bands[0]);
  const auto mean = split_points(means[0]);
  ASSERT_EQ(band.size(), 2 * mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    EXPECT_EQ(band[i], mean[i]);
    EXPECT_EQ(band[band.size() - 1 - i], mean[i]);
  }
}

TEST(Svg, LegendNamesEveryMode) {
  PlotSeries a{"JFB", {0, 1}, {2, 1}, {1.5, 0.5}, {2.5, 1.5}};
  PlotSeries b{"UNROLLED", {0, 1}, {2.1, 1.1}, {2, 1}, {2.2, 1.2}};
  const std::string svg = render_panels({Panel{"Loss", "epoch", "loss", {a, b}, true}});
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 2u);
  EXPECT_NE(svg.find(">JFB</text>"), std::string::npos);
  EXPECT_NE(svg.find(">UNROLLED</text>"), std::string::npos);
  EXPECT_EQ(escape_xml("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
}

TEST(Svg, TwentyBicyclesGiveTwentyMarkedPaths) {
  std::vector<Polyline2D> paths(20);
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k < 5; ++k) {
      paths[static_cast<std::size_t>(i)].x.push_back(i + 0.1 * k);
      paths[static_cast<std::size_t>(i)].y.push_back(-i + 0.2 * k);
    }
  }
  const std::string svg = render_trajectories(paths, "20 bicycles");
  EXPECT_EQ(count(svg, "class=\"trajectory\""), 20u);
  EXPECT_EQ(count(svg, "class=\"start-marker\""), 20u);
  EXPECT_EQ(count(svg, "class=\"end-marker\""), 20u);
}

// ---------------------------------------------------------------- commands

TEST(Commands, TrainWritesOneRowPerEpoch) {
  const fs::path dir = scratch_dir("train");
  write_file(dir / "c.ini", kSmallLqr);
  const CliResult r = run({"train", (dir / "c.ini").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_metrics_csv(dir / "out" / "run1" / "metrics.csv");
  ASSERT_EQ(rows.size(), 6u);
  for (int e = 0; e < 6; ++e) EXPECT_EQ(rows[static_cast<std::size_t>(e)].epoch, e);
  EXPECT_TRUE(fs::exists(dir / "out" / "run1" / "checkpoint.bin"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "config.ini"));
}

TEST(Commands, ReplicateRunsGetNumberedDirectories) {
  const fs::path dir = scratch_dir("runs");
  write_file(dir / "q.ini",
             "[problem]\nname = quadrotor\nsteps = 4\n[net]\nhidden_widths = 8\n"
             "[fixedpoint]\ntol = 1e-3\nmax_iter = 500\n[train]\nepochs = 2\nbatch_size = 2\n"
             "runs = 3\n[eval]\nsamples = 2\n");
  const CliResult r = run({"train", (dir / "q.ini").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int i = 1; i <= 3; ++i) {
    EXPECT_EQ(read_metrics_csv(dir / "out" / ("run" + std::to_string(i)) / "metrics.csv").size(),
              2u);
  }
  EXPECT_FALSE(fs::exists(dir / "out" / "run4"));
  const Table summary = read_csv_table(dir / "out" / "summary.csv");
  EXPECT_EQ(summary.rows.size(), 2u);
  EXPECT_GE(summary.column("loss_min"), 0);
}

TEST(Commands, ResumeReproducesUninterruptedRun) {
  const fs::path dir = scratch_dir("resume");
  write_file(dir / "full.ini", kSmallLqr);
  std::string half = kSmallLqr;
  half.replace(half.find("epochs = 6"), 10, "epochs = 3");
  write_file(dir / "half.ini", half);

  ASSERT_EQ(run({"train", (dir / "full.ini").string(), "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(run({"train", (dir / "half.ini").string(), "--out", (dir / "b").string()}).code, 0);
  const CliResult r =
      run({"train", (dir / "full.ini").string(), "--out", (dir / "b").string(), "--resume"});
  ASSERT_EQ(r.code, 0) << r.err;

  const auto a = read_metrics_csv(dir / "a" / "run1" / "metrics.csv");
  const auto b = read_metrics_csv(dir / "b" / "run1" / "metrics.csv");
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t e = 0; e < a.size(); ++e) {
    EXPECT_EQ(a[e].epoch, b[e].epoch);
    EXPECT_EQ(a[e].loss, b[e].loss);
    EXPECT_EQ(a[e].cum_work_units, b[e].cum_work_units);
    EXPECT_EQ(a[e].peak_tape_bytes, b[e].peak_tape_bytes);
    EXPECT_EQ(a[e].lr, b[e].lr);
  }
  const Checkpoint ca = load_checkpoint(dir / "a" / "run1" / "checkpoint.bin");
  const Checkpoint cb = load_checkpoint(dir / "b" / "run1" / "checkpoint.bin");
  EXPECT_EQ(ca.state.theta.values(), cb.state.theta.values());
  EXPECT_EQ(ca.state.adam.m, cb.state.adam.m);

  std::string other = kSmallLqr;
  other.replace(other.find("seed = 3"), 8, "seed = 4");
  write_file(dir / "other.ini", other);
  EXPECT_EQ(run({"train", (dir / "other.ini").string(), "--out", (dir / "b").string(), "--resume"})
                .code,
            1);
}

TEST(Commands, ExitCodes) {
  const fs::path dir = scratch_dir("exit");
  write_file(dir / "bad.ini", "[train]\nlearning_rate = 1\n");
  const CliResult bad = run({"train", (dir / "bad.ini").string(), "--out", dir.string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("train.learning_rate"), std::string::npos);

  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"train", (dir / "absent.ini").string()}).code, 2);
  write_file(dir / "c.ini", kSmallLqr);
  EXPECT_EQ(run({"check", (dir / "c.ini").string(), (dir / "absent.bin").string()}).code, 2);
  EXPECT_EQ(run({"eval", (dir / "c.ini").string(), (dir / "absent.bin").string()}).code, 2);
  EXPECT_EQ(run({"plot", "--series", (dir / "nothing").string(), "--out", dir.string()}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Commands, DivergentTrainingExitsWithRuntimeFailure) {
  const fs::path dir = scratch_dir("diverge");
  std::string text = kSmallLqr;
  text.replace(text.find("alpha = 0.5"), 11, "alpha = 3.0");
  text.replace(text.find("epochs = 6"), 10, "epochs = 20");
  write_file(dir / "c.ini", text);
  const CliResult r = run({"train", (dir / "c.ini").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("aborted"), std::string::npos);
}

TEST(Commands, ArchitectureMismatchIsAConfigError) {
  const fs::path dir = scratch_dir("arch");
  write_file(dir / "c.ini", kSmallLqr);
  ASSERT_EQ(run({"train", (dir / "c.ini").string(), "--out", (dir / "o").string()}).code, 0);
  std::string wide = kSmallLqr;
  wide.replace(wide.find("hidden_widths = 8"), 17, "hidden_widths = 9");
  write_file(dir / "w.ini", wide);
  const CliResult r = run({"eval", (dir / "w.ini").string(),
                           (dir / "o" / "run1" / "checkpoint.bin").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("architecture"), std::string::npos);
}

TEST(Commands, EvalIsDeterministic) {
  const fs::path dir = scratch_dir("eval");
  write_file(dir / "c.ini", kSmallLqr);
  ASSERT_EQ(run({"train", (dir / "c.ini").string(), "--out", (dir / "o").string()}).code, 0);
  const std::string ck = (dir / "o" / "run1" / "checkpoint.bin").string();
  const CliResult a = run({"eval", (dir / "c.ini").string(), ck, "--samples", "16"});
  const CliResult b = run({"eval", (dir / "c.ini").string(), ck, "--samples", "16"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("mean_cost ", 0), 0u);
}

TEST(Commands, CheckOnLqrReportsUnitCosine) {
  const fs::path dir = scratch_dir("check");
  write_file(dir / "c.ini", kSmallLqr);
  ASSERT_EQ(run({"train", (dir / "c.ini").string(), "--out", (dir / "o").string()}).code, 0);
  const CliResult r = run({"check", (dir / "c.ini").string(),
                           (dir / "o" / "run1" / "checkpoint.bin").string(), "--dense",
                           "--report", (dir / "report.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = read_file(dir / "report.csv");
  EXPECT_EQ(text.rfind("quantity,value\n", 0), 0u);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(text, m, std::regex("descent_cosine,([^\\n]+)")));
  EXPECT_NEAR(std::stod(m[1]), 1.0, 1e-9);
  EXPECT_NE(text.find("dense_checks,1"), std::string::npos);
}

TEST(Commands, CheckSkipsDenseMatricesWithoutTheFlag) {
  const fs::path dir = scratch_dir("check_large");
  std::string text = kSmallLqr;
  text.replace(text.find("hidden_widths = 8"), 17, "hidden_widths = standard");
  write_file(dir / "c.ini", text);
  const ExperimentConfig cfg = parse_config(text);
  const auto problem = make_problem(cfg.problem);
  save_checkpoint(dir / "ck.bin",
                  Checkpoint{kCheckpointFormatVersion, serialize_config(cfg), 0,
                             initial_train_state(make_architecture(cfg, *problem),
                                                 make_train_settings(cfg, 1), 0)});
  const CliResult r = run({"check", (dir / "c.ini").string(), (dir / "ck.bin").string(),
                           "--samples", "1", "--pairs", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("notice:"), std::string::npos);
  EXPECT_NE(read_file(dir / "theory_report.csv").find("dense_checks,0"), std::string::npos);
}

TEST(Commands, PlotRendersCurvesAndBicycleTrajectories) {
  const fs::path dir = scratch_dir("plot");
  write_file(dir / "b.ini",
             "[problem]\nname = bicycle\nbikes = 3\nsteps = 5\n[net]\nhidden_widths = 8\n"
             "[fixedpoint]\nalpha = 0.1\ntol = 1e-6\nmax_iter = 2000\n[train]\nepochs = 2\n"
             "batch_size = 2\nruns = 2\n[eval]\nsamples = 2\n");
  ASSERT_EQ(run({"train", (dir / "b.ini").string(), "--out", (dir / "jfb").string()}).code, 0);
  const CliResult r = run({"plot", "--series", "JFB=" + (dir / "jfb").string(), "--out",
                           (dir / "plots").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string curves = read_file(dir / "plots" / "curves.svg");
  EXPECT_EQ(count(curves, "class=\"panel\""), 4u);
  EXPECT_NE(curves.find("tracked tape bytes"), std::string::npos);
  EXPECT_NE(curves.find("runtime (min)"), std::string::npos);
  const std::string traj = read_file(dir / "plots" / "trajectory.svg");
  EXPECT_EQ(count(traj, "class=\"trajectory\""), 3u);
  EXPECT_EQ(count(traj, "class=\"start-marker\""), 3u);
}

TEST(Commands, EnvironmentOverridesOutputDirectory) {
  const fs::path dir = scratch_dir("env");
  write_file(dir / "c.ini", kSmallLqr);
  ::setenv("JFBOC_OUT_DIR", (dir / "from_env").c_str(), 1);
  ::setenv("JFBOC_WORKERS", "2", 1);
  const CliResult r = run({"train", (dir / "c.ini").string()});
  ::unsetenv("JFBOC_OUT_DIR");
  ::unsetenv("JFBOC_WORKERS");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "from_env" / "run1" / "metrics.csv"));
}

}  // namespace
}  // namespace jfboc::cli
