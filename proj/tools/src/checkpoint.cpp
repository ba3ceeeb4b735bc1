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

#include "jfboc/cli/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "jfboc/errors.hpp"

namespace jfboc::cli {
namespace {

constexpr char kMagic[8] = {'J', 'F', 'B', 'O', 'C', 'C', 'K', 'P'};

class Writer {
 public:
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  void i64(std::int64_t x) { u64(static_cast<std::uint64_t>(x)); }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void vec(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IoError("checkpoint: truncated file");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return x;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  int i32() {
    const std::int64_t x = i64();
    if (x < INT32_MIN || x > INT32_MAX) throw IoError("checkpoint: integer out of range");
    return static_cast<int>(x);
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Vector vec() {
    const std::uint64_t n = u64();
    need(n * 8);
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u64(c.format_version);
  w.str(c.config_text);
  w.i64(c.run);

  const NetArchitecture& arch = c.state.theta.arch();
  w.i64(arch.input_dim);
  w.u64(arch.hidden_widths.size());
  for (int h : arch.hidden_widths) w.i64(h);
  w.str(to_string(arch.activation));
  w.vec(c.state.theta.values());

  const AdamState& a = c.state.adam;
  w.f64(a.beta1);
  w.f64(a.beta2);
  w.f64(a.eps);
  w.i64(a.step);
  w.vec(a.m);
  w.vec(a.v);

  w.f64(c.state.scheduler.lr);
  w.f64(c.state.scheduler.best);
  w.i64(c.state.scheduler.bad_epochs);

  w.i64(c.state.next_epoch);
  w.f64(c.state.cum_runtime_s);
  w.i64(c.state.cum_work_units);
  w.i64(c.state.consecutive_failures);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
    throw IoError("checkpoint: bad magic header");
  }
  const std::uint64_t version = r.u64();
  if (version > kCheckpointFormatVersion) {
    throw ConfigError("checkpoint: format_version " + std::to_string(version) +
                      " is newer than the supported version " +
                      std::to_string(kCheckpointFormatVersion));
  }
  if (version == 0) throw IoError("checkpoint: invalid format_version 0");
  std::string config_text = r.str();
  const int run = r.i32();

  NetArchitecture arch;
  arch.input_dim = r.i32();
  const std::uint64_t layers = r.u64();
  if (layers > 4096) throw IoError("checkpoint: implausible layer count");
  for (std::uint64_t i = 0; i < layers; ++i) arch.hidden_widths.push_back(r.i32());
  arch.activation = activation_from_string(r.str());
  arch.validate();
  Vector values = r.vec();
  if (static_cast<std::size_t>(values.size()) != arch.parameter_count()) {
    throw IoError("checkpoint: parameter count does not match the architecture");
  }

  Checkpoint c{version, std::move(config_text), run,
               TrainState{ParamVector(arch, std::move(values)), AdamState{}, SchedulerState{}, 0,
                          0.0, 0, 0}};
  AdamState& a = c.state.adam;
  a.beta1 = r.f64();
  a.beta2 = r.f64();
  a.eps = r.f64();
  a.step = r.i64();
  a.m = r.vec();
  a.v = r.vec();

  c.state.scheduler.lr = r.f64();
  c.state.scheduler.best = r.f64();
  c.state.scheduler.bad_epochs = r.i32();

  c.state.next_epoch = r.i32();
  c.state.cum_runtime_s = r.f64();
  c.state.cum_work_units = r.i64();
  c.state.consecutive_failures = r.i32();
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("checkpoint: write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("checkpoint: cannot rename to " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace jfboc::cli
