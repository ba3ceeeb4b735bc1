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

#include "jfboc/valuenet.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "jfboc/errors.hpp"

namespace jfboc {

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::kLogCosh:
      return "logcosh";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "logcosh") return Activation::kLogCosh;
  throw ConfigError("unknown activation '" + name + "'");
}

namespace logcosh {

double value(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double first(double x) { return std::tanh(x); }

double second(double x) {
  const double th = std::tanh(x);
  return 1.0 - th * th;
}

}  // namespace logcosh

NetArchitecture NetArchitecture::tiny(int input_dim) {
  return NetArchitecture{input_dim, {16, 16}, Activation::kLogCosh};
}

NetArchitecture NetArchitecture::standard(int input_dim) {
  return NetArchitecture{input_dim, {128, 128, 128, 128}, Activation::kLogCosh};
}

void NetArchitecture::validate() const {
  if (input_dim < 2) {
    throw ConfigError("network input_dim must be >= 2 (time plus at least one state)");
  }
  for (int w : hidden_widths) {
    if (w < 1) throw ConfigError("hidden widths must be positive");
  }
}

std::vector<LayerShape> NetArchitecture::layers() const {
  std::vector<LayerShape> shapes;
  shapes.reserve(hidden_widths.size() + 1);
  std::size_t offset = 0;
  int fan_in = input_dim;
  auto push = [&](int fan_out) {
    LayerShape s;
    s.rows = fan_out;
    s.cols = fan_in;
    s.weight_offset = offset;
    offset += static_cast<std::size_t>(fan_out) * static_cast<std::size_t>(fan_in);
    s.bias_offset = offset;
    offset += static_cast<std::size_t>(fan_out);
    shapes.push_back(s);
    fan_in = fan_out;
  };
  for (int w : hidden_widths) push(w);
  push(1);
  return shapes;
}

std::size_t NetArchitecture::parameter_count() const {
  const auto shapes = layers();
  return shapes.back().bias_offset + 1;
}

ParamVector::ParamVector(NetArchitecture arch, Vector values)
    : arch_(std::move(arch)), layers_(arch_.layers()), values_(std::move(values)) {
  arch_.validate();
  if (values_.size() != static_cast<Eigen::Index>(arch_.parameter_count())) {
    throw DimensionError("parameter vector has " + std::to_string(values_.size()) +
                         " entries, architecture needs " +
                         std::to_string(arch_.parameter_count()));
  }
  if (!values_.allFinite()) throw DivergenceError("parameter vector has non-finite entries");
}

ParamVector ParamVector::zeros(const NetArchitecture& arch) {
  return ParamVector(arch, Vector::Zero(static_cast<Eigen::Index>(arch.parameter_count())));
}

Eigen::Map<const RowMajorMatrix> ParamVector::weights(std::size_t l) const {
  const LayerShape& s = layers_[l];
  return {values_.data() + s.weight_offset, s.rows, s.cols};
}

Eigen::Map<const Vector> ParamVector::bias(std::size_t l) const {
  const LayerShape& s = layers_[l];
  return {values_.data() + s.bias_offset, s.rows};
}

void ParamVector::set_values(const Vector& values) {
  if (values.size() != values_.size()) {
    throw DimensionError("set_values: size mismatch");
  }
  if (!values.allFinite()) throw DivergenceError("parameter update produced non-finite entries");
  values_ = values;
}

ParamVector init_params(const NetArchitecture& arch, std::uint64_t seed, const InitScheme& scheme) {
  if (!(scheme.weight_gain >= 0.0) || !(scheme.hidden_bias_bound >= 0.0)) {
    throw ConfigError("init scheme bounds must be non-negative");
  }
  ParamVector theta = ParamVector::zeros(arch);
  Vector values = theta.values();
  std::mt19937_64 rng(seed);
  const std::vector<LayerShape> layers = arch.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerShape& s = layers[l];
    const double bound = scheme.weight_gain / std::sqrt(static_cast<double>(s.cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n = static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
    for (std::size_t i = 0; i < n; ++i) values[static_cast<Eigen::Index>(s.weight_offset + i)] = dist(rng);
    if (l + 1 == layers.size() || scheme.hidden_bias_bound == 0.0) continue;
    std::uniform_real_distribution<double> bias(-scheme.hidden_bias_bound, scheme.hidden_bias_bound);
    for (int i = 0; i < s.rows; ++i) {
      values[static_cast<Eigen::Index>(s.bias_offset) + i] = bias(rng);
    }
  }
  theta.set_values(values);
  return theta;
}

namespace {

// Pre-activations and activations of the hidden layers; post[0] is the input.
struct ForwardCache {
  std::vector<Vector> pre;
  std::vector<Vector> post;
};

Vector make_input(const ParamVector& theta, double t, const Vector& z) {
  if (z.size() + 1 != theta.arch().input_dim) {
    throw DimensionError("state has dimension " + std::to_string(z.size()) + ", network expects " +
                         std::to_string(theta.arch().input_dim - 1));
  }
  Vector x(z.size() + 1);
  x[0] = t;
  x.tail(z.size()) = z;
  return x;
}

void check_direction(const Vector& z, const Vector& w) {
  if (w.size() != z.size()) {
    throw DimensionError("direction has dimension " + std::to_string(w.size()) + ", state has " +
                         std::to_string(z.size()));
  }
}

ForwardCache forward(const ParamVector& theta, Vector x) {
  const std::size_t hidden = theta.layer_count() - 1;
  ForwardCache cache;
  cache.pre.reserve(hidden);
  cache.post.reserve(hidden + 1);
  cache.post.push_back(std::move(x));
  for (std::size_t l = 0; l < hidden; ++l) {
    Vector a = theta.weights(l) * cache.post[l] + theta.bias(l);
    Vector h = a.unaryExpr([](double v) { return logcosh::value(v); });
    cache.pre.push_back(std::move(a));
    cache.post.push_back(std::move(h));
  }
  return cache;
}

Eigen::Map<const Vector> output_weights(const ParamVector& theta) {
  const std::size_t out = theta.layer_count() - 1;
  const LayerShape& s = theta.layer_shape(out);
  return {theta.values().data() + s.weight_offset, s.cols};
}

}  // namespace

double phi(const ParamVector& theta, double t, const Vector& z) {
  const ForwardCache cache = forward(theta, make_input(theta, t, z));
  const std::size_t out = theta.layer_count() - 1;
  return output_weights(theta).dot(cache.post.back()) + theta.bias(out)[0];
}

Vector grad_z_phi(const ParamVector& theta, double t, const Vector& z) {
  const ForwardCache cache = forward(theta, make_input(theta, t, z));
  Vector g = output_weights(theta);
  for (std::size_t l = cache.pre.size(); l-- > 0;) {
    const Vector delta = g.cwiseProduct(cache.pre[l].unaryExpr([](double v) { return logcosh::first(v); }));
    g = theta.weights(l).transpose() * delta;
  }
  return g.tail(z.size());
}

SecondOrderProducts second_order_products(const ParamVector& theta, double t, const Vector& z,
                                          const Vector& w) {
  check_direction(z, w);
  Vector x = make_input(theta, t, z);
  const ForwardCache cache = forward(theta, std::move(x));
  const std::size_t hidden = cache.pre.size();

  // Tangent sweep along (0, w): s = <grad_x phi, (0, w)> = w_out . hdot[L].
  std::vector<Vector> hdot(hidden + 1);
  std::vector<Vector> adot(hidden);
  hdot[0] = Vector::Zero(z.size() + 1);
  hdot[0].tail(z.size()) = w;
  for (std::size_t l = 0; l < hidden; ++l) {
    adot[l] = theta.weights(l) * hdot[l];
    hdot[l + 1] = adot[l].cwiseProduct(cache.pre[l].unaryExpr([](double v) { return logcosh::first(v); }));
  }

  // Reverse sweep of s over the primal and tangent computations.
  Vector grad = Vector::Zero(static_cast<Eigen::Index>(theta.size()));
  const LayerShape& out = theta.layer_shape(hidden);
  grad.segment(static_cast<Eigen::Index>(out.weight_offset), out.cols) = hdot[hidden];

  Vector hdot_bar = output_weights(theta);
  Vector h_bar = Vector::Zero(hdot_bar.size());
  for (std::size_t l = hidden; l-- > 0;) {
    const Vector s1 = cache.pre[l].unaryExpr([](double v) { return logcosh::first(v); });
    const Vector s2 = cache.pre[l].unaryExpr([](double v) { return logcosh::second(v); });
    const Vector adot_bar = hdot_bar.cwiseProduct(s1);
    const Vector a_bar = hdot_bar.cwiseProduct(s2).cwiseProduct(adot[l]) + h_bar.cwiseProduct(s1);

    const LayerShape& s = theta.layer_shape(l);
    Eigen::Map<RowMajorMatrix> w_bar(grad.data() + s.weight_offset, s.rows, s.cols);
    w_bar.noalias() = adot_bar * hdot[l].transpose();
    w_bar.noalias() += a_bar * cache.post[l].transpose();
    grad.segment(static_cast<Eigen::Index>(s.bias_offset), s.rows) = a_bar;

    hdot_bar = theta.weights(l).transpose() * adot_bar;
    h_bar = theta.weights(l).transpose() * a_bar;
  }

  SecondOrderProducts result;
  result.hvp = hidden == 0 ? Vector(Vector::Zero(z.size())) : Vector(h_bar.tail(z.size()));
  result.mixed = std::move(grad);
  return result;
}

Vector hvp_z(const ParamVector& theta, double t, const Vector& z, const Vector& w) {
  return second_order_products(theta, t, z, w).hvp;
}

Vector mixed_vjp(const ParamVector& theta, double t, const Vector& z, const Vector& w) {
  return second_order_products(theta, t, z, w).mixed;
}

}  // namespace jfboc
