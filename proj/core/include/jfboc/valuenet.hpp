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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace jfboc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { kLogCosh };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

/// ln(cosh(x)) and its first two derivatives. The value is computed as
/// |x| + log1p(exp(-2|x|)) - ln 2 so it never overflows.
namespace logcosh {
double value(double x);
double first(double x);   // tanh(x)
double second(double x);  // 1 - tanh(x)^2
}  // namespace logcosh

/// Shape and offsets of one affine layer inside the flat parameter array.
struct LayerShape {
  int rows = 0;  // fan-out
  int cols = 0;  // fan-in
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

/// Fully connected scalar network on the concatenated input (t, z).
struct NetArchitecture {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  Activation activation = Activation::kLogCosh;

  /// [16, 16] preset used by the finite-difference oracles.
  static NetArchitecture tiny(int input_dim);
  /// [128, 128, 128, 128] preset used by the experiment configs.
  static NetArchitecture standard(int input_dim);

  void validate() const;
  int state_dim() const { return input_dim - 1; }
  /// Hidden layers followed by the scalar output layer.
  std::vector<LayerShape> layers() const;
  std::size_t parameter_count() const;

  bool operator==(const NetArchitecture&) const = default;
};

/// Flat parameter array (layer-major; per layer: row-major weights then bias)
/// tied to the architecture that interprets it.
class ParamVector {
 public:
  ParamVector(NetArchitecture arch, Vector values);

  static ParamVector zeros(const NetArchitecture& arch);

  const NetArchitecture& arch() const { return arch_; }
  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  std::size_t layer_count() const { return layers_.size(); }
  const LayerShape& layer_shape(std::size_t l) const { return layers_[l]; }

  Eigen::Map<const RowMajorMatrix> weights(std::size_t l) const;
  Eigen::Map<const Vector> bias(std::size_t l) const;

  /// Replaces the values; throws on size mismatch or non-finite entries.
  void set_values(const Vector& values);

 private:
  NetArchitecture arch_;
  std::vector<LayerShape> layers_;
  Vector values_;
};

/// Weights ~ U(-g/sqrt(fan_in), g/sqrt(fan_in)); hidden biases ~ U(-b, b); output bias 0.
struct InitScheme {
  double weight_gain = 2.449489742783178;  // sqrt(6)
  double hidden_bias_bound = 1.0;
};

ParamVector init_params(const NetArchitecture& arch, std::uint64_t seed, const InitScheme& scheme = {});

double phi(const ParamVector& theta, double t, const Vector& z);

/// Exact gradient of phi with respect to z (time component dropped).
Vector grad_z_phi(const ParamVector& theta, double t, const Vector& z);

/// Hessian-vector product d^2 phi / dz^2 * w.
Vector hvp_z(const ParamVector& theta, double t, const Vector& z, const Vector& w);

/// Gradient over theta of s(theta) = <grad_z_phi(theta, t, z), w>.
Vector mixed_vjp(const ParamVector& theta, double t, const Vector& z, const Vector& w);

struct SecondOrderProducts {
  Vector hvp;    // d^2 phi / dz^2 * w
  Vector mixed;  // d/dtheta <grad_z phi, w>
};

/// hvp_z and mixed_vjp for the same direction from a single forward/reverse sweep.
SecondOrderProducts second_order_products(const ParamVector& theta, double t, const Vector& z,
                                          const Vector& w);

}  // namespace jfboc
