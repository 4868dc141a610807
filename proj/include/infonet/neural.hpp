// Copyright 2026 The infonet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infonet/grid.hpp"
#include "infonet/infomap.hpp"
#include "infonet/sensors.hpp"
#include "json.hpp"

namespace infonet {

template <typename T>
struct BasicTensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  BasicTensor() = default;
  explicit BasicTensor(std::vector<std::size_t> shape_);
  BasicTensor(std::vector<std::size_t> shape_, std::vector<T> data_);

  std::size_t size() const { return data.size(); }
};
using Tensor = BasicTensor<float>;

enum class LayerKind { conv2d, conv_transpose2d, dense, relu, softmax, scale };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view text);

// Activations are (channels, height, width), row-major, channel outermost.
// Dense layers see (features, 1, 1).
//
// Parameter layouts:
//   conv2d            weight [out_c][in_c][k][k], bias [out_c]
//   conv_transpose2d  weight [in_c][out_c][k][k], bias [out_c]
//   dense             weight [in][out] (input-major), bias [out]
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  int in_c = 0, in_h = 1, in_w = 1;
  int out_c = 0, out_h = 1, out_w = 1;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  double factor = 1.0;  // scale layers only

  std::size_t input_size() const { return std::size_t(in_c) * in_h * in_w; }
  std::size_t output_size() const { return std::size_t(out_c) * out_h * out_w; }
  std::size_t weight_count() const;
  std::size_t bias_count() const;
  std::size_t param_count() const { return weight_count() + bias_count(); }
  std::vector<std::size_t> weight_shape() const;

  static LayerSpec conv2d(int in_c, int in_h, int in_w, int out_c, int kernel, int stride,
                          int pad);
  static LayerSpec conv_transpose2d(int in_c, int in_h, int in_w, int out_c, int kernel,
                                    int pad);
  static LayerSpec dense(int in, int out);
  static LayerSpec relu(int c, int h, int w);
  static LayerSpec softmax(int c, int h, int w);
  static LayerSpec scale(int c, int h, int w, double factor);
};

enum class Architecture { map_net, coeff_net };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view text);

struct NetworkSpec {
  Architecture arch = Architecture::map_net;
  Modality modality = Modality::bearing;
  Metric metric = Metric::mutual;
  GridSpec grid;
  double sigma = 10.0;     // bearing noise the targets were generated with
  int coeff_order = 0;     // K of the coefficient targets
  double input_scale = 1;  // beliefs are multiplied by this before layer 0
  std::vector<LayerSpec> layers;

  std::size_t input_size() const { return layers.front().input_size(); }
  std::size_t output_size() const { return layers.back().output_size(); }
  std::size_t param_count() const;
  // Throws if consecutive layer shapes do not chain.
  void validate() const;
};

// Map-net: conv(16) -> conv(16 | 32) -> dense(n*n*c) -> transposed conv -> softmax.
// Coeff-net: conv(8) -> conv(16) -> dense(256) -> dense(coeffs) -> scale.
NetworkSpec map_net_spec(const GridSpec& grid, Modality modality);
NetworkSpec coeff_net_spec(const GridSpec& grid, Modality modality, int order);

template <typename T>
class BasicNetwork {
 public:
  // Per-call scratch; one per thread for concurrent inference.
  struct Workspace {
    std::vector<std::vector<T>> acts;   // acts[0] is the scaled input
    std::vector<std::vector<T>> grads;  // gradients w.r.t. acts
  };

  explicit BasicNetwork(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return spec_.layers.size(); }
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::span<T> layer_params(std::size_t l) {
    return std::span<T>(params_).subspan(offsets_[l], spec_.layers[l].param_count());
  }
  std::span<const T> layer_params(std::size_t l) const {
    return std::span<const T>(params_).subspan(offsets_[l], spec_.layers[l].param_count());
  }
  std::size_t param_offset(std::size_t l) const { return offsets_[l]; }

  // He-normal weights, zero biases.
  void initialize(std::uint64_t seed);

  Workspace make_workspace() const;
  // `belief` holds unscaled belief weights.
  std::span<const T> forward(std::span<const T> belief, Workspace& ws) const;
  // Backpropagates from the gradient w.r.t. ws.acts[end] through layers
  // end-1 .. 0, adding parameter gradients into grad_params.
  void backward(Workspace& ws, std::size_t end, std::span<const T> grad_end,
                std::span<T> grad_params) const;

  std::vector<T> predict(std::span<const T> belief) const;

  template <typename U>
  BasicNetwork<U> cast() const {
    BasicNetwork<U> out(spec_);
    auto dst = out.params();
    for (std::size_t k = 0; k < params_.size(); ++k) dst[k] = static_cast<U>(params_[k]);
    return out;
  }

 private:
  NetworkSpec spec_;
  std::vector<std::size_t> offsets_;
  std::vector<T> params_;
};

using Network = BasicNetwork<float>;

// Runs a float network on a belief.
Tensor forward(const Network& net, const Belief& belief);

// Single-layer kernels, exposed for isolated gradient checks.
template <typename T>
void layer_forward(const LayerSpec& spec, std::span<const T> params, std::span<const T> in,
                   std::span<T> out);
template <typename T>
void layer_backward(const LayerSpec& spec, std::span<const T> params, std::span<const T> in,
                    std::span<const T> out, std::span<const T> grad_out, std::span<T> grad_in,
                    std::span<T> grad_params);

// KL(target || pred) with target floored at 1e-12. Both must sum to 1
// within 1e-4 and pred must be strictly positive.
template <typename T>
double kl_loss(std::span<const T> pred, std::span<const T> target);
// Gradient of kl_loss w.r.t. the logits feeding a softmax that produced pred.
template <typename T>
void kl_softmax_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad);

template <typename T>
double mae_loss(std::span<const T> pred, std::span<const T> target);
// Entries are sign(pred - target) / N.
template <typename T>
void mae_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad);

// Weights file: container "infonet-weights" with one weight and one bias
// blob per parameterized layer ("L<i>.weight", "L<i>.bias").
inline constexpr int kWeightsVersion = 1;
void save_weights(const Network& net, const std::filesystem::path& path,
                  const nlohmann::json& training = nlohmann::json::object());
Network load_weights(const std::filesystem::path& path);

}  // namespace infonet
