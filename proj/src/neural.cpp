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

#include "infonet/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "infonet/container.hpp"
#include "infonet/error.hpp"
#include "infonet/random.hpp"

namespace infonet {

template <typename T>
BasicTensor<T>::BasicTensor(std::vector<std::size_t> shape_) : shape(std::move(shape_)) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  data.assign(count, T(0));
}

template <typename T>
BasicTensor<T>::BasicTensor(std::vector<std::size_t> shape_, std::vector<T> data_)
    : shape(std::move(shape_)), data(std::move(data_)) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  require(count == data.size(), "tensor: data length does not match shape");
}

template struct BasicTensor<float>;
template struct BasicTensor<double>;

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::conv_transpose2d: return "conv_transpose2d";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax: return "softmax";
    case LayerKind::scale: return "scale";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view text) {
  for (auto k : {LayerKind::conv2d, LayerKind::conv_transpose2d, LayerKind::dense,
                 LayerKind::relu, LayerKind::softmax, LayerKind::scale}) {
    if (to_string(k) == text) return k;
  }
  fail(ErrorCode::format, "unknown layer kind '" + std::string(text) + "'");
}

std::string_view to_string(Architecture a) {
  return a == Architecture::map_net ? "map-net" : "coeff-net";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "map-net" || text == "map") return Architecture::map_net;
  if (text == "coeff-net" || text == "coeff") return Architecture::coeff_net;
  fail(ErrorCode::format, "unknown architecture id '" + std::string(text) + "'");
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::conv2d:
    case LayerKind::conv_transpose2d:
      return std::size_t(in_c) * out_c * kernel * kernel;
    case LayerKind::dense:
      return input_size() * output_size();
    default:
      return 0;
  }
}

std::size_t LayerSpec::bias_count() const {
  switch (kind) {
    case LayerKind::conv2d:
    case LayerKind::conv_transpose2d:
      return std::size_t(out_c);
    case LayerKind::dense:
      return output_size();
    default:
      return 0;
  }
}

std::vector<std::size_t> LayerSpec::weight_shape() const {
  const auto k = std::size_t(kernel);
  switch (kind) {
    case LayerKind::conv2d: return {std::size_t(out_c), std::size_t(in_c), k, k};
    case LayerKind::conv_transpose2d: return {std::size_t(in_c), std::size_t(out_c), k, k};
    case LayerKind::dense: return {input_size(), output_size()};
    default: return {};
  }
}

LayerSpec LayerSpec::conv2d(int in_c, int in_h, int in_w, int out_c, int kernel, int stride,
                            int pad) {
  require(kernel > 0 && stride > 0 && pad >= 0, "conv2d: bad geometry");
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in_c = in_c, s.in_h = in_h, s.in_w = in_w;
  s.out_c = out_c;
  s.out_h = (in_h + 2 * pad - kernel) / stride + 1;
  s.out_w = (in_w + 2 * pad - kernel) / stride + 1;
  s.kernel = kernel, s.stride = stride, s.pad = pad;
  return s;
}

LayerSpec LayerSpec::conv_transpose2d(int in_c, int in_h, int in_w, int out_c, int kernel,
                                      int pad) {
  require(kernel > 0 && pad >= 0, "conv_transpose2d: bad geometry");
  LayerSpec s;
  s.kind = LayerKind::conv_transpose2d;
  s.in_c = in_c, s.in_h = in_h, s.in_w = in_w;
  s.out_c = out_c;
  s.out_h = in_h - 1 - 2 * pad + kernel;
  s.out_w = in_w - 1 - 2 * pad + kernel;
  s.kernel = kernel, s.stride = 1, s.pad = pad;
  return s;
}

LayerSpec LayerSpec::dense(int in, int out) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.in_c = in;
  s.out_c = out;
  return s;
}

namespace {

LayerSpec elementwise(LayerKind kind, int c, int h, int w) {
  LayerSpec s;
  s.kind = kind;
  s.in_c = s.out_c = c;
  s.in_h = s.out_h = h;
  s.in_w = s.out_w = w;
  return s;
}

}  // namespace

LayerSpec LayerSpec::relu(int c, int h, int w) { return elementwise(LayerKind::relu, c, h, w); }
LayerSpec LayerSpec::softmax(int c, int h, int w) {
  return elementwise(LayerKind::softmax, c, h, w);
}
LayerSpec LayerSpec::scale(int c, int h, int w, double factor) {
  LayerSpec s = elementwise(LayerKind::scale, c, h, w);
  s.factor = factor;
  return s;
}

std::size_t NetworkSpec::param_count() const {
  std::size_t p = 0;
  for (const auto& l : layers) p += l.param_count();
  return p;
}

void NetworkSpec::validate() const {
  require(!layers.empty(), "network: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& s = layers[l];
    require(s.input_size() > 0 && s.output_size() > 0,
            "network: layer " + std::to_string(l) + " has an empty shape");
    if (l > 0) {
      require(layers[l - 1].output_size() == s.input_size(),
              "network: layer " + std::to_string(l) + " input does not match previous output");
    }
  }
  require(input_size() == std::size_t(grid.cells()), "network: input must be n*n");
}

NetworkSpec map_net_spec(const GridSpec& grid, Modality modality) {
  grid.validate();
  const int n = grid.n;
  const bool se2 = modality == Modality::fov;
  const int c2 = se2 ? 32 : 16;
  const int dense_channels = se2 ? 4 : 1;
  const int out_channels = se2 ? grid.heading_bins : 1;

  NetworkSpec spec;
  spec.arch = Architecture::map_net;
  spec.modality = modality;
  spec.grid = grid;
  spec.input_scale = double(grid.cells());
  auto& L = spec.layers;
  L.push_back(LayerSpec::conv2d(1, n, n, 16, 3, 2, 1));
  L.push_back(LayerSpec::relu(16, L.back().out_h, L.back().out_w));
  L.push_back(LayerSpec::conv2d(16, L.back().out_h, L.back().out_w, c2, 3, 2, 1));
  L.push_back(LayerSpec::relu(c2, L.back().out_h, L.back().out_w));
  L.push_back(LayerSpec::dense(int(L.back().output_size()), n * n * dense_channels));
  L.push_back(LayerSpec::relu(n * n * dense_channels, 1, 1));
  L.push_back(LayerSpec::conv_transpose2d(dense_channels, n, n, out_channels, 3, 1));
  L.push_back(LayerSpec::softmax(out_channels, n, n));
  spec.validate();
  return spec;
}

NetworkSpec coeff_net_spec(const GridSpec& grid, Modality modality, int order) {
  grid.validate();
  const int n = grid.n;
  const Space space = space_of(modality);
  const int count = int(space == Space::r2 ? std::size_t(order + 1) * (order + 1)
                                           : std::size_t(order + 1) * (order + 1) * (2 * order + 1));
  // Coefficients are predicted in units of the constant basis function.
  const double measure =
      grid.side_length * grid.side_length * (space == Space::se2 ? 2.0 * std::numbers::pi : 1.0);

  NetworkSpec spec;
  spec.arch = Architecture::coeff_net;
  spec.modality = modality;
  spec.grid = grid;
  spec.coeff_order = order;
  spec.input_scale = double(grid.cells());
  auto& L = spec.layers;
  L.push_back(LayerSpec::conv2d(1, n, n, 8, 3, 2, 1));
  L.push_back(LayerSpec::relu(8, L.back().out_h, L.back().out_w));
  L.push_back(LayerSpec::conv2d(8, L.back().out_h, L.back().out_w, 16, 3, 2, 1));
  L.push_back(LayerSpec::relu(16, L.back().out_h, L.back().out_w));
  L.push_back(LayerSpec::dense(int(L.back().output_size()), 256));
  L.push_back(LayerSpec::relu(256, 1, 1));
  L.push_back(LayerSpec::dense(256, count));
  L.push_back(LayerSpec::scale(count, 1, 1, 1.0 / std::sqrt(measure)));
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  for (; i < n; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

template <typename T>
void axpy(T* y, const T* x, T a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Output columns ox whose input column ox*stride + kx - pad lies in [0, in_w).
std::pair<int, int> conv_cols(const LayerSpec& s, int kx) {
  const int lo = std::max(0, ceil_div(s.pad - kx, s.stride));
  const int hi = std::min(s.out_w, floor_div(s.in_w - 1 - kx + s.pad, s.stride) + 1);
  return {lo, hi};
}

template <typename T>
void conv2d_forward(const LayerSpec& s, const T* w, const T* b, const T* in, T* out) {
  const int K = s.kernel;
  const std::size_t in_plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t out_plane = std::size_t(s.out_h) * s.out_w;
  for (int co = 0; co < s.out_c; ++co) std::fill_n(out + co * out_plane, out_plane, b[co]);
  for (int co = 0; co < s.out_c; ++co) {
    T* op = out + co * out_plane;
    for (int ci = 0; ci < s.in_c; ++ci) {
      const T* ip = in + ci * in_plane;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const T wv = w[((std::size_t(co) * s.in_c + ci) * K + ky) * K + kx];
          const auto [lo, hi] = conv_cols(s, kx);
          for (int oy = 0; oy < s.out_h; ++oy) {
            const int iy = oy * s.stride + ky - s.pad;
            if (iy < 0 || iy >= s.in_h) continue;
            const T* irow = ip + std::size_t(iy) * s.in_w + (kx - s.pad);
            T* orow = op + std::size_t(oy) * s.out_w;
            if (s.stride == 1) {
              for (int ox = lo; ox < hi; ++ox) orow[ox] += wv * irow[ox];
            } else {
              for (int ox = lo; ox < hi; ++ox) orow[ox] += wv * irow[ox * s.stride];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const LayerSpec& s, const T* w, const T* in, const T* gout, T* gin, T* gw,
                     T* gb) {
  const int K = s.kernel;
  const std::size_t in_plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t out_plane = std::size_t(s.out_h) * s.out_w;
  if (gin) std::fill_n(gin, s.input_size(), T(0));
  for (int co = 0; co < s.out_c; ++co) {
    const T* gp = gout + co * out_plane;
    T acc = 0;
    for (std::size_t k = 0; k < out_plane; ++k) acc += gp[k];
    gb[co] += acc;
    for (int ci = 0; ci < s.in_c; ++ci) {
      const T* ip = in + ci * in_plane;
      T* gip = gin ? gin + ci * in_plane : nullptr;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const std::size_t widx = ((std::size_t(co) * s.in_c + ci) * K + ky) * K + kx;
          const T wv = w[widx];
          const auto [lo, hi] = conv_cols(s, kx);
          T wacc = 0;
          for (int oy = 0; oy < s.out_h; ++oy) {
            const int iy = oy * s.stride + ky - s.pad;
            if (iy < 0 || iy >= s.in_h) continue;
            const std::size_t ioff = std::size_t(iy) * s.in_w + (kx - s.pad);
            const T* irow = ip + ioff;
            const T* grow = gp + std::size_t(oy) * s.out_w;
            if (s.stride == 1) {
              for (int ox = lo; ox < hi; ++ox) wacc += grow[ox] * irow[ox];
              if (gip) {
                T* girow = gip + ioff;
                for (int ox = lo; ox < hi; ++ox) girow[ox] += wv * grow[ox];
              }
            } else {
              for (int ox = lo; ox < hi; ++ox) wacc += grow[ox] * irow[ox * s.stride];
              if (gip) {
                T* girow = gip + ioff;
                for (int ox = lo; ox < hi; ++ox) girow[ox * s.stride] += wv * grow[ox];
              }
            }
          }
          gw[widx] += wacc;
        }
      }
    }
  }
}

// Input columns ix whose output column ix + kx - pad lies in [0, out_w).
std::pair<int, int> deconv_cols(const LayerSpec& s, int kx) {
  return {std::max(0, s.pad - kx), std::min(s.in_w, s.out_w + s.pad - kx)};
}

template <typename T>
void deconv_forward(const LayerSpec& s, const T* w, const T* b, const T* in, T* out) {
  const int K = s.kernel;
  const std::size_t in_plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t out_plane = std::size_t(s.out_h) * s.out_w;
  for (int co = 0; co < s.out_c; ++co) std::fill_n(out + co * out_plane, out_plane, b[co]);
  for (int ci = 0; ci < s.in_c; ++ci) {
    const T* ip = in + ci * in_plane;
    for (int co = 0; co < s.out_c; ++co) {
      T* op = out + co * out_plane;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const T wv = w[((std::size_t(ci) * s.out_c + co) * K + ky) * K + kx];
          const auto [lo, hi] = deconv_cols(s, kx);
          for (int iy = 0; iy < s.in_h; ++iy) {
            const int oy = iy + ky - s.pad;
            if (oy < 0 || oy >= s.out_h) continue;
            const T* irow = ip + std::size_t(iy) * s.in_w;
            T* orow = op + std::size_t(oy) * s.out_w + (kx - s.pad);
            for (int ix = lo; ix < hi; ++ix) orow[ix] += wv * irow[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void deconv_backward(const LayerSpec& s, const T* w, const T* in, const T* gout, T* gin, T* gw,
                     T* gb) {
  const int K = s.kernel;
  const std::size_t in_plane = std::size_t(s.in_h) * s.in_w;
  const std::size_t out_plane = std::size_t(s.out_h) * s.out_w;
  if (gin) std::fill_n(gin, s.input_size(), T(0));
  for (int co = 0; co < s.out_c; ++co) {
    const T* gp = gout + co * out_plane;
    T acc = 0;
    for (std::size_t k = 0; k < out_plane; ++k) acc += gp[k];
    gb[co] += acc;
  }
  for (int ci = 0; ci < s.in_c; ++ci) {
    const T* ip = in + ci * in_plane;
    T* gip = gin ? gin + ci * in_plane : nullptr;
    for (int co = 0; co < s.out_c; ++co) {
      const T* gp = gout + co * out_plane;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const std::size_t widx = ((std::size_t(ci) * s.out_c + co) * K + ky) * K + kx;
          const T wv = w[widx];
          const auto [lo, hi] = deconv_cols(s, kx);
          T wacc = 0;
          for (int iy = 0; iy < s.in_h; ++iy) {
            const int oy = iy + ky - s.pad;
            if (oy < 0 || oy >= s.out_h) continue;
            const T* irow = ip + std::size_t(iy) * s.in_w;
            const T* grow = gp + std::size_t(oy) * s.out_w + (kx - s.pad);
            for (int ix = lo; ix < hi; ++ix) wacc += grow[ix] * irow[ix];
            if (gip) {
              T* girow = gip + std::size_t(iy) * s.in_w;
              for (int ix = lo; ix < hi; ++ix) girow[ix] += wv * grow[ix];
            }
          }
          gw[widx] += wacc;
        }
      }
    }
  }
}

template <typename T>
void dense_forward(const LayerSpec& s, const T* w, const T* b, const T* in, T* out) {
  const std::size_t nin = s.input_size();
  const std::size_t nout = s.output_size();
  std::copy_n(b, nout, out);
  for (std::size_t i = 0; i < nin; ++i) {
    if (in[i] == T(0)) continue;
    axpy(out, w + i * nout, in[i], nout);
  }
}

template <typename T>
void dense_backward(const LayerSpec& s, const T* w, const T* in, const T* gout, T* gin, T* gw,
                    T* gb) {
  const std::size_t nin = s.input_size();
  const std::size_t nout = s.output_size();
  for (std::size_t o = 0; o < nout; ++o) gb[o] += gout[o];
  for (std::size_t i = 0; i < nin; ++i) {
    if (gin) gin[i] = dot(w + i * nout, gout, nout);
    if (in[i] != T(0)) axpy(gw + i * nout, gout, in[i], nout);
  }
}

}  // namespace

template <typename T>
void layer_forward(const LayerSpec& spec, std::span<const T> params, std::span<const T> in,
                   std::span<T> out) {
  const T* w = params.data();
  const T* b = params.data() + spec.weight_count();
  switch (spec.kind) {
    case LayerKind::conv2d:
      conv2d_forward(spec, w, b, in.data(), out.data());
      break;
    case LayerKind::conv_transpose2d:
      deconv_forward(spec, w, b, in.data(), out.data());
      break;
    case LayerKind::dense:
      dense_forward(spec, w, b, in.data(), out.data());
      break;
    case LayerKind::relu:
      for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] > T(0) ? in[k] : T(0);
      break;
    case LayerKind::softmax: {
      const T mx = *std::max_element(in.begin(), in.end());
      T sum = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        out[k] = std::exp(in[k] - mx);
        sum += out[k];
      }
      const T inv = T(1) / sum;
      for (auto& v : out) v *= inv;
      break;
    }
    case LayerKind::scale: {
      const T f = static_cast<T>(spec.factor);
      for (std::size_t k = 0; k < in.size(); ++k) out[k] = f * in[k];
      break;
    }
  }
}

template <typename T>
void layer_backward(const LayerSpec& spec, std::span<const T> params, std::span<const T> in,
                    std::span<const T> out, std::span<const T> grad_out, std::span<T> grad_in,
                    std::span<T> grad_params) {
  const T* w = params.data();
  T* gw = grad_params.data();
  T* gb = grad_params.data() + spec.weight_count();
  T* gin = grad_in.empty() ? nullptr : grad_in.data();
  switch (spec.kind) {
    case LayerKind::conv2d:
      conv2d_backward(spec, w, in.data(), grad_out.data(), gin, gw, gb);
      break;
    case LayerKind::conv_transpose2d:
      deconv_backward(spec, w, in.data(), grad_out.data(), gin, gw, gb);
      break;
    case LayerKind::dense:
      dense_backward(spec, w, in.data(), grad_out.data(), gin, gw, gb);
      break;
    case LayerKind::relu:
      if (gin) {
        for (std::size_t k = 0; k < in.size(); ++k) gin[k] = in[k] > T(0) ? grad_out[k] : T(0);
      }
      break;
    case LayerKind::softmax:
      if (gin) {
        T d = 0;
        for (std::size_t k = 0; k < out.size(); ++k) d += grad_out[k] * out[k];
        for (std::size_t k = 0; k < out.size(); ++k) gin[k] = out[k] * (grad_out[k] - d);
      }
      break;
    case LayerKind::scale:
      if (gin) {
        const T f = static_cast<T>(spec.factor);
        for (std::size_t k = 0; k < out.size(); ++k) gin[k] = f * grad_out[k];
      }
      break;
  }
}

#define INFONET_INSTANTIATE_LAYER(T)                                                        \
  template void layer_forward<T>(const LayerSpec&, std::span<const T>, std::span<const T>, \
                                 std::span<T>);                                             \
  template void layer_backward<T>(const LayerSpec&, std::span<const T>, std::span<const T>, \
                                  std::span<const T>, std::span<const T>, std::span<T>,     \
                                  std::span<T>);
INFONET_INSTANTIATE_LAYER(float)
INFONET_INSTANTIATE_LAYER(double)
#undef INFONET_INSTANTIATE_LAYER

// ---------------------------------------------------------------------------
// Network

template <typename T>
BasicNetwork<T>::BasicNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t off = 0;
  for (const auto& l : spec_.layers) {
    offsets_.push_back(off);
    off += l.param_count();
  }
  params_.assign(off, T(0));
}

template <typename T>
void BasicNetwork<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  auto normal = [&rng] {
    // Box-Muller on raw engine output
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  std::fill(params_.begin(), params_.end(), T(0));
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    const LayerSpec& s = spec_.layers[l];
    if (s.weight_count() == 0) continue;
    double fan_in = 0;
    switch (s.kind) {
      case LayerKind::conv2d:
      case LayerKind::conv_transpose2d:
        fan_in = double(s.in_c) * s.kernel * s.kernel;
        break;
      default:
        fan_in = double(s.input_size());
    }
    const double stddev = std::sqrt(2.0 / fan_in);
    auto p = layer_params(l);
    for (std::size_t k = 0; k < s.weight_count(); ++k) p[k] = static_cast<T>(stddev * normal());
  }
  // The output layer starts at zero: a uniform map, or a zero coefficient
  // vector, regardless of the input magnitude.
  for (std::size_t l = spec_.layers.size(); l-- > 0;) {
    if (spec_.layers[l].param_count() == 0) continue;
    auto p = layer_params(l);
    std::fill(p.begin(), p.end(), T(0));
    break;
  }
}

template <typename T>
typename BasicNetwork<T>::Workspace BasicNetwork<T>::make_workspace() const {
  Workspace ws;
  ws.acts.resize(spec_.layers.size() + 1);
  ws.grads.resize(spec_.layers.size() + 1);
  ws.acts[0].resize(spec_.input_size());
  ws.grads[0].resize(spec_.input_size());
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    ws.acts[l + 1].resize(spec_.layers[l].output_size());
    ws.grads[l + 1].resize(spec_.layers[l].output_size());
  }
  return ws;
}

template <typename T>
std::span<const T> BasicNetwork<T>::forward(std::span<const T> belief, Workspace& ws) const {
  require(belief.size() == spec_.input_size(), "network forward: input must have n*n entries");
  if (ws.acts.size() != spec_.layers.size() + 1) ws = make_workspace();
  const T scale = static_cast<T>(spec_.input_scale);
  for (std::size_t k = 0; k < belief.size(); ++k) ws.acts[0][k] = belief[k] * scale;
  for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
    layer_forward<T>(spec_.layers[l], layer_params(l), ws.acts[l], ws.acts[l + 1]);
  }
  return ws.acts.back();
}

template <typename T>
void BasicNetwork<T>::backward(Workspace& ws, std::size_t end, std::span<const T> grad_end,
                               std::span<T> grad_params) const {
  require(end <= spec_.layers.size() && grad_end.size() == ws.acts[end].size(),
          "network backward: gradient does not match the activation");
  require(grad_params.size() == params_.size(), "network backward: gradient buffer size");
  std::copy(grad_end.begin(), grad_end.end(), ws.grads[end].begin());
  for (std::size_t l = end; l-- > 0;) {
    std::span<T> gin = l == 0 ? std::span<T>() : std::span<T>(ws.grads[l]);
    layer_backward<T>(spec_.layers[l], layer_params(l), ws.acts[l], ws.acts[l + 1],
                      ws.grads[l + 1], gin,
                      grad_params.subspan(offsets_[l], spec_.layers[l].param_count()));
  }
}

template <typename T>
std::vector<T> BasicNetwork<T>::predict(std::span<const T> belief) const {
  Workspace ws = make_workspace();
  auto out = forward(belief, ws);
  return {out.begin(), out.end()};
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;

Tensor forward(const Network& net, const Belief& belief) {
  const NetworkSpec& s = net.spec();
  require(belief.n() == s.grid.n, "forward: belief shape does not match the network");
  std::vector<float> in(belief.weights().begin(), belief.weights().end());
  std::vector<float> out = net.predict(in);
  const LayerSpec& last = s.layers.back();
  if (s.arch == Architecture::map_net) {
    return Tensor({std::size_t(last.out_c), std::size_t(last.out_h), std::size_t(last.out_w)},
                  std::move(out));
  }
  const std::size_t count = out.size();
  return Tensor({count}, std::move(out));
}

// ---------------------------------------------------------------------------
// Losses

namespace {

constexpr double kTargetFloor = 1e-12;

template <typename T>
void check_distribution(std::span<const T> p, const char* what) {
  double sum = 0.0;
  for (T v : p) sum += double(v);
  if (std::abs(sum - 1.0) > 1e-4) {
    fail(ErrorCode::invalid_argument,
         std::string(what) + " is not normalized (sum " + std::to_string(sum) + ")");
  }
}

}  // namespace

template <typename T>
double kl_loss(std::span<const T> pred, std::span<const T> target) {
  require(pred.size() == target.size(), "kl_loss: length mismatch");
  check_distribution(pred, "kl_loss prediction");
  check_distribution(target, "kl_loss target");
  double loss = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    require(pred[k] > T(0), "kl_loss: prediction entries must be positive");
    const double t = std::max(double(target[k]), kTargetFloor);
    loss += t * std::log(t / double(pred[k]));
  }
  return loss;
}

template <typename T>
void kl_softmax_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad) {
  require(pred.size() == target.size() && grad.size() == pred.size(),
          "kl_softmax_grad: length mismatch");
  double tsum = 0.0;
  for (T t : target) tsum += std::max(double(t), kTargetFloor);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double t = std::max(double(target[k]), kTargetFloor);
    grad[k] = static_cast<T>(double(pred[k]) * tsum - t);
  }
}

template <typename T>
double mae_loss(std::span<const T> pred, std::span<const T> target) {
  require(pred.size() == target.size() && !pred.empty(), "mae_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) acc += std::abs(double(pred[k]) - double(target[k]));
  return acc / double(pred.size());
}

template <typename T>
void mae_grad(std::span<const T> pred, std::span<const T> target, std::span<T> grad) {
  require(pred.size() == target.size() && grad.size() == pred.size(), "mae_grad: length mismatch");
  const T inv = T(1) / static_cast<T>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    grad[k] = pred[k] > target[k] ? inv : (pred[k] < target[k] ? -inv : T(0));
  }
}

#define INFONET_INSTANTIATE_LOSS(T)                                                       \
  template double kl_loss<T>(std::span<const T>, std::span<const T>);                     \
  template void kl_softmax_grad<T>(std::span<const T>, std::span<const T>, std::span<T>); \
  template double mae_loss<T>(std::span<const T>, std::span<const T>);                    \
  template void mae_grad<T>(std::span<const T>, std::span<const T>, std::span<T>);
INFONET_INSTANTIATE_LOSS(float)
INFONET_INSTANTIATE_LOSS(double)
#undef INFONET_INSTANTIATE_LOSS

// ---------------------------------------------------------------------------
// Weights files

namespace {

constexpr const char* kWeightsFormat = "infonet-weights";

nlohmann::json grid_json(const GridSpec& g) {
  return {{"side_length", g.side_length}, {"n", g.n}, {"heading_bins", g.heading_bins}};
}

nlohmann::json layer_json(const LayerSpec& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)},
                      {"in", {s.in_c, s.in_h, s.in_w}},
                      {"out", {s.out_c, s.out_h, s.out_w}}};
  if (s.kind == LayerKind::conv2d || s.kind == LayerKind::conv_transpose2d) {
    j["kernel"] = s.kernel;
    j["stride"] = s.stride;
    j["pad"] = s.pad;
  }
  if (s.kind == LayerKind::scale) j["factor"] = s.factor;
  return j;
}

LayerSpec layer_from_json(const nlohmann::json& j) {
  LayerSpec s;
  s.kind = parse_layer_kind(j.at("kind").get<std::string>());
  const auto in = j.at("in").get<std::vector<int>>();
  const auto out = j.at("out").get<std::vector<int>>();
  require(in.size() == 3 && out.size() == 3, "weights: layer shapes must have 3 entries");
  s.in_c = in[0], s.in_h = in[1], s.in_w = in[2];
  s.out_c = out[0], s.out_h = out[1], s.out_w = out[2];
  s.kernel = j.value("kernel", 0);
  s.stride = j.value("stride", 1);
  s.pad = j.value("pad", 0);
  s.factor = j.value("factor", 1.0);
  LayerSpec check = s;
  switch (s.kind) {
    case LayerKind::conv2d:
      check = LayerSpec::conv2d(s.in_c, s.in_h, s.in_w, s.out_c, s.kernel, s.stride, s.pad);
      break;
    case LayerKind::conv_transpose2d:
      check = LayerSpec::conv_transpose2d(s.in_c, s.in_h, s.in_w, s.out_c, s.kernel, s.pad);
      break;
    default:
      break;
  }
  require(check.out_h == s.out_h && check.out_w == s.out_w,
          "weights: layer output shape is inconsistent with its geometry");
  return s;
}

}  // namespace

void save_weights(const Network& net, const std::filesystem::path& path,
                  const nlohmann::json& training) {
  const NetworkSpec& s = net.spec();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : s.layers) layers.push_back(layer_json(l));
  nlohmann::json manifest = {
      {"format", kWeightsFormat},
      {"version", kWeightsVersion},
      {"architecture", to_string(s.arch)},
      {"modality", to_string(s.modality)},
      {"metric", to_string(s.metric)},
      {"grid", grid_json(s.grid)},
      {"sigma", s.sigma},
      {"K", s.coeff_order},
      {"input_scale", s.input_scale},
      {"layers", std::move(layers)},
      {"training", training},
  };
  std::vector<BlobView> blobs;
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    const LayerSpec& ls = s.layers[l];
    if (ls.param_count() == 0) continue;
    auto p = net.layer_params(l);
    const std::string prefix = "L" + std::to_string(l);
    blobs.push_back({prefix + ".weight", ls.weight_shape(), p.first(ls.weight_count())});
    blobs.push_back({prefix + ".bias", {ls.bias_count()}, p.subspan(ls.weight_count())});
  }
  write_container(path, std::move(manifest), blobs);
}

Network load_weights(const std::filesystem::path& path) {
  const Container c = read_container(path, kWeightsFormat, kWeightsVersion);
  NetworkSpec spec;
  try {
    const auto& m = c.manifest;
    spec.arch = parse_architecture(m.at("architecture").get<std::string>());
    spec.modality = parse_modality(m.at("modality").get<std::string>());
    spec.metric = parse_metric(m.at("metric").get<std::string>());
    spec.grid.side_length = m.at("grid").at("side_length").get<double>();
    spec.grid.n = m.at("grid").at("n").get<int>();
    spec.grid.heading_bins = m.at("grid").at("heading_bins").get<int>();
    spec.sigma = m.at("sigma").get<double>();
    spec.coeff_order = m.at("K").get<int>();
    spec.input_scale = m.at("input_scale").get<double>();
    for (const auto& l : m.at("layers")) spec.layers.push_back(layer_from_json(l));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, "weights '" + path.string() + "': bad manifest: " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::format, "weights '" + path.string() + "': " + e.what());
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(ErrorCode::format, "weights '" + path.string() + "': " + e.what());
  }
  Network net(spec);
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& ls = spec.layers[l];
    if (ls.param_count() == 0) continue;
    const std::string prefix = "L" + std::to_string(l);
    const Blob& w = c.blob(prefix + ".weight");
    const Blob& b = c.blob(prefix + ".bias");
    if (w.shape != ls.weight_shape() || b.data.size() != ls.bias_count()) {
      fail(ErrorCode::format, "weights '" + path.string() + "': blob " + prefix +
                                  " does not match the declared layer shape");
    }
    auto p = net.layer_params(l);
    std::copy(w.data.begin(), w.data.end(), p.begin());
    std::copy(b.data.begin(), b.data.end(), p.begin() + std::ptrdiff_t(ls.weight_count()));
  }
  return net;
}

}  // namespace infonet
