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

// Central-difference gradient checks in double precision, shared by the unit
// tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "infonet/neural.hpp"
#include "infonet/random.hpp"

namespace testing {

using DNet = infonet::BasicNetwork<double>;

// Fourth-order central stencil. Its truncation error is O(h^4); roundoff is
// about 1.5 eps |L| / h.
inline constexpr double kFdStep = 1e-4;
// Relative errors use max(|analytic|, |numeric|, floor) as the denominator.
// The floor is the larger of kRelativeFloor times the largest gradient at the
// point and kResolution ulps of the loss per unit step, the level below which
// a double-precision difference quotient carries no relative information.
inline constexpr double kRelativeFloor = 1e-6;
inline constexpr double kResolution = 1e5;

inline double stencil(double up2, double up, double dn, double dn2) {
  return (-up2 + 8.0 * up - 8.0 * dn + dn2) / (12.0 * kFdStep);
}

inline double noise_floor(double scale, double loss) {
  return std::max({kRelativeFloor * scale,
                   kResolution * std::numeric_limits<double>::epsilon() * std::abs(loss) / kFdStep,
                   1e-300});
}

inline double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

struct GradReport {
  double max_rel = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates whose perturbation crossed a kink
  // Worst coordinate.
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t layer = 0;

  void record(double a, double n, double floor, std::size_t l) {
    const double e = rel_error(a, n, floor);
    if (e > max_rel) {
      max_rel = e;
      analytic = a;
      numeric = n;
      layer = l;
    }
    ++checked;
  }
};

inline double gauss(infonet::Rng& rng) {
  const double u1 = std::max(infonet::uniform01(rng), 1e-300);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * infonet::uniform01(rng));
}

// Isolated layer: loss = sum_k r_k out_k for a random projection r. ReLU
// inputs are kept at least 1e-2 from the kink.
inline GradReport check_layer(const infonet::LayerSpec& spec, infonet::Rng& rng, int points) {
  using infonet::LayerKind;
  GradReport rep;
  const std::size_t ni = spec.input_size(), no = spec.output_size(), np = spec.param_count();
  for (int pt = 0; pt < points; ++pt) {
    std::vector<double> params(np), in(ni), r(no), out(no);
    for (auto& v : params) v = 0.5 * gauss(rng);
    for (auto& v : in) {
      v = gauss(rng);
      if (spec.kind == LayerKind::relu) v = std::copysign(0.01 + std::abs(v), v);
    }
    for (auto& v : r) v = gauss(rng);

    auto loss = [&](std::span<const double> p, std::span<const double> x) {
      infonet::layer_forward<double>(spec, p, x, out);
      return std::inner_product(out.begin(), out.end(), r.begin(), 0.0);
    };
    const double base = loss(params, in);
    std::vector<double> gin(ni, 0.0), gp(np, 0.0);
    infonet::layer_backward<double>(spec, params, in, out, r, gin, gp);

    double scale = 0.0;
    for (double g : gin) scale = std::max(scale, std::abs(g));
    for (double g : gp) scale = std::max(scale, std::abs(g));
    const double floor = noise_floor(scale, base);

    auto numeric = [&](double& slot) {
      const double keep = slot;
      double f[4];
      const double offsets[4] = {2, 1, -1, -2};
      for (int s = 0; s < 4; ++s) {
        slot = keep + offsets[s] * kFdStep;
        f[s] = loss(params, in);
      }
      slot = keep;
      return stencil(f[0], f[1], f[2], f[3]);
    };
    for (std::size_t k = 0; k < np; ++k) rep.record(gp[k], numeric(params[k]), floor, 0);
    for (std::size_t k = 0; k < ni; ++k) rep.record(gin[k], numeric(in[k]), floor, 1);
  }
  return rep;
}

// Whole network with its training loss (KL through the softmax for map-nets,
// MAE for coeff-nets). Every parameter of layers with at most `full_layer`
// parameters is checked; larger layers are sampled at `sample` coordinates.
// Coordinates whose perturbation flips a ReLU or MAE sign are skipped.
inline GradReport check_network(DNet& net, infonet::Rng& rng, int points,
                                std::size_t full_layer = SIZE_MAX, std::size_t sample = 0) {
  using infonet::Architecture;
  using infonet::LayerKind;
  const auto& spec = net.spec();
  const bool map = spec.arch == Architecture::map_net;
  const std::size_t L = spec.layers.size();
  GradReport rep;
  auto ws = net.make_workspace();

  for (int pt = 0; pt < points; ++pt) {
    for (auto& v : net.params()) v = 0.3 * gauss(rng) / 4.0;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& s = spec.layers[l];
      if (s.weight_count() == 0) continue;
      const double fan = s.kind == LayerKind::dense ? double(s.input_size())
                                                    : double(s.in_c) * s.kernel * s.kernel;
      auto p = net.layer_params(l);
      for (std::size_t k = 0; k < s.weight_count(); ++k) p[k] = std::sqrt(2.0 / fan) * gauss(rng);
    }
    std::vector<double> belief(spec.input_size());
    for (auto& v : belief) v = -std::log(1.0 - infonet::uniform01(rng));
    const double bs = std::accumulate(belief.begin(), belief.end(), 0.0);
    for (auto& v : belief) v /= bs;
    std::vector<double> target(spec.output_size());
    for (auto& v : target) v = map ? infonet::uniform01(rng) : 0.05 * gauss(rng);
    if (map) {
      const double ts = std::accumulate(target.begin(), target.end(), 0.0);
      for (auto& v : target) v /= ts;
    }

    // Sign pattern of every kink the loss passes through.
    auto signature = [&](std::span<const double> out) {
      std::vector<bool> sig;
      for (std::size_t l = 0; l < L; ++l) {
        if (spec.layers[l].kind != LayerKind::relu) continue;
        for (double v : ws.acts[l]) sig.push_back(v > 0.0);
      }
      if (!map) {
        for (std::size_t k = 0; k < out.size(); ++k) sig.push_back(out[k] > target[k]);
      }
      return sig;
    };
    auto loss = [&]() {
      const auto out = net.forward(belief, ws);
      return std::pair{map ? infonet::kl_loss<double>(out, target)
                           : infonet::mae_loss<double>(out, target),
                       signature(out)};
    };

    const auto out = net.forward(belief, ws);
    const auto base_sig = signature(out);
    std::vector<double> grad_end(map ? ws.acts[L - 1].size() : out.size());
    std::size_t end = L;
    if (map) {
      infonet::kl_softmax_grad<double>(out, target, grad_end);
      end = L - 1;
    } else {
      infonet::mae_grad<double>(out, target, grad_end);
    }
    std::vector<double> grad(net.params().size(), 0.0);
    net.backward(ws, end, grad_end, grad);

    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    const double floor = noise_floor(scale, loss().first);

    auto params = net.params();
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t count = spec.layers[l].param_count();
      if (count == 0) continue;
      std::vector<std::size_t> coords;
      if (count <= full_layer) {
        coords.resize(count);
        std::iota(coords.begin(), coords.end(), 0);
      } else {
        for (std::size_t s = 0; s < sample; ++s) coords.push_back(infonet::uniform_index(rng, count));
      }
      for (std::size_t c : coords) {
        const std::size_t k = net.param_offset(l) + c;
        const double keep = params[k];
        double f[4];
        bool kink = false;
        const double offsets[4] = {2, 1, -1, -2};
        for (int s = 0; s < 4; ++s) {
          params[k] = keep + offsets[s] * kFdStep;
          const auto [value, sig] = loss();
          f[s] = value;
          kink = kink || sig != base_sig;
        }
        params[k] = keep;
        if (kink) {
          ++rep.skipped;
          continue;
        }
        rep.record(grad[k], stencil(f[0], f[1], f[2], f[3]), floor, l);
      }
    }
  }
  return rep;
}

}  // namespace testing
