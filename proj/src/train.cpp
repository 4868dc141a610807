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

#include "infonet/train.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "infonet/error.hpp"
#include "infonet/random.hpp"

namespace infonet {

void TrainConfig::validate() const {
  require(epochs >= 1, "train: epochs must be positive");
  require(batch_size >= 1, "train: batch size must be positive");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0,
          "train: learning rate must be finite and nonnegative");
  require(validation_fraction > 0.0 && validation_fraction < 1.0,
          "train: validation fraction must lie in (0, 1)");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0,
          "train: bad optimizer constants");
}

TrainingSet make_training_set(const Dataset& data, Architecture arch) {
  require(data.samples > 0, "training set: dataset is empty");
  TrainingSet t;
  t.count = data.samples;
  t.input_size = std::size_t(data.config.grid.cells());
  t.inputs = data.beliefs;
  if (arch == Architecture::map_net) {
    t.target_size = data.map_size;
    t.targets = data.maps;
  } else {
    t.target_size = data.coeff_count;
    t.targets = data.coeffs;
  }
  t.symmetries =
      grid_symmetries(data.config.grid, data.config.modality, arch, data.config.coeff_order);
  return t;
}

std::vector<SampleSymmetry> grid_symmetries(const GridSpec& grid, Modality modality,
                                            Architecture arch, int coeff_order) {
  grid.validate();
  const bool se2 = modality == Modality::fov;
  const int n = grid.n;
  const int H = se2 ? grid.heading_bins : 1;
  if (se2 && H % 4 != 0) return {};
  std::optional<SpectralBasis> basis;
  if (arch == Architecture::coeff_net) {
    basis.emplace(grid, IndexSet::for_space(space_of(modality), coeff_order));
  }
  const auto cells = std::size_t(n) * n;

  std::vector<SampleSymmetry> out;
  for (int g = 0; g < 8; ++g) {
    const bool t = g & 1, fn = g & 2, fe = g & 4;
    // Headings map as theta -> 90 * alpha + s * theta.
    int alpha = 0, s = 1;
    auto then = [&](int a, int b) {
      alpha = a + b * alpha;
      s *= b;
    };
    if (t) then(1, -1);
    if (fn) then(2, -1);
    if (fe) then(0, -1);
    alpha = ((alpha % 4) + 4) % 4;

    auto moved = [&](int i, int j) {
      int i2 = t ? j : i, j2 = t ? i : j;
      if (fn) i2 = n - 1 - i2;
      if (fe) j2 = n - 1 - j2;
      return std::size_t(i2) * n + std::size_t(j2);
    };
    auto turned = [&](int h) { return se2 ? ((alpha * (H / 4) + s * h) % H + H) % H : 0; };

    SampleSymmetry sym;
    sym.input_source.resize(cells);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sym.input_source[moved(i, j)] = std::uint32_t(i * n + j);

    if (!basis) {
      sym.target_source.resize(cells * std::size_t(H));
      for (int h = 0; h < H; ++h)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            sym.target_source[std::size_t(turned(h)) * cells + moved(i, j)] =
                std::uint32_t(std::size_t(h) * cells + std::size_t(i) * n + std::size_t(j));
          }
      sym.target_sign.assign(sym.target_source.size(), 1.0f);
    } else {
      // F_k(g y) = sign * F_k'(y), so the moved map has coefficient sign * c_k'.
      const IndexSet& idx = basis->indices();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const MultiIndex& a = idx[k];
        MultiIndex b = a;
        if (t) std::swap(b.k1, b.k2);
        int sign = 1;
        if (fn && a.k1 % 2) sign = -sign;
        if (fe && a.k2 % 2) sign = -sign;
        if (a.k3 != 0) {
          const double turn = a.k3 * alpha * std::numbers::pi / 2.0;
          const int cm = int(std::lround(std::cos(turn)));
          const int sm = int(std::lround(std::sin(turn)));
          if (a.kind == Trig::cos) {
            b.kind = cm != 0 ? Trig::cos : Trig::sin;
            sign *= cm != 0 ? cm : -sm * s;
          } else {
            b.kind = sm != 0 ? Trig::cos : Trig::sin;
            sign *= sm != 0 ? sm : cm * s;
          }
        }
        const std::size_t src = idx.position(b);
        // Unequal lattice norms would break the signed-permutation form.
        if (std::abs(basis->norm(k) - basis->norm(src)) > 1e-12 * basis->norm(k)) return {};
        sym.target_source.push_back(std::uint32_t(src));
        sym.target_sign.push_back(float(sign));
      }
    }
    out.push_back(std::move(sym));
  }
  return out;
}

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    const std::size_t r = std::size_t(uniform_index(rng, k));
    std::swap(v[k - 1], v[r]);
  }
}

bool is_map_net(const Network& net) { return net.spec().arch == Architecture::map_net; }

// KL(target || softmax(logits)) through log-softmax, so float underflow in the
// probabilities cannot produce log 0.
double kl_from_logits(std::span<const float> logits, std::span<const float> target) {
  require(logits.size() == target.size(), "kl: length mismatch");
  double mx = logits[0];
  for (float z : logits) mx = std::max(mx, double(z));
  double sum = 0.0;
  for (float z : logits) sum += std::exp(double(z) - mx);
  const double lse = mx + std::log(sum);
  double loss = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double t = std::max(double(target[k]), 1e-12);
    loss += t * (std::log(t) - (double(logits[k]) - lse));
  }
  return loss;
}

double forward_loss(const Network& net, Network::Workspace& ws, std::span<const float> input,
                    std::span<const float> target) {
  const auto out = net.forward(input, ws);
  if (is_map_net(net)) return kl_from_logits(ws.acts[net.layer_count() - 1], target);
  return mae_loss<float>(out, target);
}

// Loss of one sample; fills grad_end with the gradient at the point where
// backpropagation starts and returns that point's activation index.
std::size_t sample_loss(const Network& net, Network::Workspace& ws, std::span<const float> input,
                        std::span<const float> target, std::vector<float>& grad_end,
                        double& loss) {
  loss = forward_loss(net, ws, input, target);
  const std::span<const float> out = ws.acts.back();
  const std::size_t layers = net.layer_count();
  if (is_map_net(net)) {
    // Fused softmax + KL gradient at the logits.
    grad_end.resize(out.size());
    kl_softmax_grad<float>(out, target, grad_end);
    return layers - 1;
  }
  grad_end.resize(out.size());
  mae_grad<float>(out, target, grad_end);
  return layers;
}

}  // namespace

void split_indices(std::size_t count, double fraction, std::uint64_t seed,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& validation) {
  std::vector<std::size_t> order(count);
  for (std::size_t k = 0; k < count; ++k) order[k] = k;
  Rng rng = make_stream(seed, 0);
  shuffle(order, rng);
  const auto nval = std::size_t(std::floor(fraction * double(count)));
  validation.assign(order.begin(), order.begin() + std::ptrdiff_t(nval));
  train.assign(order.begin() + std::ptrdiff_t(nval), order.end());
}

double mean_loss(const Network& net, const TrainingSet& data, std::span<const std::size_t> idx) {
  require(!idx.empty(), "mean_loss: no samples");
  Network::Workspace ws = net.make_workspace();
  double acc = 0.0;
  for (std::size_t s : idx) {
    acc += forward_loss(net, ws, data.input(s), data.target(s));
  }
  return acc / double(idx.size());
}

TrainResult train(Network& net, const TrainingSet& data, const TrainConfig& config) {
  config.validate();
  require(data.count > 0, "train: dataset is empty");
  require(data.input_size == net.spec().input_size() &&
              data.target_size == net.spec().output_size(),
          "train: dataset shapes do not match the network");

  TrainResult result;
  split_indices(data.count, config.validation_fraction, config.seed, result.train_indices,
                result.validation_indices);
  require(!result.train_indices.empty(), "train: no training samples after the split");

  const std::size_t P = net.params().size();
  std::vector<float> grad(P), m(P, 0.0f), v(P, 0.0f);
  std::vector<float> best(net.params().begin(), net.params().end());
  std::vector<float> grad_end;
  std::vector<float> moved_input(data.input_size), moved_target(data.target_size);
  const bool augment = config.augment && !data.symmetries.empty();
  Network::Workspace ws = net.make_workspace();
  Rng rng = make_stream(config.seed, 1);
  std::vector<std::size_t> order = result.train_indices;
  const float b1 = float(config.beta1), b2 = float(config.beta2);
  const float eps = float(config.epsilon);
  const float lr = float(config.learning_rate);
  double b1t = 1.0, b2t = 1.0;
  bool have_best = false;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + std::size_t(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0f);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t s = order[k];
        std::span<const float> input = data.input(s), target = data.target(s);
        if (augment) {
          const auto g = std::size_t(uniform_index(rng, data.symmetries.size()));
          if (g != 0) {
            const SampleSymmetry& sym = data.symmetries[g];
            for (std::size_t q = 0; q < moved_input.size(); ++q) {
              moved_input[q] = input[sym.input_source[q]];
            }
            for (std::size_t q = 0; q < moved_target.size(); ++q) {
              moved_target[q] = sym.target_sign[q] * target[sym.target_source[q]];
            }
            input = moved_input;
            target = moved_target;
          }
        }
        double loss = 0.0;
        const std::size_t end = sample_loss(net, ws, input, target, grad_end, loss);
        if (!std::isfinite(loss)) {
          fail(ErrorCode::numeric, "train: non-finite loss at epoch " + std::to_string(epoch) +
                                       ", sample " + std::to_string(s) +
                                       "; try a smaller learning rate");
        }
        epoch_loss += loss;
        net.backward(ws, end, grad_end, grad);
      }
      const float inv = 1.0f / float(stop - start);
      b1t *= config.beta1;
      b2t *= config.beta2;
      const float c1 = float(1.0 / (1.0 - b1t));
      const float c2 = float(1.0 / (1.0 - b2t));
      auto p = net.params();
      for (std::size_t k = 0; k < P; ++k) {
        const float g = grad[k] * inv;
        m[k] = b1 * m[k] + (1.0f - b1) * g;
        v[k] = b2 * v[k] + (1.0f - b2) * g * g;
        p[k] -= lr * (m[k] * c1) / (std::sqrt(v[k] * c2) + eps);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / double(order.size());
    double score = rec.train_loss;
    if (!result.validation_indices.empty()) {
      rec.val_loss = mean_loss(net, data, result.validation_indices);
      if (!std::isfinite(*rec.val_loss)) {
        fail(ErrorCode::numeric, "train: non-finite validation loss at epoch " +
                                     std::to_string(epoch));
      }
      score = *rec.val_loss;
    }
    result.history.push_back(rec);
    if (!have_best || score < result.best_loss) {
      have_best = true;
      result.best_loss = score;
      result.best_epoch = epoch;
      std::copy(net.params().begin(), net.params().end(), best.begin());
    }
  }
  std::copy(best.begin(), best.end(), net.params().begin());

  // Validation loss well above its best while training loss kept falling.
  const EpochRecord& last = result.history.back();
  if (last.val_loss && result.best_epoch < last.epoch) {
    const double best_train = result.history[std::size_t(result.best_epoch - 1)].train_loss;
    result.overfitting_suspected =
        *last.val_loss > 1.1 * result.best_loss && last.train_loss < best_train;
  }
  return result;
}

void write_history_csv(const TrainResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write history '" + path.string() + "'");
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (const auto& r : result.history) {
    out << r.epoch << ',' << r.train_loss << ',';
    if (r.val_loss) out << *r.val_loss;
    out << '\n';
  }
  if (!out) fail(ErrorCode::io, "failed writing history '" + path.string() + "'");
}

}  // namespace infonet
