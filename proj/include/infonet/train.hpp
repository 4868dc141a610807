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
#include <optional>
#include <vector>

#include "infonet/neural.hpp"
#include "infonet/sim.hpp"

namespace infonet {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double validation_fraction = 0.10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // Each training sample passes through a random grid symmetry every epoch.
  // Ignored when the training set carries no symmetries.
  bool augment = true;

  void validate() const;
};

// One of the 8 symmetries of the square grid, as gathers:
// input'[k] = input[input_source[k]], target'[k] = target_sign[k] * target[target_source[k]].
struct SampleSymmetry {
  std::vector<std::uint32_t> input_source;
  std::vector<std::uint32_t> target_source;
  std::vector<float> target_sign;
};

// Inputs and targets as flat float rows.
struct TrainingSet {
  std::size_t count = 0;
  std::size_t input_size = 0;
  std::size_t target_size = 0;
  std::vector<float> inputs;
  std::vector<float> targets;
  // Identity first. Empty when the targets have no exact symmetry, as for
  // SE(2) grids whose heading count is not a multiple of 4.
  std::vector<SampleSymmetry> symmetries;

  std::span<const float> input(std::size_t s) const {
    return {inputs.data() + s * input_size, input_size};
  }
  std::span<const float> target(std::size_t s) const {
    return {targets.data() + s * target_size, target_size};
  }
};

// Beliefs paired with maps (map-net) or coefficient vectors (coeff-net).
TrainingSet make_training_set(const Dataset& data, Architecture arch);

// The 8 grid symmetries: optional transpose, then optional north-south and
// east-west flips. Headings turn with the grid. Exact maps are equivariant
// under these, and the coefficients of a moved map are a signed permutation
// of the original ones.
std::vector<SampleSymmetry> grid_symmetries(const GridSpec& grid, Modality modality,
                                            Architecture arch, int coeff_order);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;  // empty when the validation split is empty
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_loss = 0.0;  // validation loss, or training loss without a split
  bool overfitting_suspected = false;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

// Seeded split of floor(fraction * count) validation samples.
void split_indices(std::size_t count, double fraction, std::uint64_t seed,
                   std::vector<std::size_t>& train, std::vector<std::size_t>& validation);

// Mean loss of the network over the listed samples (KL for map-net, MAE for
// coeff-net).
double mean_loss(const Network& net, const TrainingSet& data, std::span<const std::size_t> idx);

// Adam on mini-batches whose gradients are summed in sample order. Leaves the
// best-scoring parameters in net. Throws Error(numeric) on a non-finite loss.
TrainResult train(Network& net, const TrainingSet& data, const TrainConfig& config);

void write_history_csv(const TrainResult& result, const std::filesystem::path& path);

}  // namespace infonet
