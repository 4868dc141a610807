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

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "infonet/grid.hpp"
#include "infonet/random.hpp"

namespace infonet {

enum class Modality { bearing, fov };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

// Bearing-only sensor with Gaussian noise, discretized onto 36 bins
// {0, 10, ..., 350} degrees. Heading does not affect the measurement.
struct BearingSensor {
  static constexpr int kMeasurements = 36;
  static constexpr double kSpacing = 10.0;

  double sigma = 10.0;  // degrees

  void validate() const;
};

// Front/rear antenna comparison. z = 1 when the front antenna is stronger.
struct FovSensor {
  static constexpr int kMeasurements = 2;
  static constexpr double kFrontHalfWidth = 60.0;
  static constexpr double kRearLow = 120.0;
  static constexpr double kRearHigh = 240.0;
  // Cone edges are closed; this absorbs roundoff in the bearing computation.
  static constexpr double kEdgeTolerance = 1e-9;

  double p_front = 0.9;
  double p_rear = 0.1;
  double p_side = 0.5;

  void validate() const;
  // P(z = 1) for a bearing relative to the sensor heading.
  double detect_probability(double relative_bearing) const;
};

using Sensor = std::variant<BearingSensor, FovSensor>;

Modality modality_of(const Sensor& sensor);
int measurement_count(Modality m);
inline int measurement_count(const Sensor& s) { return measurement_count(modality_of(s)); }

// Sensor grid points X_d. Bearing: n*n cell centers (index i*n + j). FOV:
// n*n*H poses, heading-major (index h*n*n + i*n + j).
int state_count(Modality m, const GridSpec& grid);
PoseSE2 sensor_state(Modality m, const GridSpec& grid, int index);
int sensor_state_index(Modality m, const GridSpec& grid, TargetCell cell, int heading_bin);

std::array<double, BearingSensor::kMeasurements> bearing_distribution(const BearingSensor& s,
                                                                      PoseR2 x, PoseR2 target);

// z_degrees must be one of the 36 bins; throws otherwise.
double bearing_likelihood(const BearingSensor& s, double z_degrees, PoseR2 x, PoseR2 target);
double bearing_likelihood(const BearingSensor& s, double z_degrees, PoseR2 x,
                          const GridSpec& grid, TargetCell target);

// z in {0, 1}.
double fov_likelihood(const FovSensor& s, int z, PoseSE2 x, PoseR2 target);
double fov_likelihood(const FovSensor& s, int z, PoseSE2 x, const GridSpec& grid,
                      TargetCell target);

// Conditional pmf over measurement indices; out.size() == measurement_count.
void measurement_distribution(const Sensor& s, PoseSE2 x, PoseR2 target, std::span<double> out);
// Likelihood of measurement index z (bearing bin, or FOV bit).
double likelihood(const Sensor& s, int z, PoseSE2 x, PoseR2 target);

// Draws a measurement index from the conditional pmf.
int sample(const Sensor& s, PoseSE2 x, PoseR2 target, Rng& rng);

// Dense P(z | x, theta) over X_d x Theta_d x Z_d, laid out [x][theta][z] so
// the per-state accumulation over targets and measurements is stride-1.
// Also memoizes the per-(x, theta) measurement entropy -sum_z P log P.
class LikelihoodTable {
 public:
  static constexpr std::size_t kDefaultBudgetBytes = std::size_t{1} << 30;

  LikelihoodTable(Sensor sensor, GridSpec grid,
                  std::size_t budget_bytes = kDefaultBudgetBytes);

  static std::size_t required_bytes(Modality m, const GridSpec& grid);

  const Sensor& sensor() const { return sensor_; }
  Modality modality() const { return modality_of(sensor_); }
  const GridSpec& grid() const { return grid_; }
  int states() const { return states_; }
  int targets() const { return targets_; }
  int measurements() const { return measurements_; }

  std::span<const double> row(int x, int target) const {
    const auto off = (static_cast<std::size_t>(x) * targets_ + target) * measurements_;
    return {values_.data() + off, static_cast<std::size_t>(measurements_)};
  }
  std::span<const double> state_block(int x) const {
    const auto len = static_cast<std::size_t>(targets_) * measurements_;
    return {values_.data() + static_cast<std::size_t>(x) * len, len};
  }
  std::span<const double> measurement_entropy(int x) const {
    return {entropy_.data() + static_cast<std::size_t>(x) * targets_,
            static_cast<std::size_t>(targets_)};
  }

 private:
  Sensor sensor_;
  GridSpec grid_;
  int states_;
  int targets_;
  int measurements_;
  std::vector<double> values_;
  std::vector<double> entropy_;
};

}  // namespace infonet
