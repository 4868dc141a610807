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

#include "infonet/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "infonet/error.hpp"

namespace infonet {

std::string_view to_string(Modality m) {
  return m == Modality::bearing ? "bearing" : "fov";
}

Modality parse_modality(std::string_view text) {
  if (text == "bearing") return Modality::bearing;
  if (text == "fov") return Modality::fov;
  fail(ErrorCode::invalid_argument, "unknown modality '" + std::string(text) + "'");
}

void BearingSensor::validate() const {
  require(sigma > 0.0 && std::isfinite(sigma), "bearing sensor: sigma must be positive");
}

void FovSensor::validate() const {
  for (double p : {p_front, p_rear, p_side}) {
    require(p > 0.0 && p < 1.0, "fov sensor: probabilities must lie in (0, 1)");
  }
}

double FovSensor::detect_probability(double relative_bearing) const {
  const double d = std::abs(wrap_angle_diff(relative_bearing, 0.0));
  if (d <= kFrontHalfWidth + kEdgeTolerance) return p_front;
  // |d| >= 120 is the unsigned difference lying in [120, 240].
  if (d >= kRearLow - kEdgeTolerance) return p_rear;
  return p_side;
}

Modality modality_of(const Sensor& sensor) {
  return std::holds_alternative<BearingSensor>(sensor) ? Modality::bearing : Modality::fov;
}

int measurement_count(Modality m) {
  return m == Modality::bearing ? BearingSensor::kMeasurements : FovSensor::kMeasurements;
}

int state_count(Modality m, const GridSpec& grid) {
  return m == Modality::bearing ? grid.cells() : grid.cells() * grid.heading_bins;
}

PoseSE2 sensor_state(Modality m, const GridSpec& grid, int index) {
  require(index >= 0 && index < state_count(m, grid), "sensor state index out of range");
  const int cells = grid.cells();
  const int h = m == Modality::bearing ? 0 : index / cells;
  const PoseR2 c = cell_center(grid, index % cells);
  return {c.north, c.east, heading_of_bin(grid, h)};
}

int sensor_state_index(Modality m, const GridSpec& grid, TargetCell cell, int heading_bin) {
  const int flat = cell.i * grid.n + cell.j;
  return m == Modality::bearing ? flat : heading_bin * grid.cells() + flat;
}

std::array<double, BearingSensor::kMeasurements> bearing_distribution(const BearingSensor& s,
                                                                      PoseR2 x, PoseR2 target) {
  std::array<double, BearingSensor::kMeasurements> out{};
  const Bearing beta = true_bearing(x, target);
  if (beta.coincident) {
    out.fill(1.0 / BearingSensor::kMeasurements);
    return out;
  }
  // Exponents are shifted by the smallest squared offset so the nearest bin
  // has weight 1 and tiny sigma cannot underflow every bin.
  std::array<double, BearingSensor::kMeasurements> sq{};
  double min_sq = std::numeric_limits<double>::infinity();
  for (int m = 0; m < BearingSensor::kMeasurements; ++m) {
    const double d = wrap_angle_diff(m * BearingSensor::kSpacing, beta.degrees);
    sq[m] = d * d;
    min_sq = std::min(min_sq, sq[m]);
  }
  const double inv_two_var = 1.0 / (2.0 * s.sigma * s.sigma);
  double sum = 0.0;
  for (int m = 0; m < BearingSensor::kMeasurements; ++m) {
    out[m] = std::exp(-(sq[m] - min_sq) * inv_two_var);
    sum += out[m];
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {

int bearing_bin(double z_degrees) {
  const double bin = z_degrees / BearingSensor::kSpacing;
  const double rounded = std::round(bin);
  require(std::abs(bin - rounded) < 1e-9 && rounded >= 0 &&
              rounded < BearingSensor::kMeasurements,
          "bearing measurement " + std::to_string(z_degrees) +
              " is not in {0, 10, ..., 350} degrees");
  return static_cast<int>(rounded);
}

double fov_detect(const FovSensor& s, PoseSE2 x, PoseR2 target) {
  const Bearing beta = true_bearing(x.position(), target);
  if (beta.coincident) return 0.5;
  return s.detect_probability(beta.degrees - x.heading);
}

}  // namespace

double bearing_likelihood(const BearingSensor& s, double z_degrees, PoseR2 x, PoseR2 target) {
  const int bin = bearing_bin(z_degrees);
  return bearing_distribution(s, x, target)[static_cast<std::size_t>(bin)];
}

double bearing_likelihood(const BearingSensor& s, double z_degrees, PoseR2 x,
                          const GridSpec& grid, TargetCell target) {
  return bearing_likelihood(s, z_degrees, x, cell_center(grid, target));
}

double fov_likelihood(const FovSensor& s, int z, PoseSE2 x, PoseR2 target) {
  require(z == 0 || z == 1, "fov measurement must be 0 or 1");
  const double p1 = fov_detect(s, x, target);
  return z == 1 ? p1 : 1.0 - p1;
}

double fov_likelihood(const FovSensor& s, int z, PoseSE2 x, const GridSpec& grid,
                      TargetCell target) {
  return fov_likelihood(s, z, x, cell_center(grid, target));
}

void measurement_distribution(const Sensor& s, PoseSE2 x, PoseR2 target, std::span<double> out) {
  require(out.size() == static_cast<std::size_t>(measurement_count(s)),
          "measurement_distribution: output size mismatch");
  if (const auto* b = std::get_if<BearingSensor>(&s)) {
    const auto dist = bearing_distribution(*b, x.position(), target);
    std::copy(dist.begin(), dist.end(), out.begin());
  } else {
    const double p1 = fov_detect(std::get<FovSensor>(s), x, target);
    out[0] = 1.0 - p1;
    out[1] = p1;
  }
}

double likelihood(const Sensor& s, int z, PoseSE2 x, PoseR2 target) {
  require(z >= 0 && z < measurement_count(s), "measurement index out of range");
  if (const auto* b = std::get_if<BearingSensor>(&s)) {
    return bearing_likelihood(*b, z * BearingSensor::kSpacing, x.position(), target);
  }
  return fov_likelihood(std::get<FovSensor>(s), z, x, target);
}

int sample(const Sensor& s, PoseSE2 x, PoseR2 target, Rng& rng) {
  std::array<double, BearingSensor::kMeasurements> pmf{};
  const int count = measurement_count(s);
  measurement_distribution(s, x, target, std::span<double>(pmf.data(), count));
  const double u = uniform01(rng);
  double cdf = 0.0;
  for (int z = 0; z < count; ++z) {
    cdf += pmf[z];
    if (u < cdf) return z;
  }
  // u landed in the roundoff gap above the accumulated cdf
  for (int z = count - 1; z >= 0; --z) {
    if (pmf[z] > 0.0) return z;
  }
  return count - 1;
}

std::size_t LikelihoodTable::required_bytes(Modality m, const GridSpec& grid) {
  const auto states = static_cast<std::size_t>(state_count(m, grid));
  const auto targets = static_cast<std::size_t>(grid.cells());
  const auto z = static_cast<std::size_t>(measurement_count(m));
  return states * targets * (z + 1) * sizeof(double);
}

LikelihoodTable::LikelihoodTable(Sensor sensor, GridSpec grid, std::size_t budget_bytes)
    : sensor_(sensor), grid_(grid) {
  grid_.validate();
  std::visit([](const auto& s) { s.validate(); }, sensor_);
  const Modality m = modality_of(sensor_);
  const std::size_t bytes = required_bytes(m, grid_);
  if (bytes > budget_bytes) {
    fail(ErrorCode::resource, "likelihood table needs " + std::to_string(bytes) +
                                  " bytes, over the budget of " +
                                  std::to_string(budget_bytes));
  }
  states_ = state_count(m, grid_);
  targets_ = grid_.cells();
  measurements_ = measurement_count(m);
  values_.resize(static_cast<std::size_t>(states_) * targets_ * measurements_);
  entropy_.resize(static_cast<std::size_t>(states_) * targets_);

  std::vector<PoseR2> centers(static_cast<std::size_t>(targets_));
  for (int t = 0; t < targets_; ++t) centers[t] = cell_center(grid_, t);

  for (int x = 0; x < states_; ++x) {
    const PoseSE2 pose = sensor_state(m, grid_, x);
    for (int t = 0; t < targets_; ++t) {
      const auto off = (static_cast<std::size_t>(x) * targets_ + t) * measurements_;
      std::span<double> r(values_.data() + off, static_cast<std::size_t>(measurements_));
      measurement_distribution(sensor_, pose, centers[t], r);
      double h = 0.0;
      for (double p : r) {
        if (p > 0.0) h -= p * std::log(p);
      }
      entropy_[static_cast<std::size_t>(x) * targets_ + t] = h;
    }
  }
}

}  // namespace infonet
