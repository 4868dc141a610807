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
#include <span>
#include <vector>

namespace infonet {

// Square search field discretized into n x n cells. Sensor grid points and
// target cells share the same lattice; headings are binned uniformly.
struct GridSpec {
  double side_length = 200.0;  // meters
  int n = 28;
  int heading_bins = 36;

  double cell_width() const { return side_length / n; }
  double cell_area() const { return cell_width() * cell_width(); }
  double heading_step() const { return 360.0 / heading_bins; }
  int cells() const { return n * n; }

  // Throws Error(invalid_argument) on n < 2, heading_bins < 1, side <= 0.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

// i indexes north, j indexes east; flat index is i * n + j.
struct TargetCell {
  int i = 0;
  int j = 0;
};

struct PoseR2 {
  double north = 0.0;
  double east = 0.0;
};

struct PoseSE2 {
  double north = 0.0;
  double east = 0.0;
  double heading = 0.0;  // degrees, [0, 360)

  PoseR2 position() const { return {north, east}; }
};

struct Bearing {
  double degrees = 0.0;     // east of north, [0, 360)
  bool coincident = false;  // points coincide; degrees is 0 by convention
};

PoseR2 cell_center(const GridSpec& grid, TargetCell cell);
inline PoseR2 cell_center(const GridSpec& grid, int flat_index) {
  return cell_center(grid, TargetCell{flat_index / grid.n, flat_index % grid.n});
}

Bearing true_bearing(PoseR2 from, PoseR2 target);

// Signed smallest rotation from b to a, in (-180, 180].
double wrap_angle_diff(double a, double b);

// Maps any angle onto [0, 360).
double normalize_heading(double degrees);

inline double heading_of_bin(const GridSpec& grid, int bin) {
  return bin * grid.heading_step();
}

// Histogram-filter posterior over the n x n target cells.
class Belief {
 public:
  static constexpr double kSumTolerance = 1e-9;

  // Uniform belief.
  explicit Belief(int n);

  // Adopts weights as-is after checking n*n size, nonnegativity and unit sum.
  Belief(int n, std::vector<double> weights);

  static Belief uniform(int n) { return Belief(n); }
  static Belief point_mass(int n, TargetCell cell);
  // Scales nonnegative weights with a positive sum onto the simplex.
  static Belief normalized(int n, std::vector<double> weights);

  int n() const { return n_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t flat) const { return weights_[flat]; }
  double at(int i, int j) const { return weights_[static_cast<std::size_t>(i * n_ + j)]; }

 private:
  int n_;
  std::vector<double> weights_;
};

}  // namespace infonet
