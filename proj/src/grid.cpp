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

#include "infonet/grid.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "infonet/error.hpp"

namespace infonet {

void GridSpec::validate() const {
  require(n >= 2, "grid: n must be >= 2 (got " + std::to_string(n) + ")");
  require(heading_bins >= 1, "grid: heading_bins must be >= 1");
  require(side_length > 0.0 && std::isfinite(side_length),
          "grid: side_length must be positive");
}

PoseR2 cell_center(const GridSpec& grid, TargetCell cell) {
  require(cell.i >= 0 && cell.i < grid.n && cell.j >= 0 && cell.j < grid.n,
          "cell_center: index (" + std::to_string(cell.i) + ", " +
              std::to_string(cell.j) + ") out of range");
  const double w = grid.cell_width();
  return {(cell.i + 0.5) * w, (cell.j + 0.5) * w};
}

Bearing true_bearing(PoseR2 from, PoseR2 target) {
  const double dn = target.north - from.north;
  const double de = target.east - from.east;
  if (dn == 0.0 && de == 0.0) return {0.0, true};
  const double deg = std::atan2(de, dn) * (180.0 / std::numbers::pi);
  return {normalize_heading(deg), false};
}

double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) h += 360.0;
  // fmod of a tiny negative value can round up to exactly 360
  if (h >= 360.0) h -= 360.0;
  return h;
}

double wrap_angle_diff(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

Belief::Belief(int n) : n_(n) {
  require(n >= 1, "belief: n must be positive");
  const auto cells = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  weights_.assign(cells, 1.0 / static_cast<double>(cells));
}

Belief::Belief(int n, std::vector<double> weights) : n_(n), weights_(std::move(weights)) {
  require(n >= 1, "belief: n must be positive");
  require(weights_.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
          "belief: expected n*n weights");
  double sum = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "belief: weights must be finite and nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= kSumTolerance,
          "belief: weights must sum to 1 (got " + std::to_string(sum) + ")");
}

Belief Belief::point_mass(int n, TargetCell cell) {
  require(cell.i >= 0 && cell.i < n && cell.j >= 0 && cell.j < n,
          "belief: point-mass cell out of range");
  std::vector<double> w(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  w[static_cast<std::size_t>(cell.i * n + cell.j)] = 1.0;
  return Belief(n, std::move(w));
}

Belief Belief::normalized(int n, std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "belief: weights must be finite and nonnegative");
    sum += w;
  }
  require(sum > 0.0, "belief: weights have zero mass");
  for (double& w : weights) w /= sum;
  return Belief(n, std::move(weights));
}

}  // namespace infonet
