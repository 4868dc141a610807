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
#include <string_view>
#include <vector>

#include "infonet/grid.hpp"
#include "infonet/sensors.hpp"

namespace infonet {

enum class Space { r2, se2 };
enum class Metric { mutual, fisher };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

inline Space space_of(Modality m) { return m == Modality::bearing ? Space::r2 : Space::se2; }

// Scalar field over the sensor grid points. R2 maps have one heading slice;
// SE2 maps are stored heading-major: values[h * n * n + i * n + j].
struct InfoMap {
  Space space = Space::r2;
  int n = 0;
  int headings = 1;
  std::vector<double> values;
  bool normalized = false;
  bool degenerate = false;    // normalized from an all-zero field
  double wall_seconds = 0.0;  // generation time, filled by the map builders

  static InfoMap r2(int n) { return {Space::r2, n, 1, std::vector<double>(std::size_t(n) * n)}; }
  static InfoMap se2(int n, int headings) {
    return {Space::se2, n, headings, std::vector<double>(std::size_t(n) * n * headings)};
  }

  std::size_t size() const { return values.size(); }
  double& at(int i, int j, int h = 0) { return values[(std::size_t(h) * n + i) * n + j]; }
  double at(int i, int j, int h = 0) const { return values[(std::size_t(h) * n + i) * n + j]; }
  std::span<const double> slice(int h) const {
    return {values.data() + std::size_t(h) * n * n, std::size_t(n) * n};
  }
};

// I(z; theta) = H(z) - H(z | b) at one sensor state, in nats, clamped at 0.
// This overload calls the sensor model directly.
double mutual_info_at(const Belief& b, const Sensor& sensor, const GridSpec& grid, PoseSE2 x);
// Table-backed evaluation at sensor state index x.
double mutual_info_at(const Belief& b, const LikelihoodTable& table, int x);

// Mutual-information map over every state of the table (R2 or SE2 by modality).
// threads > 1 splits the states; the result is bit-identical either way.
InfoMap mi_map(const Belief& b, const LikelihoodTable& table, int threads = 1);
InfoMap mi_map_r2(const Belief& b, const BearingSensor& sensor, const GridSpec& grid,
                  const LikelihoodTable& table, int threads = 1);
InfoMap mi_map_se2(const Belief& b, const FovSensor& sensor, const GridSpec& grid,
                   const LikelihoodTable& table, int threads = 1);

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]] in (north, east) order.
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
};

// Bearing Fisher information (1/sigma^2) grad grad^T for one sensor-target
// pair, sigma in radians. Pairs closer than coincidence_radius give zero.
Mat2 fisher_matrix(PoseR2 x, PoseR2 target, double sigma_rad, double coincidence_radius = 0.0);

// Belief-weighted sum of fisher_matrix over target cells at sensor point x.
Mat2 fisher_expectation(const Belief& b, const GridSpec& grid, PoseR2 x, double sigma_deg);

// det of the expected Fisher matrix at every cell center, clamped at 0.
InfoMap fisher_map(const Belief& b, const GridSpec& grid, double sigma_deg);

// Divides by the sum. An all-zero map becomes uniform with degenerate set.
// Entries below -1e-9 are rejected.
InfoMap normalize_map(InfoMap m);

}  // namespace infonet
