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

#include "infonet/filter.hpp"

#include <cmath>
#include <vector>

#include "infonet/error.hpp"

namespace infonet {

namespace {

Belief renormalize(int n, std::vector<double> post) {
  double sum = 0.0;
  for (double w : post) sum += w;
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    fail(ErrorCode::numeric, "filter update: posterior has no mass (sensor model violation)");
  }
  for (double& w : post) w /= sum;
  return Belief(n, std::move(post));
}

}  // namespace

Belief update(const Belief& prior, const Sensor& sensor, const GridSpec& grid, PoseSE2 x, int z) {
  require(prior.n() == grid.n, "filter update: belief/grid size mismatch");
  require(z >= 0 && z < measurement_count(sensor), "filter update: measurement out of range");
  std::vector<double> post(prior.size());
  for (std::size_t t = 0; t < post.size(); ++t) {
    post[t] = prior[t] * likelihood(sensor, z, x, cell_center(grid, static_cast<int>(t)));
  }
  return renormalize(prior.n(), std::move(post));
}

Belief update(const Belief& prior, const LikelihoodTable& table, int state, int z) {
  require(prior.n() == table.grid().n, "filter update: belief/table size mismatch");
  require(state >= 0 && state < table.states(), "filter update: state out of range");
  require(z >= 0 && z < table.measurements(), "filter update: measurement out of range");
  std::vector<double> post(prior.size());
  for (std::size_t t = 0; t < post.size(); ++t) {
    post[t] = prior[t] * table.row(state, static_cast<int>(t))[static_cast<std::size_t>(z)];
  }
  return renormalize(prior.n(), std::move(post));
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace infonet
