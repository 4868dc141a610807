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

// Shared fixtures and brute-force oracles for the unit tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "infonet/filter.hpp"
#include "infonet/grid.hpp"
#include "infonet/infomap.hpp"
#include "infonet/random.hpp"
#include "infonet/sensors.hpp"

namespace testing {

// Dirichlet-like random belief; `sparsity` of the cells are zeroed.
inline infonet::Belief random_belief(int n, infonet::Rng& rng, double sparsity = 0.0) {
  std::vector<double> w(std::size_t(n) * n);
  for (auto& v : w) {
    const double u = infonet::uniform01(rng);
    v = (u < sparsity) ? 0.0 : -std::log(1.0 - infonet::uniform01(rng));
  }
  w[infonet::uniform_index(rng, w.size())] += 1.0;
  return infonet::Belief::normalized(n, std::move(w));
}

// I(z; theta) = H(b) - sum_z P(z) H(b | z), straight from Bayes' rule.
inline double mi_oracle(const infonet::Belief& b, const infonet::Sensor& sensor,
                        const infonet::GridSpec& grid, infonet::PoseSE2 x) {
  const int nz = infonet::measurement_count(sensor);
  const int cells = grid.cells();
  std::vector<std::vector<double>> lik(cells, std::vector<double>(nz));
  for (int t = 0; t < cells; ++t) {
    infonet::measurement_distribution(sensor, x, infonet::cell_center(grid, t), lik[t]);
  }
  double expected_post = 0.0;
  for (int z = 0; z < nz; ++z) {
    std::vector<double> post(cells);
    double pz = 0.0;
    for (int t = 0; t < cells; ++t) {
      post[t] = b[t] * lik[t][z];
      pz += post[t];
    }
    if (pz <= 0.0) continue;
    for (auto& v : post) v /= pz;
    expected_post += pz * infonet::entropy(post);
  }
  return infonet::entropy(b) - expected_post;
}

// det of the belief-weighted Fisher sum, written out without helpers.
inline double fisher_oracle(const infonet::Belief& b, const infonet::GridSpec& grid,
                            infonet::PoseR2 x, double sigma_deg) {
  const double s = sigma_deg * M_PI / 180.0;
  const double radius = 0.5 * grid.cell_width();
  double a = 0, c = 0, d = 0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      const auto t = infonet::cell_center(grid, infonet::TargetCell{i, j});
      const double dn = t.north - x.north, de = t.east - x.east;
      const double r2 = dn * dn + de * de;
      if (std::sqrt(r2) < radius) continue;
      const double g0 = de / r2, g1 = -dn / r2;
      const double w = b.at(i, j) / (s * s);
      a += w * g0 * g0;
      c += w * g0 * g1;
      d += w * g1 * g1;
    }
  }
  return std::max(0.0, a * d - c * c);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Scratch directory unique to the test binary, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("infonet_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing
