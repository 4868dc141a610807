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

#include "infonet/infomap.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "infonet/error.hpp"

namespace infonet {

std::string_view to_string(Metric m) { return m == Metric::mutual ? "mutual" : "fisher"; }

Metric parse_metric(std::string_view text) {
  if (text == "mutual") return Metric::mutual;
  if (text == "fisher") return Metric::fisher;
  fail(ErrorCode::invalid_argument, "unknown metric '" + std::string(text) + "'");
}

namespace {

double clamp_info(double v) { return v < 0.0 ? 0.0 : v; }

double entropy_of_pmf(const double* p, int count) {
  double h = 0.0;
  for (int z = 0; z < count; ++z) {
    if (p[z] > 0.0) h -= p[z] * std::log(p[z]);
  }
  return h;
}

// I = sum_t b_t KL(P_t || Pbar), evaluated relative to the most probable cell r:
//   I = sum_{t != r} b_t KL(P_t || P_r) - sum_z Pbar_z log1p(D_z / P_r,z),
// with D_z = Pbar_z - P_r,z = sum_{t != r} b_t (P_t,z - P_r,z). This equals
// H(z) - H(z | theta) exactly but keeps relative precision when the belief is
// nearly a point mass, where the entropy difference cancels to rounding noise.
template <int Z>
void accumulate_rows(std::span<const double> belief, std::size_t lo, std::size_t hi,
                     const double* block, const double* ent, std::array<double, Z>& s,
                     double& mass, double& neg_entropy) {
  for (std::size_t t = lo; t < hi; ++t) {
    const double w = belief[t];
    if (w == 0.0) continue;
    const double* row = block + t * Z;
    for (int z = 0; z < Z; ++z) s[z] += w * row[z];
    neg_entropy -= w * ent[t];
    mass += w;
  }
}

// The KL sum is linear in the rows, so its cross term is sum_z S_z log P_r,z
// with S_z = sum_{t != r} b_t P_t,z; every term scales with the off-anchor mass.
template <int Z>
double mi_anchored(std::span<const double> belief, std::size_t ref, const double* p0,
                   const double* block, const double* ent) {
  std::array<double, Z> s{};
  double mass = 0.0;
  double neg_entropy = 0.0;
  accumulate_rows<Z>(belief, 0, ref, block, ent, s, mass, neg_entropy);
  accumulate_rows<Z>(belief, ref + 1, belief.size(), block, ent, s, mass, neg_entropy);
  double kl = neg_entropy;
  double tail = 0.0;
  for (int z = 0; z < Z; ++z) {
    kl -= s[z] * std::log(p0[z]);
    const double d = s[z] - mass * p0[z];
    tail += (p0[z] + d) * std::log1p(d / p0[z]);
  }
  return clamp_info(kl - tail);
}

// Plain entropy difference; used when the anchor row has a zero entry.
template <int Z>
double mi_entropy_form(std::span<const double> belief, const double* block, const double* ent) {
  std::array<double, Z> pz{};
  double cond = 0.0;
  const std::size_t targets = belief.size();
  for (std::size_t t = 0; t < targets; ++t) {
    const double w = belief[t];
    if (w == 0.0) continue;
    const double* row = block + t * Z;
    for (int z = 0; z < Z; ++z) pz[z] += w * row[z];
    cond += w * ent[t];
  }
  return clamp_info(entropy_of_pmf(pz.data(), Z) - cond);
}

std::size_t most_probable(std::span<const double> belief) {
  return static_cast<std::size_t>(std::max_element(belief.begin(), belief.end()) - belief.begin());
}

template <int Z>
double mi_kernel(std::span<const double> belief, std::size_t ref, const double* block,
                 const double* ent) {
  const double* p0 = block + ref * Z;
  for (int z = 0; z < Z; ++z) {
    if (!(p0[z] > 0.0)) return mi_entropy_form<Z>(belief, block, ent);
  }
  return mi_anchored<Z>(belief, ref, p0, block, ent);
}

void check_table(const Belief& b, const LikelihoodTable& table) {
  require(b.n() == table.grid().n, "information map: belief/table grid mismatch");
}

template <typename Fn>
void for_each_state(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int x = 0; x < count; ++x) fn(x);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(count) * w / threads);
    const int hi = static_cast<int>(static_cast<long long>(count) * (w + 1) / threads);
    pool.emplace_back([lo, hi, &fn] {
      for (int x = lo; x < hi; ++x) fn(x);
    });
  }
  for (auto& t : pool) t.join();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double mutual_info_at(const Belief& b, const Sensor& sensor, const GridSpec& grid, PoseSE2 x) {
  require(b.n() == grid.n, "mutual_info_at: belief/grid mismatch");
  const int count = measurement_count(sensor);
  // Same arithmetic as the table path, on rows computed on the fly.
  std::vector<double> block(b.size() * static_cast<std::size_t>(count));
  std::vector<double> ent(b.size());
  for (std::size_t t = 0; t < b.size(); ++t) {
    if (b[t] == 0.0) continue;
    std::span<double> row(block.data() + t * count, static_cast<std::size_t>(count));
    measurement_distribution(sensor, x, cell_center(grid, static_cast<int>(t)), row);
    ent[t] = entropy_of_pmf(row.data(), count);
  }
  const std::size_t ref = most_probable(b.weights());
  if (count == BearingSensor::kMeasurements) {
    return mi_kernel<BearingSensor::kMeasurements>(b.weights(), ref, block.data(), ent.data());
  }
  return mi_kernel<FovSensor::kMeasurements>(b.weights(), ref, block.data(), ent.data());
}

double mutual_info_at(const Belief& b, const LikelihoodTable& table, int x) {
  check_table(b, table);
  require(x >= 0 && x < table.states(), "mutual_info_at: state out of range");
  const double* block = table.state_block(x).data();
  const double* ent = table.measurement_entropy(x).data();
  const std::size_t ref = most_probable(b.weights());
  if (table.measurements() == BearingSensor::kMeasurements) {
    return mi_kernel<BearingSensor::kMeasurements>(b.weights(), ref, block, ent);
  }
  return mi_kernel<FovSensor::kMeasurements>(b.weights(), ref, block, ent);
}

InfoMap mi_map(const Belief& b, const LikelihoodTable& table, int threads) {
  check_table(b, table);
  const auto start = Clock::now();
  const GridSpec& grid = table.grid();
  InfoMap m = table.modality() == Modality::bearing ? InfoMap::r2(grid.n)
                                                    : InfoMap::se2(grid.n, grid.heading_bins);
  const auto belief = b.weights();
  const bool bearing = table.measurements() == BearingSensor::kMeasurements;
  const std::size_t ref = most_probable(belief);
  for_each_state(table.states(), threads, [&](int x) {
    const double* block = table.state_block(x).data();
    const double* ent = table.measurement_entropy(x).data();
    m.values[static_cast<std::size_t>(x)] =
        bearing ? mi_kernel<BearingSensor::kMeasurements>(belief, ref, block, ent)
                : mi_kernel<FovSensor::kMeasurements>(belief, ref, block, ent);
  });
  m.wall_seconds = seconds_since(start);
  return m;
}

InfoMap mi_map_r2(const Belief& b, const BearingSensor& sensor, const GridSpec& grid,
                  const LikelihoodTable& table, int threads) {
  const auto* ts = std::get_if<BearingSensor>(&table.sensor());
  require(ts != nullptr && ts->sigma == sensor.sigma && table.grid() == grid,
          "mi_map_r2: likelihood table was built for a different sensor or grid");
  return mi_map(b, table, threads);
}

InfoMap mi_map_se2(const Belief& b, const FovSensor& sensor, const GridSpec& grid,
                   const LikelihoodTable& table, int threads) {
  const auto* ts = std::get_if<FovSensor>(&table.sensor());
  require(ts != nullptr && ts->p_front == sensor.p_front && ts->p_rear == sensor.p_rear &&
              ts->p_side == sensor.p_side && table.grid() == grid,
          "mi_map_se2: likelihood table was built for a different sensor or grid");
  return mi_map(b, table, threads);
}

Mat2 fisher_matrix(PoseR2 x, PoseR2 target, double sigma_rad, double coincidence_radius) {
  const double dn = target.north - x.north;
  const double de = target.east - x.east;
  const double r2 = dn * dn + de * de;
  if (r2 == 0.0 || r2 < coincidence_radius * coincidence_radius) return {};
  const double g0 = de / r2;
  const double g1 = -dn / r2;
  const double s = 1.0 / (sigma_rad * sigma_rad);
  return {s * g0 * g0, s * g0 * g1, s * g1 * g1};
}

Mat2 fisher_expectation(const Belief& b, const GridSpec& grid, PoseR2 x, double sigma_deg) {
  require(b.n() == grid.n, "fisher: belief/grid mismatch");
  const double sigma_rad = sigma_deg * std::numbers::pi / 180.0;
  const double radius = 0.5 * grid.cell_width();
  Mat2 acc;
  for (std::size_t t = 0; t < b.size(); ++t) {
    const double w = b[t];
    if (w == 0.0) continue;
    const Mat2 f = fisher_matrix(x, cell_center(grid, static_cast<int>(t)), sigma_rad, radius);
    acc.xx += w * f.xx;
    acc.xy += w * f.xy;
    acc.yy += w * f.yy;
  }
  return acc;
}

InfoMap fisher_map(const Belief& b, const GridSpec& grid, double sigma_deg) {
  require(b.n() == grid.n, "fisher_map: belief/grid mismatch");
  require(sigma_deg > 0.0, "fisher_map: sigma must be positive");
  const auto start = Clock::now();
  InfoMap m = InfoMap::r2(grid.n);
  for (int x = 0; x < grid.cells(); ++x) {
    const Mat2 phi = fisher_expectation(b, grid, cell_center(grid, x), sigma_deg);
    m.values[static_cast<std::size_t>(x)] = clamp_info(phi.det());
  }
  m.wall_seconds = seconds_since(start);
  return m;
}

InfoMap normalize_map(InfoMap m) {
  require(!m.values.empty(), "normalize_map: empty map");
  double sum = 0.0;
  for (double& v : m.values) {
    require(std::isfinite(v), "normalize_map: non-finite entry");
    if (v < -1e-9) {
      fail(ErrorCode::invalid_argument,
           "normalize_map: negative entry " + std::to_string(v));
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) {
    std::fill(m.values.begin(), m.values.end(), 1.0 / static_cast<double>(m.values.size()));
    m.degenerate = true;
  } else {
    for (double& v : m.values) v /= sum;
    m.degenerate = false;
  }
  m.normalized = true;
  return m;
}

}  // namespace infonet
