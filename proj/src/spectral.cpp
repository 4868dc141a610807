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

#include "infonet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "infonet/container.hpp"
#include "infonet/error.hpp"

namespace infonet {

namespace {

constexpr double kPi = std::numbers::pi;

int slot_count(Space space, int order) { return space == Space::r2 ? 1 : 2 * order + 1; }

}  // namespace

IndexSet::IndexSet(Space space, int order) : space_(space), order_(order) {
  require(order >= 0, "index set: order K must be nonnegative");
  for (int k1 = 0; k1 <= order; ++k1) {
    for (int k2 = 0; k2 <= order; ++k2) {
      if (space == Space::r2) {
        indices_.push_back({k1, k2, 0, Trig::cos});
        continue;
      }
      indices_.push_back({k1, k2, 0, Trig::cos});
      for (int k3 = 1; k3 <= order; ++k3) {
        indices_.push_back({k1, k2, k3, Trig::cos});
        indices_.push_back({k1, k2, k3, Trig::sin});
      }
    }
  }
}

IndexSet IndexSet::r2(int order) { return IndexSet(Space::r2, order); }
IndexSet IndexSet::se2(int order) { return IndexSet(Space::se2, order); }

std::size_t IndexSet::count(Space space, int order) {
  const auto side = static_cast<std::size_t>(order + 1);
  return side * side * static_cast<std::size_t>(slot_count(space, order));
}

std::size_t IndexSet::position(const MultiIndex& k) const {
  require(k.k1 >= 0 && k.k1 <= order_ && k.k2 >= 0 && k.k2 <= order_,
          "multi-index out of range");
  std::size_t slot = 0;
  if (space_ == Space::se2) {
    require(k.k3 >= 0 && k.k3 <= order_, "multi-index heading order out of range");
    require(!(k.k3 == 0 && k.kind == Trig::sin), "multi-index (k3 = 0, sin) does not exist");
    slot = k.k3 == 0 ? 0 : static_cast<std::size_t>(2 * k.k3 - (k.kind == Trig::cos ? 1 : 0));
  } else {
    require(k.k3 == 0 && k.kind == Trig::cos, "R2 multi-index has no heading component");
  }
  const auto side = static_cast<std::size_t>(order_ + 1);
  return (static_cast<std::size_t>(k.k1) * side + static_cast<std::size_t>(k.k2)) *
             static_cast<std::size_t>(slot_count(space_, order_)) +
         slot;
}

SpectralBasis::SpectralBasis(const GridSpec& grid, IndexSet indices)
    : grid_(grid), indices_(std::move(indices)) {
  grid_.validate();
  const int order = indices_.order();
  const int n = grid_.n;
  require(order <= n - 1, "spectral basis: order K = " + std::to_string(order) +
                              " exceeds n - 1 = " + std::to_string(n - 1));
  const bool se2 = indices_.space() == Space::se2;
  if (se2) {
    require(2 * order < grid_.heading_bins,
            "spectral basis: heading order K must be below heading_bins / 2");
  }
  measure_ = grid_.cell_area() * (se2 ? 2.0 * kPi / grid_.heading_bins : 1.0);

  spatial_.resize(std::size_t(order + 1) * n);
  spatial_sq_.assign(std::size_t(order + 1), 0.0);
  for (int k = 0; k <= order; ++k) {
    for (int i = 0; i < n; ++i) {
      const double v = std::cos(k * kPi * (i + 0.5) / n);
      spatial_[std::size_t(k) * n + i] = v;
      spatial_sq_[k] += v * v;
    }
  }

  slots_ = slot_count(indices_.space(), order);
  const int slots = slots_;
  const int hcount = headings();
  angular_.resize(std::size_t(slots) * hcount);
  angular_sq_.assign(std::size_t(slots), 0.0);
  for (int s = 0; s < slots; ++s) {
    const int m = (s + 1) / 2;
    for (int h = 0; h < hcount; ++h) {
      const double a = se2 ? m * 2.0 * kPi * h / grid_.heading_bins : 0.0;
      const double v = s == 0 ? 1.0 : (s % 2 == 1 ? std::cos(a) : std::sin(a));
      angular_[std::size_t(s) * hcount + h] = v;
      angular_sq_[s] += v * v;
    }
  }

  norms_.resize(indices_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const MultiIndex& mi = indices_[k];
    // The lattice sum of a separable square factors into per-axis sums.
    const double sq = spatial_sq_[mi.k1] * spatial_sq_[mi.k2] *
                      angular_sq_[angular_slot(mi)] * measure_;
    norms_[k] = std::sqrt(sq);
  }
}

double SpectralBasis::evaluate(std::size_t k, PoseSE2 x) const {
  const MultiIndex& mi = indices_[k];
  const double L = grid_.side_length;
  double v = std::cos(mi.k1 * kPi * x.north / L) * std::cos(mi.k2 * kPi * x.east / L);
  if (indices_.space() == Space::se2 && mi.k3 != 0) {
    const double a = mi.k3 * x.heading * kPi / 180.0;
    v *= mi.kind == Trig::cos ? std::cos(a) : std::sin(a);
  }
  return v / norms_[k];
}

double SpectralBasis::lattice(std::size_t k, int i, int j, int h) const {
  const MultiIndex& mi = indices_[k];
  return spatial(mi.k1, i) * spatial(mi.k2, j) * angular(angular_slot(mi), h) / norms_[k];
}

double basis_r2(const SpectralBasis& basis, const MultiIndex& k, PoseR2 x) {
  require(basis.indices().space() == Space::r2, "basis_r2: basis is not R2");
  return basis.evaluate(basis.indices().position(k), {x.north, x.east, 0.0});
}

double basis_se2(const SpectralBasis& basis, const MultiIndex& k, PoseSE2 x) {
  require(basis.indices().space() == Space::se2, "basis_se2: basis is not SE2");
  return basis.evaluate(basis.indices().position(k), x);
}

CoeffVector decompose(const InfoMap& map, const SpectralBasis& basis) {
  const int n = basis.grid().n;
  const int H = basis.headings();
  require(map.space == basis.indices().space() && map.n == n && map.headings == H &&
              map.values.size() == basis.lattice_size(),
          "decompose: map shape does not match the basis");
  const int K1 = basis.indices().order() + 1;
  const int S = basis.slots();

  // t1[h][i][k2] = sum_j m[h][i][j] a_k2(j)
  std::vector<double> t1(std::size_t(H) * n * K1, 0.0);
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < n; ++i) {
      const double* row = map.values.data() + (std::size_t(h) * n + i) * n;
      double* out = t1.data() + (std::size_t(h) * n + i) * K1;
      for (int k2 = 0; k2 < K1; ++k2) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += row[j] * basis.spatial(k2, j);
        out[k2] = acc;
      }
    }
  }
  // t2[h][k1][k2] = sum_i a_k1(i) t1[h][i][k2]
  std::vector<double> t2(std::size_t(H) * K1 * K1, 0.0);
  for (int h = 0; h < H; ++h) {
    for (int k1 = 0; k1 < K1; ++k1) {
      double* out = t2.data() + (std::size_t(h) * K1 + k1) * K1;
      for (int i = 0; i < n; ++i) {
        const double a = basis.spatial(k1, i);
        const double* in = t1.data() + (std::size_t(h) * n + i) * K1;
        for (int k2 = 0; k2 < K1; ++k2) out[k2] += a * in[k2];
      }
    }
  }
  CoeffVector c{basis.indices().space(), basis.indices().order(),
                std::vector<double>(basis.size(), 0.0)};
  for (int k1 = 0; k1 < K1; ++k1) {
    for (int k2 = 0; k2 < K1; ++k2) {
      for (int s = 0; s < S; ++s) {
        double acc = 0.0;
        for (int h = 0; h < H; ++h) {
          acc += basis.angular(s, h) * t2[(std::size_t(h) * K1 + k1) * K1 + k2];
        }
        const std::size_t k = (std::size_t(k1) * K1 + k2) * S + s;
        c.values[k] = acc / basis.norm(k);
      }
    }
  }
  return c;
}

std::vector<double> reconstruct_raw(const CoeffVector& coeffs, const SpectralBasis& basis) {
  require(coeffs.space == basis.indices().space() && coeffs.order == basis.indices().order() &&
              coeffs.values.size() == basis.size(),
          "reconstruct: coefficient vector does not match the basis");
  const int n = basis.grid().n;
  const int H = basis.headings();
  const int K1 = basis.indices().order() + 1;
  const int S = basis.slots();

  // g[h][k1][k2] = sum_s (phi_k / h_k) t_s(h)
  std::vector<double> g(std::size_t(H) * K1 * K1, 0.0);
  for (int k1 = 0; k1 < K1; ++k1) {
    for (int k2 = 0; k2 < K1; ++k2) {
      for (int s = 0; s < S; ++s) {
        const std::size_t k = (std::size_t(k1) * K1 + k2) * S + s;
        const double w = coeffs.values[k] / basis.norm(k);
        if (w == 0.0) continue;
        for (int h = 0; h < H; ++h) {
          g[(std::size_t(h) * K1 + k1) * K1 + k2] += w * basis.angular(s, h);
        }
      }
    }
  }
  // q[h][i][k2] = sum_k1 a_k1(i) g[h][k1][k2]
  std::vector<double> q(std::size_t(H) * n * K1, 0.0);
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < n; ++i) {
      double* out = q.data() + (std::size_t(h) * n + i) * K1;
      for (int k1 = 0; k1 < K1; ++k1) {
        const double a = basis.spatial(k1, i);
        const double* in = g.data() + (std::size_t(h) * K1 + k1) * K1;
        for (int k2 = 0; k2 < K1; ++k2) out[k2] += a * in[k2];
      }
    }
  }
  std::vector<double> m(basis.lattice_size(), 0.0);
  const double measure = basis.cell_measure();
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < n; ++i) {
      const double* in = q.data() + (std::size_t(h) * n + i) * K1;
      double* out = m.data() + (std::size_t(h) * n + i) * n;
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int k2 = 0; k2 < K1; ++k2) acc += in[k2] * basis.spatial(k2, j);
        out[j] = measure * acc;
      }
    }
  }
  return m;
}

InfoMap reconstruct(const CoeffVector& coeffs, const SpectralBasis& basis) {
  std::vector<double> raw = reconstruct_raw(coeffs, basis);
  InfoMap m = basis.indices().space() == Space::r2
                  ? InfoMap::r2(basis.grid().n)
                  : InfoMap::se2(basis.grid().n, basis.grid().heading_bins);
  double sum = 0.0;
  for (double& v : raw) {
    v = std::max(v, kReconstructionFloor);
    sum += v;
  }
  for (double& v : raw) v /= sum;
  m.values = std::move(raw);
  m.normalized = true;
  return m;
}

CoeffVector trajectory_coeffs(const Trajectory& traj, const SpectralBasis& basis) {
  require(!traj.states.empty(), "trajectory_coeffs: empty trajectory");
  require(traj.dt > 0.0, "trajectory_coeffs: timestep must be positive");
  const double T = traj.duration();
  CoeffVector c{basis.indices().space(), basis.indices().order(),
                std::vector<double>(basis.size(), 0.0)};
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double acc = 0.0;
    for (const PoseSE2& q : traj.states) acc += basis.evaluate(k, q) * traj.dt;
    c.values[k] = acc / T;
  }
  return c;
}

std::vector<double> ergodic_weights(const IndexSet& indices) {
  const double d = indices.space() == Space::r2 ? 2.0 : 3.0;
  std::vector<double> w(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const MultiIndex& mi = indices[k];
    const double norm_sq = double(mi.k1) * mi.k1 + double(mi.k2) * mi.k2 + double(mi.k3) * mi.k3;
    w[k] = std::pow(1.0 + norm_sq, -(d + 1.0) / 2.0);
  }
  return w;
}

double ergodic_metric(const CoeffVector& c, const CoeffVector& phi) {
  require(c.space == phi.space && c.order == phi.order && c.values.size() == phi.values.size(),
          "ergodic_metric: coefficient index sets differ");
  const IndexSet indices = IndexSet::for_space(c.space, c.order);
  require(indices.size() == c.values.size(), "ergodic_metric: malformed coefficient vector");
  const std::vector<double> lambda = ergodic_weights(indices);
  double e = 0.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double d = c.values[k] - phi.values[k];
    e += lambda[k] * d * d;
  }
  return e;
}

namespace {
constexpr const char* kCoeffFormat = "infonet-coeffs";
constexpr int kCoeffVersion = 1;
}  // namespace

void write_coeffs(const std::filesystem::path& path, const CoeffVector& coeffs) {
  std::vector<float> data(coeffs.values.begin(), coeffs.values.end());
  nlohmann::json manifest = {
      {"format", kCoeffFormat},
      {"version", kCoeffVersion},
      {"modality", coeffs.space == Space::r2 ? "bearing" : "fov"},
      {"space", coeffs.space == Space::r2 ? "r2" : "se2"},
      {"K", coeffs.order},
      {"ordering", "k1-major,k2,k3(cos,sin)"},
      {"ordering_version", kCoeffOrderingVersion},
  };
  const BlobView blob{"coeffs", {data.size()}, data};
  write_container(path, std::move(manifest), std::span<const BlobView>(&blob, 1));
}

CoeffVector read_coeffs(const std::filesystem::path& path) {
  const Container c = read_container(path, kCoeffFormat, kCoeffVersion);
  if (c.manifest.value("ordering_version", -1) != kCoeffOrderingVersion) {
    fail(ErrorCode::format, "coefficient file uses an unknown ordering version");
  }
  CoeffVector out;
  out.space = c.manifest.value("space", std::string{}) == "se2" ? Space::se2 : Space::r2;
  out.order = c.manifest.value("K", -1);
  const Blob& b = c.blob("coeffs");
  if (out.order < 0 || b.data.size() != IndexSet::count(out.space, out.order)) {
    fail(ErrorCode::format, "coefficient file length disagrees with its header");
  }
  out.values.assign(b.data.begin(), b.data.end());
  return out;
}

}  // namespace infonet
