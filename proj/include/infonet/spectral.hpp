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
#include <filesystem>
#include <span>
#include <vector>

#include "infonet/grid.hpp"
#include "infonet/infomap.hpp"

namespace infonet {

enum class Trig { cos, sin };

// R2 indices use (k1, k2); SE2 indices add a heading order k3 and a trig kind
// (sin is never paired with k3 = 0).
struct MultiIndex {
  int k1 = 0;
  int k2 = 0;
  int k3 = 0;
  Trig kind = Trig::cos;

  bool operator==(const MultiIndex&) const = default;
};

// Bumped whenever the enumeration below changes; stored in file headers.
inline constexpr int kCoeffOrderingVersion = 1;

// Fixed enumeration: k1-major, then k2, then k3 with cos before sin.
class IndexSet {
 public:
  static IndexSet r2(int order);
  static IndexSet se2(int order);
  static IndexSet for_space(Space space, int order) {
    return space == Space::r2 ? r2(order) : se2(order);
  }
  static std::size_t count(Space space, int order);

  Space space() const { return space_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  std::size_t position(const MultiIndex& k) const;

  bool operator==(const IndexSet& o) const { return space_ == o.space_ && order_ == o.order_; }

 private:
  IndexSet(Space space, int order);
  Space space_;
  int order_;
  std::vector<MultiIndex> indices_;
};

struct CoeffVector {
  Space space = Space::r2;
  int order = 0;
  std::vector<double> values;
};

// Separable cosine basis over the field, times cos/sin in heading for SE2.
// Each function is scaled by 1/h_k so that sum over the lattice of
// F_k^2 * cell_measure = 1; h_k is computed numerically on the lattice.
// cell_measure is the cell area (times the heading bin width in radians for
// SE2).
//
// Maps passed to decompose are cell probability masses, so
// phi_k = sum_x m(x) F_k(x); reconstruct_raw inverts this exactly for a
// complete index set.
class SpectralBasis {
 public:
  SpectralBasis(const GridSpec& grid, IndexSet indices);

  const GridSpec& grid() const { return grid_; }
  const IndexSet& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  double cell_measure() const { return measure_; }
  double norm(std::size_t k) const { return norms_[k]; }

  // F_k at an arbitrary pose; heading ignored for R2.
  double evaluate(std::size_t k, PoseSE2 x) const;
  // F_k at lattice point (i, j, h).
  double lattice(std::size_t k, int i, int j, int h = 0) const;

  int headings() const { return indices_.space() == Space::r2 ? 1 : grid_.heading_bins; }
  std::size_t lattice_size() const { return std::size_t(grid_.cells()) * headings(); }

  // Separable factors. Heading slots: 0 is the constant, 2m - 1 is cos(m a),
  // 2m is sin(m a). R2 bases have the single constant slot.
  int slots() const { return slots_; }
  double spatial(int k, int i) const { return spatial_[std::size_t(k) * grid_.n + i]; }
  double angular(int slot, int h) const { return angular_[std::size_t(slot) * headings() + h]; }
  static int angular_slot(const MultiIndex& k) {
    return k.k3 == 0 ? 0 : 2 * k.k3 - (k.kind == Trig::cos ? 1 : 0);
  }

 private:

  GridSpec grid_;
  IndexSet indices_;
  double measure_;
  int slots_;
  std::vector<double> spatial_;  // [k][i]: cos(k pi (i + 1/2) / n)
  std::vector<double> angular_;  // [slot][h]: slot 0 = 1, 2m-1 = cos m, 2m = sin m
  std::vector<double> spatial_sq_;
  std::vector<double> angular_sq_;
  std::vector<double> norms_;
};

double basis_r2(const SpectralBasis& basis, const MultiIndex& k, PoseR2 x);
double basis_se2(const SpectralBasis& basis, const MultiIndex& k, PoseSE2 x);

// Throws if the map's space or shape disagrees with the basis.
CoeffVector decompose(const InfoMap& map, const SpectralBasis& basis);

// sum_k phi_k F_k scaled back to cell masses, without clamping.
std::vector<double> reconstruct_raw(const CoeffVector& coeffs, const SpectralBasis& basis);

// Floor used when turning a truncated series into a distribution.
inline constexpr double kReconstructionFloor = 1e-12;

// reconstruct_raw, then clamp at kReconstructionFloor and renormalize.
InfoMap reconstruct(const CoeffVector& coeffs, const SpectralBasis& basis);

struct Trajectory {
  std::vector<PoseSE2> states;
  double dt = 1.0;

  double duration() const { return dt * static_cast<double>(states.size()); }
};

// c_k = (1/T) sum_t F_k(q(t)) dt.
CoeffVector trajectory_coeffs(const Trajectory& traj, const SpectralBasis& basis);

// Lambda_k = (1 + |k|^2)^(-(d + 1) / 2), d = 2 for R2 and 3 for SE2.
std::vector<double> ergodic_weights(const IndexSet& indices);
double ergodic_metric(const CoeffVector& c, const CoeffVector& phi);

void write_coeffs(const std::filesystem::path& path, const CoeffVector& coeffs);
CoeffVector read_coeffs(const std::filesystem::path& path);

}  // namespace infonet
