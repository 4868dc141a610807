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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "infonet/grid.hpp"
#include "infonet/infomap.hpp"
#include "infonet/random.hpp"
#include "infonet/sensors.hpp"
#include "infonet/spectral.hpp"

namespace infonet {

// Agent pose on the sensor lattice.
struct AgentState {
  TargetCell cell;
  int heading_bin = 0;
  bool operator==(const AgentState& o) const {
    return cell.i == o.cell.i && cell.j == o.cell.j && heading_bin == o.heading_bin;
  }
};

// Cell nearest the field center, heading 0.
AgentState default_start(const GridSpec& grid);

struct EpisodeConfig {
  GridSpec grid;
  Modality modality = Modality::bearing;
  Metric metric = Metric::mutual;
  double sigma = 10.0;  // bearing noise, degrees
  int steps = 20;
  int coeff_order = 5;
  std::optional<AgentState> start;

  AgentState start_state() const { return start ? *start : default_start(grid); }
  // Throws Error(invalid_argument) on bad values or unsupported combinations.
  void validate() const;
};

Sensor make_sensor(Modality modality, double sigma);

struct Move {
  int di = 0;
  int dj = 0;
};

// Stay plus the 8 neighbor moves, crossed with every heading bin for FOV.
// Action a is move a / headings() with heading bin a % headings().
class ActionSet {
 public:
  static constexpr std::array<Move, 9> kMoves = {{
      {0, 0}, {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

  ActionSet(const GridSpec& grid, Modality modality);

  std::size_t size() const { return kMoves.size() * std::size_t(headings_); }
  int headings() const { return headings_; }
  Modality modality() const { return modality_; }
  // Moves off the field are clamped to the boundary.
  AgentState successor(AgentState s, std::size_t action) const;
  int state_index(AgentState s) const;

 private:
  GridSpec grid_;
  Modality modality_;
  int headings_;
};

// Action whose successor maximizes mutual information; ties go to the lowest
// action index.
std::size_t greedy_action(const Belief& b, const LikelihoodTable& table, const ActionSet& actions,
                          AgentState state);

// One recorded step. belief is the posterior after this step's measurement;
// map and coeffs are computed from it.
struct Sample {
  int episode = 0;
  int step = 0;
  AgentState pose;
  int state_index = 0;
  int measurement = 0;
  Belief belief{2};
  InfoMap map;  // normalized
  CoeffVector coeffs;
};

struct Episode {
  int id = 0;
  TargetCell target;
  AgentState start;
  std::vector<Sample> samples;
};

// Shared, read-only episode machinery: likelihood table, spectral basis and
// action set. Safe for concurrent run() calls with separate generators.
class EpisodeRunner {
 public:
  explicit EpisodeRunner(EpisodeConfig config);

  const EpisodeConfig& config() const { return config_; }
  const Sensor& sensor() const { return sensor_; }
  const LikelihoodTable& table() const { return table_; }
  const SpectralBasis& basis() const { return basis_; }
  const ActionSet& actions() const { return actions_; }

  // Exact information map of the configured metric, normalized.
  InfoMap exact_map(const Belief& b) const;
  CoeffVector exact_coeffs(const InfoMap& normalized_map) const { return decompose(normalized_map, basis_); }

  // Target uniform over cells other than the start cell; belief starts
  // uniform; each step acts greedily, measures, updates, then records.
  Episode run(int episode_id, Rng& rng) const;

 private:
  EpisodeConfig config_;
  Sensor sensor_;
  LikelihoodTable table_;
  SpectralBasis basis_;
  ActionSet actions_;
};

// Generator streams: dataset episodes draw from make_stream(seed, e);
// evaluation episodes use a disjoint stream range.
inline constexpr std::uint64_t kEvaluationStreamBase = std::uint64_t{1} << 63;

struct Dataset {
  static constexpr int kVersion = 1;

  EpisodeConfig config;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::size_t samples = 0;
  std::size_t map_size = 0;    // n*n or n*n*H
  std::size_t coeff_count = 0;
  std::vector<float> beliefs;  // [samples][n*n]
  std::vector<float> maps;     // [samples][map_size]
  std::vector<float> coeffs;   // [samples][coeff_count]
  std::vector<int> episode_ids;
  std::vector<int> step_ids;
  std::vector<int> states;
  std::vector<int> measurements;
  std::vector<int> targets;    // flat target cell per episode

  std::span<const float> belief(std::size_t s) const {
    return {beliefs.data() + s * config.grid.cells(), std::size_t(config.grid.cells())};
  }
  std::span<const float> map(std::size_t s) const { return {maps.data() + s * map_size, map_size}; }
  std::span<const float> coeff(std::size_t s) const {
    return {coeffs.data() + s * coeff_count, coeff_count};
  }
};

// episodes x steps samples, deterministic in (config, seed).
Dataset generate_dataset(const EpisodeConfig& config, int episodes, std::uint64_t seed);
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace infonet
