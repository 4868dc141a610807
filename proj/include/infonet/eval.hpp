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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "infonet/neural.hpp"
#include "infonet/sim.hpp"
#include "json.hpp"

namespace infonet {

// Floor applied to the second argument of every divergence.
inline constexpr double kKlFloor = 1e-12;

// D(P || Q) in nats. Both inputs must sum to 1 within 1e-6. Entries of Q below
// kKlFloor are raised to it and Q is renormalized; identical inputs give
// exactly 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Belief -> normalized map over the sensor lattice.
using MapPredictor = std::function<std::vector<double>(const Belief&)>;
// Belief -> coefficient vector in the runner's index ordering.
using CoeffPredictor = std::function<std::vector<double>(const Belief&)>;

// Output of a map-net, widened to double and renormalized.
MapPredictor network_map_predictor(const Network& net);
CoeffPredictor network_coeff_predictor(const Network& net);

// Throws Error(invalid_argument) if the network was trained for another grid,
// modality, metric, or coefficient order than the runner.
void check_compatible(const Network& net, const EpisodeConfig& config);

struct StepQuality {
  int step = 0;
  int count = 0;
  double map = 0.0;         // D(phi || phi_net)
  double coeffs = 0.0;      // D(recon(true coeffs) || recon(net coeffs))
  double truncation = 0.0;  // D(phi || recon(true coeffs))
};

struct QualityReport {
  int episodes = 0;
  std::uint64_t seed = 0;
  std::vector<StepQuality> steps;  // per-step means
  StepQuality overall;             // mean over every sample, step = -1

  nlohmann::json to_json() const;
};

// Runs fresh greedy episodes (streams disjoint from dataset generation) and
// averages the three divergences per step.
QualityReport evaluate_quality(const EpisodeRunner& runner, int episodes, std::uint64_t seed,
                               const MapPredictor& map_net, const CoeffPredictor& coeff_net);

struct TimingStats {
  double median = 0.0;  // seconds
  double mean = 0.0;
  double min = 0.0;
  int reps = 0;
};

// Runs fn warmup times untimed, then reps timed calls.
TimingStats time_call(const std::function<void()>& fn, int reps, int warmup);

struct BenchmarkConfig {
  int reps = 20;
  int warmup = 2;
  // Timing uses the belief after this many greedy steps of one seeded episode.
  int belief_step = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BenchmarkReport {
  Modality modality = Modality::bearing;
  Metric metric = Metric::mutual;
  int n = 0;
  TimingStats true_map;
  TimingStats true_coeffs;  // includes map generation
  TimingStats network_map;
  TimingStats network_coeffs;
  double map_ratio = 0.0;    // median true / median network
  double coeff_ratio = 0.0;

  nlohmann::json to_json() const;
};

// Single-threaded timings of exact and network paths on the same belief.
BenchmarkReport benchmark_timing(const EpisodeRunner& runner, const Network& map_net,
                                 const Network& coeff_net, const BenchmarkConfig& config);

enum class RenderFormat { pgm, csv };
std::string_view to_string(RenderFormat f);
RenderFormat parse_render_format(std::string_view text);

// n x n slice at one heading bin (bin 0 only for R2 maps).
std::vector<double> map_slice(const InfoMap& map, int heading_bin);

// PGM: binary 16-bit grayscale, value / max scaled onto [0, 65535], row i = 0
// first. CSV: header "i,j,value" then one row per cell, row-major.
void render_grid(std::span<const double> values, int n, const std::filesystem::path& path,
                 RenderFormat format);
// Requires a normalized map.
void render_map(const InfoMap& map, int heading_bin, const std::filesystem::path& path,
                RenderFormat format);

// Parses a CSV written by render_grid; returns row-major values, sets n.
std::vector<double> read_grid_csv(const std::filesystem::path& path, int& n);

}  // namespace infonet
