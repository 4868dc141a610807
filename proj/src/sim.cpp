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

#include "infonet/sim.hpp"

#include <algorithm>
#include <string>

#include "infonet/container.hpp"
#include "infonet/error.hpp"
#include "infonet/filter.hpp"

namespace infonet {

AgentState default_start(const GridSpec& grid) { return {{grid.n / 2, grid.n / 2}, 0}; }

void EpisodeConfig::validate() const {
  grid.validate();
  require(steps >= 1, "episode: steps must be at least 1");
  require(coeff_order >= 0, "episode: coefficient order must be nonnegative");
  if (metric == Metric::fisher) {
    require(modality == Modality::bearing,
            "episode: Fisher maps are defined for the bearing modality only");
  }
  const AgentState s = start_state();
  require(s.cell.i >= 0 && s.cell.i < grid.n && s.cell.j >= 0 && s.cell.j < grid.n,
          "episode: start cell outside the field");
  require(s.heading_bin >= 0 && s.heading_bin < grid.heading_bins,
          "episode: start heading bin out of range");
  make_sensor(modality, sigma);
}

Sensor make_sensor(Modality modality, double sigma) {
  if (modality == Modality::bearing) {
    BearingSensor s;
    s.sigma = sigma;
    s.validate();
    return s;
  }
  return FovSensor{};
}

ActionSet::ActionSet(const GridSpec& grid, Modality modality)
    : grid_(grid), modality_(modality),
      headings_(modality == Modality::fov ? grid.heading_bins : 1) {}

AgentState ActionSet::successor(AgentState s, std::size_t action) const {
  require(action < size(), "action index out of range");
  const Move m = kMoves[action / std::size_t(headings_)];
  AgentState out;
  out.cell.i = std::clamp(s.cell.i + m.di, 0, grid_.n - 1);
  out.cell.j = std::clamp(s.cell.j + m.dj, 0, grid_.n - 1);
  out.heading_bin = modality_ == Modality::fov ? int(action % std::size_t(headings_)) : s.heading_bin;
  return out;
}

int ActionSet::state_index(AgentState s) const {
  return sensor_state_index(modality_, grid_, s.cell, s.heading_bin);
}

std::size_t greedy_action(const Belief& b, const LikelihoodTable& table, const ActionSet& actions,
                          AgentState state) {
  require(actions.size() > 0, "greedy_action: empty action set");
  require(actions.modality() == table.modality(), "greedy_action: modality mismatch");
  std::size_t best = 0;
  double best_value = -1.0;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    const double v = mutual_info_at(b, table, actions.state_index(actions.successor(state, a)));
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

EpisodeRunner::EpisodeRunner(EpisodeConfig config)
    : config_((config.validate(), std::move(config))),
      sensor_(make_sensor(config_.modality, config_.sigma)),
      table_(sensor_, config_.grid),
      basis_(config_.grid, IndexSet::for_space(space_of(config_.modality), config_.coeff_order)),
      actions_(config_.grid, config_.modality) {}

InfoMap EpisodeRunner::exact_map(const Belief& b) const {
  if (config_.metric == Metric::mutual) return normalize_map(mi_map(b, table_));
  return normalize_map(fisher_map(b, config_.grid, config_.sigma));
}

Episode EpisodeRunner::run(int episode_id, Rng& rng) const {
  const GridSpec& grid = config_.grid;
  Episode ep;
  ep.id = episode_id;
  ep.start = config_.start_state();
  const int start_flat = ep.start.cell.i * grid.n + ep.start.cell.j;
  int target = int(uniform_index(rng, std::uint64_t(grid.cells() - 1)));
  if (target >= start_flat) ++target;
  ep.target = {target / grid.n, target % grid.n};
  const PoseR2 target_pos = cell_center(grid, ep.target);

  Belief belief = Belief::uniform(grid.n);
  AgentState pose = ep.start;
  const Modality modality = config_.modality;
  for (int t = 0; t < config_.steps; ++t) {
    pose = actions_.successor(pose, greedy_action(belief, table_, actions_, pose));
    const int state = actions_.state_index(pose);
    const int z = sample(sensor_, sensor_state(modality, grid, state), target_pos, rng);
    belief = update(belief, table_, state, z);

    Sample s;
    s.episode = episode_id;
    s.step = t;
    s.pose = pose;
    s.state_index = state;
    s.measurement = z;
    s.belief = belief;
    s.map = exact_map(belief);
    s.coeffs = exact_coeffs(s.map);
    ep.samples.push_back(std::move(s));
  }
  return ep;
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

constexpr const char* kDatasetFormat = "infonet-dataset";

template <typename Src>
void append_as_float(std::vector<float>& dst, const Src& src) {
  for (auto v : src) dst.push_back(static_cast<float>(v));
}

}  // namespace

Dataset generate_dataset(const EpisodeConfig& config, int episodes, std::uint64_t seed) {
  require(episodes >= 1, "generate_dataset: episodes must be at least 1");
  EpisodeRunner runner(config);
  Dataset d;
  d.config = runner.config();
  d.seed = seed;
  d.episodes = episodes;
  d.map_size = std::size_t(config.grid.cells()) * (modality_of(runner.sensor()) == Modality::fov
                                                       ? std::size_t(config.grid.heading_bins)
                                                       : 1);
  d.coeff_count = runner.basis().size();
  const std::size_t total = std::size_t(episodes) * std::size_t(config.steps);
  d.beliefs.reserve(total * std::size_t(config.grid.cells()));
  d.maps.reserve(total * d.map_size);
  d.coeffs.reserve(total * d.coeff_count);
  for (int e = 0; e < episodes; ++e) {
    Rng rng = make_stream(seed, std::uint64_t(e));
    const Episode ep = runner.run(e, rng);
    d.targets.push_back(ep.target.i * config.grid.n + ep.target.j);
    for (const Sample& s : ep.samples) {
      append_as_float(d.beliefs, s.belief.weights());
      append_as_float(d.maps, s.map.values);
      append_as_float(d.coeffs, s.coeffs.values);
      d.episode_ids.push_back(s.episode);
      d.step_ids.push_back(s.step);
      d.states.push_back(s.state_index);
      d.measurements.push_back(s.measurement);
    }
  }
  d.samples = total;
  return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  const GridSpec& g = d.config.grid;
  const AgentState start = d.config.start_state();
  nlohmann::json manifest = {
      {"format", kDatasetFormat},
      {"version", Dataset::kVersion},
      {"grid", {{"side_length", g.side_length}, {"n", g.n}, {"heading_bins", g.heading_bins}}},
      {"modality", to_string(d.config.modality)},
      {"metric", to_string(d.config.metric)},
      {"sigma", d.config.sigma},
      {"steps", d.config.steps},
      {"K", d.config.coeff_order},
      {"ordering_version", kCoeffOrderingVersion},
      {"start", {start.cell.i, start.cell.j, start.heading_bin}},
      {"seed", d.seed},
      {"episodes", d.episodes},
      {"samples", d.samples},
      {"map_size", d.map_size},
      {"coeff_count", d.coeff_count},
      {"episode_ids", d.episode_ids},
      {"step_ids", d.step_ids},
      {"states", d.states},
      {"measurements", d.measurements},
      {"targets", d.targets},
  };
  const std::size_t cells = std::size_t(g.cells());
  const BlobView blobs[] = {
      {"beliefs", {d.samples, std::size_t(g.n), std::size_t(g.n)}, d.beliefs},
      {"maps", {d.samples, d.map_size / cells, std::size_t(g.n), std::size_t(g.n)}, d.maps},
      {"coeffs", {d.samples, d.coeff_count}, d.coeffs},
  };
  write_container(path, std::move(manifest), blobs);
}

Dataset read_dataset(const std::filesystem::path& path) {
  Container c = read_container(path, kDatasetFormat, Dataset::kVersion);
  Dataset d;
  try {
    const auto& m = c.manifest;
    d.config.grid.side_length = m.at("grid").at("side_length").get<double>();
    d.config.grid.n = m.at("grid").at("n").get<int>();
    d.config.grid.heading_bins = m.at("grid").at("heading_bins").get<int>();
    d.config.modality = parse_modality(m.at("modality").get<std::string>());
    d.config.metric = parse_metric(m.at("metric").get<std::string>());
    d.config.sigma = m.at("sigma").get<double>();
    d.config.steps = m.at("steps").get<int>();
    d.config.coeff_order = m.at("K").get<int>();
    if (m.at("ordering_version").get<int>() != kCoeffOrderingVersion) {
      fail(ErrorCode::format, "dataset '" + path.string() + "': unsupported coefficient ordering");
    }
    const auto start = m.at("start").get<std::vector<int>>();
    require(start.size() == 3, "dataset: start must have 3 entries");
    d.config.start = AgentState{{start[0], start[1]}, start[2]};
    d.seed = m.at("seed").get<std::uint64_t>();
    d.episodes = m.at("episodes").get<int>();
    d.samples = m.at("samples").get<std::size_t>();
    d.map_size = m.at("map_size").get<std::size_t>();
    d.coeff_count = m.at("coeff_count").get<std::size_t>();
    d.episode_ids = m.at("episode_ids").get<std::vector<int>>();
    d.step_ids = m.at("step_ids").get<std::vector<int>>();
    d.states = m.at("states").get<std::vector<int>>();
    d.measurements = m.at("measurements").get<std::vector<int>>();
    d.targets = m.at("targets").get<std::vector<int>>();
    d.config.validate();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, "dataset '" + path.string() + "': bad manifest: " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::format) throw;
    fail(ErrorCode::format, "dataset '" + path.string() + "': " + e.what());
  }
  auto take = [&](const char* name, std::size_t per_sample) {
    Blob& b = const_cast<Blob&>(c.blob(name));
    if (b.data.size() != d.samples * per_sample) {
      fail(ErrorCode::format, "dataset '" + path.string() + "': blob '" + name +
                                  "' does not match the declared sample count");
    }
    return std::move(b.data);
  };
  d.beliefs = take("beliefs", std::size_t(d.config.grid.cells()));
  d.maps = take("maps", d.map_size);
  d.coeffs = take("coeffs", d.coeff_count);
  const std::size_t expected_coeffs =
      IndexSet::count(space_of(d.config.modality), d.config.coeff_order);
  if (d.coeff_count != expected_coeffs || d.episode_ids.size() != d.samples ||
      d.step_ids.size() != d.samples || d.states.size() != d.samples ||
      d.measurements.size() != d.samples) {
    fail(ErrorCode::format, "dataset '" + path.string() + "': inconsistent sample bookkeeping");
  }
  return d;
}

}  // namespace infonet
