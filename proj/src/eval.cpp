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

#include "infonet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>

#include "infonet/error.hpp"

namespace infonet {

namespace {

void check_normalized(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) fail(ErrorCode::invalid_argument, std::string(what) + " has a negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    fail(ErrorCode::invalid_argument,
         std::string(what) + " is not normalized (sum " + std::to_string(sum) + ")");
  }
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size() && !p.empty(), "kl_divergence: shape mismatch");
  check_normalized(p, "kl_divergence P");
  check_normalized(q, "kl_divergence Q");
  if (std::equal(p.begin(), p.end(), q.begin())) return 0.0;

  double qsum = 0.0;
  bool floored = false;
  for (double v : q) {
    floored = floored || v < kKlFloor;
    qsum += std::max(v, kKlFloor);
  }
  const double scale = floored ? 1.0 / qsum : 1.0;
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    d += p[k] * std::log(p[k] / (std::max(q[k], kKlFloor) * scale));
  }
  // Rounding can leave a tiny negative value for near-identical inputs.
  return std::max(d, 0.0);
}

MapPredictor network_map_predictor(const Network& net) {
  require(net.spec().arch == Architecture::map_net, "map predictor needs a map-net");
  return [&net](const Belief& b) {
    const Tensor out = forward(net, b);
    std::vector<double> v(out.data.begin(), out.data.end());
    double sum = 0.0;
    for (double x : v) sum += x;
    for (double& x : v) x /= sum;
    return v;
  };
}

CoeffPredictor network_coeff_predictor(const Network& net) {
  require(net.spec().arch == Architecture::coeff_net, "coefficient predictor needs a coeff-net");
  return [&net](const Belief& b) {
    const Tensor out = forward(net, b);
    return std::vector<double>(out.data.begin(), out.data.end());
  };
}

void check_compatible(const Network& net, const EpisodeConfig& config) {
  const NetworkSpec& s = net.spec();
  require(s.grid == config.grid, "network grid does not match the evaluation grid");
  require(s.modality == config.modality, "network modality does not match the evaluation modality");
  require(s.metric == config.metric, "network metric does not match the evaluation metric");
  if (s.arch == Architecture::coeff_net) {
    require(s.coeff_order == config.coeff_order,
            "coeff-net order does not match the evaluation order");
  }
}

namespace {

nlohmann::json quality_json(const StepQuality& q) {
  return {{"step", q.step},
          {"count", q.count},
          {"kl_map_vs_network", q.map},
          {"kl_recon_vs_network_recon", q.coeffs},
          {"kl_map_vs_recon", q.truncation}};
}

}  // namespace

nlohmann::json QualityReport::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) steps_json.push_back(quality_json(s));
  return {{"episodes", episodes}, {"seed", seed}, {"per_step", steps_json},
          {"overall", quality_json(overall)}};
}

QualityReport evaluate_quality(const EpisodeRunner& runner, int episodes, std::uint64_t seed,
                               const MapPredictor& map_net, const CoeffPredictor& coeff_net) {
  require(episodes >= 1, "evaluate_quality: episodes must be at least 1");
  const EpisodeConfig& cfg = runner.config();
  const SpectralBasis& basis = runner.basis();
  QualityReport report;
  report.episodes = episodes;
  report.seed = seed;
  report.steps.resize(std::size_t(cfg.steps));
  for (int t = 0; t < cfg.steps; ++t) report.steps[std::size_t(t)].step = t;
  report.overall.step = -1;

  for (int e = 0; e < episodes; ++e) {
    Rng rng = make_stream(seed, kEvaluationStreamBase + std::uint64_t(e));
    const Episode ep = runner.run(e, rng);
    for (const Sample& s : ep.samples) {
      const InfoMap recon_true = reconstruct(s.coeffs, basis);
      const std::vector<double> net_map = map_net(s.belief);
      require(net_map.size() == s.map.size(), "evaluate_quality: network map has the wrong size");
      CoeffVector net_coeffs{s.coeffs.space, s.coeffs.order, coeff_net(s.belief)};
      require(net_coeffs.values.size() == s.coeffs.values.size(),
              "evaluate_quality: network coefficient vector has the wrong length");
      const InfoMap recon_net = reconstruct(net_coeffs, basis);

      StepQuality& q = report.steps[std::size_t(s.step)];
      const double dm = kl_divergence(s.map.values, net_map);
      const double dc = kl_divergence(recon_true.values, recon_net.values);
      const double dt = kl_divergence(s.map.values, recon_true.values);
      for (StepQuality* acc : {&q, &report.overall}) {
        acc->map += dm;
        acc->coeffs += dc;
        acc->truncation += dt;
        acc->count += 1;
      }
    }
  }
  for (StepQuality* acc = report.steps.data(); acc != report.steps.data() + report.steps.size(); ++acc) {
    const double c = double(acc->count);
    acc->map /= c, acc->coeffs /= c, acc->truncation /= c;
  }
  const double c = double(report.overall.count);
  report.overall.map /= c, report.overall.coeffs /= c, report.overall.truncation /= c;
  return report;
}

// ---------------------------------------------------------------------------
// Timing

TimingStats time_call(const std::function<void()>& fn, int reps, int warmup) {
  require(reps >= 1, "timing: repetitions must be at least 1");
  require(warmup >= 0, "timing: warm-up count must be nonnegative");
  for (int k = 0; k < warmup; ++k) fn();
  std::vector<double> t(static_cast<std::size_t>(reps));
  for (auto& v : t) {
    const auto a = std::chrono::steady_clock::now();
    fn();
    const auto b = std::chrono::steady_clock::now();
    v = std::chrono::duration<double>(b - a).count();
  }
  TimingStats s;
  s.reps = reps;
  s.min = *std::min_element(t.begin(), t.end());
  double sum = 0.0;
  for (double v : t) sum += v;
  s.mean = sum / double(reps);
  std::sort(t.begin(), t.end());
  const std::size_t mid = t.size() / 2;
  s.median = t.size() % 2 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
  return s;
}

void BenchmarkConfig::validate() const {
  require(reps >= 1, "benchmark: repetitions must be at least 1");
  require(warmup >= 0, "benchmark: warm-up count must be nonnegative");
  require(belief_step >= 0, "benchmark: belief step must be nonnegative");
}

namespace {

nlohmann::json timing_json(const TimingStats& t) {
  return {{"median_s", t.median}, {"mean_s", t.mean}, {"min_s", t.min}, {"reps", t.reps}};
}

}  // namespace

nlohmann::json BenchmarkReport::to_json() const {
  return {{"modality", to_string(modality)},
          {"metric", to_string(metric)},
          {"n", n},
          {"threads", 1},
          {"true_map", timing_json(true_map)},
          {"true_coeffs", timing_json(true_coeffs)},
          {"network_map", timing_json(network_map)},
          {"network_coeffs", timing_json(network_coeffs)},
          {"map_speedup", map_ratio},
          {"coeff_speedup", coeff_ratio}};
}

BenchmarkReport benchmark_timing(const EpisodeRunner& runner, const Network& map_net,
                                 const Network& coeff_net, const BenchmarkConfig& config) {
  config.validate();
  const EpisodeConfig& cfg = runner.config();
  check_compatible(map_net, cfg);
  check_compatible(coeff_net, cfg);
  require(map_net.spec().arch == Architecture::map_net &&
              coeff_net.spec().arch == Architecture::coeff_net,
          "benchmark: expected a map-net and a coeff-net");

  Belief belief = Belief::uniform(cfg.grid.n);
  if (config.belief_step > 0) {
    Rng rng = make_stream(config.seed, kEvaluationStreamBase);
    const Episode ep = runner.run(0, rng);
    belief = ep.samples[std::size_t(std::min(config.belief_step, cfg.steps) - 1)].belief;
  }

  volatile double sink = 0.0;
  BenchmarkReport r;
  r.modality = cfg.modality;
  r.metric = cfg.metric;
  r.n = cfg.grid.n;
  r.true_map = time_call([&] { sink = sink + runner.exact_map(belief).values[0]; }, config.reps,
                         config.warmup);
  r.true_coeffs = time_call(
      [&] { sink = sink + runner.exact_coeffs(runner.exact_map(belief)).values[0]; },
      config.reps, config.warmup);
  r.network_map = time_call([&] { sink = sink + forward(map_net, belief).data[0]; }, config.reps,
                            config.warmup);
  r.network_coeffs = time_call([&] { sink = sink + forward(coeff_net, belief).data[0]; },
                               config.reps, config.warmup);
  r.map_ratio = r.true_map.median / r.network_map.median;
  r.coeff_ratio = r.true_coeffs.median / r.network_coeffs.median;
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

std::string_view to_string(RenderFormat f) { return f == RenderFormat::pgm ? "pgm" : "csv"; }

RenderFormat parse_render_format(std::string_view text) {
  if (text == "pgm") return RenderFormat::pgm;
  if (text == "csv") return RenderFormat::csv;
  fail(ErrorCode::invalid_argument, "unknown render format '" + std::string(text) + "'");
}

std::vector<double> map_slice(const InfoMap& map, int heading_bin) {
  require(heading_bin >= 0 && heading_bin < map.headings,
          "heading bin " + std::to_string(heading_bin) + " out of range for a map with " +
              std::to_string(map.headings) + " heading(s)");
  const auto s = map.slice(heading_bin);
  return {s.begin(), s.end()};
}

void render_grid(std::span<const double> values, int n, const std::filesystem::path& path,
                 RenderFormat format) {
  require(n >= 1 && values.size() == std::size_t(n) * n, "render: values must be n*n");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write '" + path.string() + "'");
  if (format == RenderFormat::csv) {
    out.precision(17);
    out << "i,j,value\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out << i << ',' << j << ',' << values[std::size_t(i) * n + j] << '\n';
    }
  } else {
    double mx = 0.0;
    for (double v : values) {
      require(v >= 0.0, "render: values must be nonnegative");
      mx = std::max(mx, v);
    }
    out << "P5\n" << n << ' ' << n << "\n65535\n";
    for (double v : values) {
      const auto g = static_cast<unsigned>(mx > 0.0 ? std::lround(v / mx * 65535.0) : 0);
      const char bytes[2] = {char((g >> 8) & 0xff), char(g & 0xff)};
      out.write(bytes, 2);
    }
  }
  if (!out) fail(ErrorCode::io, "failed writing '" + path.string() + "'");
}

void render_map(const InfoMap& map, int heading_bin, const std::filesystem::path& path,
                RenderFormat format) {
  double sum = 0.0;
  for (double v : map.values) sum += v;
  require(std::abs(sum - 1.0) <= 1e-6, "render: map is not normalized");
  render_grid(map_slice(map, heading_bin), map.n, path, format);
}

std::vector<double> read_grid_csv(const std::filesystem::path& path, int& n) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "i,j,value") {
    fail(ErrorCode::format, "'" + path.string() + "' is not a rendered grid CSV");
  }
  std::vector<std::tuple<int, int, double>> rows;
  int max_index = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int i = 0, j = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',') {
      fail(ErrorCode::format, "bad CSV row '" + line + "'");
    }
    rows.emplace_back(i, j, v);
    max_index = std::max({max_index, i, j});
  }
  n = max_index + 1;
  require(n >= 1 && rows.size() == std::size_t(n) * n, "CSV grid is not square");
  std::vector<double> values(rows.size());
  for (const auto& [i, j, v] : rows) values[std::size_t(i) * n + j] = v;
  return values;
}

}  // namespace infonet
