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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "infonet/error.hpp"
#include "infonet/eval.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace infonet;

namespace {

std::vector<double> random_pmf(std::size_t n, Rng& rng, double zeros = 0.0) {
  std::vector<double> p(n);
  double s = 0;
  for (auto& v : p) {
    v = uniform01(rng) < zeros ? 0.0 : -std::log(1.0 - uniform01(rng));
    s += v;
  }
  if (s == 0) {
    p[0] = 1;
    s = 1;
  }
  for (auto& v : p) v /= s;
  return p;
}

EpisodeConfig config(Modality m, int n, int headings = 8) {
  EpisodeConfig c;
  c.grid = GridSpec{200.0, n, headings};
  c.modality = m;
  c.coeff_order = 3;
  c.steps = 5;
  return c;
}

}  // namespace

TEST_CASE("kl divergence examples") {
  const std::vector<double> p{0.2, 0.3, 0.5};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(std::log(2.0)));
  const std::vector<double> a{0.9, 0.1}, b{0.5, 0.5};
  CHECK(kl_divergence(a, b) != doctest::Approx(kl_divergence(b, a)));
  // Zero entries of Q are floored rather than producing infinity.
  const double d = kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0});
  CHECK(std::isfinite(d));
  CHECK(d == doctest::Approx(0.5 * std::log(0.5 / 1e-12) + 0.5 * std::log(0.5)).epsilon(1e-6));

  CHECK_THROWS_AS(kl_divergence(std::vector<double>{0.5, 0.4}, std::vector<double>{0.5, 0.5}), Error);
  CHECK_THROWS_AS(kl_divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.2, -0.2}), Error);
  CHECK_THROWS_AS(kl_divergence(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}), Error);
}

TEST_CASE("Gibbs inequality on random pairs") {
  Rng rng = make_stream(81, 0);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 2 + uniform_index(rng, 60);
    const auto p = random_pmf(n, rng, 0.2), q = random_pmf(n, rng, 0.2);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
}

TEST_CASE("oracle predictors score exactly zero") {
  const EpisodeRunner runner(config(Modality::bearing, 8));
  const MapPredictor exact_map = [&](const Belief& b) { return runner.exact_map(b).values; };
  const CoeffPredictor exact_coeffs = [&](const Belief& b) {
    return runner.exact_coeffs(runner.exact_map(b)).values;
  };
  const auto rep = evaluate_quality(runner, 4, 9, exact_map, exact_coeffs);
  CHECK(rep.steps.size() == 5);
  CHECK(rep.overall.count == 20);
  for (const auto& s : rep.steps) {
    CHECK(s.count == 4);
    CHECK(s.map == 0.0);
    CHECK(s.coeffs == 0.0);
    CHECK(s.truncation > 0.0);
  }
  CHECK(rep.overall.map == 0.0);
  CHECK(rep.overall.coeffs == 0.0);

  const auto js = rep.to_json();
  CHECK(js.at("overall").contains("kl_map_vs_network"));
  CHECK(js.at("overall").contains("kl_recon_vs_network_recon"));
  CHECK(js.at("overall").contains("kl_map_vs_recon"));
  CHECK(js.at("per_step").size() == 5);

  // Same seed, same report.
  const auto again = evaluate_quality(runner, 4, 9, exact_map, exact_coeffs);
  CHECK(again.overall.truncation == rep.overall.truncation);
}

TEST_CASE("evaluation episodes are disjoint from dataset episodes") {
  const EpisodeRunner runner(config(Modality::bearing, 8));
  Rng train_rng = make_stream(5, 0), eval_rng = make_stream(5, kEvaluationStreamBase);
  const auto a = runner.run(0, train_rng), b = runner.run(0, eval_rng);
  bool differ = a.target.i != b.target.i || a.target.j != b.target.j;
  for (std::size_t t = 0; t < a.samples.size(); ++t) differ = differ || a.samples[t].measurement != b.samples[t].measurement;
  CHECK(differ);
}

TEST_CASE("random networks score badly") {
  const EpisodeRunner runner(config(Modality::bearing, 28, 36));
  Network map_net(map_net_spec(runner.config().grid, Modality::bearing));
  map_net.initialize(3);
  Rng rng = make_stream(82, 0);
  // He-normal weights in every layer, the output layer included.
  for (std::size_t l = 0; l < map_net.layer_count(); ++l) {
    const auto& s = map_net.spec().layers[l];
    if (s.kind != LayerKind::conv_transpose2d) continue;
    auto w = map_net.layer_params(l);
    const double sd = std::sqrt(2.0 / (double(s.in_c) * s.kernel * s.kernel));
    for (std::size_t k = 0; k < s.weight_count(); ++k) w[k] = float(sd * testing::gauss(rng));
  }
  Network coeff_net(coeff_net_spec(runner.config().grid, Modality::bearing, 3));
  coeff_net.initialize(4);
  check_compatible(map_net, runner.config());
  const auto rep = evaluate_quality(runner, 2, 1, network_map_predictor(map_net),
                                    network_coeff_predictor(coeff_net));
  MESSAGE("random map-net D(phi||phi_n) = " << rep.overall.map);
  CHECK(rep.overall.map > 0.5);
}

TEST_CASE("network compatibility") {
  const auto cfg = config(Modality::bearing, 8);
  const Network m(map_net_spec(cfg.grid, Modality::bearing));
  CHECK_NOTHROW(check_compatible(m, cfg));
  auto other = cfg;
  other.grid.n = 9;
  CHECK_THROWS_AS(check_compatible(m, other), Error);
  const Network f(map_net_spec(GridSpec{200.0, 8, 8}, Modality::fov));
  CHECK_THROWS_AS(check_compatible(f, cfg), Error);
  const Network c(coeff_net_spec(cfg.grid, Modality::bearing, 2));
  CHECK_THROWS_AS(check_compatible(c, cfg), Error);
  CHECK_THROWS_AS(network_map_predictor(c), Error);
  CHECK_THROWS_AS(network_coeff_predictor(m), Error);
}

TEST_CASE("timing harness") {
  int calls = 0;
  const auto t = time_call([&] { ++calls; }, 5, 2);
  CHECK(calls == 7);
  CHECK(t.reps == 5);
  CHECK(t.min <= t.median);
  CHECK(t.min >= 0.0);
  CHECK_THROWS_AS(time_call([] {}, 0, 0), Error);

  BenchmarkConfig bc;
  bc.reps = 0;
  CHECK_THROWS_AS(bc.validate(), Error);
  const EpisodeRunner runner(config(Modality::bearing, 8));
  const Network m(map_net_spec(runner.config().grid, Modality::bearing));
  const Network c(coeff_net_spec(runner.config().grid, Modality::bearing, 3));
  CHECK_THROWS_AS(benchmark_timing(runner, m, c, bc), Error);
}

TEST_CASE("benchmark ratios are stable across repetition counts") {
  const EpisodeRunner runner(config(Modality::bearing, 16));
  Network m(map_net_spec(runner.config().grid, Modality::bearing));
  Network c(coeff_net_spec(runner.config().grid, Modality::bearing, 3));
  m.initialize(1);
  c.initialize(2);
  BenchmarkConfig bc;
  bc.reps = 10;
  const auto r10 = benchmark_timing(runner, m, c, bc);
  bc.reps = 50;
  const auto r50 = benchmark_timing(runner, m, c, bc);
  CHECK(r10.true_map.reps == 10);
  CHECK(r50.network_map.reps == 50);
  CHECK(r10.true_coeffs.median >= r10.true_map.median * 0.5);
  const double q = r10.map_ratio / r50.map_ratio;
  MESSAGE("map ratio R=10 " << r10.map_ratio << ", R=50 " << r50.map_ratio);
  CHECK(q < 3.0);
  CHECK(q > 1.0 / 3.0);
  const auto js = r10.to_json();
  CHECK(js.contains("map_speedup"));
  CHECK(js.contains("coeff_speedup"));
}

TEST_CASE("rendering") {
  testing::TempDir dir("eval");
  SUBCASE("uniform map renders as a constant image") {
    const auto u = normalize_map(InfoMap::r2(6));
    render_map(u, 0, dir / "u.pgm", RenderFormat::pgm);
    const std::string bytes = testing::slurp(dir / "u.pgm");
    const std::string header = "P5\n6 6\n65535\n";
    REQUIRE(bytes.size() == header.size() + 72);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t k = header.size(); k < bytes.size(); ++k) CHECK((unsigned char)bytes[k] == 0xff);
  }
  SUBCASE("csv round trip") {
    Rng rng = make_stream(83, 0);
    InfoMap m = InfoMap::se2(5, 4);
    for (auto& v : m.values) v = uniform01(rng);
    m = normalize_map(m);
    render_map(m, 2, dir / "m.csv", RenderFormat::csv);
    int n = 0;
    const auto back = read_grid_csv(dir / "m.csv", n);
    CHECK(n == 5);
    const auto slice = map_slice(m, 2);
    REQUIRE(back.size() == 25);
    for (std::size_t k = 0; k < 25; ++k) CHECK(std::abs(back[k] - slice[k]) <= 1e-6);
    CHECK(map_slice(m, 0).size() == 25);
    CHECK_THROWS_AS(map_slice(m, 4), Error);
  }
  SUBCASE("invalid requests") {
    InfoMap raw = InfoMap::r2(3);
    raw.values.assign(9, 1.0);
    CHECK_THROWS_AS(render_map(raw, 0, dir / "x.pgm", RenderFormat::pgm), Error);
    CHECK_THROWS_AS(map_slice(normalize_map(raw), 1), Error);
    CHECK(parse_render_format("csv") == RenderFormat::csv);
    CHECK_THROWS_AS(parse_render_format("png"), Error);
    CHECK_THROWS_AS(render_grid(std::vector<double>(9, 0.1), 3, dir / "no/such/dir/x.csv",
                                RenderFormat::csv),
                    Error);
  }
}
