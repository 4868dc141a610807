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

// Exercises the shared library through its C header only.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "infonet/infonet.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path = fs::temp_directory_path() / ("infonet_capi_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(path); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

infonet_problem small_problem() {
  infonet_problem p;
  infonet_problem_default(&p);
  p.n = 8;
  p.steps = 5;
  p.coeff_order = 3;
  return p;
}

std::vector<double> peaked_belief(int n) {
  std::vector<double> b(std::size_t(n) * n);
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = 1.0 + double(k % 7);
  const double s = std::accumulate(b.begin(), b.end(), 0.0);
  for (auto& v : b) v /= s;
  return b;
}

std::string read_all(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const std::string& p) { return nlohmann::json::parse(read_all(p)); }

}  // namespace

TEST_CASE("problem defaults") {
  infonet_problem p;
  infonet_problem_default(&p);
  CHECK(p.n == 28);
  CHECK(p.side_length == 200.0);
  CHECK(p.heading_bins == 36);
  CHECK(p.sigma_deg == 10.0);
  CHECK(p.modality == INFONET_BEARING);
  CHECK(p.metric == INFONET_MUTUAL);
  CHECK(std::string(infonet_version()).size() > 0);
  CHECK(std::string(infonet_status_string(INFONET_ERR_FORMAT)) == "format error");
}

TEST_CASE("model map, coefficients and reconstruction") {
  const infonet_problem p = small_problem();
  infonet_model* m = nullptr;
  REQUIRE(infonet_model_create(&p, &m) == INFONET_OK);
  REQUIRE(m != nullptr);
  CHECK(infonet_model_map_size(m) == 64);
  const std::size_t k = infonet_model_coeff_count(m);
  CHECK(k == 16);

  const auto b = peaked_belief(8);
  std::vector<double> map(64), coeffs(k), back(64);
  REQUIRE(infonet_model_map(m, b.data(), b.size(), map.data(), map.size()) == INFONET_OK);
  CHECK(std::accumulate(map.begin(), map.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(infonet_model_coeffs(m, b.data(), b.size(), coeffs.data(), k) == INFONET_OK);
  REQUIRE(infonet_model_reconstruct(m, coeffs.data(), k, back.data(), 64) == INFONET_OK);
  CHECK(std::accumulate(back.begin(), back.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : back) CHECK(v >= 0.0);

  // Wrong lengths and non-pmf beliefs are argument errors with a message.
  CHECK(infonet_model_map(m, b.data(), 63, map.data(), 64) == INFONET_ERR_INVALID_ARGUMENT);
  CHECK(std::string(infonet_last_error()).size() > 0);
  CHECK(infonet_model_map(m, b.data(), 64, map.data(), 10) == INFONET_ERR_INVALID_ARGUMENT);
  CHECK(infonet_model_reconstruct(m, coeffs.data(), k - 1, back.data(), 64) ==
        INFONET_ERR_INVALID_ARGUMENT);
  auto bad = b;
  bad[3] = -0.5;
  CHECK(infonet_model_map(m, bad.data(), 64, map.data(), 64) != INFONET_OK);
  CHECK(infonet_model_map(nullptr, b.data(), 64, map.data(), 64) ==
        INFONET_ERR_INVALID_ARGUMENT);
  infonet_model_free(m);
  infonet_model_free(nullptr);
}

TEST_CASE("invalid problems are rejected") {
  infonet_problem p = small_problem();
  p.n = 1;
  infonet_model* m = nullptr;
  CHECK(infonet_model_create(&p, &m) == INFONET_ERR_INVALID_ARGUMENT);
  CHECK(m == nullptr);
  p = small_problem();
  p.sigma_deg = -1;
  CHECK(infonet_model_create(&p, &m) == INFONET_ERR_INVALID_ARGUMENT);
  CHECK(infonet_model_create(nullptr, &m) == INFONET_ERR_INVALID_ARGUMENT);
}

TEST_CASE("pipeline: generate, train, load, evaluate, benchmark, render") {
  Scratch dir;
  const infonet_problem p = small_problem();
  REQUIRE(infonet_generate_dataset(&p, 4, 7, (dir / "d.bin").c_str()) == INFONET_OK);

  infonet_train_options t;
  infonet_train_options_default(&t);
  CHECK(t.epochs == 100);
  CHECK(t.batch_size == 32);
  t.epochs = 3;
  t.history_csv = nullptr;
  REQUIRE(infonet_train((dir / "d.bin").c_str(), &t, (dir / "map.bin").c_str()) == INFONET_OK);
  t.arch = INFONET_COEFF_NET;
  const std::string hist = dir / "hist.csv";
  t.history_csv = hist.c_str();
  REQUIRE(infonet_train((dir / "d.bin").c_str(), &t, (dir / "coeff.bin").c_str()) == INFONET_OK);
  CHECK(read_all(hist).rfind("epoch", 0) == 0);

  infonet_network* net = nullptr;
  REQUIRE(infonet_network_load((dir / "map.bin").c_str(), &net) == INFONET_OK);
  CHECK(infonet_network_arch(net) == INFONET_MAP_NET);
  CHECK(infonet_network_input_size(net) == 64);
  REQUIRE(infonet_network_output_size(net) == 64);
  const auto b = peaked_belief(8);
  std::vector<double> out(64);
  REQUIRE(infonet_network_forward(net, b.data(), 64, out.data(), 64) == INFONET_OK);
  CHECK(std::accumulate(out.begin(), out.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  infonet_network_free(net);

  REQUIRE(infonet_network_load((dir / "coeff.bin").c_str(), &net) == INFONET_OK);
  CHECK(infonet_network_arch(net) == INFONET_COEFF_NET);
  CHECK(infonet_network_output_size(net) == 16);
  infonet_network_free(net);

  CHECK(infonet_network_load((dir / "d.bin").c_str(), &net) == INFONET_ERR_FORMAT);
  CHECK(infonet_network_load((dir / "nope.bin").c_str(), &net) == INFONET_ERR_IO);
  CHECK(net == nullptr);

  REQUIRE(infonet_evaluate((dir / "map.bin").c_str(), (dir / "coeff.bin").c_str(), 2, 1,
                           (dir / "eval.json").c_str()) == INFONET_OK);
  const auto e = read_json(dir / "eval.json");
  CHECK(e.contains("quality"));
  CHECK(infonet_evaluate((dir / "coeff.bin").c_str(), (dir / "map.bin").c_str(), 2, 1,
                         (dir / "eval2.json").c_str()) == INFONET_ERR_INVALID_ARGUMENT);

  infonet_benchmark_options bo;
  infonet_benchmark_options_default(&bo);
  bo.reps = 3;
  bo.warmup = 1;
  REQUIRE(infonet_benchmark(&p, &bo, (dir / "bench.json").c_str()) == INFONET_OK);
  CHECK(read_json(dir / "bench.json").contains("timing"));
  bo.reps = 0;
  CHECK(infonet_benchmark(&p, &bo, (dir / "bench.json").c_str()) ==
        INFONET_ERR_INVALID_ARGUMENT);

  infonet_render_options ro;
  infonet_render_options_default(&ro);
  REQUIRE(infonet_render((dir / "d.bin").c_str(), &ro, (dir / "m.pgm").c_str()) == INFONET_OK);
  CHECK(read_all(dir / "m.pgm").rfind("P5", 0) == 0);
  ro.format = INFONET_CSV;
  ro.render_belief = 1;
  REQUIRE(infonet_render((dir / "d.bin").c_str(), &ro, (dir / "b.csv").c_str()) == INFONET_OK);
  ro.sample = 1000000;
  CHECK(infonet_render((dir / "d.bin").c_str(), &ro, (dir / "b.csv").c_str()) ==
        INFONET_ERR_INVALID_ARGUMENT);
  ro.sample = 0;
  CHECK(infonet_render((dir / "map.bin").c_str(), &ro, (dir / "x.csv").c_str()) ==
        INFONET_ERR_FORMAT);
}

TEST_CASE("generation is byte-identical across runs") {
  Scratch dir;
  const infonet_problem p = small_problem();
  REQUIRE(infonet_generate_dataset(&p, 2, 11, (dir / "a.bin").c_str()) == INFONET_OK);
  REQUIRE(infonet_generate_dataset(&p, 2, 11, (dir / "b.bin").c_str()) == INFONET_OK);
  CHECK(read_all(dir / "a.bin") == read_all(dir / "b.bin"));
  REQUIRE(infonet_generate_dataset(&p, 2, 12, (dir / "c.bin").c_str()) == INFONET_OK);
  CHECK(read_all(dir / "a.bin") != read_all(dir / "c.bin"));
}
