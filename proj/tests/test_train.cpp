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
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "infonet/error.hpp"
#include "infonet/train.hpp"
#include "support.hpp"

using namespace infonet;

namespace {

const GridSpec kGrid{200.0, 8, 36};

// `count` copies of one belief/map pair, or of random pairs if `distinct`.
TrainingSet map_set(std::size_t count, bool distinct, std::uint64_t seed) {
  const EpisodeRunner runner([] {
    EpisodeConfig c;
    c.grid = kGrid;
    c.coeff_order = 3;
    return c;
  }());
  Rng rng = make_stream(seed, 0);
  TrainingSet s;
  s.count = count;
  s.input_size = s.target_size = 64;
  Belief b = testing::random_belief(8, rng, 0.5);
  InfoMap m = runner.exact_map(b);
  for (std::size_t k = 0; k < count; ++k) {
    if (distinct && k > 0) {
      b = testing::random_belief(8, rng, 0.5);
      m = runner.exact_map(b);
    }
    s.inputs.insert(s.inputs.end(), b.weights().begin(), b.weights().end());
    s.targets.insert(s.targets.end(), m.values.begin(), m.values.end());
  }
  return s;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK(c.epochs == 100);
  CHECK(c.batch_size == 32);
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.validation_fraction == 0.10);
  CHECK_NOTHROW(c.validate());
  for (auto bad : {+[](TrainConfig& t) { t.epochs = 0; }, +[](TrainConfig& t) { t.batch_size = 0; },
                   +[](TrainConfig& t) { t.validation_fraction = 1.0; },
                   +[](TrainConfig& t) { t.validation_fraction = 0.0; },
                   +[](TrainConfig& t) { t.learning_rate = -1.0; }}) {
    TrainConfig t;
    bad(t);
    CHECK_THROWS_AS(t.validate(), Error);
  }
}

TEST_CASE("split bookkeeping") {
  for (std::size_t n : {1u, 9u, 10u, 57u, 1000u}) {
    std::vector<std::size_t> tr, va, tr2, va2;
    split_indices(n, 0.1, 42, tr, va);
    CHECK(va.size() == std::size_t(std::floor(0.1 * double(n))));
    CHECK(tr.size() + va.size() == n);
    std::set<std::size_t> all(tr.begin(), tr.end());
    for (auto v : va) CHECK(all.insert(v).second);
    CHECK(all.size() == n);
    split_indices(n, 0.1, 42, tr2, va2);
    CHECK(tr == tr2);
    CHECK(va == va2);
  }
}

TEST_CASE("training set from a dataset") {
  EpisodeConfig c;
  c.grid = GridSpec{200.0, 5, 8};
  c.coeff_order = 2;
  c.steps = 2;
  const Dataset d = generate_dataset(c, 2, 3);
  const auto m = make_training_set(d, Architecture::map_net);
  CHECK(m.count == 4);
  CHECK(m.input_size == 25);
  CHECK(m.target_size == 25);
  CHECK(m.inputs == d.beliefs);
  CHECK(m.targets == d.maps);
  const auto k = make_training_set(d, Architecture::coeff_net);
  CHECK(k.target_size == 9);
  CHECK(k.targets == d.coeffs);
  CHECK(m.symmetries.size() == 8);
  CHECK(k.symmetries.size() == 8);
}

namespace {

template <typename T, typename U>
std::vector<T> gather(const std::vector<std::uint32_t>& src, std::span<const U> v) {
  std::vector<T> out(src.size());
  for (std::size_t q = 0; q < src.size(); ++q) out[q] = T(v[src[q]]);
  return out;
}

}  // namespace

TEST_CASE("grid symmetries form the dihedral group of the square") {
  const auto syms = grid_symmetries(GridSpec{200.0, 5, 8}, Modality::fov,
                                    Architecture::map_net, 0);
  REQUIRE(syms.size() == 8);
  std::set<std::vector<std::uint32_t>> seen;
  for (std::size_t g = 0; g < 8; ++g) {
    auto in = syms[g].input_source;
    auto target = syms[g].target_source;
    seen.insert(target);
    if (g == 0) {
      for (std::uint32_t q = 0; q < in.size(); ++q) CHECK(in[q] == q);
    }
    std::sort(in.begin(), in.end());
    std::sort(target.begin(), target.end());
    for (std::uint32_t q = 0; q < in.size(); ++q) CHECK(in[q] == q);
    for (std::uint32_t q = 0; q < target.size(); ++q) CHECK(target[q] == q);
  }
  CHECK(seen.size() == 8);
  CHECK(grid_symmetries(GridSpec{200.0, 5, 6}, Modality::fov, Architecture::map_net, 0).empty());
  CHECK(grid_symmetries(GridSpec{200.0, 5, 6}, Modality::bearing, Architecture::map_net, 0)
            .size() == 8);
}

TEST_CASE("moving the belief moves the exact map") {
  struct Case {
    GridSpec grid;
    Modality modality;
  };
  for (const Case& c : {Case{GridSpec{200.0, 7, 36}, Modality::bearing},
                        Case{GridSpec{200.0, 5, 8}, Modality::fov}}) {
    CAPTURE(int(c.modality));
    EpisodeConfig cfg;
    cfg.grid = c.grid;
    cfg.modality = c.modality;
    cfg.coeff_order = 2;
    const EpisodeRunner runner(cfg);
    Rng rng = make_stream(71, 0);
    const Belief b = testing::random_belief(c.grid.n, rng, 0.3);
    const InfoMap m = runner.exact_map(b);
    for (const auto& sym : grid_symmetries(c.grid, c.modality, Architecture::map_net, 0)) {
      const Belief moved(c.grid.n, gather<double>(sym.input_source, b.weights()));
      const InfoMap expect = runner.exact_map(moved);
      const auto got = gather<double>(sym.target_source, std::span<const double>(m.values));
      double worst = 0.0;
      for (std::size_t q = 0; q < got.size(); ++q) {
        worst = std::max(worst, std::abs(got[q] - expect.values[q]));
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("moving a map permutes its coefficients with signs") {
  struct Case {
    GridSpec grid;
    Modality modality;
    int order;
  };
  for (const Case& c : {Case{GridSpec{200.0, 7, 36}, Modality::bearing, 4},
                        Case{GridSpec{200.0, 6, 12}, Modality::fov, 3}}) {
    CAPTURE(int(c.modality));
    const Space space = space_of(c.modality);
    const SpectralBasis basis(c.grid, IndexSet::for_space(space, c.order));
    InfoMap m = space == Space::r2 ? InfoMap::r2(c.grid.n) : InfoMap::se2(c.grid.n, 12);
    Rng rng = make_stream(72, 0);
    double sum = 0.0;
    for (auto& v : m.values) sum += (v = uniform01(rng));
    for (auto& v : m.values) v /= sum;
    m.normalized = true;
    const CoeffVector coeffs = decompose(m, basis);
    const auto maps = grid_symmetries(c.grid, c.modality, Architecture::map_net, 0);
    const auto cs = grid_symmetries(c.grid, c.modality, Architecture::coeff_net, c.order);
    REQUIRE(maps.size() == 8);
    REQUIRE(cs.size() == 8);
    for (std::size_t g = 0; g < 8; ++g) {
      CAPTURE(g);
      InfoMap moved = m;
      moved.values = gather<double>(maps[g].target_source, std::span<const double>(m.values));
      const CoeffVector expect = decompose(moved, basis);
      double worst = 0.0;
      for (std::size_t k = 0; k < expect.values.size(); ++k) {
        const double got = cs[g].target_sign[k] * coeffs.values[cs[g].target_source[k]];
        worst = std::max(worst, std::abs(got - expect.values[k]));
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("augmented training is deterministic and differs from plain training") {
  EpisodeConfig c;
  c.grid = GridSpec{200.0, 6, 8};
  c.coeff_order = 2;
  c.steps = 3;
  const TrainingSet set = make_training_set(generate_dataset(c, 4, 5), Architecture::map_net);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  auto run = [&](bool augment) {
    cfg.augment = augment;
    Network net(map_net_spec(c.grid, c.modality));
    net.initialize(1);
    train(net, set, cfg);
    return std::vector<float>(net.params().begin(), net.params().end());
  };
  const auto a = run(true);
  CHECK(a == run(true));
  CHECK(a != run(false));
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const auto data = map_set(20, true, 1);
  Network net(map_net_spec(kGrid, Modality::bearing));
  net.initialize(3);
  const std::vector<float> before(net.params().begin(), net.params().end());
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.0;
  train(net, data, cfg);
  CHECK(std::equal(before.begin(), before.end(), net.params().begin()));
}

TEST_CASE("a repeated sample is memorized") {
  SUBCASE("map-net") {
    const auto data = map_set(10, false, 2);
    Network net(map_net_spec(kGrid, Modality::bearing));
    net.initialize(4);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 4;
    const auto res = train(net, data, cfg);
    REQUIRE(res.history.size() == 200);
    const auto it = std::find_if(res.history.begin(), res.history.end(),
                                 [](const EpochRecord& r) { return r.train_loss < 1e-3; });
    CHECK(it != res.history.end());
  }
  SUBCASE("coeff-net") {
    TrainingSet data;
    data.count = 10;
    data.input_size = 64;
    data.target_size = 16;
    Rng rng = make_stream(5, 0);
    const auto b = testing::random_belief(8, rng);
    std::vector<float> target(16);
    for (auto& t : target) t = float(0.01 * (uniform01(rng) - 0.5));
    for (int k = 0; k < 10; ++k) {
      data.inputs.insert(data.inputs.end(), b.weights().begin(), b.weights().end());
      data.targets.insert(data.targets.end(), target.begin(), target.end());
    }
    Network net(coeff_net_spec(kGrid, Modality::bearing, 3));
    net.initialize(6);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 4;
    const auto res = train(net, data, cfg);
    double best = INFINITY;
    for (const auto& r : res.history) best = std::min(best, r.train_loss);
    CHECK(best < 1e-3);
  }
}

TEST_CASE("training is deterministic and reports a validation history") {
  const auto data = map_set(30, true, 7);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 8;
  cfg.seed = 11;
  Network a(map_net_spec(kGrid, Modality::bearing)), b(a.spec());
  a.initialize(1);
  b.initialize(1);
  const auto ra = train(a, data, cfg), rb = train(b, data, cfg);
  REQUIRE(ra.history.size() == 4);
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(ra.history[e].epoch == int(e) + 1);
    CHECK(ra.history[e].train_loss == rb.history[e].train_loss);
    REQUIRE(ra.history[e].val_loss.has_value());
    CHECK(*ra.history[e].val_loss == *rb.history[e].val_loss);
  }
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  CHECK(ra.validation_indices.size() == 3);
  CHECK(ra.train_indices.size() == 27);
  for (auto v : ra.validation_indices) {
    CHECK(std::find(ra.train_indices.begin(), ra.train_indices.end(), v) == ra.train_indices.end());
  }

  // The returned parameters are the best-scoring ones.
  double best = INFINITY;
  for (const auto& r : ra.history) best = std::min(best, *r.val_loss);
  CHECK(ra.best_loss == best);
  CHECK(mean_loss(a, data, ra.validation_indices) == doctest::Approx(best).epsilon(1e-9));

  testing::TempDir dir("train");
  write_history_csv(ra, dir / "h.csv");
  std::ifstream in(dir / "h.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,val_loss");
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 4);
}

TEST_CASE("training rejects bad inputs") {
  const auto data = map_set(10, true, 8);
  Network net(map_net_spec(kGrid, Modality::bearing));
  net.initialize(1);
  TrainConfig cfg;
  cfg.epochs = 2;
  SUBCASE("non-finite output bias") {
    net.params().back() = std::numeric_limits<float>::quiet_NaN();
    try {
      train(net, data, cfg);
      FAIL("NaN loss went unnoticed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::numeric);
    }
  }
  SUBCASE("non-finite target") {
    auto bad = data;
    bad.targets[5] = std::numeric_limits<float>::quiet_NaN();
    try {
      train(net, bad, cfg);
      FAIL("NaN target went unnoticed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::numeric);
    }
  }
  Network other(map_net_spec(GridSpec{200.0, 6, 36}, Modality::bearing));
  CHECK_THROWS_AS(train(other, data, cfg), Error);
  CHECK_THROWS_AS(train(net, TrainingSet{}, cfg), Error);
}
