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

#include "infonet/infonet.h"

#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "infonet/container.hpp"
#include "infonet/error.hpp"
#include "infonet/eval.hpp"
#include "infonet/train.hpp"

using namespace infonet;

struct infonet_model {
  std::unique_ptr<EpisodeRunner> runner;
};

struct infonet_network {
  std::optional<Network> net;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
infonet_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return INFONET_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<infonet_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return INFONET_ERR_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return INFONET_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return INFONET_ERR_INTERNAL;
  }
}

void require_ptr(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

EpisodeConfig to_config(const infonet_problem& p) {
  EpisodeConfig c;
  c.grid.side_length = p.side_length;
  c.grid.n = p.n;
  c.grid.heading_bins = p.heading_bins;
  require(p.modality == INFONET_BEARING || p.modality == INFONET_FOV, "unknown modality");
  require(p.metric == INFONET_MUTUAL || p.metric == INFONET_FISHER, "unknown metric");
  c.modality = p.modality == INFONET_BEARING ? Modality::bearing : Modality::fov;
  c.metric = p.metric == INFONET_MUTUAL ? Metric::mutual : Metric::fisher;
  c.sigma = p.sigma_deg;
  c.steps = p.steps;
  c.coeff_order = p.coeff_order;
  c.validate();
  return c;
}

Belief to_belief(int n, const double* belief, std::size_t len) {
  require_ptr(belief, "belief");
  require(len == std::size_t(n) * n, "belief must have n*n entries");
  return Belief(n, std::vector<double>(belief, belief + len));
}

void copy_out(const std::vector<double>& src, double* out, std::size_t out_len) {
  require_ptr(out, "output buffer");
  require(out_len == src.size(), "output buffer has " + std::to_string(out_len) +
                                     " entries, expected " + std::to_string(src.size()));
  std::copy(src.begin(), src.end(), out);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write report '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::io, "failed writing report '" + path.string() + "'");
}

nlohmann::json problem_json(const EpisodeConfig& c) {
  return {{"side_length", c.grid.side_length}, {"n", c.grid.n},
          {"heading_bins", c.grid.heading_bins}, {"modality", to_string(c.modality)},
          {"metric", to_string(c.metric)}, {"sigma", c.sigma},
          {"steps", c.steps}, {"K", c.coeff_order}};
}

Network untrained(NetworkSpec spec, const EpisodeConfig& c, std::uint64_t seed) {
  spec.metric = c.metric;
  spec.sigma = c.sigma;
  Network net(std::move(spec));
  net.initialize(seed);
  return net;
}

}  // namespace

extern "C" {

const char* infonet_version(void) { return "1.0.0"; }

const char* infonet_last_error(void) { return g_last_error.c_str(); }

const char* infonet_status_string(infonet_status status) {
  switch (status) {
    case INFONET_OK: return "ok";
    case INFONET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case INFONET_ERR_IO: return "i/o error";
    case INFONET_ERR_FORMAT: return "format error";
    case INFONET_ERR_NUMERIC: return "numeric error";
    case INFONET_ERR_RESOURCE: return "resource limit";
    case INFONET_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void infonet_problem_default(infonet_problem* out) {
  if (out == nullptr) return;
  const EpisodeConfig c;
  out->side_length = c.grid.side_length;
  out->n = c.grid.n;
  out->heading_bins = c.grid.heading_bins;
  out->modality = INFONET_BEARING;
  out->metric = INFONET_MUTUAL;
  out->sigma_deg = c.sigma;
  out->steps = c.steps;
  out->coeff_order = c.coeff_order;
}

infonet_status infonet_model_create(const infonet_problem* problem, infonet_model** out) {
  return guarded([&] {
    require_ptr(problem, "problem");
    require_ptr(out, "out");
    *out = nullptr;
    auto m = std::make_unique<infonet_model>();
    m->runner = std::make_unique<EpisodeRunner>(to_config(*problem));
    *out = m.release();
  });
}

void infonet_model_free(infonet_model* model) { delete model; }

size_t infonet_model_map_size(const infonet_model* model) {
  if (model == nullptr) return 0;
  const auto& c = model->runner->config();
  return std::size_t(c.grid.cells()) *
         (c.modality == Modality::fov ? std::size_t(c.grid.heading_bins) : 1);
}

size_t infonet_model_coeff_count(const infonet_model* model) {
  return model == nullptr ? 0 : model->runner->basis().size();
}

infonet_status infonet_model_map(const infonet_model* model, const double* belief,
                                 size_t belief_len, double* out, size_t out_len) {
  return guarded([&] {
    require_ptr(model, "model");
    const Belief b = to_belief(model->runner->config().grid.n, belief, belief_len);
    copy_out(model->runner->exact_map(b).values, out, out_len);
  });
}

infonet_status infonet_model_coeffs(const infonet_model* model, const double* belief,
                                    size_t belief_len, double* out, size_t out_len) {
  return guarded([&] {
    require_ptr(model, "model");
    const Belief b = to_belief(model->runner->config().grid.n, belief, belief_len);
    const auto& r = *model->runner;
    copy_out(r.exact_coeffs(r.exact_map(b)).values, out, out_len);
  });
}

infonet_status infonet_model_reconstruct(const infonet_model* model, const double* coeffs,
                                         size_t coeffs_len, double* out, size_t out_len) {
  return guarded([&] {
    require_ptr(model, "model");
    require_ptr(coeffs, "coeffs");
    const SpectralBasis& basis = model->runner->basis();
    require(coeffs_len == basis.size(), "coefficient vector has the wrong length");
    CoeffVector c{basis.indices().space(), basis.indices().order(),
                  std::vector<double>(coeffs, coeffs + coeffs_len)};
    copy_out(reconstruct(c, basis).values, out, out_len);
  });
}

infonet_status infonet_network_load(const char* path, infonet_network** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = nullptr;
    auto h = std::make_unique<infonet_network>();
    h->net.emplace(load_weights(path));
    *out = h.release();
  });
}

void infonet_network_free(infonet_network* net) { delete net; }

infonet_arch infonet_network_arch(const infonet_network* net) {
  return net != nullptr && net->net->spec().arch == Architecture::coeff_net ? INFONET_COEFF_NET
                                                                            : INFONET_MAP_NET;
}

size_t infonet_network_input_size(const infonet_network* net) {
  return net == nullptr ? 0 : net->net->spec().input_size();
}

size_t infonet_network_output_size(const infonet_network* net) {
  return net == nullptr ? 0 : net->net->spec().output_size();
}

infonet_status infonet_network_forward(const infonet_network* net, const double* belief,
                                       size_t belief_len, double* out, size_t out_len) {
  return guarded([&] {
    require_ptr(net, "network");
    const Belief b = to_belief(net->net->spec().grid.n, belief, belief_len);
    const Tensor t = forward(*net->net, b);
    copy_out(std::vector<double>(t.data.begin(), t.data.end()), out, out_len);
  });
}

infonet_status infonet_generate_dataset(const infonet_problem* problem, int episodes,
                                        uint64_t seed, const char* out_path) {
  return guarded([&] {
    require_ptr(problem, "problem");
    require_ptr(out_path, "output path");
    write_dataset(generate_dataset(to_config(*problem), episodes, seed), out_path);
  });
}

void infonet_train_options_default(infonet_train_options* out) {
  if (out == nullptr) return;
  const TrainConfig c;
  out->arch = INFONET_MAP_NET;
  out->epochs = c.epochs;
  out->batch_size = c.batch_size;
  out->learning_rate = c.learning_rate;
  out->validation_fraction = c.validation_fraction;
  out->seed = c.seed;
  out->augment = c.augment ? 1 : 0;
  out->history_csv = nullptr;
}

infonet_status infonet_train(const char* dataset_path, const infonet_train_options* options,
                             const char* weights_out) {
  return guarded([&] {
    require_ptr(dataset_path, "dataset path");
    require_ptr(options, "options");
    require_ptr(weights_out, "weights path");
    require(options->arch == INFONET_MAP_NET || options->arch == INFONET_COEFF_NET,
            "unknown architecture");
    TrainConfig tc;
    tc.epochs = options->epochs;
    tc.batch_size = options->batch_size;
    tc.learning_rate = options->learning_rate;
    tc.validation_fraction = options->validation_fraction;
    tc.seed = options->seed;
    tc.augment = options->augment != 0;
    tc.validate();

    const Dataset data = read_dataset(dataset_path);
    const EpisodeConfig& c = data.config;
    const Architecture arch =
        options->arch == INFONET_MAP_NET ? Architecture::map_net : Architecture::coeff_net;
    NetworkSpec spec = arch == Architecture::map_net
                           ? map_net_spec(c.grid, c.modality)
                           : coeff_net_spec(c.grid, c.modality, c.coeff_order);
    spec.coeff_order = c.coeff_order;
    Network net = untrained(std::move(spec), c, tc.seed);
    const TrainingSet set = make_training_set(data, arch);
    const TrainResult r = train(net, set, tc);

    nlohmann::json meta = {
        {"epochs", tc.epochs},
        {"batch_size", tc.batch_size},
        {"learning_rate", tc.learning_rate},
        {"validation_fraction", tc.validation_fraction},
        {"optimizer", {{"name", "adam"}, {"beta1", tc.beta1}, {"beta2", tc.beta2},
                       {"epsilon", tc.epsilon}}},
        {"seed", tc.seed},
        {"augment", tc.augment && !set.symmetries.empty()},
        {"loss", arch == Architecture::map_net ? "kl" : "mae"},
        {"best_epoch", r.best_epoch},
        {"best_loss", r.best_loss},
        {"overfitting_suspected", r.overfitting_suspected},
        {"train_samples", r.train_indices.size()},
        {"validation_samples", r.validation_indices.size()},
        {"dataset", {{"samples", data.samples}, {"episodes", data.episodes},
                     {"steps", c.steps}, {"seed", data.seed}}},
    };
    save_weights(net, weights_out, meta);
    if (options->history_csv != nullptr) write_history_csv(r, options->history_csv);
  });
}

infonet_status infonet_evaluate(const char* map_weights, const char* coeff_weights, int episodes,
                                uint64_t seed, const char* report_path) {
  return guarded([&] {
    require_ptr(map_weights, "map weights path");
    require_ptr(coeff_weights, "coefficient weights path");
    require_ptr(report_path, "report path");
    const Network map_net = load_weights(map_weights);
    const Network coeff_net = load_weights(coeff_weights);
    require(map_net.spec().arch == Architecture::map_net, "--map-weights is not a map-net");
    require(coeff_net.spec().arch == Architecture::coeff_net,
            "--coeff-weights is not a coeff-net");

    EpisodeConfig c;
    c.grid = map_net.spec().grid;
    c.modality = map_net.spec().modality;
    c.metric = map_net.spec().metric;
    c.sigma = map_net.spec().sigma;
    c.coeff_order = coeff_net.spec().coeff_order;
    check_compatible(map_net, c);
    check_compatible(coeff_net, c);
    const EpisodeRunner runner(c);
    const QualityReport q = evaluate_quality(runner, episodes, seed, network_map_predictor(map_net),
                                             network_coeff_predictor(coeff_net));
    write_json(report_path, {{"problem", problem_json(c)},
                             {"map_weights", map_weights},
                             {"coeff_weights", coeff_weights},
                             {"quality", q.to_json()}});
  });
}

void infonet_benchmark_options_default(infonet_benchmark_options* out) {
  if (out == nullptr) return;
  const BenchmarkConfig c;
  out->reps = c.reps;
  out->warmup = c.warmup;
  out->seed = c.seed;
  out->map_weights = nullptr;
  out->coeff_weights = nullptr;
}

infonet_status infonet_benchmark(const infonet_problem* problem,
                                 const infonet_benchmark_options* options,
                                 const char* report_path) {
  return guarded([&] {
    require_ptr(problem, "problem");
    require_ptr(options, "options");
    require_ptr(report_path, "report path");
    BenchmarkConfig bc;
    bc.reps = options->reps;
    bc.warmup = options->warmup;
    bc.seed = options->seed;
    bc.validate();
    EpisodeConfig c = to_config(*problem);
    const EpisodeRunner runner(c);
    const Network map_net = options->map_weights
                                ? load_weights(options->map_weights)
                                : untrained(map_net_spec(c.grid, c.modality), c, bc.seed);
    NetworkSpec cs = coeff_net_spec(c.grid, c.modality, c.coeff_order);
    const Network coeff_net =
        options->coeff_weights ? load_weights(options->coeff_weights) : untrained(cs, c, bc.seed);
    const BenchmarkReport r = benchmark_timing(runner, map_net, coeff_net, bc);
    write_json(report_path,
               {{"problem", problem_json(c)},
                {"trained_map_net", options->map_weights != nullptr},
                {"trained_coeff_net", options->coeff_weights != nullptr},
                {"warmup", bc.warmup},
                {"timing", r.to_json()}});
  });
}

void infonet_render_options_default(infonet_render_options* out) {
  if (out == nullptr) return;
  out->format = INFONET_PGM;
  out->heading_bin = 0;
  out->sample = 0;
  out->render_belief = 0;
}

infonet_status infonet_render(const char* input, const infonet_render_options* options,
                              const char* out_path) {
  return guarded([&] {
    require_ptr(input, "input path");
    require_ptr(options, "options");
    require_ptr(out_path, "output path");
    require(options->format == INFONET_PGM || options->format == INFONET_CSV,
            "unknown render format");
    const RenderFormat fmt = options->format == INFONET_PGM ? RenderFormat::pgm : RenderFormat::csv;
    const std::string kind = container_format(input);
    if (kind == "infonet-dataset") {
      const Dataset d = read_dataset(input);
      require(options->sample < d.samples, "sample index " + std::to_string(options->sample) +
                                               " out of range (" + std::to_string(d.samples) +
                                               " samples)");
      const int n = d.config.grid.n;
      if (options->render_belief) {
        require(options->heading_bin == 0, "beliefs have a single heading slice");
        const auto b = d.belief(options->sample);
        render_grid(std::vector<double>(b.begin(), b.end()), n, out_path, fmt);
        return;
      }
      InfoMap m = d.config.modality == Modality::fov ? InfoMap::se2(n, d.config.grid.heading_bins)
                                                     : InfoMap::r2(n);
      const auto src = d.map(options->sample);
      m.values.assign(src.begin(), src.end());
      render_grid(map_slice(m, options->heading_bin), n, out_path, fmt);
    } else if (kind == "infonet-coeffs") {
      // Coefficient files carry no grid; the default field is assumed.
      const CoeffVector c = read_coeffs(input);
      const SpectralBasis basis(GridSpec{}, IndexSet::for_space(c.space, c.order));
      render_map(reconstruct(c, basis), options->heading_bin, out_path, fmt);
    } else {
      fail(ErrorCode::format, "'" + std::string(input) + "' holds '" + kind +
                                  "' data; render expects a dataset or coefficient file");
    }
  });
}

}  // extern "C"
