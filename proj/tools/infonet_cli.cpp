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

// Command-line front end. Talks to the library only through infonet.h.

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "infonet/infonet.h"

namespace {

int report(infonet_status status, const std::string& what) {
  if (status == INFONET_OK) return 0;
  std::fprintf(stderr, "infonet %s: %s: %s\n", what.c_str(), infonet_status_string(status),
               infonet_last_error());
  return static_cast<int>(status);
}

const std::map<std::string, infonet_modality> kModalities{{"bearing", INFONET_BEARING},
                                                          {"fov", INFONET_FOV}};
const std::map<std::string, infonet_metric> kMetrics{{"mutual", INFONET_MUTUAL},
                                                     {"fisher", INFONET_FISHER}};

void add_problem_options(CLI::App* cmd, infonet_problem& p) {
  cmd->add_option("--modality", p.modality, "Sensor modality")
      ->transform(CLI::CheckedTransformer(kModalities, CLI::ignore_case));
  cmd->add_option("--metric", p.metric, "Information metric")
      ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));
  cmd->add_option("--n", p.n, "Cells per side")->check(CLI::Range(2, 4096));
  cmd->add_option("--sigma", p.sigma_deg, "Bearing noise, degrees")->check(CLI::PositiveNumber);
  cmd->add_option("--K", p.coeff_order, "Highest coefficient order")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Information maps for mobile-sensor target localization, and networks that "
               "approximate them"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(infonet_version()));

  infonet_problem problem;
  infonet_problem_default(&problem);

  // generate-dataset
  auto* gen = app.add_subcommand("generate-dataset", "Run greedy episodes and record samples");
  int gen_episodes = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  add_problem_options(gen, problem);
  gen->add_option("--episodes", gen_episodes, "Episodes")->check(CLI::PositiveNumber);
  gen->add_option("--steps", problem.steps, "Steps per episode")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Dataset path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a map-net or coeff-net on a dataset");
  infonet_train_options topt;
  infonet_train_options_default(&topt);
  std::string tr_dataset, tr_out, tr_history;
  const std::map<std::string, infonet_arch> archs{{"map", INFONET_MAP_NET},
                                                  {"coeff", INFONET_COEFF_NET}};
  tr->add_option("--arch", topt.arch, "Architecture")
      ->required()
      ->transform(CLI::CheckedTransformer(archs, CLI::ignore_case));
  tr->add_option("--dataset", tr_dataset, "Dataset path")->required()->check(CLI::ExistingFile);
  tr->add_option("--epochs", topt.epochs, "Epochs")->check(CLI::PositiveNumber);
  tr->add_option("--batch", topt.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  tr->add_option("--lr", topt.learning_rate, "Learning rate")->check(CLI::NonNegativeNumber);
  tr->add_option("--val-fraction", topt.validation_fraction, "Held-out fraction");
  tr->add_option("--seed", topt.seed, "Initialization and shuffle seed");
  tr->add_option("--out", tr_out, "Weights path")->required();
  bool tr_no_augment = false;
  tr->add_flag("--no-augment", tr_no_augment, "Train on the samples as recorded, without grid symmetries");
  tr->add_option("--history", tr_history, "Loss history CSV (default: <out>.history.csv)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "KL quality of trained networks on fresh episodes");
  std::string ev_map, ev_coeff, ev_report;
  int ev_episodes = 100;
  std::uint64_t ev_seed = 1;
  ev->add_option("--map-weights", ev_map, "Map-net weights")->required()->check(CLI::ExistingFile);
  ev->add_option("--coeff-weights", ev_coeff, "Coeff-net weights")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--episodes", ev_episodes, "Episodes")->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "Episode seed");
  ev->add_option("--report", ev_report, "JSON report path")->required();

  // benchmark
  auto* bm = app.add_subcommand("benchmark", "Time exact and network map generation");
  infonet_benchmark_options bopt;
  infonet_benchmark_options_default(&bopt);
  std::string bm_report, bm_map, bm_coeff;
  add_problem_options(bm, problem);
  bm->add_option("--reps", bopt.reps, "Timed repetitions")->check(CLI::PositiveNumber);
  bm->add_option("--warmup", bopt.warmup, "Untimed warm-up calls")->check(CLI::NonNegativeNumber);
  bm->add_option("--seed", bopt.seed, "Seed for the timing belief and untrained weights");
  bm->add_option("--map-weights", bm_map, "Map-net weights (default: untrained)")
      ->check(CLI::ExistingFile);
  bm->add_option("--coeff-weights", bm_coeff, "Coeff-net weights (default: untrained)")
      ->check(CLI::ExistingFile);
  bm->add_option("--report", bm_report, "JSON report path")->required();

  // render
  auto* rd = app.add_subcommand("render", "Write a map slice as PGM or CSV");
  infonet_render_options ropt;
  infonet_render_options_default(&ropt);
  std::string rd_input, rd_out, rd_field = "map";
  const std::map<std::string, infonet_format> formats{{"pgm", INFONET_PGM}, {"csv", INFONET_CSV}};
  rd->add_option("--input", rd_input, "Dataset or coefficient file")
      ->required()
      ->check(CLI::ExistingFile);
  rd->add_option("--format", ropt.format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  rd->add_option("--heading-bin", ropt.heading_bin, "Heading slice for SE(2) maps");
  rd->add_option("--sample", ropt.sample, "Dataset sample index");
  rd->add_option("--field", rd_field, "Dataset field")->check(CLI::IsMember({"map", "belief"}));
  rd->add_option("--out", rd_out, "Output path")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const int rc = report(
        infonet_generate_dataset(&problem, gen_episodes, gen_seed, gen_out.c_str()),
        "generate-dataset");
    if (rc == 0) std::printf("wrote %d x %d samples to %s\n", gen_episodes, problem.steps, gen_out.c_str());
    return rc;
  }
  if (tr->parsed()) {
    if (tr_history.empty()) tr_history = tr_out + ".history.csv";
    topt.history_csv = tr_history.c_str();
    topt.augment = tr_no_augment ? 0 : 1;
    const int rc = report(infonet_train(tr_dataset.c_str(), &topt, tr_out.c_str()), "train");
    if (rc == 0) std::printf("wrote %s and %s\n", tr_out.c_str(), tr_history.c_str());
    return rc;
  }
  if (ev->parsed()) {
    const int rc = report(infonet_evaluate(ev_map.c_str(), ev_coeff.c_str(), ev_episodes, ev_seed,
                                           ev_report.c_str()),
                          "evaluate");
    if (rc == 0) std::printf("wrote %s\n", ev_report.c_str());
    return rc;
  }
  if (bm->parsed()) {
    bopt.map_weights = bm_map.empty() ? nullptr : bm_map.c_str();
    bopt.coeff_weights = bm_coeff.empty() ? nullptr : bm_coeff.c_str();
    const int rc = report(infonet_benchmark(&problem, &bopt, bm_report.c_str()), "benchmark");
    if (rc == 0) std::printf("wrote %s\n", bm_report.c_str());
    return rc;
  }
  ropt.render_belief = rd_field == "belief" ? 1 : 0;
  const int rc = report(infonet_render(rd_input.c_str(), &ropt, rd_out.c_str()), "render");
  if (rc == 0) std::printf("wrote %s\n", rd_out.c_str());
  return rc;
}
