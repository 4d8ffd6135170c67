#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "agentnet/harness.hpp"

using namespace agentnet;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.dataset.family = "two-wl";
  c.model.variant = Variant::kFull;
  c.model.agents = 2;
  c.model.steps = 4;
  c.model.hidden = 8;
  c.batch_size = 4;
  c.training_steps = 25;
  c.eval_every = 10;
  c.eval_rollouts = 4;
  c.early_stop_patience = 1000;
  c.seeds = {1};
  return c;
}

}  // namespace

TEST_CASE("experiment config json round-trip") {
  ExperimentConfig c = tiny_config();
  ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.config_hash() == c.config_hash());
}

TEST_CASE("training is deterministic across repeats and worker counts") {
  ExperimentConfig c = tiny_config();
  Metrics m1 = train(c, 1);
  Metrics m2 = train(c, 1);
  CHECK(m1.to_json() == m2.to_json());  // byte-identical
  Metrics m3 = train(c, 2);
  CHECK(m3.to_json() == m1.to_json());  // static batch partitioning
}

TEST_CASE("initial loss on a 2-class task sits near ln 2") {
  ExperimentConfig c = table1_config("four-cycles", Variant::kFull, 3);
  LabeledDataset ds = make_dataset(c.dataset);
  ModelConfig mc = c.model;
  mc.class_count = ds.class_count;
  double total = 0.0;
  int count = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ModelParams params = ModelParams::create(mc, 1, seed);
    for (int i = 0; i < 8; ++i) {
      RolloutOptions opts;
      opts.label = ds.items[i].label;
      total += run_rollout(ds.items[i].graph, params, 100 * seed + i, opts).loss;
      count += 1;
    }
  }
  double mean = total / count;
  CHECK(std::abs(mean - std::log(2.0)) < 0.2);
}

TEST_CASE("grid search enumerates every cell and reproduces its best pick") {
  ExperimentConfig base = tiny_config();
  base.dataset.family = "four-cycles";
  base.dataset.count = 8;
  base.training_steps = 2;
  base.eval_every = 100;
  base.eval_rollouts = 1;
  base.batch_size = 2;

  GridAxes axes;
  axes.batch_sizes = {2, 3};
  axes.hiddens = {8, 10};
  axes.lrs = {1e-3, 5e-4, 1e-4};
  GridResult r1 = grid_search(base, axes, 2);
  CHECK(r1.cells.size() == 12);
  CHECK(r1.best_index >= 0);
  GridResult r2 = grid_search(base, axes, 2);
  CHECK(r2.best_index == r1.best_index);

  // The agent-count axis exists for the synthetic runs.
  GridAxes agent_axis;
  agent_axis.agents = {2, 16};
  CHECK(grid_search(base, agent_axis, 2).cells.size() == 2);
}

TEST_CASE("theory checks pass in quick mode") {
  auto checks = run_theory_checks(7, /*quick=*/true);
  CHECK(checks.size() >= 12);
  for (const auto& c : checks) {
    INFO(c.name, " bound ", c.bound, " observed ", c.observed, " ", c.detail);
    CHECK(c.pass);
  }
  // The JSON report carries one entry per check.
  std::string json = theory_checks_to_json(checks);
  CHECK(json.find("all_pass") != std::string::npos);
}

TEST_CASE("model checkpoints round-trip") {
  ModelConfig mc;
  mc.variant = Variant::kSimplified;
  mc.agents = 3;
  mc.steps = 4;
  mc.hidden = 8;
  ModelParams params = ModelParams::create(mc, 2, 5);
  std::string path = (std::filesystem::temp_directory_path() / "agentnet_ck.json").string();
  save_model(path, params);
  ModelParams back = load_model(path);
  CHECK(back.store.values() == params.store.values());
  CHECK(back.config.agents == 3);
  CHECK(back.feature_dim == 2);
  std::filesystem::remove(path);
}

TEST_CASE("table csv writer emits one row per seed") {
  std::vector<TableRow> rows(1);
  rows[0].dataset = "two-wl";
  rows[0].variant = "full";
  rows[0].metrics.per_seed.resize(3);
  for (int i = 0; i < 3; ++i) {
    rows[0].metrics.per_seed[i].seed = i;
    rows[0].metrics.per_seed[i].final_accuracy = 0.5 + 0.1 * i;
  }
  rows[0].metrics.finalize();
  std::string path = (std::filesystem::temp_directory_path() / "agentnet_rows.csv").string();
  write_table_csv(path, rows);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) lines += 1;
  CHECK(lines == 4);  // header + 3 seeds
  std::filesystem::remove(path);
  CHECK(rows[0].metrics.mean_accuracy == doctest::Approx(0.6));
}
