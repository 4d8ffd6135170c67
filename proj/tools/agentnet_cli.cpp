#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "agentnet/harness.hpp"
#include "agentnet/oracles.hpp"
#include "agentnet/walks.hpp"

namespace fs = std::filesystem;
using namespace agentnet;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

Graph load_graph(const std::string& path) { return Graph::from_text(read_file(path)); }

void write_run_info(const std::string& dir, double wall_clock_sec) {
  nlohmann::ordered_json j;
  j["wall_clock_sec"] = wall_clock_sec;
  write_file(dir + "/runinfo.json", j.dump(1));
}

int cmd_generate_dataset(const DatasetSpec& spec, const std::string& out) {
  LabeledDataset ds = make_dataset(spec);
  ds.save(out);
  std::printf("wrote %zu graphs (%d classes) to %s\n", ds.items.size(), ds.class_count,
              out.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, int64_t seed_override, const std::string& out_dir,
              int workers) {
  ExperimentConfig config = ExperimentConfig::from_json(read_file(config_path));
  if (seed_override >= 0) config.seeds = {static_cast<uint64_t>(seed_override)};
  fs::create_directories(out_dir);

  Metrics metrics;
  metrics.config_hash = config.config_hash();
  auto t0 = std::chrono::steady_clock::now();
  for (size_t i = 0; i < config.seeds.size(); ++i) {
    ParamStore trained;
    metrics.per_seed.push_back(train_one_seed(config, config.seeds[i], workers, &trained));
    if (i == 0) {
      ModelConfig mc = config.model;
      LabeledDataset ds = make_dataset(config.dataset);
      mc.class_count = ds.class_count;
      ModelParams params = ModelParams::create(
          mc, config.dataset.family == "theorem8"
                  ? one_hot_features(ds.items.front().graph).feature_dim()
                  : ds.items.front().graph.feature_dim(),
          config.seeds[i]);
      params.store = trained;
      save_model(out_dir + "/checkpoint.json", params);
    }
  }
  metrics.finalize();
  metrics.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_file(out_dir + "/config.json", config.to_json());
  write_file(out_dir + "/metrics.json", metrics.to_json());
  write_run_info(out_dir, metrics.wall_clock_sec);
  std::printf("mean accuracy %.4f +- %.4f over %zu seed(s)\n", metrics.mean_accuracy,
              metrics.std_accuracy, config.seeds.size());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path, int rollouts,
             uint64_t seed, int workers) {
  ExperimentConfig config = ExperimentConfig::from_json(read_file(config_path));
  ModelParams params = load_model(checkpoint);
  LabeledDataset ds = make_dataset(config.dataset);
  if (config.dataset.family == "theorem8")
    for (auto& item : ds.items) item.graph = one_hot_features(item.graph);
  Split split = split_dataset(ds, config.dataset.family, config.test_fraction,
                              config.dataset.seed);
  double acc = evaluate_accuracy(ds, split.test, params, rollouts, seed, workers);
  std::printf("test accuracy %.4f (%zu graphs x %d rollouts)\n", acc, split.test.size(),
              rollouts);
  return 0;
}

int cmd_grid(const std::string& config_path, const GridAxes& axes, const std::string& out_dir,
             int workers) {
  ExperimentConfig base = ExperimentConfig::from_json(read_file(config_path));
  GridResult result = grid_search(base, axes, workers);
  fs::create_directories(out_dir);

  std::ofstream csv(out_dir + "/grid.csv");
  csv << "cell,batch_size,hidden,lr,agents,steps,mean_accuracy,std_accuracy\n";
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  char buf[64];
  for (size_t i = 0; i < result.cells.size(); ++i) {
    const auto& cell = result.cells[i];
    std::snprintf(buf, sizeof(buf), "%.6f", cell.metrics.mean_accuracy);
    csv << i << ',' << cell.config.batch_size << ',' << cell.config.model.hidden << ','
        << cell.config.lr_start << ',' << cell.config.model.agents << ','
        << cell.config.model.steps << ',' << buf << ',' << cell.metrics.std_accuracy << '\n';
    nlohmann::ordered_json jc;
    jc["config"] = nlohmann::json::parse(cell.config.to_json());
    jc["metrics"] = nlohmann::json::parse(cell.metrics.to_json());
    cells.push_back(std::move(jc));
  }
  nlohmann::ordered_json j;
  j["cells"] = std::move(cells);
  j["best_index"] = result.best_index;
  write_file(out_dir + "/grid.json", j.dump(1));
  std::printf("%zu cells; best cell %d with mean accuracy %.4f\n", result.cells.size(),
              result.best_index, result.cells[result.best_index].metrics.mean_accuracy);
  return 0;
}

int cmd_theory_check(uint64_t seed, bool quick, const std::string& out) {
  auto checks = run_theory_checks(seed, quick);
  std::string report = theory_checks_to_json(checks);
  if (out.empty())
    std::cout << report << '\n';
  else
    write_file(out, report);
  bool all = true;
  for (const auto& c : checks) {
    std::fprintf(stderr, "%-32s bound %-10.4g observed %-10.4g %s\n", c.name.c_str(), c.bound,
                 c.observed, c.pass ? "pass" : "FAIL");
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

int write_rows(const std::vector<TableRow>& rows, const std::string& out_dir,
               const std::string& stem) {
  fs::create_directories(out_dir);
  write_table_csv(out_dir + "/" + stem + ".csv", rows);
  write_file(out_dir + "/" + stem + ".json", table_rows_to_json(rows));
  for (const auto& row : rows)
    std::printf("%-12s %-12s %-24s %6.2f%% +- %.2f\n", row.dataset.c_str(), row.variant.c_str(),
                row.ablation.c_str(), 100.0 * row.metrics.mean_accuracy,
                100.0 * row.metrics.std_accuracy);
  return 0;
}

int cmd_heatmap(const std::string& dataset_path, const std::string& checkpoint, int rollouts,
                uint64_t seed, const std::string& out) {
  LabeledDataset ds = LabeledDataset::load(dataset_path);
  ModelParams params = load_model(checkpoint);
  std::ostringstream csv;
  csv << "graph_index,node_id,visit_count\n";
  for (size_t gi = 0; gi < ds.items.size(); ++gi) {
    const Graph& g = ds.items[gi].graph;
    std::vector<long long> counts(g.node_count(), 0);
    for (int r = 0; r < rollouts; ++r) {
      RolloutResult res = run_rollout(
          g, params, Rng::derive(seed, {rng_tag::kEval, gi, static_cast<uint64_t>(r)}), {});
      for (int v = 0; v < g.node_count(); ++v) counts[v] += res.visit_counts[v];
    }
    for (int v = 0; v < g.node_count(); ++v)
      csv << gi << ',' << v << ',' << counts[v] << '\n';
  }
  write_file(out, csv.str());
  std::printf("wrote visit counts for %zu graphs to %s\n", ds.items.size(), out.c_str());
  return 0;
}

int cmd_grad_check(uint64_t seed) {
  bool all = true;
  for (const auto& c : run_op_grad_checks(seed)) {
    std::printf("%-20s max rel %.3e (checked %d, excluded %d) %s\n", c.op.c_str(),
                c.result.max_rel_error, c.result.checked, c.result.excluded,
                c.pass ? "pass" : "FAIL");
    all = all && c.pass;
  }
  RolloutGradCheck rc = run_rollout_grad_check(seed);
  bool rollout_ok = rc.result.max_rel_error < 1e-4 && rc.st_path_nonzero;
  std::printf("%-20s max rel %.3e (checked %d, excluded %d, st-path %s) %s\n", "rollout-2step",
              rc.result.max_rel_error, rc.result.checked, rc.result.excluded,
              rc.st_path_nonzero ? "nonzero" : "ZERO", rollout_ok ? "pass" : "FAIL");
  return (all && rollout_ok) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AgentNet laboratory: synthetic expressiveness experiments, deterministic "
               "walk-agent theory checks, and training utilities"};
  app.require_subcommand(1);

  int workers = default_worker_count();
  app.add_option("--workers", workers, "worker threads (1 guarantees bit-reproducibility)");

  // generate-dataset
  DatasetSpec spec;
  std::string out_path, config_path, checkpoint_path, dataset_path;
  auto* gen = app.add_subcommand("generate-dataset", "write a synthetic dataset as JSON");
  gen->add_option("--family", spec.family,
                  "four-cycles | csl | two-wl | ladder | theorem8 | lemma4")
      ->required();
  gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("--count", spec.count, "graphs (pairwise families) or per-class count");
  gen->add_option("--cells", spec.ladder_cells, "ladder cells");
  gen->add_option("--mode", spec.ladder_mode, "ladder crossing mode: density | fixed2");
  gen->add_option("--b", spec.b, "theorem8: primary tree count");
  gen->add_option("--h1", spec.h1, "theorem8: primary tree depth");
  gen->add_option("--h2", spec.h2, "theorem8: secondary tree depth");
  gen->add_option("--branching", spec.branching, "theorem8: branching factor");
  gen->add_flag("--equalized", spec.equalized, "theorem8: equalize node counts");
  gen->add_option("--out", out_path, "output path")->required();

  // train
  int64_t train_seed = -1;
  std::string out_dir;
  auto* train_cmd = app.add_subcommand("train", "train one experiment configuration");
  train_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  train_cmd->add_option("--seed", train_seed, "override: train this single seed");
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  // eval
  int eval_rollouts = 8;
  uint64_t seed = 7;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's test split");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  eval_cmd->add_option("--config", config_path, "experiment config JSON")->required();
  eval_cmd->add_option("--rollouts", eval_rollouts, "rollouts per test graph");
  eval_cmd->add_option("--seed", seed, "evaluation seed");

  // grid
  GridAxes axes;
  auto* grid_cmd = app.add_subcommand("grid", "grid search over config axes");
  grid_cmd->add_option("--config", config_path, "base experiment config JSON")->required();
  grid_cmd->add_option("--batches", axes.batch_sizes, "batch size grid");
  grid_cmd->add_option("--hiddens", axes.hiddens, "hidden unit grid");
  grid_cmd->add_option("--lrs", axes.lrs, "learning rate grid");
  grid_cmd->add_option("--agents", axes.agents, "agent count grid");
  grid_cmd->add_option("--steps", axes.steps, "walk length grid");
  grid_cmd->add_option("--out", out_dir, "output directory")->required();

  // theory-check
  bool quick = false;
  auto* theory_cmd = app.add_subcommand("theory-check", "run the lemma/theorem assertion suite");
  theory_cmd->add_option("--seed", seed, "seed");
  theory_cmd->add_flag("--quick", quick, "smaller pools and trial counts");
  theory_cmd->add_option("--out", out_path, "write the JSON report here (default: stdout)");

  // experiment tables
  int seeds_per_cell = 10;
  std::vector<std::string> datasets_filter, variants_filter, rows_filter;
  std::vector<int> sizes_filter;
  auto* table1_cmd = app.add_subcommand("table1", "synthetic expressiveness table");
  table1_cmd->add_option("--seed", seed, "root seed");
  table1_cmd->add_option("--seeds-per-cell", seeds_per_cell, "training seeds per cell");
  table1_cmd->add_option("--datasets", datasets_filter, "subset of datasets");
  table1_cmd->add_option("--variants", variants_filter, "subset of variants");
  table1_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* ablation_cmd = app.add_subcommand("ablation-j", "model-step ablation table");
  ablation_cmd->add_option("--seed", seed, "root seed");
  ablation_cmd->add_option("--seeds-per-cell", seeds_per_cell, "training seeds per cell");
  ablation_cmd->add_option("--datasets", datasets_filter, "subset of datasets");
  ablation_cmd->add_option("--rows", rows_filter, "subset of ablation rows");
  ablation_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* fig3_cmd = app.add_subcommand("fig3", "ladder density sweep");
  fig3_cmd->add_option("--seed", seed, "root seed");
  fig3_cmd->add_option("--seeds-per-cell", seeds_per_cell, "training seeds per point");
  fig3_cmd->add_option("--sizes", sizes_filter, "ladder sizes in nodes");
  fig3_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* sweep_cmd = app.add_subcommand("agent-sweep", "agent count sweep on four-cycles");
  sweep_cmd->add_option("--seed", seed, "root seed");
  sweep_cmd->add_option("--seeds-per-cell", seeds_per_cell, "training seeds per point");
  sweep_cmd->add_option("--out", out_dir, "output directory")->required();

  // heatmap
  int heatmap_rollouts = 16;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "node visitation counts as CSV");
  heatmap_cmd->add_option("--dataset", dataset_path, "dataset JSON")->required();
  heatmap_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  heatmap_cmd->add_option("--rollouts", heatmap_rollouts, "rollouts per graph");
  heatmap_cmd->add_option("--seed", seed, "seed");
  heatmap_cmd->add_option("--out", out_path, "output CSV")->required();

  // grad-check
  auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient checks");
  grad_cmd->add_option("--seed", seed, "seed");

  // oracle
  std::string graph_path, graph2_path, oracle_kind;
  int node = 0, size = 3, length = 3, radius = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force graph oracles");
  oracle_cmd->add_option("kind", oracle_kind, "cliques | cycles | rhop | iso | wl")->required();
  oracle_cmd->add_option("--graph", graph_path, "graph text file")->required();
  oracle_cmd->add_option("--graph2", graph2_path, "second graph (iso, wl)");
  oracle_cmd->add_option("--node", node, "node id");
  oracle_cmd->add_option("--size", size, "clique size");
  oracle_cmd->add_option("--length", length, "cycle length");
  oracle_cmd->add_option("--radius", radius, "neighborhood radius");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate_dataset(spec, out_path);
    if (train_cmd->parsed()) return cmd_train(config_path, train_seed, out_dir, workers);
    if (eval_cmd->parsed())
      return cmd_eval(checkpoint_path, config_path, eval_rollouts, seed, workers);
    if (grid_cmd->parsed()) return cmd_grid(config_path, axes, out_dir, workers);
    if (theory_cmd->parsed()) return cmd_theory_check(seed, quick, out_path);
    if (table1_cmd->parsed())
      return write_rows(run_table1(seed, seeds_per_cell, workers, datasets_filter,
                                   variants_filter),
                        out_dir, "table1");
    if (ablation_cmd->parsed())
      return write_rows(run_appendix_j(seed, seeds_per_cell, workers, datasets_filter,
                                       rows_filter),
                        out_dir, "ablation");
    if (fig3_cmd->parsed()) {
      auto points = run_fig3_density_sweep(seed, seeds_per_cell, workers, sizes_filter);
      fs::create_directories(out_dir);
      std::ofstream csv(out_dir + "/fig3.csv");
      csv << "nodes,mode,mean_accuracy,std_accuracy\n";
      for (const auto& p : points) {
        csv << p.nodes << ',' << p.mode << ',' << p.metrics.mean_accuracy << ','
            << p.metrics.std_accuracy << '\n';
        std::printf("%5d %-8s %6.2f%% +- %.2f\n", p.nodes, p.mode.c_str(),
                    100.0 * p.metrics.mean_accuracy, 100.0 * p.metrics.std_accuracy);
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      auto points = run_agent_sweep(seed, seeds_per_cell, workers);
      fs::create_directories(out_dir);
      std::ofstream csv(out_dir + "/agent_sweep.csv");
      csv << "agents,mean_accuracy,std_accuracy\n";
      for (const auto& p : points) {
        csv << p.agents << ',' << p.metrics.mean_accuracy << ',' << p.metrics.std_accuracy
            << '\n';
        std::printf("k=%-4d %6.2f%% +- %.2f\n", p.agents, 100.0 * p.metrics.mean_accuracy,
                    100.0 * p.metrics.std_accuracy);
      }
      return 0;
    }
    if (heatmap_cmd->parsed())
      return cmd_heatmap(dataset_path, checkpoint_path, heatmap_rollouts, seed, out_path);
    if (grad_cmd->parsed()) return cmd_grad_check(seed);
    if (oracle_cmd->parsed()) {
      Graph g = load_graph(graph_path);
      if (oracle_kind == "cliques") {
        std::printf("cliques of size %d through node %d: %lld\n", size, node,
                    count_cliques_at(g, node, size));
      } else if (oracle_kind == "cycles") {
        std::printf("%d-cycles through node %d: %lld\n", length, node,
                    count_cycles_through(g, node, length));
      } else if (oracle_kind == "rhop") {
        auto nb = r_hop_neighborhood(g, node, radius);
        std::printf("%d-hop ball around node %d: %d nodes, %d edges\n", radius, node,
                    nb.graph.node_count(), nb.graph.edge_count());
      } else if (oracle_kind == "iso") {
        Graph g2 = load_graph(graph2_path);
        std::printf("isomorphic: %s\n", is_isomorphic_small(g, g2) ? "true" : "false");
      } else if (oracle_kind == "wl") {
        Graph g2 = load_graph(graph2_path);
        std::printf("1-wl indistinguishable: %s\n",
                    wl_indistinguishable(g, g2) ? "true" : "false");
      } else {
        std::fprintf(stderr, "error: unknown oracle kind '%s'\n", oracle_kind.c_str());
        return 2;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
