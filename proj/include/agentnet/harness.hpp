#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agentnet/datasets.hpp"
#include "agentnet/model.hpp"
#include "agentnet/nn.hpp"

namespace agentnet {

/// A reproducible experiment: dataset, model, optimization recipe, seeds.
struct ExperimentConfig {
  DatasetSpec dataset;
  ModelConfig model;
  int batch_size = 20;
  int training_steps = 10000;
  std::vector<uint64_t> seeds{1};
  double lr_start = 1e-4;
  double lr_end = 1e-11;
  int eval_every = 500;
  int eval_rollouts = 8;      // stochastic rollouts per test graph at eval time
  int early_stop_patience = 500;  // consecutive perfect train batches
  double test_fraction = 0.25;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  uint64_t config_hash() const;
};

struct SeedResult {
  uint64_t seed = 0;
  double final_accuracy = 0.0;
  double final_loss = 0.0;
  int stopped_step = 0;  // step at which training stopped (== training_steps if no early stop)
  std::vector<std::pair<int, double>> trajectory;  // (step, test accuracy)
  uint64_t param_hash = 0;
};

struct Metrics {
  std::vector<SeedResult> per_seed;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double wall_clock_sec = 0.0;  // excluded from the deterministic serialization
  uint64_t config_hash = 0;

  void finalize();
  /// Deterministic JSON (no wall clock); byte-identical across repeat runs.
  std::string to_json() const;
};

int default_worker_count();

/// Train one seed; returns the seed result and optionally the trained
/// parameters. Aborts with a diagnostic on non-finite loss.
SeedResult train_one_seed(const ExperimentConfig& config, uint64_t seed, int workers,
                          ParamStore* trained_out = nullptr);

/// Full training run over config.seeds.
Metrics train(const ExperimentConfig& config, int workers);

/// Accuracy of the given parameters over dataset items (mean over
/// `rollouts` stochastic rollouts per graph).
double evaluate_accuracy(const LabeledDataset& ds, const std::vector<int>& indices,
                         const ModelParams& params, int rollouts, uint64_t seed, int workers);

// --- grid search -------------------------------------------------------------
struct GridAxes {
  std::vector<int> batch_sizes;
  std::vector<int> hiddens;
  std::vector<double> lrs;
  std::vector<int> agents;
  std::vector<int> steps;
};

struct GridCell {
  ExperimentConfig config;
  Metrics metrics;
};

struct GridResult {
  std::vector<GridCell> cells;
  int best_index = -1;  // selected on held-out mean accuracy
};

GridResult grid_search(const ExperimentConfig& base, const GridAxes& axes, int workers);

// --- paper experiment runners -------------------------------------------------
struct TableRow {
  std::string dataset;
  std::string variant;
  std::string ablation;  // empty, "no-node-update", "no-neighborhood-update", "for-all"
  Metrics metrics;
};

/// Pinned desk-scale configuration for one Table-1 cell.
ExperimentConfig table1_config(const std::string& dataset, Variant variant, uint64_t seed);

/// Table 1: {full, simplified, random-walk} x {four-cycles, csl, two-wl}.
std::vector<TableRow> run_table1(uint64_t seed, int seeds_per_cell, int workers,
                                 const std::vector<std::string>& datasets = {},
                                 const std::vector<std::string>& variants = {});

/// Ablation table rows: full, no-node-update, no-neighborhood-update and
/// no-node-update + neighborhood-update-for-all on the given datasets.
std::vector<TableRow> run_appendix_j(uint64_t seed, int seeds_per_cell, int workers,
                                     const std::vector<std::string>& datasets = {},
                                     const std::vector<std::string>& rows = {});

/// Ladder density sweep: sizes x {density-0.5, fixed-2-crossed}, k=16, l=16.
struct Fig3Point {
  int nodes = 0;
  std::string mode;
  Metrics metrics;
};
std::vector<Fig3Point> run_fig3_density_sweep(uint64_t seed, int seeds_per_cell, int workers,
                                              const std::vector<int>& sizes = {});

/// Agent-count sweep k in {n/8, n/4, n/2, n, 2n} on the four-cycles task.
struct AgentSweepPoint {
  int agents = 0;
  Metrics metrics;
};
std::vector<AgentSweepPoint> run_agent_sweep(uint64_t seed, int seeds_per_cell, int workers);

// --- theory checks -------------------------------------------------------------
struct TheoryCheck {
  std::string name;
  double bound = 0.0;     // the asserted bound or threshold
  double observed = 0.0;  // what the run measured
  bool pass = false;
  std::string detail;
};

/// The lemma/theorem assertion suite (walk bounds, oracle agreement,
/// fingerprints, Theorem 6/7/8 Monte Carlo). quick=true shrinks graph pools
/// and trial counts for unit-test latency.
std::vector<TheoryCheck> run_theory_checks(uint64_t seed, bool quick);
std::string theory_checks_to_json(const std::vector<TheoryCheck>& checks);

// --- gradient integrity ----------------------------------------------------------
struct OpGradCheck {
  std::string op;
  GradCheckResult result;
  double tolerance = 1e-6;
  bool pass = false;
};

/// Finite-difference checks for every differentiable tensor op at seeded
/// random double-precision points.
std::vector<OpGradCheck> run_op_grad_checks(uint64_t seed);

/// End-to-end check of a 2-step, 2-agent rollout on a 6-node graph with
/// frozen Gumbel noise and fully randomized parameters. Also reports whether
/// the straight-through path delivers nonzero gradient to the attention
/// projections and the four transition biases.
struct RolloutGradCheck {
  GradCheckResult result;
  bool st_path_nonzero = false;
  int params_checked = 0;
};
RolloutGradCheck run_rollout_grad_check(uint64_t seed);

// --- checkpoints -----------------------------------------------------------------
void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

// --- result files --------------------------------------------------------------
void write_table_csv(const std::string& path, const std::vector<TableRow>& rows);
std::string table_rows_to_json(const std::vector<TableRow>& rows);

}  // namespace agentnet
