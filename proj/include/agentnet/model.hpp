#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agentnet/graph.hpp"
#include "agentnet/nn.hpp"
#include "agentnet/rng.hpp"
#include "agentnet/tensor.hpp"

namespace agentnet {

enum class Variant { kFull, kSimplified, kRandomWalk };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct AblationFlags {
  bool disable_node_update = false;
  bool disable_neighborhood_update = false;
  bool neighborhood_update_for_all = false;
};

/// Weight initialization schemes. kStandard draws every affine layer
/// Kaiming-uniform (the residual blocks start active); kResidualIdentity
/// zeroes each block's output affine so every residual block starts as the
/// exact identity.
enum class InitScheme { kStandard, kResidualIdentity };

struct ModelConfig {
  Variant variant = Variant::kFull;
  int agents = 2;   // k
  int steps = 16;   // l
  int hidden = 32;  // h, even
  int class_count = 2;
  double temperature = 2.0 / 3.0;
  double exploration_decay = 0.9;
  AblationFlags ablations;
  bool global_agent_communication = true;
  bool argmax_transitions = false;  // evaluation-only: zero Gumbel noise
  InitScheme init = InitScheme::kStandard;

  void validate() const;
};

/// All learnable weights of one AgentNet variant, laid out in a flat
/// ParamStore: input encoder, k start embeddings, the f_v / f_n / f_a /
/// phi_o residual blocks, the affine readout f_o, and the transition head
/// (Q/K attention plus the four global exploration biases for the Full
/// variant, a per-agent 4-logit MLP for Simplified, nothing for RandomWalk).
struct ModelParams {
  ModelConfig config;
  int feature_dim = 1;
  ParamStore store;

  size_t enc_w1 = 0, enc_b1 = 0, enc_w2 = 0, enc_b2 = 0;
  size_t start_embeddings = 0;
  MlpBlock f_v, f_n, f_a, phi_o;
  size_t f_o_w = 0, f_o_b = 0;
  // Full variant
  size_t q_w = 0, q_b = 0, k_w = 0, k_b = 0;
  size_t trans_bias = 0;  // 1x4: [g_p, g_c, g_e, g_u]
  // Simplified variant
  MlpBlock g_mlp;

  /// Initialization per config.init: Kaiming layers (block outputs zeroed
  /// under kResidualIdentity), start embeddings standard normal, the
  /// transition biases exactly [0, -1, 0, 5], small readout weights.
  static ModelParams create(const ModelConfig& config, int feature_dim, uint64_t seed);

  /// All layers randomized (transition biases and readout included); used by
  /// gradient checks so every parameter is on an active path.
  static ModelParams create_full_random(const ModelConfig& config, int feature_dim,
                                        uint64_t seed);
};

/// Frozen record of every stochastic choice in one rollout, so a forward
/// pass can be replayed bit-identically under parameter perturbations.
struct NoiseLog {
  std::vector<int> placements;
  std::map<std::pair<int, int>, std::vector<double>> gumbel;  // (step, agent) -> noise
};

struct RolloutOptions {
  bool with_grad = false;
  int label = -1;  // >= 0: compute cross-entropy loss (and gradients if with_grad)
  NoiseLog* record_noise = nullptr;
  const NoiseLog* replay_noise = nullptr;
  const std::vector<int>* force_placements = nullptr;
  // Replace the hard one-hot transitions by their softmax relaxation at the
  // same frozen noise. The straight-through backward is by construction the
  // gradient of this soft forward, so finite-difference checks run against
  // it; training always uses the hard path.
  bool soft_transitions = false;
};

struct RolloutResult {
  std::vector<double> logits;  // class_count
  double loss = 0.0;
  int predicted = 0;
  std::vector<long long> visit_counts;             // n, sums to k*(steps+1)
  std::vector<std::vector<int>> trajectories;      // agents x (steps+1)
  std::vector<double> grad;                        // flat param grad (with_grad only)
  std::vector<double> final_node_emb;              // n*h
  std::vector<double> final_agent_emb;             // k*h
};

/// One full AgentNet rollout on a graph: initial placement, then `steps`
/// iterations of node update -> neighborhood aggregation -> agent update ->
/// transition, with the per-step readout summed into the class logits.
RolloutResult run_rollout(const Graph& g, const ModelParams& params, uint64_t rollout_seed,
                          const RolloutOptions& opts = {});

}  // namespace agentnet
