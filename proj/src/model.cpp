#include "agentnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace agentnet {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kSimplified: return "simplified";
    case Variant::kRandomWalk: return "random-walk";
  }
  throw std::logic_error("bad variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "simplified") return Variant::kSimplified;
  if (name == "random-walk" || name == "random_walk") return Variant::kRandomWalk;
  throw std::invalid_argument("unknown variant: " + name);
}

void ModelConfig::validate() const {
  if (agents < 1) throw std::invalid_argument("agents must be >= 1");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (hidden < 2 || hidden % 2 != 0) throw std::invalid_argument("hidden must be even and >= 2");
  if (class_count < 2) throw std::invalid_argument("class_count must be >= 2");
  if (temperature <= 0.0) throw std::invalid_argument("temperature must be positive");
  if (exploration_decay < 0.0 || exploration_decay > 1.0)
    throw std::invalid_argument("exploration_decay must lie in [0,1]");
  if (ablations.neighborhood_update_for_all && !ablations.disable_node_update)
    throw std::invalid_argument(
        "neighborhood_update_for_all requires disable_node_update (the third ablation variant)");
}

namespace {

ModelParams build_params(const ModelConfig& config, int feature_dim, uint64_t seed,
                         bool full_random) {
  config.validate();
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");

  ModelParams p;
  p.config = config;
  p.feature_dim = feature_dim;
  int h = config.hidden;
  ParamStore& s = p.store;

  p.enc_w1 = s.add("encoder.w1", feature_dim, h);
  p.enc_b1 = s.add("encoder.b1", 1, h);
  p.enc_w2 = s.add("encoder.w2", h, h);
  p.enc_b2 = s.add("encoder.b2", 1, h);
  p.start_embeddings = s.add("agent_start", config.agents, h);

  int fv_in = config.global_agent_communication ? 3 * h : 2 * h;
  p.f_v = MlpBlock::create(s, "f_v", fv_in, h, h);
  p.f_n = MlpBlock::create(s, "f_n", 2 * h, h, h);
  p.f_a = MlpBlock::create(s, "f_a", 2 * h, h, h);
  p.phi_o = MlpBlock::create(s, "phi_o", h, h, h);
  p.f_o_w = s.add("f_o.w", 2 * h, config.class_count);
  p.f_o_b = s.add("f_o.b", 1, config.class_count);

  if (config.variant == Variant::kFull) {
    p.q_w = s.add("attn.q_w", h, h);
    p.q_b = s.add("attn.q_b", 1, h);
    p.k_w = s.add("attn.k_w", 2 * h, h);
    p.k_b = s.add("attn.k_b", 1, h);
    p.trans_bias = s.add("trans_bias", 1, 4);
  } else if (config.variant == Variant::kSimplified) {
    p.g_mlp = MlpBlock::create(s, "g_mlp", h, h, 4);
  }

  Rng rng = Rng::substream(seed, {rng_tag::kParamInit});
  s.fill_kaiming_uniform(p.enc_w1, rng);
  s.fill_kaiming_uniform(p.enc_b1, rng);
  s.fill_kaiming_uniform(p.enc_w2, rng);
  s.fill_kaiming_uniform(p.enc_b2, rng);
  s.fill_normal(p.start_embeddings, rng);
  bool zero_out = !full_random && config.init == InitScheme::kResidualIdentity;
  p.f_v.init(s, rng, zero_out);
  p.f_n.init(s, rng, zero_out);
  p.f_a.init(s, rng, zero_out);
  p.phi_o.init(s, rng, zero_out);
  if (full_random) {
    s.fill_kaiming_uniform(p.f_o_w, rng);
    s.fill_kaiming_uniform(p.f_o_b, rng);
  } else {
    // Small readout init keeps the summed per-step logits near zero at the
    // start (initial 2-class loss sits close to ln 2).
    s.fill_uniform(p.f_o_w, rng, -1.0 / (8.0 * h), 1.0 / (8.0 * h));
    s.fill(p.f_o_b, 0.0);
  }

  if (config.variant == Variant::kFull) {
    s.fill_kaiming_uniform(p.q_w, rng);
    s.fill_kaiming_uniform(p.q_b, rng);
    s.fill_kaiming_uniform(p.k_w, rng);
    s.fill_kaiming_uniform(p.k_b, rng);
    auto tb = s.view(p.trans_bias);
    if (full_random) {
      for (double& x : tb) x = rng.uniform(-1.0, 1.0);
    } else {
      tb[0] = 0.0;   // previous node
      tb[1] = -1.0;  // current node
      tb[2] = 0.0;   // explored
      tb[3] = 5.0;   // unexplored
    }
  } else if (config.variant == Variant::kSimplified) {
    p.g_mlp.init(s, rng, zero_out);
    if (!full_random) {
      auto gb = s.view(p.g_mlp.b2);
      gb[0] = 0.0;
      gb[1] = -1.0;
      gb[2] = 0.0;
      gb[3] = 5.0;
    }
  }
  return p;
}

}  // namespace

ModelParams ModelParams::create(const ModelConfig& config, int feature_dim, uint64_t seed) {
  return build_params(config, feature_dim, seed, false);
}

ModelParams ModelParams::create_full_random(const ModelConfig& config, int feature_dim,
                                            uint64_t seed) {
  return build_params(config, feature_dim, seed, true);
}

namespace {

Tensor affine(const BoundParams& bp, const Tensor& x, size_t w, size_t b) {
  return add_rowvec(matmul(x, bp[w]), bp[b]);
}

Tensor tile_rows(const Tensor& row, int count) {
  return matmul(Tensor::constant(count, 1, std::vector<double>(count, 1.0)), row);
}

struct StepTimeEmbeddings {
  // One constant row per distinct input width, added to MLP inputs.
  std::map<int, Tensor> by_dim;
  const Tensor& get(int t, int dim) {
    auto it = by_dim.find(dim);
    if (it == by_dim.end())
      it = by_dim.emplace(dim, Tensor::row(sinusoidal_time_embedding(t, dim))).first;
    return it->second;
  }
};

}  // namespace

RolloutResult run_rollout(const Graph& g, const ModelParams& params, uint64_t rollout_seed,
                          const RolloutOptions& opts) {
  const ModelConfig& cfg = params.config;
  cfg.validate();
  int n = g.node_count();
  if (n == 0) throw std::invalid_argument("rollout on empty graph");
  if (g.feature_dim() != params.feature_dim)
    throw std::invalid_argument("graph feature dimension does not match the model");
  int k = cfg.agents;
  int h = cfg.hidden;

  Rng rng(rollout_seed);
  Tape tape;
  Tape* tp = opts.with_grad ? &tape : nullptr;
  BoundParams bp = bind_params(params.store, tp);

  RolloutResult result;
  result.visit_counts.assign(n, 0);
  result.trajectories.assign(k, {});

  // --- initial placement and node-feature encoding ---
  Tensor features = Tensor::constant(
      n, g.feature_dim(),
      std::vector<double>(g.feature_storage().begin(), g.feature_storage().end()));
  Tensor enc_hidden = leaky_relu(affine(bp, features, params.enc_w1, params.enc_b1), 0.01);
  Tensor node_emb = affine(bp, enc_hidden, params.enc_w2, params.enc_b2);
  Tensor agent_emb = bp[params.start_embeddings];

  std::vector<int> positions(k), prev_positions(k, -1);
  if (opts.force_placements) {
    if (static_cast<int>(opts.force_placements->size()) != k)
      throw std::invalid_argument("force_placements size mismatch");
    positions = *opts.force_placements;
  } else if (opts.replay_noise) {
    positions = opts.replay_noise->placements;
    if (static_cast<int>(positions.size()) != k)
      throw std::invalid_argument("replayed placements size mismatch");
  } else {
    for (int i = 0; i < k; ++i) positions[i] = static_cast<int>(rng.uniform_int(n));
  }
  if (opts.record_noise) opts.record_noise->placements = positions;

  std::vector<std::vector<double>> exploration(k, std::vector<double>(n, 0.0));
  for (int i = 0; i < k; ++i) {
    exploration[i][positions[i]] = 1.0;
    result.visit_counts[positions[i]] += 1;
    result.trajectories[i].push_back(positions[i]);
  }

  std::vector<Tensor> last_onehot(k);
  std::vector<std::vector<int>> last_candidates(k);
  std::vector<int> last_choice(k, -1);

  Tensor obar;

  for (int t = 1; t <= cfg.steps; ++t) {
    StepTimeEmbeddings time_emb;

    // Occupied nodes and the agent -> occupied-slot grouping.
    std::vector<int> occupied;
    {
      std::vector<int> sorted = positions;
      std::sort(sorted.begin(), sorted.end());
      sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
      occupied = std::move(sorted);
    }
    auto occupied_slot = [&occupied](int node) {
      return static_cast<int>(std::lower_bound(occupied.begin(), occupied.end(), node) -
                              occupied.begin());
    };

    // --- node update ---
    if (!cfg.ablations.disable_node_update) {
      std::vector<int> group_ids(k);
      for (int i = 0; i < k; ++i) group_ids[i] = occupied_slot(positions[i]);
      int o = static_cast<int>(occupied.size());

      Tensor weighted;
      if (t == 1) {
        weighted = agent_emb;  // placements carry no gradient
      } else {
        std::vector<Tensor> ws;
        ws.reserve(k);
        for (int i = 0; i < k; ++i) ws.push_back(elem(last_onehot[i], 0, last_choice[i]));
        weighted = scale_rows(agent_emb, concat_rows(ws));
      }
      Tensor sums = segment_sum(weighted, group_ids, o);
      std::vector<int> counts(o, 0);
      for (int gid : group_ids) counts[gid] += 1;
      std::vector<double> scale(o);
      for (int s = 0; s < o; ++s) scale[s] = std::log(counts[s] + 1.0) / counts[s];
      Tensor agent_msg = scale_rows_const(sums, scale);

      std::vector<Tensor> parts{gather_rows(node_emb, occupied), agent_msg};
      if (cfg.global_agent_communication) parts.push_back(tile_rows(mean_rows(agent_emb), o));
      Tensor input = concat_cols(parts);
      input = add_rowvec(input, time_emb.get(t, input.cols()));
      Tensor delta = params.f_v.apply_no_residual(bp, input);
      node_emb = scatter_rows_add(node_emb, occupied, delta);
    }

    // --- neighborhood aggregation ---
    if (!cfg.ablations.disable_neighborhood_update) {
      std::vector<int> targets;
      if (cfg.ablations.neighborhood_update_for_all) {
        targets.resize(n);
        for (int v = 0; v < n; ++v) targets[v] = v;
      } else {
        targets = occupied;
      }
      int tcount = static_cast<int>(targets.size());

      // Neighbor pull for targets with neighbors; isolated targets keep a
      // zero aggregate and still go through the block.
      std::vector<int> nb_indices, nb_groups, nonisolated;
      for (int slot = 0; slot < tcount; ++slot) {
        const auto& nbs = g.neighbors(targets[slot]);
        if (nbs.empty()) continue;
        for (int u : nbs) {
          nb_indices.push_back(u);
          nb_groups.push_back(static_cast<int>(nonisolated.size()));
        }
        nonisolated.push_back(slot);
      }
      Tensor neighbor_msg = Tensor::zeros(tcount, h);
      if (!nonisolated.empty()) {
        Tensor pulled = log_scaled_sum(gather_rows(node_emb, nb_indices), nb_groups,
                                       static_cast<int>(nonisolated.size()));
        neighbor_msg = scatter_rows_add(neighbor_msg, nonisolated, pulled);
      }

      Tensor input = concat_cols({gather_rows(node_emb, targets), neighbor_msg});
      input = add_rowvec(input, time_emb.get(t, input.cols()));
      Tensor delta = params.f_n.apply_no_residual(bp, input);
      node_emb = scatter_rows_add(node_emb, targets, delta);
    }

    // --- agent update ---
    {
      Tensor at_node;
      if (t == 1) {
        at_node = gather_rows(node_emb, positions);
      } else {
        std::vector<Tensor> rows;
        rows.reserve(k);
        for (int i = 0; i < k; ++i)
          rows.push_back(matmul(last_onehot[i], gather_rows(node_emb, last_candidates[i])));
        at_node = concat_rows(rows);
      }
      Tensor input = concat_cols({agent_emb, at_node});
      input = add_rowvec(input, time_emb.get(t, input.cols()));
      Tensor delta = params.f_a.apply_no_residual(bp, input);
      agent_emb = add(agent_emb, delta);
    }

    // --- readout (pool after each agent update) ---
    {
      Tensor o_t = params.phi_o.apply(bp, agent_emb,
                                      add_rowvec(agent_emb, time_emb.get(t, h)));
      Tensor pooled = concat_cols({mean_rows(o_t), max_rows(o_t)});
      Tensor step_logits = affine(bp, pooled, params.f_o_w, params.f_o_b);
      obar = t == 1 ? step_logits : add(obar, step_logits);
    }

    // --- transition ---
    if (cfg.variant == Variant::kRandomWalk) {
      for (int i = 0; i < k; ++i) {
        int cur = positions[i];
        std::vector<int> cand = g.neighbors(cur);
        if (cand.empty()) cand.push_back(cur);  // stay only when stranded
        int m = static_cast<int>(cand.size());
        Tensor z = Tensor::zeros(1, m);
        std::vector<double> noise(m, 0.0);
        if (!cfg.argmax_transitions) {
          if (opts.replay_noise) {
            noise = opts.replay_noise->gumbel.at({t, i});
          } else {
            for (double& x : noise) x = rng.gumbel();
          }
          if (opts.record_noise) opts.record_noise->gumbel[{t, i}] = noise;
        }
        int choice = 0;
        Tensor onehot = gumbel_softmax_st(z, cfg.temperature, noise, &choice);
        int next = cand[choice];
        prev_positions[i] = cur;
        positions[i] = next;
        for (double& x : exploration[i]) x *= cfg.exploration_decay;
        exploration[i][next] = 1.0;
        result.visit_counts[next] += 1;
        result.trajectories[i].push_back(next);
        last_onehot[i] = onehot;
        last_candidates[i] = std::move(cand);
        last_choice[i] = choice;
      }
    } else {
      // Candidate lists for all agents, flattened: one batched pass computes
      // the f_ps logits (and the attention term for the Full variant), then
      // each agent samples from its slice.
      std::vector<std::vector<int>> cand(k);
      std::vector<int> offsets(k + 1, 0);
      std::vector<int> flat_cand, flat_cur, agent_of;
      for (int i = 0; i < k; ++i) {
        cand[i] = g.neighbors(positions[i]);
        cand[i].push_back(positions[i]);  // the self-transition is always available
        offsets[i + 1] = offsets[i] + static_cast<int>(cand[i].size());
        for (int node : cand[i]) {
          flat_cand.push_back(node);
          flat_cur.push_back(positions[i]);
          agent_of.push_back(i);
        }
      }
      int total = offsets[k];

      // f_ps = g_p * 1[prev] + g_c * 1[cur] + g_e * x + g_u * (1 - x), as one
      // (total x 4) indicator matrix against the four logits.
      std::vector<double> indicators(static_cast<size_t>(total) * 4, 0.0);
      for (int i = 0; i < k; ++i) {
        for (int j = offsets[i]; j < offsets[i + 1]; ++j) {
          int node = flat_cand[j];
          double x = exploration[i][node];
          indicators[4 * static_cast<size_t>(j) + 0] = node == prev_positions[i] ? 1.0 : 0.0;
          indicators[4 * static_cast<size_t>(j) + 1] = node == positions[i] ? 1.0 : 0.0;
          indicators[4 * static_cast<size_t>(j) + 2] = x;
          indicators[4 * static_cast<size_t>(j) + 3] = 1.0 - x;
        }
      }
      Tensor ind = Tensor::constant(total, 4, std::move(indicators));
      Tensor z_col;
      if (cfg.variant == Variant::kFull) {
        z_col = matmul(ind, transpose(bp[params.trans_bias]));
        Tensor q_all = affine(bp, agent_emb, params.q_w, params.q_b);
        Tensor k_in = concat_cols({gather_rows(node_emb, flat_cur),
                                   gather_rows(node_emb, flat_cand)});
        Tensor k_rows = affine(bp, k_in, params.k_w, params.k_b);
        Tensor att = sum_cols(mul(k_rows, gather_rows(q_all, agent_of)));
        z_col = add(z_col, smul(att, 1.0 / std::sqrt(static_cast<double>(h))));
      } else {
        Tensor g_all = params.g_mlp.apply_no_residual(bp, agent_emb);  // k x 4
        z_col = sum_cols(mul(ind, gather_rows(g_all, agent_of)));
      }

      for (int i = 0; i < k; ++i) {
        int m = offsets[i + 1] - offsets[i];
        Tensor z = transpose(slice_rows(z_col, offsets[i], m));
        std::vector<double> noise(m, 0.0);
        if (!cfg.argmax_transitions) {
          if (opts.replay_noise) {
            auto it = opts.replay_noise->gumbel.find({t, i});
            if (it == opts.replay_noise->gumbel.end() || it->second.size() != noise.size())
              throw std::runtime_error("noise replay mismatch (structure changed)");
            noise = it->second;
          } else {
            for (double& x : noise) x = rng.gumbel();
          }
          if (opts.record_noise) opts.record_noise->gumbel[{t, i}] = noise;
        }

        int choice = 0;
        Tensor onehot;
        if (opts.soft_transitions) {
          Tensor perturbed = smul(add(z, Tensor::row(noise)), 1.0 / cfg.temperature);
          onehot = softmax(perturbed);
          choice = 0;
          for (int j = 1; j < m; ++j)
            if (onehot.value()[j] > onehot.value()[choice]) choice = j;
        } else {
          onehot = gumbel_softmax_st(z, cfg.temperature, noise, &choice);
        }
        int next = cand[i][choice];

        prev_positions[i] = positions[i];
        positions[i] = next;
        for (double& x : exploration[i]) x *= cfg.exploration_decay;
        exploration[i][next] = 1.0;
        result.visit_counts[next] += 1;
        result.trajectories[i].push_back(next);

        last_onehot[i] = onehot;
        last_candidates[i] = cand[i];
        last_choice[i] = choice;
      }
    }
  }

  result.logits = obar.value();
  result.predicted = static_cast<int>(
      std::max_element(result.logits.begin(), result.logits.end()) - result.logits.begin());
  result.final_node_emb = node_emb.value();
  result.final_agent_emb = agent_emb.value();

  if (opts.label >= 0) {
    Tensor loss = cross_entropy(obar, opts.label);
    result.loss = loss.scalar_value();
    if (opts.with_grad) {
      tape.backward(loss);
      result.grad.assign(params.store.total_size(), 0.0);
      bp.harvest_grad(result.grad);
    }
  }
  return result;
}

}  // namespace agentnet
