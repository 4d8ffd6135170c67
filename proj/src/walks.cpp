#include "agentnet/walks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace agentnet {

std::vector<int> TraversalTrace::visited_nodes() const {
  std::vector<int> out;
  std::set<int> seen;
  for (const auto& s : steps)
    if (seen.insert(s.node).second) out.push_back(s.node);
  return out;
}

Neighborhood TraversalTrace::reconstruct(const Graph& host) const {
  std::vector<int> nodes = visited_nodes();
  std::sort(nodes.begin(), nodes.end());
  std::vector<int> inv(host.node_count(), -1);
  for (size_t i = 0; i < nodes.size(); ++i) inv[nodes[i]] = static_cast<int>(i);

  std::vector<std::pair<int, int>> edges;
  for (auto [u, v] : observed_edges) {
    if (inv[u] < 0 || inv[v] < 0) throw std::runtime_error("trace edge endpoint never visited");
    edges.emplace_back(inv[u], inv[v]);
  }
  std::vector<std::vector<double>> feats;
  feats.reserve(nodes.size());
  for (int u : nodes) {
    auto f = host.features(u);
    feats.emplace_back(f.begin(), f.end());
  }
  Neighborhood nb;
  nb.graph = Graph::from_edges_features(static_cast<int>(nodes.size()), edges, feats);
  nb.to_original = std::move(nodes);
  nb.center = inv[start];
  return nb;
}

namespace {

// Shared walk bookkeeping: emits trace steps and registers edges between the
// arrival node and every already-visited neighbor.
struct WalkRecorder {
  const Graph* g;
  TraversalTrace trace;
  std::vector<char> visited;
  int last_first_visit_index = 0;

  explicit WalkRecorder(const Graph& graph, int start) : g(&graph) {
    visited.assign(graph.node_count(), 0);
    trace.start = start;
    trace.steps.push_back({0, start, -1});
    visited[start] = 1;
    observe(start);
  }

  void observe(int node) {
    for (int u : g->neighbors(node))
      if (visited[u]) {
        auto e = std::minmax(node, u);
        trace.observed_edges.emplace_back(e.first, e.second);
      }
  }

  int position() const { return trace.steps.back().node; }

  void move(int to) {
    int from = position();
    trace.steps.push_back({static_cast<int>(trace.steps.size() - 1) + 1, to, from});
    if (!visited[to]) {
      visited[to] = 1;
      observe(to);
      last_first_visit_index = static_cast<int>(trace.steps.size()) - 1;
    }
  }

  // Drop trailing moves after the last first-visit; they carry no new
  // information about the neighborhood.
  TraversalTrace finish() {
    trace.steps.resize(last_first_visit_index + 1);
    std::sort(trace.observed_edges.begin(), trace.observed_edges.end());
    trace.observed_edges.erase(
        std::unique(trace.observed_edges.begin(), trace.observed_edges.end()),
        trace.observed_edges.end());
    return std::move(trace);
  }
};

}  // namespace

TraversalTrace iddfs_traverse(const Graph& g, int v, int r) {
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  if (r < 1) throw std::invalid_argument("radius must be >= 1");

  WalkRecorder rec(g, v);
  rec.trace.distances[v] = 0;

  for (int d = 1; d <= r; ++d) {
    // Depth-d DFS iteration. The walk may only descend from nodes whose
    // recorded distance (the first iteration that found them) is < d; nodes
    // discovered in this iteration are at distance exactly d and act as
    // dead ends until the next iteration.
    std::vector<char> visited_iter(g.node_count(), 0);
    visited_iter[v] = 1;
    std::function<void(int)> dfs = [&](int u) {
      for (int w : g.neighbors(u)) {
        if (visited_iter[w]) continue;
        visited_iter[w] = 1;
        rec.move(w);
        if (!rec.trace.distances.count(w)) rec.trace.distances[w] = d;
        if (rec.trace.distances[w] <= d - 1) dfs(w);
        rec.move(u);  // backtrack to the DFS predecessor
      }
    };
    dfs(v);
  }
  return rec.finish();
}

TraversalTrace dfs_traverse_component(const Graph& g, int v) {
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  WalkRecorder rec(g, v);
  std::function<void(int)> dfs = [&](int u) {
    for (int w : g.neighbors(u)) {
      if (rec.visited[w]) continue;
      rec.move(w);
      dfs(w);
      rec.move(u);
    }
  };
  dfs(v);
  return rec.finish();
}

CliqueWalkResult clique_count_walk(const Graph& g, int v) {
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  WalkRecorder rec(g, v);
  for (int u : g.neighbors(v)) {
    rec.move(u);
    rec.move(v);
  }
  CliqueWalkResult result;
  result.trace = rec.finish();
  result.steps_used = result.trace.move_count();

  Neighborhood nb = result.trace.reconstruct(g);
  auto profile = clique_profile_at(nb.graph, nb.center);
  for (int size = 2; size < static_cast<int>(profile.size()); ++size)
    if (profile[size] > 0) result.counts[size] = profile[size];
  return result;
}

CycleWalkResult cycle_count_walk(const Graph& g, int v, int c) {
  if (c < 3) throw std::invalid_argument("cycle length must be >= 3");
  CycleWalkResult result;
  TraversalTrace trace = iddfs_traverse(g, v, c / 2);
  result.steps_used = trace.move_count();
  Neighborhood nb = trace.reconstruct(g);
  result.count = count_cycles_through(nb.graph, nb.center, c);
  return result;
}

std::string neighborhood_fingerprint(const TraversalTrace& trace, const Graph& host) {
  if (trace.steps.empty()) throw std::invalid_argument("empty trace");
  Neighborhood nb = trace.reconstruct(host);
  return canonical_code_anchored(nb.graph, nb.center);
}

AccessModelSession::AccessModelSession(const Graph& g, int start, Rng rng)
    : g_(&g), current_(start), rng_(rng) {
  if (start < 0 || start >= g.node_count()) throw std::out_of_range("node id out of range");
  seen_.assign(g.node_count(), 0);
  discover(start);
}

void AccessModelSession::discover(int node) {
  if (!seen_[node]) {
    seen_[node] = 1;
    discovered_.push_back(node);
  }
}

int AccessModelSession::step() {
  const auto& nb = g_->neighbors(current_);
  if (!nb.empty()) current_ = nb[rng_.uniform_int(nb.size())];
  discover(current_);
  return current_;
}

int AccessModelSession::degree_query() const {
  int d = g_->degree(current_);
  degree_answers_[current_] = d;
  return d;
}

bool AccessModelSession::adjacency_query(int u, int v) const {
  if (u < 0 || u >= g_->node_count() || v < 0 || v >= g_->node_count())
    throw std::out_of_range("node id out of range");
  if (!seen_[u] || !seen_[v])
    throw std::invalid_argument("adjacency query on undiscovered node");
  if (u == v) return false;
  return g_->has_edge(u, v);
}

namespace {

bool incident_to_pattern_via_walk(const Graph& g, int v, const AnchoredPattern& p) {
  if (p.radius == 0) {
    // Single-node pattern: only the start's features matter.
    return count_anchored_embeddings(
               Graph::from_edges_features(
                   1, {}, {{std::vector<double>(g.features(v).begin(), g.features(v).end())}}),
               0, p) > 0;
  }
  TraversalTrace trace = iddfs_traverse(g, v, p.radius);
  Neighborhood nb = trace.reconstruct(g);
  return count_anchored_embeddings(nb.graph, nb.center, p) > 0;
}

}  // namespace

FrequencyResult frequency_distinguisher(const Graph& g1, const Graph& g2,
                                        const AnchoredPattern& p, int k, int trials,
                                        uint64_t seed) {
  if (g1.node_count() != g2.node_count())
    throw std::invalid_argument("frequency distinguisher expects equal-sized graphs");
  if (k < 1 || trials < 1) throw std::invalid_argument("k and trials must be positive");

  FrequencyResult result;
  result.gamma1 = pattern_incident_nodes(g1, p);
  result.gamma2 = pattern_incident_nodes(g2, p);
  if (result.gamma1 <= result.gamma2)
    throw std::invalid_argument("g1 must be the pattern-rich graph");
  int n = g1.node_count();
  result.gamma_prime =
      (static_cast<double>(result.gamma1) + static_cast<double>(result.gamma2)) / (2.0 * n);
  result.threshold = result.gamma_prime * k;

  int successes = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(seed, {rng_tag::kTrial, static_cast<uint64_t>(trial)});
    int votes1 = 0, votes2 = 0;
    for (int agent = 0; agent < k; ++agent) {
      int s1 = static_cast<int>(rng.uniform_int(n));
      if (incident_to_pattern_via_walk(g1, s1, p)) votes1 += 1;
    }
    for (int agent = 0; agent < k; ++agent) {
      int s2 = static_cast<int>(rng.uniform_int(n));
      if (incident_to_pattern_via_walk(g2, s2, p)) votes2 += 1;
    }
    if (votes1 > result.threshold && votes2 < result.threshold) successes += 1;
  }
  result.success_rate = static_cast<double>(successes) / trials;
  return result;
}

namespace {

int feature_of(const Graph& g, int v) { return static_cast<int>(g.features(v)[0]); }

// One root-seeking move. At feature f > 1 the parent is the unique neighbor
// with feature f-1; at a tree root (feature 1) the next hop is the hub if
// present, otherwise the attachment leaf (feature h1). Returns -1 at the hub.
int root_seek_step(const Graph& g, int node, int h1) {
  int f = feature_of(g, node);
  if (f == 0) return -1;
  if (f == 1) {
    for (int u : g.neighbors(node))
      if (feature_of(g, u) == 0) return u;
    for (int u : g.neighbors(node))
      if (feature_of(g, u) == h1) return u;
    throw std::runtime_error("root-seek stuck at a tree root");
  }
  for (int u : g.neighbors(node))
    if (feature_of(g, u) == f - 1) return u;
  throw std::runtime_error("root-seek stuck: no smaller-feature neighbor");
}

}  // namespace

std::vector<int> root_seek_path(const Graph& g, int start, int h1) {
  std::vector<int> path{start};
  int guard = 4 * g.node_count() + 8;
  while (true) {
    int next = root_seek_step(g, path.back(), h1);
    if (next < 0) break;
    path.push_back(next);
    if (static_cast<int>(path.size()) > guard) throw std::runtime_error("root-seek did not reach the hub");
  }
  return path;
}

namespace {

struct TwoAgentOutcome {
  bool classified_g1 = false;
};

// Lockstep walk; the first time one agent stands on a node the other has
// already visited (or both stand on the same node), that node decides the
// classification: hub -> g1, anything else -> g2.
TwoAgentOutcome run_two_agents(const Graph& g, int hub, int h1, int start_a, int start_b,
                               int budget) {
  auto path_a = root_seek_path(g, start_a, h1);
  auto path_b = root_seek_path(g, start_b, h1);
  if (static_cast<int>(path_a.size()) - 1 > budget ||
      static_cast<int>(path_b.size()) - 1 > budget)
    throw std::runtime_error("step budget too small for root-seeking walk");
  std::set<int> seen_a, seen_b;
  for (int t = 0; t <= budget; ++t) {
    int pa = path_a[std::min<size_t>(t, path_a.size() - 1)];
    int pb = path_b[std::min<size_t>(t, path_b.size() - 1)];
    seen_a.insert(pa);
    seen_b.insert(pb);
    if (pa == pb) return {pa == hub};
    if (seen_b.count(pa)) return {pa == hub};
    if (seen_a.count(pb)) return {pb == hub};
  }
  return {false};  // never met: no evidence of distinct secondary trees meeting at the hub
}

// Root-seek to the hub, then uniformly random descents into primary trees
// looking for a second attachment leaf. Returns true iff one is found within
// the budget.
bool run_single_agent(const Graph& g, int hub, int h1, int start, int budget, Rng& rng) {
  int steps = 0;
  int entry_leaf = -1;
  int node = start;
  while (node != hub) {
    int next = root_seek_step(g, node, h1);
    if (feature_of(g, node) == 1 && feature_of(g, next) == h1) entry_leaf = next;
    node = next;
    steps += 1;
    if (steps > budget) return false;
  }
  // Hub neighbors are exactly the primary roots. A probe descends h1 moves
  // to a uniform leaf; the final probe may omit the h1-move walk back up.
  const auto& roots = g.neighbors(hub);
  while (steps + h1 <= budget) {
    node = roots[rng.uniform_int(roots.size())];
    steps += 1;
    for (int level = 2; level <= h1; ++level) {
      std::vector<int> children;
      for (int u : g.neighbors(node))
        if (feature_of(g, u) == level) children.push_back(u);
      node = children[rng.uniform_int(children.size())];
      steps += 1;
    }
    bool attachment = false;
    for (int u : g.neighbors(node))
      if (feature_of(g, u) == 1) attachment = true;
    if (attachment && node != entry_leaf) return true;
    steps += h1;  // walk back up to the hub
  }
  return false;
}

}  // namespace

Theorem8Result theorem8_protocol(const Theorem8Pair& pair, int agents, int step_budget,
                                 int trials, uint64_t seed) {
  if (agents != 1 && agents != 2) throw std::invalid_argument("agents must be 1 or 2");
  if (step_budget < pair.h2) throw std::invalid_argument("step budget smaller than h2");
  if (trials < 1) throw std::invalid_argument("trials must be positive");

  int ok1 = 0, ok2 = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::substream(seed, {rng_tag::kTrial, static_cast<uint64_t>(trial),
                                    static_cast<uint64_t>(agents)});
    if (agents == 2) {
      const auto& sec1 = pair.secondary_nodes_g1;
      const auto& sec2 = pair.secondary_nodes_g2;
      int a1 = sec1[rng.uniform_int(sec1.size())];
      int b1 = sec1[rng.uniform_int(sec1.size())];
      if (run_two_agents(pair.g1, pair.hub_g1, pair.h1, a1, b1, step_budget).classified_g1)
        ok1 += 1;
      int a2 = sec2[rng.uniform_int(sec2.size())];
      int b2 = sec2[rng.uniform_int(sec2.size())];
      if (!run_two_agents(pair.g2, pair.hub_g2, pair.h1, a2, b2, step_budget).classified_g1)
        ok2 += 1;
    } else {
      const auto& sec1 = pair.secondary_nodes_g1;
      const auto& sec2 = pair.secondary_nodes_g2;
      int s1 = sec1[rng.uniform_int(sec1.size())];
      if (run_single_agent(pair.g1, pair.hub_g1, pair.h1, s1, step_budget, rng)) ok1 += 1;
      int s2 = sec2[rng.uniform_int(sec2.size())];
      if (!run_single_agent(pair.g2, pair.hub_g2, pair.h1, s2, step_budget, rng)) ok2 += 1;
    }
  }
  Theorem8Result result;
  result.success_g1 = static_cast<double>(ok1) / trials;
  result.success_g2 = static_cast<double>(ok2) / trials;
  result.mean_success = 0.5 * (result.success_g1 + result.success_g2);
  return result;
}

}  // namespace agentnet
