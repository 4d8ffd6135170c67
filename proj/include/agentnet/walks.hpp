#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "agentnet/datasets.hpp"
#include "agentnet/graph.hpp"
#include "agentnet/oracles.hpp"
#include "agentnet/rng.hpp"

namespace agentnet {

/// Ordered record of one deterministic agent walk. Step 0 is the initial
/// placement; each later step is a move along an edge. Edges between visited
/// nodes are registered when their second endpoint is first reachable, i.e.
/// on arrival at a node every edge to an already-visited node is recorded.
struct TraversalTrace {
  struct Step {
    int t = 0;
    int node = 0;
    int from = -1;  // -1 for the initial placement
  };

  int start = 0;
  std::vector<Step> steps;
  std::vector<std::pair<int, int>> observed_edges;  // u < v
  std::map<int, int> distances;                     // node -> distance from start

  int move_count() const { return static_cast<int>(steps.size()) - 1; }

  /// Visited nodes in first-visit order.
  std::vector<int> visited_nodes() const;

  /// Induced subgraph on the visited nodes rebuilt from the observed edges
  /// only (features looked up in the host graph the agent walked on).
  Neighborhood reconstruct(const Graph& host) const;
};

/// Iteratively deepening depth-first search of the r-hop ball around v.
/// Covers every node of N^r(v) in at most 2*r*|N^r(v)| moves. Ties among
/// eligible unvisited neighbors break toward the lowest node id.
TraversalTrace iddfs_traverse(const Graph& g, int v, int r);

/// Depth-first walk of the whole connected component of v; at most
/// 2*n0 - 3 moves for a component of n0 >= 2 nodes.
TraversalTrace dfs_traverse_component(const Graph& g, int v);

/// The Lemma-4 walk: alternate between v and its unvisited neighbors, then
/// count cliques of every size through v in the reconstructed 1-hop ball.
/// Uses at most 2*deg(v) - 1 moves.
struct CliqueWalkResult {
  std::map<int, long long> counts;  // clique size -> count (sizes >= 2)
  int steps_used = 0;
  TraversalTrace trace;
};
CliqueWalkResult clique_count_walk(const Graph& g, int v);

/// Cycle counting through v via an IDDFS of radius floor(c/2) and exhaustive
/// counting in the reconstructed ball.
struct CycleWalkResult {
  long long count = 0;
  int steps_used = 0;
};
CycleWalkResult cycle_count_walk(const Graph& g, int v, int c);

/// Canonical code of the neighborhood reconstructed from an IDDFS trace,
/// anchored at the walk's start. Equal codes iff the anchored neighborhoods
/// are feature-preservingly isomorphic.
std::string neighborhood_fingerprint(const TraversalTrace& trace, const Graph& host);

/// Random walk access model: uniform-neighbor moves, degree queries, and
/// adjacency queries restricted to already-discovered nodes.
class AccessModelSession {
 public:
  AccessModelSession(const Graph& g, int start, Rng rng);

  int current() const { return current_; }
  const std::vector<int>& discovered() const { return discovered_; }

  /// Move to a uniformly random neighbor and return it. A degree-0 node
  /// stays put.
  int step();

  int degree_query() const;
  bool adjacency_query(int u, int v) const;

  const std::map<int, int>& degree_answers() const { return degree_answers_; }

 private:
  void discover(int node);

  const Graph* g_;
  int current_;
  Rng rng_;
  std::vector<int> discovered_;
  std::vector<char> seen_;
  mutable std::map<int, int> degree_answers_;
};

/// Theorem-6 frequency distinguisher. Each of k agents reconstructs its
/// radius-r ball via IDDFS and reports whether its start node is incident to
/// the pattern; the vote sum is compared against gamma' * k, with gamma'
/// midway between the two graphs' incidence fractions (computed by oracle).
/// g1 must be the pattern-rich graph.
struct FrequencyResult {
  double success_rate = 0.0;  // fraction of trials classifying both graphs correctly
  long long gamma1 = 0;       // nodes of g1 incident to the pattern
  long long gamma2 = 0;
  double gamma_prime = 0.0;
  double threshold = 0.0;     // gamma' * k
};
FrequencyResult frequency_distinguisher(const Graph& g1, const Graph& g2,
                                        const AnchoredPattern& p, int k, int trials,
                                        uint64_t seed);

/// Deterministic root-seeking walk in the Theorem-8 graphs: descend by
/// feature value toward the hub (feature 0), using the h1 jump rule at
/// secondary-tree roots. Returns the node sequence ending at the hub.
std::vector<int> root_seek_path(const Graph& g, int start, int h1);

/// Theorem-8 recognition protocols, Monte Carlo over seeded trials with
/// agents placed uniformly on secondary-tree nodes.
///
/// 2 agents: both root-seek in lockstep; the pair classifies the graph as g1
/// exactly when the first node one agent shares with the other's visited set
/// is the hub. Needs step_budget >= h1 + h2.
///
/// 1 agent: root-seek to the hub, then repeatedly descend uniformly at
/// random into primary trees looking for a second secondary-tree attachment
/// leaf until the step budget runs out; classify as g1 iff one is found.
struct Theorem8Result {
  double success_g1 = 0.0;
  double success_g2 = 0.0;
  double mean_success = 0.0;
};
Theorem8Result theorem8_protocol(const Theorem8Pair& pair, int agents, int step_budget,
                                 int trials, uint64_t seed);

}  // namespace agentnet
