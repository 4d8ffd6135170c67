#pragma once

#include <string>
#include <utility>
#include <vector>

#include "agentnet/graph.hpp"

namespace agentnet {

/// Induced subgraph on {u : dist(u,v) <= r} plus the mapping from subgraph
/// ids to original ids (sorted by original id).
struct Neighborhood {
  Graph graph;
  std::vector<int> to_original;  // subgraph id -> original id
  int center = 0;                // id of v within the subgraph
};
Neighborhood r_hop_neighborhood(const Graph& g, int v, int r);

/// Number of distinct cliques of exactly `size` nodes containing v, by
/// exhaustive enumeration over N(v). size >= 2.
long long count_cliques_at(const Graph& g, int v, int size);

/// Clique counts through v for every size from 2 up to the largest clique
/// containing v; result[s] is the count for size s (missing = 0).
std::vector<long long> clique_profile_at(const Graph& g, int v);

/// Total number of cliques of `size` nodes in g (each counted once).
long long count_cliques_total(const Graph& g, int size);

/// Number of distinct simple cycles of length c through v (each cycle counted
/// once, not per orientation). c >= 3.
long long count_cycles_through(const Graph& g, int v, int c);

/// Total number of simple c-cycles in g.
long long count_cycles_total(const Graph& g, int c);

/// Number of induced-subgraph embeddings of the pattern into g with the
/// anchor mapped to v, counted up to automorphisms of (pattern, anchor).
/// Feature vectors must match exactly. Pattern size is capped at 10 nodes.
long long count_anchored_occurrences(const Graph& g, int v, const AnchoredPattern& p);

/// Raw injective embedding count (not divided by anchored automorphisms).
long long count_anchored_embeddings(const Graph& g, int v, const AnchoredPattern& p);

/// Number of nodes of g incident to at least one induced copy of the pattern
/// (anchored at that node); the separation statistic gamma_H.
long long pattern_incident_nodes(const Graph& g, const AnchoredPattern& p);

/// Feature-preserving graph isomorphism test by backtracking with degree and
/// feature pruning. Both graphs must have at most 24 nodes.
bool is_isomorphic_small(const Graph& g1, const Graph& g2);

/// Canonical certificate of a (featured) graph: two graphs get equal codes
/// iff they are feature-preservingly isomorphic. Exponential worst case;
/// intended for oracle-scale graphs (tens of nodes).
std::string canonical_code(const Graph& g);

/// Canonical certificate of (graph, distinguished node): equal iff there is a
/// feature-preserving isomorphism mapping anchor to anchor.
std::string canonical_code_anchored(const Graph& g, int anchor);

/// 1-WL color refinement run jointly on two graphs. Returns true iff the
/// stable color histograms coincide (the graphs are 1-WL indistinguishable).
bool wl_indistinguishable(const Graph& g1, const Graph& g2);

/// Stable 1-WL colors of a single graph (integers; arbitrary but
/// deterministic labels) after refinement to a fixed point.
std::vector<int> wl_colors(const Graph& g);

/// True if the feature sequence `features` occurs along some simple path
/// (as a subgraph, not necessarily induced) in g. Features are matched on
/// the first coordinate of the node feature vector.
bool has_feature_path(const Graph& g, const std::vector<double>& features);

}  // namespace agentnet
