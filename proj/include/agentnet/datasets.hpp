#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agentnet/graph.hpp"

namespace agentnet {

/// Complete (Delta-1)-ary tree whose node feature is the level index:
/// the root is level 1, leaves are level `depth`. Cheap to ascend (the
/// parent is the unique smaller-feature neighbor), expensive to descend.
struct OneWayTree {
  int branching = 2;
  int depth = 1;  // number of levels; leaf feature equals depth
  int root = 0;
  std::vector<int> leaf_list;
  Graph graph;

  int node_count() const { return graph.node_count(); }
};

/// Nodes per one-way tree of the given depth: sum over levels 1..depth of
/// branching^(level-1).
long long one_way_tree_size(int branching, int depth);

OneWayTree gen_one_way_tree(int branching, int depth);

/// The Theorem-8 construction: a hub v (feature 0) with b primary one-way
/// trees of depth h1 attached to it. In g1 a secondary one-way tree of depth
/// h2 hangs off one chosen leaf of every primary tree; in g2 only one primary
/// tree carries a secondary tree.
struct Theorem8Pair {
  Graph g1;
  Graph g2;
  int hub_g1 = 0;
  int hub_g2 = 0;
  std::vector<int> secondary_nodes_g1;  // nodes inside secondary trees
  std::vector<int> secondary_nodes_g2;
  int b = 0;
  int h1 = 0;
  int h2 = 0;
  int branching = 0;
};

Theorem8Pair gen_theorem8_pair(int b, int h1, int h2, int branching, bool equalized = false);

/// The Lemma-4 example graphs: g1 is a triangle plus a path of length 2
/// incident to v (node 0); g2 is three paths of length 2 incident to v.
std::pair<Graph, Graph> gen_lemma4_pair();

/// Balanced 2-class dataset of 16-node 2-regular graphs (disjoint unions of
/// cycles, lengths summing to 16). Class 1 iff some cycle has length exactly
/// 4; class 0 graphs have all cycle lengths >= 5. Items are emitted in
/// (class-1, class-0) pairs. `count` must be even.
LabeledDataset gen_four_cycles(int count, uint64_t seed);

/// Circular Skip Links: 10 classes of 41-node 4-regular graphs (cycle plus
/// skip-R chords), `per_class` seeded relabelings of each class
/// representative. Skip set {2,3,4,5,6,9,11,12,13,16}.
LabeledDataset gen_csl(uint64_t seed, int per_class = 10);
const std::vector<int>& csl_skip_lengths();

/// The 2-WL pair: Rook's 4x4 graph (label 0) and the Shrikhande graph
/// (label 1). Both are 16-node 6-regular strongly regular graphs; only the
/// Rook graph contains 4-cliques.
LabeledDataset gen_two_wl_pair();
Graph rook_4x4();
Graph shrikhande();

enum class LadderCrossMode {
  kDensityHalf,  // cross round(cells/2) cells, split randomly when odd
  kFixedTwo,     // cross exactly 2 cells regardless of size
};

/// Plain 2x(cells+1) ladders (class 0) versus ladders with a subset of cells
/// "crossed" by adding both diagonals (class 1). Items come in
/// (class-1, class-0) pairs with seeded node relabelings.
LabeledDataset gen_ladder(int cells, LadderCrossMode mode, uint64_t seed, int count = 120);

/// Plain ladder graph on 2*(cells+1) nodes, identity node order.
Graph ladder_graph(int cells, const std::vector<int>& crossed_cells = {});

// ---------------------------------------------------------------------------
// Dataset plumbing shared by the harness and the CLI.

struct DatasetSpec {
  std::string family;  // four-cycles | csl | two-wl | ladder | theorem8 | lemma4
  uint64_t seed = 0;
  int count = 0;        // graphs (four-cycles, ladder); per-class for csl; 0 = default
  int ladder_cells = 7; // ladder only
  std::string ladder_mode = "density";  // density | fixed2
  int b = 10, h1 = 4, h2 = 8, branching = 3;  // theorem8 only
  bool equalized = false;
};

LabeledDataset make_dataset(const DatasetSpec& spec);

/// Train/test split as index lists. four-cycles and ladder split by pair (a
/// pair never straddles the split); csl stratified by class; two-wl and the
/// theory families are train == test.
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};
Split split_dataset(const LabeledDataset& ds, const std::string& family, double test_fraction,
                    uint64_t seed);

/// Rewrite first-coordinate features as one-hot vectors over the sorted value
/// alphabet (used for the level-indexed tree families).
Graph one_hot_features(const Graph& g);

}  // namespace agentnet
