#include "doctest.h"

#include <algorithm>
#include <set>

#include "agentnet/datasets.hpp"
#include "agentnet/oracles.hpp"

using namespace agentnet;

TEST_CASE("four-cycles generator") {
  LabeledDataset ds = gen_four_cycles(40, 11);
  CHECK(ds.items.size() == 40);
  CHECK(ds.class_count == 2);
  int positives = 0;
  for (size_t i = 0; i < ds.items.size(); ++i) {
    const Graph& g = ds.items[i].graph;
    CHECK(g.node_count() == 16);
    for (int v = 0; v < 16; ++v) CHECK(g.degree(v) == 2);
    long long c4 = count_cycles_total(g, 4);
    if (ds.items[i].label == 1) {
      CHECK(c4 >= 1);
      positives += 1;
    } else {
      CHECK(c4 == 0);
      CHECK(count_cycles_total(g, 3) == 0);  // class-0 cycles all have length >= 5
    }
    CHECK(ds.items[i].label == (i % 2 == 0 ? 1 : 0));  // emitted in pairs
  }
  CHECK(positives == 20);

  // Every emitted pair is 1-WL indistinguishable.
  for (size_t p = 0; p < ds.items.size(); p += 2)
    CHECK(wl_indistinguishable(ds.items[p].graph, ds.items[p + 1].graph));

  // Determinism and seed sensitivity.
  CHECK(gen_four_cycles(40, 11).to_json() == ds.to_json());
  CHECK(gen_four_cycles(40, 12).to_json() != ds.to_json());

  CHECK_THROWS(gen_four_cycles(7, 1));
}

TEST_CASE("csl generator") {
  LabeledDataset ds = gen_csl(3, 2);
  CHECK(ds.class_count == 10);
  CHECK(ds.items.size() == 20);
  for (const auto& item : ds.items) {
    CHECK(item.graph.node_count() == 41);
    for (int v = 0; v < 41; ++v) CHECK(item.graph.degree(v) == 4);
  }

  // The ten classes are mutually non-isomorphic: short-cycle profiles at a
  // node differ pairwise (the graphs are vertex-transitive).
  std::vector<std::vector<long long>> profiles;
  for (int cls = 0; cls < 10; ++cls) {
    const Graph& g = ds.items[cls * 2].graph;
    std::vector<long long> profile;
    for (int c = 3; c <= 10; ++c) profile.push_back(count_cycles_through(g, 0, c));
    profiles.push_back(std::move(profile));
  }
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) CHECK(profiles[i] != profiles[j]);

  // A relabeled copy is 1-WL indistinguishable from its representative.
  CHECK(wl_indistinguishable(ds.items[0].graph, ds.items[1].graph));
}

TEST_CASE("two-wl pair") {
  LabeledDataset ds = gen_two_wl_pair();
  REQUIRE(ds.items.size() == 2);
  const Graph& rook = ds.items[0].graph;
  const Graph& shr = ds.items[1].graph;
  for (const Graph* g : {&rook, &shr}) {
    CHECK(g->node_count() == 16);
    CHECK(g->edge_count() == 48);
    for (int v = 0; v < 16; ++v) CHECK(g->degree(v) == 6);
  }
  CHECK(count_cliques_total(rook, 4) == 8);
  CHECK(count_cliques_total(shr, 4) == 0);
  CHECK_FALSE(is_isomorphic_small(rook, shr));
  CHECK(wl_indistinguishable(rook, shr));
}

TEST_CASE("ladder generator") {
  // Crossed cells turn into 4-cliques; counting them recovers the mode.
  LabeledDataset dens = gen_ladder(7, LadderCrossMode::kDensityHalf, 5, 20);
  for (size_t i = 0; i < dens.items.size(); ++i) {
    const Graph& g = dens.items[i].graph;
    CHECK(g.node_count() == 16);
    long long crossed = count_cliques_total(g, 4);
    if (dens.items[i].label == 1) {
      CHECK((crossed == 3 || crossed == 4));  // density 0.5 of 7 cells
    } else {
      CHECK(crossed == 0);
      CHECK(count_cycles_total(g, 3) == 0);  // plain ladders are triangle-free
    }
  }

  LabeledDataset fixed = gen_ladder(31, LadderCrossMode::kFixedTwo, 5, 10);
  for (const auto& item : fixed.items)
    CHECK(count_cliques_total(item.graph, 4) == (item.label == 1 ? 2 : 0));

  CHECK_THROWS(gen_ladder(1, LadderCrossMode::kFixedTwo, 5, 10));
}

TEST_CASE("one-way tree") {
  OneWayTree tree = gen_one_way_tree(2, 3);
  CHECK(tree.graph.node_count() == 7);
  CHECK(tree.leaf_list.size() == 4);
  CHECK(tree.graph.features(tree.root)[0] == 1.0);
  for (int leaf : tree.leaf_list) CHECK(tree.graph.features(leaf)[0] == 3.0);

  OneWayTree big = gen_one_way_tree(3, 4);
  CHECK(big.graph.node_count() == one_way_tree_size(3, 4));
  CHECK(big.graph.node_count() == 1 + 3 + 9 + 27);
  CHECK(big.leaf_list.size() == 27);

  // Every non-root node has exactly one neighbor on the previous level.
  for (int v = 1; v < big.graph.node_count(); ++v) {
    int level = static_cast<int>(big.graph.features(v)[0]);
    int parents = 0;
    for (int u : big.graph.neighbors(v))
      if (static_cast<int>(big.graph.features(u)[0]) == level - 1) parents += 1;
    CHECK(parents == 1);
  }

  CHECK_THROWS(gen_one_way_tree(1, 3));
  CHECK_THROWS(gen_one_way_tree(2, 0));
  CHECK_THROWS(gen_one_way_tree(4, 12));  // > 10^6 nodes
}

TEST_CASE("theorem-8 pair construction") {
  Theorem8Pair pair = gen_theorem8_pair(4, 3, 5, 2);
  long long t1 = one_way_tree_size(2, 3);
  long long t2 = one_way_tree_size(2, 5);
  CHECK(pair.g2.node_count() == 1 + 4 * t1 + t2);
  CHECK(pair.g1.node_count() == 1 + 4 * t1 + 4 * t2);
  CHECK(pair.secondary_nodes_g1.size() == static_cast<size_t>(4 * t2));
  CHECK(pair.secondary_nodes_g2.size() == static_cast<size_t>(t2));

  // Secondary roots are the feature-1 nodes with no feature-0 neighbor; in
  // g1 every primary tree has one attachment, in g2 exactly one tree does.
  auto is_secondary_root = [](const Graph& g, int u) {
    if (static_cast<int>(g.features(u)[0]) != 1) return false;
    for (int w : g.neighbors(u))
      if (static_cast<int>(g.features(w)[0]) == 0) return false;
    return true;
  };
  auto count_attachments = [&](const Graph& g, int h1) {
    int count = 0;
    for (int v = 0; v < g.node_count(); ++v) {
      if (static_cast<int>(g.features(v)[0]) != h1) continue;
      for (int u : g.neighbors(v))
        if (is_secondary_root(g, u)) count += 1;
    }
    return count;
  };
  CHECK(count_attachments(pair.g1, pair.h1) == 4);
  CHECK(count_attachments(pair.g2, pair.h1) == 1);

  // Hub degree b; internal tree nodes have branching+1 neighbors.
  CHECK(pair.g1.degree(pair.hub_g1) == 4);
  for (int v = 0; v < pair.g1.node_count(); ++v) {
    int f = static_cast<int>(pair.g1.features(v)[0]);
    if (f == 0) continue;
    CHECK((pair.g1.degree(v) == pair.branching + 1 || pair.g1.degree(v) <= 2));
  }

  // The feature-labelled path (1, h1, ..., 1, 0, 1, ..., h1, 1) occurs in g1
  // but not in g2.
  std::vector<double> pattern{1};
  for (int f = pair.h1; f >= 1; --f) pattern.push_back(f);
  pattern.push_back(0);
  for (int f = 1; f <= pair.h1; ++f) pattern.push_back(f);
  pattern.push_back(1);
  CHECK(pattern.size() == static_cast<size_t>(2 * pair.h1 + 3));
  CHECK(has_feature_path(pair.g1, pattern));
  CHECK_FALSE(has_feature_path(pair.g2, pattern));

  // Equalized variants have exactly equal node counts.
  Theorem8Pair eq = gen_theorem8_pair(4, 3, 5, 2, true);
  CHECK(eq.g1.node_count() == eq.g2.node_count());

  CHECK_THROWS(gen_theorem8_pair(1, 3, 5, 2));
  CHECK_THROWS(gen_theorem8_pair(4, 5, 5, 2));
}

TEST_CASE("lemma-4 pair") {
  auto [g1, g2] = gen_lemma4_pair();
  CHECK(g1.node_count() == 5);
  CHECK(g2.node_count() == 7);
  CHECK(g1.degree(0) == 3);
  CHECK(g2.degree(0) == 3);
  CHECK(count_cycles_total(g1, 3) == 1);
  CHECK(count_cycles_total(g2, 3) == 0);
}

TEST_CASE("make_dataset and splits") {
  DatasetSpec spec;
  spec.family = "four-cycles";
  spec.seed = 9;
  spec.count = 24;
  LabeledDataset ds = make_dataset(spec);
  Split split = split_dataset(ds, "four-cycles", 0.25, 1);
  CHECK(split.train.size() + split.test.size() == ds.items.size());
  // Pairs stay on one side.
  for (const auto& side : {split.train, split.test}) {
    std::set<int> s(side.begin(), side.end());
    for (int idx : side) CHECK(s.count(idx ^ 1) == 1);
  }

  DatasetSpec cspec;
  cspec.family = "csl";
  cspec.seed = 4;
  cspec.count = 4;
  LabeledDataset csl = make_dataset(cspec);
  Split csplit = split_dataset(csl, "csl", 0.25, 1);
  std::vector<int> per_class(10, 0);
  for (int idx : csplit.test) per_class[csl.items[idx].label] += 1;
  for (int c : per_class) CHECK(c == 1);  // stratified

  DatasetSpec tspec;
  tspec.family = "two-wl";
  LabeledDataset twl = make_dataset(tspec);
  Split tsplit = split_dataset(twl, "two-wl", 0.25, 1);
  CHECK(tsplit.train == tsplit.test);  // capacity test: train == test

  DatasetSpec bogus;
  bogus.family = "bogus";
  CHECK_THROWS(make_dataset(bogus));
}

TEST_CASE("one-hot feature rewriting") {
  OneWayTree tree = gen_one_way_tree(2, 3);
  Graph hot = one_hot_features(tree.graph);
  CHECK(hot.feature_dim() == 3);  // levels 1..3
  for (int v = 0; v < hot.node_count(); ++v) {
    double sum = 0;
    for (double x : hot.features(v)) sum += x;
    CHECK(sum == 1.0);
  }
}
