#include "agentnet/datasets.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "agentnet/rng.hpp"

namespace agentnet {

long long one_way_tree_size(int branching, int depth) {
  long long total = 0, level = 1;
  for (int i = 1; i <= depth; ++i) {
    total += level;
    level *= branching;
  }
  return total;
}

OneWayTree gen_one_way_tree(int branching, int depth) {
  if (branching < 2) throw std::invalid_argument("branching must be >= 2");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  long long size = one_way_tree_size(branching, depth);
  if (size > 1000000) throw std::invalid_argument("one-way tree would exceed 10^6 nodes");

  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<double>> feats;
  std::vector<int> level_of;
  feats.reserve(size);
  // Breadth-first ids: root is 0, children follow level by level.
  feats.push_back({1.0});
  level_of.push_back(1);
  std::vector<int> frontier{0};
  for (int level = 2; level <= depth; ++level) {
    std::vector<int> next;
    for (int parent : frontier) {
      for (int c = 0; c < branching; ++c) {
        int id = static_cast<int>(feats.size());
        feats.push_back({static_cast<double>(level)});
        level_of.push_back(level);
        edges.emplace_back(parent, id);
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  OneWayTree t;
  t.branching = branching;
  t.depth = depth;
  t.root = 0;
  t.leaf_list = depth == 1 ? std::vector<int>{0} : frontier;
  t.graph = Graph::from_edges_features(static_cast<int>(feats.size()), edges, feats);
  return t;
}

namespace {

struct Theorem8Builder {
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<double>> feats;
  std::vector<int> secondary_nodes;

  int add_node(double feature) {
    feats.push_back({feature});
    return static_cast<int>(feats.size()) - 1;
  }

  // Appends a one-way tree; returns (root id, leaf ids).
  std::pair<int, std::vector<int>> add_tree(int branching, int depth, bool secondary) {
    int root = add_node(1.0);
    if (secondary) secondary_nodes.push_back(root);
    std::vector<int> frontier{root};
    for (int level = 2; level <= depth; ++level) {
      std::vector<int> next;
      for (int parent : frontier) {
        for (int c = 0; c < branching; ++c) {
          int id = add_node(static_cast<double>(level));
          if (secondary) secondary_nodes.push_back(id);
          edges.emplace_back(parent, id);
          next.push_back(id);
        }
      }
      frontier = std::move(next);
    }
    return {root, frontier};
  }

  Graph build() const {
    return Graph::from_edges_features(static_cast<int>(feats.size()), edges, feats);
  }
};

// One hub + b primary trees; a secondary tree on the first leaf of each
// primary tree listed in `secondary_on`.
Theorem8Builder build_theorem8_graph(int b, int h1, int h2, int branching,
                                     const std::vector<int>& secondary_on) {
  Theorem8Builder builder;
  int hub = builder.add_node(0.0);
  std::set<int> wants(secondary_on.begin(), secondary_on.end());
  for (int i = 0; i < b; ++i) {
    auto [root, leaves] = builder.add_tree(branching, h1, false);
    builder.edges.emplace_back(hub, root);
    if (wants.count(i)) {
      auto [sec_root, sec_leaves] = builder.add_tree(branching, h2, true);
      builder.edges.emplace_back(leaves.front(), sec_root);
    }
  }
  (void)hub;
  return builder;
}

}  // namespace

Theorem8Pair gen_theorem8_pair(int b, int h1, int h2, int branching, bool equalized) {
  if (b < 2) throw std::invalid_argument("b must be >= 2");
  if (h2 <= h1) throw std::invalid_argument("h2 must exceed h1");
  if (h1 < 3) throw std::invalid_argument("h1 must be >= 3 (root-seeking needs distinct levels)");
  if (branching < 2) throw std::invalid_argument("branching must be >= 2");

  std::vector<int> all(b);
  for (int i = 0; i < b; ++i) all[i] = i;
  auto b1 = build_theorem8_graph(b, h1, h2, branching, all);
  auto b2 = build_theorem8_graph(b, h1, h2, branching, {0});

  Theorem8Pair pair;
  pair.b = b;
  pair.h1 = h1;
  pair.h2 = h2;
  pair.branching = branching;
  pair.hub_g1 = 0;
  pair.hub_g2 = 0;
  pair.g1 = b1.build();
  pair.g2 = b2.build();
  pair.secondary_nodes_g1 = b1.secondary_nodes;
  pair.secondary_nodes_g2 = b2.secondary_nodes;

  if (equalized) {
    // Sizes are equalized exactly: g1 gains a padding component of
    // (b-1)*(1 + b*T(h1)) nodes while g2 is replaced by b disjoint copies.
    long long t1 = one_way_tree_size(branching, h1);
    long long pad = static_cast<long long>(b - 1) * (1 + b * t1);
    std::vector<std::pair<int, int>> pad_edges;
    for (int i = 0; i + 1 < pad; ++i) pad_edges.emplace_back(i, i + 1);
    Graph padding = Graph::from_edges(static_cast<int>(pad), pad_edges,
                                      {static_cast<double>(h2)});
    pair.g1 = pair.g1.disjoint_union(padding);

    Graph g2_copies = pair.g2;
    int shard = pair.g2.node_count();
    for (int copy = 1; copy < b; ++copy) {
      g2_copies = g2_copies.disjoint_union(pair.g2);
      for (int node : b2.secondary_nodes)
        pair.secondary_nodes_g2.push_back(node + copy * shard);
    }
    pair.g2 = g2_copies;
  }
  return pair;
}

std::pair<Graph, Graph> gen_lemma4_pair() {
  // Node ids: v=0, v1=1, v2=2, v3=3, then the path tails.
  Graph g1 = Graph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}});
  Graph g2 = Graph::from_edges(7, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {2, 5}, {3, 6}});
  return {g1, g2};
}

namespace {

// All partitions of `total` into parts >= min_part, nondecreasing order.
void partitions_into(int total, int min_part, std::vector<int>& current,
                     std::vector<std::vector<int>>& out) {
  if (total == 0) {
    out.push_back(current);
    return;
  }
  for (int part = min_part; part <= total; ++part) {
    if (total - part != 0 && total - part < part) continue;
    current.push_back(part);
    partitions_into(total - part, part, current, out);
    current.pop_back();
  }
}

Graph cycles_graph(const std::vector<int>& lengths, Rng& rng) {
  int n = 0;
  for (int len : lengths) n += len;
  std::vector<std::pair<int, int>> edges;
  int base = 0;
  for (int len : lengths) {
    for (int i = 0; i < len; ++i) edges.emplace_back(base + i, base + (i + 1) % len);
    base += len;
  }
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  return Graph::from_edges(n, edges).permuted(perm);
}

}  // namespace

LabeledDataset gen_four_cycles(int count, uint64_t seed) {
  if (count <= 0 || count % 2 != 0) throw std::invalid_argument("count must be positive and even");

  std::vector<std::vector<int>> all;
  std::vector<int> scratch;
  partitions_into(16, 4, scratch, all);
  std::vector<std::vector<int>> with_c4, without_c4;
  for (auto& p : all) {
    bool has4 = std::find(p.begin(), p.end(), 4) != p.end();
    (has4 ? with_c4 : without_c4).push_back(p);
  }

  LabeledDataset ds;
  ds.name = "four-cycles";
  ds.class_count = 2;
  ds.generator_seed = seed;
  for (int pair = 0; pair < count / 2; ++pair) {
    Rng rng = Rng::substream(seed, {rng_tag::kDataset, static_cast<uint64_t>(pair)});
    const auto& pos = with_c4[rng.uniform_int(with_c4.size())];
    const auto& neg = without_c4[rng.uniform_int(without_c4.size())];
    ds.items.push_back({cycles_graph(pos, rng), 1});
    ds.items.push_back({cycles_graph(neg, rng), 0});
  }
  ds.validate();
  return ds;
}

const std::vector<int>& csl_skip_lengths() {
  static const std::vector<int> skips{2, 3, 4, 5, 6, 9, 11, 12, 13, 16};
  return skips;
}

LabeledDataset gen_csl(uint64_t seed, int per_class) {
  if (per_class < 1) throw std::invalid_argument("per_class must be >= 1");
  constexpr int kNodes = 41;
  LabeledDataset ds;
  ds.name = "csl";
  ds.class_count = static_cast<int>(csl_skip_lengths().size());
  ds.generator_seed = seed;
  for (int label = 0; label < ds.class_count; ++label) {
    int skip = csl_skip_lengths()[label];
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < kNodes; ++i) {
      edges.emplace_back(i, (i + 1) % kNodes);
      edges.emplace_back(i, (i + skip) % kNodes);
    }
    // The skip chords double-list each edge; dedupe via a set.
    std::set<std::pair<int, int>> uniq;
    for (auto [u, v] : edges) uniq.emplace(std::min(u, v), std::max(u, v));
    Graph base = Graph::from_edges(kNodes, {uniq.begin(), uniq.end()});
    for (int copy = 0; copy < per_class; ++copy) {
      Rng rng = Rng::substream(
          seed, {rng_tag::kDataset, static_cast<uint64_t>(label), static_cast<uint64_t>(copy)});
      std::vector<int> perm(kNodes);
      for (int i = 0; i < kNodes; ++i) perm[i] = i;
      if (copy > 0) rng.shuffle(perm);
      ds.items.push_back({base.permuted(perm), label});
    }
  }
  ds.validate();
  return ds;
}

Graph rook_4x4() {
  std::vector<std::pair<int, int>> edges;
  auto id = [](int r, int c) { return 4 * r + c; };
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      for (int c2 = c + 1; c2 < 4; ++c2) edges.emplace_back(id(r, c), id(r, c2));
      for (int r2 = r + 1; r2 < 4; ++r2) edges.emplace_back(id(r, c), id(r2, c));
    }
  return Graph::from_edges(16, edges);
}

Graph shrikhande() {
  // Cayley graph on Z4 x Z4 with connection set {+-(1,0), +-(0,1), +-(1,1)}.
  std::vector<std::pair<int, int>> edges;
  auto id = [](int a, int b) { return 4 * ((a % 4 + 4) % 4) + ((b % 4 + 4) % 4); };
  const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
  std::set<std::pair<int, int>> uniq;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (auto& d : dirs) {
        int u = id(a, b), v = id(a + d[0], b + d[1]);
        uniq.emplace(std::min(u, v), std::max(u, v));
      }
  return Graph::from_edges(16, {uniq.begin(), uniq.end()});
}

LabeledDataset gen_two_wl_pair() {
  LabeledDataset ds;
  ds.name = "two-wl";
  ds.class_count = 2;
  ds.generator_seed = 0;
  ds.items.push_back({rook_4x4(), 0});
  ds.items.push_back({shrikhande(), 1});
  ds.validate();
  return ds;
}

Graph ladder_graph(int cells, const std::vector<int>& crossed_cells) {
  if (cells < 2) throw std::invalid_argument("cells must be >= 2");
  int cols = cells + 1;
  auto id = [](int row, int col) { return 2 * col + row; };
  std::vector<std::pair<int, int>> edges;
  for (int col = 0; col < cols; ++col) {
    edges.emplace_back(id(0, col), id(1, col));
    if (col + 1 < cols) {
      edges.emplace_back(id(0, col), id(0, col + 1));
      edges.emplace_back(id(1, col), id(1, col + 1));
    }
  }
  for (int cell : crossed_cells) {
    if (cell < 0 || cell >= cells) throw std::invalid_argument("crossed cell out of range");
    edges.emplace_back(id(0, cell), id(1, cell + 1));
    edges.emplace_back(id(1, cell), id(0, cell + 1));
  }
  return Graph::from_edges(2 * cols, edges);
}

LabeledDataset gen_ladder(int cells, LadderCrossMode mode, uint64_t seed, int count) {
  if (count <= 0 || count % 2 != 0) throw std::invalid_argument("count must be positive and even");
  LabeledDataset ds;
  ds.name = mode == LadderCrossMode::kDensityHalf ? "ladder-density" : "ladder-fixed2";
  ds.class_count = 2;
  ds.generator_seed = seed;
  int n = 2 * (cells + 1);
  for (int pair = 0; pair < count / 2; ++pair) {
    Rng rng = Rng::substream(seed, {rng_tag::kDataset, static_cast<uint64_t>(pair)});
    int crossed_count;
    if (mode == LadderCrossMode::kDensityHalf) {
      crossed_count = cells / 2;
      if (cells % 2 != 0 && rng.bernoulli(0.5)) crossed_count += 1;
    } else {
      crossed_count = 2;
      if (crossed_count > cells) throw std::invalid_argument("fewer cells than crossed cells");
    }
    std::vector<int> cells_idx(cells);
    for (int i = 0; i < cells; ++i) cells_idx[i] = i;
    rng.shuffle(cells_idx);
    cells_idx.resize(crossed_count);
    std::sort(cells_idx.begin(), cells_idx.end());

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    ds.items.push_back({ladder_graph(cells, cells_idx).permuted(perm), 1});
    rng.shuffle(perm);
    ds.items.push_back({ladder_graph(cells).permuted(perm), 0});
  }
  ds.validate();
  return ds;
}

LabeledDataset make_dataset(const DatasetSpec& spec) {
  if (spec.family == "four-cycles") {
    return gen_four_cycles(spec.count > 0 ? spec.count : 200, spec.seed);
  }
  if (spec.family == "csl") {
    return gen_csl(spec.seed, spec.count > 0 ? spec.count : 10);
  }
  if (spec.family == "two-wl") {
    return gen_two_wl_pair();
  }
  if (spec.family == "ladder") {
    LadderCrossMode mode = spec.ladder_mode == "fixed2" ? LadderCrossMode::kFixedTwo
                                                        : LadderCrossMode::kDensityHalf;
    return gen_ladder(spec.ladder_cells, mode, spec.seed, spec.count > 0 ? spec.count : 120);
  }
  if (spec.family == "theorem8") {
    auto pair = gen_theorem8_pair(spec.b, spec.h1, spec.h2, spec.branching, spec.equalized);
    LabeledDataset ds;
    ds.name = "theorem8";
    ds.class_count = 2;
    ds.generator_seed = spec.seed;
    ds.items.push_back({pair.g1, 1});
    ds.items.push_back({pair.g2, 0});
    return ds;
  }
  if (spec.family == "lemma4") {
    auto [g1, g2] = gen_lemma4_pair();
    LabeledDataset ds;
    ds.name = "lemma4";
    ds.class_count = 2;
    ds.generator_seed = spec.seed;
    ds.items.push_back({g1, 1});
    ds.items.push_back({g2, 0});
    return ds;
  }
  throw std::invalid_argument("unknown dataset family: " + spec.family);
}

Split split_dataset(const LabeledDataset& ds, const std::string& family, double test_fraction,
                    uint64_t seed) {
  Split split;
  int n = static_cast<int>(ds.items.size());
  if (family == "two-wl" || family == "theorem8" || family == "lemma4") {
    // Capacity/expressiveness datasets: train == test.
    for (int i = 0; i < n; ++i) {
      split.train.push_back(i);
      split.test.push_back(i);
    }
    return split;
  }
  Rng rng = Rng::substream(seed, {rng_tag::kSplit});
  if (family == "csl") {
    std::map<int, std::vector<int>> by_class;
    for (int i = 0; i < n; ++i) by_class[ds.items[i].label].push_back(i);
    for (auto& [label, idx] : by_class) {
      rng.shuffle(idx);
      int test_count = std::max(1, static_cast<int>(idx.size() * test_fraction + 0.5));
      for (size_t i = 0; i < idx.size(); ++i)
        (i < static_cast<size_t>(test_count) ? split.test : split.train).push_back(idx[i]);
    }
  } else {
    // Pairwise families: items (2j, 2j+1) stay on the same side.
    int pairs = n / 2;
    std::vector<int> order(pairs);
    for (int i = 0; i < pairs; ++i) order[i] = i;
    rng.shuffle(order);
    int test_pairs = std::max(1, static_cast<int>(pairs * test_fraction + 0.5));
    for (int i = 0; i < pairs; ++i) {
      auto& side = i < test_pairs ? split.test : split.train;
      side.push_back(2 * order[i]);
      side.push_back(2 * order[i] + 1);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Graph one_hot_features(const Graph& g) {
  std::set<double> values;
  for (int v = 0; v < g.node_count(); ++v) values.insert(g.features(v)[0]);
  std::vector<double> alphabet(values.begin(), values.end());
  std::vector<std::vector<double>> feats(g.node_count(), std::vector<double>(alphabet.size(), 0.0));
  for (int v = 0; v < g.node_count(); ++v) {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), g.features(v)[0]);
    feats[v][it - alphabet.begin()] = 1.0;
  }
  return Graph::from_edges_features(g.node_count(), g.edges(), feats);
}

}  // namespace agentnet
