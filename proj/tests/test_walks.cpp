#include "doctest.h"

#include <algorithm>
#include <set>

#include "agentnet/datasets.hpp"
#include "agentnet/oracles.hpp"
#include "agentnet/walks.hpp"

using namespace agentnet;

namespace {

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph::from_edges(n, edges);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, edges);
}

Graph random_graph(Rng& rng, int max_nodes, int max_degree) {
  int n = 4 + static_cast<int>(rng.uniform_int(max_nodes - 3));
  std::set<std::pair<int, int>> edges;
  std::vector<int> deg(n, 0);
  int target = n + static_cast<int>(rng.uniform_int(n));
  for (int tries = 0; tries < 10 * target && static_cast<int>(edges.size()) < target; ++tries) {
    int u = static_cast<int>(rng.uniform_int(n));
    int v = static_cast<int>(rng.uniform_int(n));
    if (u == v || deg[u] >= max_degree || deg[v] >= max_degree) continue;
    auto e = std::minmax(u, v);
    if (edges.insert({e.first, e.second}).second) {
      deg[u]++;
      deg[v]++;
    }
  }
  return Graph::from_edges(n, {edges.begin(), edges.end()});
}

}  // namespace

TEST_CASE("iddfs covers the ball within the step bound") {
  Graph star = Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  TraversalTrace trace = iddfs_traverse(star, 0, 1);
  CHECK(trace.visited_nodes().size() == 4);
  CHECK(trace.move_count() <= 5);  // 2*Delta - 1

  Graph p5 = path_graph(5);
  TraversalTrace tp = iddfs_traverse(p5, 0, 4);
  CHECK(tp.visited_nodes().size() == 5);
  CHECK(tp.move_count() <= 2 * 4 * 5);

  // Trace invariants: consecutive nodes adjacent, observed edges real,
  // distances equal BFS.
  Rng rng(42);
  for (int i = 0; i < 30; ++i) {
    Graph g = random_graph(rng, 16, 5);
    int v = static_cast<int>(rng.uniform_int(g.node_count()));
    int r = 1 + static_cast<int>(rng.uniform_int(3));
    TraversalTrace t = iddfs_traverse(g, v, r);
    for (size_t s = 1; s < t.steps.size(); ++s) {
      CHECK(t.steps[s].from == t.steps[s - 1].node);
      CHECK(g.has_edge(t.steps[s].from, t.steps[s].node));
    }
    for (auto [a, b] : t.observed_edges) CHECK(g.has_edge(a, b));
    auto bfs = g.bfs_distances(v);
    for (auto [node, dist] : t.distances) CHECK(bfs[node] == dist);

    auto ball = r_hop_neighborhood(g, v, r);
    auto visited = t.visited_nodes();
    std::sort(visited.begin(), visited.end());
    CHECK(visited == ball.to_original);
    CHECK(t.move_count() <= 2 * r * static_cast<int>(ball.to_original.size()));

    // Reconstruction recovers the induced ball exactly.
    Neighborhood rebuilt = t.reconstruct(g);
    CHECK(rebuilt.graph.edge_count() == ball.graph.edge_count());
    CHECK(is_isomorphic_small(rebuilt.graph, ball.graph));
  }
}

TEST_CASE("dfs traverses the whole component within 2*n0 - 3 moves") {
  Graph p4 = path_graph(4);
  CHECK(dfs_traverse_component(p4, 0).move_count() == 3);

  Graph tri = cycle_graph(3);
  CHECK(dfs_traverse_component(tri, 0).move_count() <= 3);

  Rng rng(7);
  int done = 0;
  while (done < 100) {
    Graph g = random_graph(rng, 20, 6);
    int v = static_cast<int>(rng.uniform_int(g.node_count()));
    auto dist = g.bfs_distances(v);
    int n0 = 0;
    for (int d : dist)
      if (d >= 0) n0 += 1;
    if (n0 < 2) continue;
    done += 1;
    TraversalTrace t = dfs_traverse_component(g, v);
    CHECK(static_cast<int>(t.visited_nodes().size()) == n0);
    CHECK(t.move_count() <= 2 * n0 - 3);
  }
}

TEST_CASE("clique walk equals the oracle in 2*deg-1 steps") {
  Graph rook = rook_4x4();
  Graph shr = shrikhande();
  for (int v : {0, 7, 12}) {
    CliqueWalkResult wr = clique_count_walk(rook, v);
    CHECK(wr.steps_used == 11);
    CHECK(wr.counts.at(3) == 6);
    CHECK(wr.counts.at(4) == 2);

    CliqueWalkResult ws = clique_count_walk(shr, v);
    CHECK(ws.steps_used == 11);
    CHECK(ws.counts.at(3) == 6);
    CHECK(ws.counts.count(4) == 0);
  }

  auto [g1, g2] = gen_lemma4_pair();
  CliqueWalkResult w1 = clique_count_walk(g1, 0);
  CHECK(w1.steps_used <= 5);
  CHECK(w1.counts.at(3) == 1);
  CHECK(clique_count_walk(g2, 0).counts.count(3) == 0);

  Rng rng(14);
  for (int i = 0; i < 40; ++i) {
    Graph g = random_graph(rng, 18, 6);
    int v = static_cast<int>(rng.uniform_int(g.node_count()));
    CliqueWalkResult w = clique_count_walk(g, v);
    CHECK(w.steps_used <= std::max(0, 2 * g.degree(v) - 1));
    auto profile = clique_profile_at(g, v);
    for (int size = 2; size < static_cast<int>(profile.size()); ++size) {
      long long walked = w.counts.count(size) ? w.counts.at(size) : 0;
      CHECK(walked == profile[size]);
    }
  }
}

TEST_CASE("cycle walk equals the oracle") {
  Graph c8 = cycle_graph(8);
  CycleWalkResult r8 = cycle_count_walk(c8, 2, 8);
  CHECK(r8.count == 1);

  auto [g1, g2] = gen_lemma4_pair();
  CHECK(cycle_count_walk(g2, 0, 3).count == 0);
  CHECK(cycle_count_walk(g1, 0, 3).count == 1);

  LabeledDataset csl = gen_csl(1, 1);
  const Graph& skip2 = csl.items[0].graph;  // R=2: triangles through every node
  for (int v = 0; v < skip2.node_count(); v += 7)
    CHECK(cycle_count_walk(skip2, v, 3).count == count_cycles_through(skip2, v, 3));

  Rng rng(15);
  for (int i = 0; i < 25; ++i) {
    Graph g = random_graph(rng, 12, 5);
    int v = static_cast<int>(rng.uniform_int(g.node_count()));
    for (int c = 3; c <= 6; ++c)
      CHECK(cycle_count_walk(g, v, c).count == count_cycles_through(g, v, c));
  }
}

TEST_CASE("neighborhood fingerprints") {
  // Two relabelings of the same graph produce equal codes.
  Rng rng(33);
  for (int i = 0; i < 10; ++i) {
    Graph g = random_graph(rng, 12, 4);
    std::vector<int> perm(g.node_count());
    for (int j = 0; j < g.node_count(); ++j) perm[j] = j;
    rng.shuffle(perm);
    Graph h = g.permuted(perm);
    int v = static_cast<int>(rng.uniform_int(g.node_count()));
    TraversalTrace tg = iddfs_traverse(g, v, 2);
    TraversalTrace th = iddfs_traverse(h, perm[v], 2);
    CHECK(neighborhood_fingerprint(tg, g) == neighborhood_fingerprint(th, h));
  }

  Graph rook = rook_4x4(), shr = shrikhande();
  CHECK(neighborhood_fingerprint(iddfs_traverse(rook, 0, 1), rook) !=
        neighborhood_fingerprint(iddfs_traverse(shr, 0, 1), shr));

  // Both 2-hop balls in C6 and C8 are 5-node paths anchored at the middle.
  Graph c6 = cycle_graph(6), c8 = cycle_graph(8);
  CHECK(neighborhood_fingerprint(iddfs_traverse(c6, 1, 2), c6) ==
        neighborhood_fingerprint(iddfs_traverse(c8, 5, 2), c8));
}

TEST_CASE("random walk access model") {
  Graph rook = rook_4x4();
  AccessModelSession session(rook, 3, Rng(99));
  CHECK(session.degree_query() == 6);
  CHECK_FALSE(session.adjacency_query(3, 3));       // no self-loops
  CHECK_THROWS(session.adjacency_query(3, 15));     // 15 not discovered yet

  // Empirical next-step split on a cycle is close to 1/2 each way.
  Graph c8 = cycle_graph(8);
  int left = 0, right = 0;
  Rng seeder(5);
  for (int i = 0; i < 1000; ++i) {
    AccessModelSession s(c8, 0, Rng(seeder.u64()));
    int next = s.step();
    (next == 1 ? right : left) += 1;
  }
  CHECK(std::abs(right / 1000.0 - 0.5) < 0.05);

  // Walking discovers only adjacent nodes; adjacency answers are truthful.
  AccessModelSession s(rook, 0, Rng(1234));
  for (int i = 0; i < 40; ++i) s.step();
  for (int a : s.discovered())
    for (int b : s.discovered())
      CHECK(s.adjacency_query(a, b) == (a != b && rook.has_edge(a, b)));
}

TEST_CASE("frequency distinguisher separates pattern-rich graphs") {
  // All-crossed ladder vs plain ladder: gamma ratios 1 and 0, so k=3 agents
  // separate deterministically.
  std::vector<int> all_cells;
  for (int i = 0; i < 7; ++i) all_cells.push_back(i);
  Graph rich = ladder_graph(7, all_cells);
  Graph plain = ladder_graph(7);
  FrequencyResult fr =
      frequency_distinguisher(rich, plain, AnchoredPattern::triangle(), 3, 200, 21);
  CHECK(fr.gamma1 == 16);
  CHECK(fr.gamma2 == 0);
  CHECK(fr.success_rate == 1.0);

  CHECK_THROWS(frequency_distinguisher(plain, rich, AnchoredPattern::triangle(), 3, 10, 21));
}

TEST_CASE("theorem-8 protocols (reduced trial count)") {
  Theorem8Pair pair = gen_theorem8_pair(10, 4, 8, 3);

  // Root-seeking reaches the hub from any secondary node within h1 + h2.
  for (size_t i = 0; i < pair.secondary_nodes_g2.size(); i += 97) {
    auto path = root_seek_path(pair.g2, pair.secondary_nodes_g2[i], pair.h1);
    CHECK(path.back() == pair.hub_g2);
    CHECK(static_cast<int>(path.size()) - 1 <= pair.h1 + pair.h2);
  }

  Theorem8Result two = theorem8_protocol(pair, 2, pair.h1 + pair.h2, 300, 5);
  CHECK(two.success_g2 == 1.0);
  CHECK(two.success_g1 >= 0.82);  // expected 1 - 1/b = 0.9
  CHECK(two.success_g1 <= 0.98);

  Theorem8Result one = theorem8_protocol(pair, 1, 3 * (pair.h1 + pair.h2), 300, 5);
  CHECK(one.success_g2 == 1.0);  // the single agent never finds a phantom attachment
  CHECK(one.mean_success <= 0.75);

  CHECK_THROWS(theorem8_protocol(pair, 3, 12, 10, 1));
  CHECK_THROWS(theorem8_protocol(pair, 2, pair.h2 - 1, 10, 1));
}
