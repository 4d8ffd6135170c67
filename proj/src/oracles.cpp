#include "agentnet/oracles.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <stdexcept>

namespace agentnet {

Neighborhood r_hop_neighborhood(const Graph& g, int v, int r) {
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  if (r < 0) throw std::invalid_argument("radius must be >= 0");
  auto dist = g.bfs_distances(v);
  std::vector<int> nodes;
  for (int u = 0; u < g.node_count(); ++u)
    if (dist[u] >= 0 && dist[u] <= r) nodes.push_back(u);

  std::vector<int> inv(g.node_count(), -1);
  for (size_t i = 0; i < nodes.size(); ++i) inv[nodes[i]] = static_cast<int>(i);

  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<double>> feats;
  feats.reserve(nodes.size());
  for (int u : nodes) {
    auto f = g.features(u);
    feats.emplace_back(f.begin(), f.end());
    for (int w : g.neighbors(u))
      if (u < w && inv[w] >= 0) edges.emplace_back(inv[u], inv[w]);
  }
  Neighborhood nb;
  nb.graph = Graph::from_edges_features(static_cast<int>(nodes.size()), edges, feats);
  nb.to_original = std::move(nodes);
  nb.center = inv[v];
  return nb;
}

namespace {

// Enumerate cliques containing all of `base`, extending by candidates with
// increasing ids. `tally(size)` is called for every clique found (including
// the base itself once extended count >= 2 handled by caller).
void extend_cliques(const Graph& g, std::vector<int>& cand, int clique_size,
                    const std::function<void(int)>& tally) {
  for (size_t i = 0; i < cand.size(); ++i) {
    int u = cand[i];
    tally(clique_size + 1);
    std::vector<int> next;
    for (size_t j = i + 1; j < cand.size(); ++j)
      if (g.has_edge(u, cand[j])) next.push_back(cand[j]);
    if (!next.empty()) extend_cliques(g, next, clique_size + 1, tally);
  }
}

}  // namespace

long long count_cliques_at(const Graph& g, int v, int size) {
  if (size < 2) throw std::invalid_argument("clique size must be >= 2");
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  auto profile = clique_profile_at(g, v);
  if (size >= static_cast<int>(profile.size())) return 0;
  return profile[size];
}

std::vector<long long> clique_profile_at(const Graph& g, int v) {
  // A clique containing v lies entirely in N(v) u {v}.
  std::vector<long long> profile(g.degree(v) + 2, 0);
  std::vector<int> cand = g.neighbors(v);
  extend_cliques(g, cand, 1, [&](int size) { profile[size] += 1; });
  while (profile.size() > 2 && profile.back() == 0) profile.pop_back();
  return profile;
}

long long count_cliques_total(const Graph& g, int size) {
  if (size < 2) throw std::invalid_argument("clique size must be >= 2");
  long long total = 0;
  for (int v = 0; v < g.node_count(); ++v) {
    // Anchor each clique at its minimum node id.
    std::vector<int> cand;
    for (int u : g.neighbors(v))
      if (u > v) cand.push_back(u);
    extend_cliques(g, cand, 1, [&](int s) {
      if (s == size) total += 1;
    });
  }
  return total;
}

namespace {

void cycle_paths(const Graph& g, int v, int c, std::vector<char>& used, int current, int depth,
                 int first, long long& count, bool restrict_above_v) {
  if (depth == c - 1) {
    if (g.has_edge(current, v) && first < current) count += 1;
    return;
  }
  for (int u : g.neighbors(current)) {
    if (u == v || used[u]) continue;
    if (restrict_above_v && u < v) continue;
    used[u] = 1;
    cycle_paths(g, v, c, used, u, depth + 1, depth == 0 ? u : first, count, restrict_above_v);
    used[u] = 0;
  }
}

}  // namespace

long long count_cycles_through(const Graph& g, int v, int c) {
  if (c < 3) throw std::invalid_argument("cycle length must be >= 3");
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");
  std::vector<char> used(g.node_count(), 0);
  long long count = 0;
  // Walk simple paths v, u1, ..., u_{c-1} with u_{c-1} adjacent to v; the
  // orientation u1 < u_{c-1} counts each undirected cycle exactly once.
  cycle_paths(g, v, c, used, v, 0, -1, count, /*restrict_above_v=*/false);
  return count;
}

long long count_cycles_total(const Graph& g, int c) {
  if (c < 3) throw std::invalid_argument("cycle length must be >= 3");
  long long total = 0;
  std::vector<char> used(g.node_count(), 0);
  for (int v = 0; v < g.node_count(); ++v) {
    long long count = 0;
    // Anchor each cycle at its minimum node id.
    cycle_paths(g, v, c, used, v, 0, -1, count, /*restrict_above_v=*/true);
    total += count;
  }
  return total;
}

namespace {

struct EmbeddingSearch {
  const Graph* host;
  const Graph* pat;
  std::vector<int> order;      // pattern nodes in BFS order from anchor
  std::vector<int> parent;     // order index of an earlier neighbor (-1 for anchor)
  std::vector<int> assignment; // pattern id -> host id or -1
  std::vector<char> used;      // host node used
  long long count = 0;
  bool stop_at_first = false;

  bool feature_equal(int pnode, int hnode) const {
    auto a = pat->features(pnode);
    auto b = host->features(hnode);
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
  }

  bool consistent(int pnode, int hnode) const {
    // Induced match: edges and non-edges among assigned nodes must agree.
    for (int q = 0; q < pat->node_count(); ++q) {
      int hq = assignment[q];
      if (hq < 0 || q == pnode) continue;
      if (pat->has_edge(pnode, q) != host->has_edge(hnode, hq)) return false;
    }
    return true;
  }

  void search(size_t idx) {
    if (stop_at_first && count > 0) return;
    if (idx == order.size()) {
      count += 1;
      return;
    }
    int pnode = order[idx];
    int ppar = parent[idx];
    int hpar = assignment[order[ppar]];
    for (int hnode : host->neighbors(hpar)) {
      if (used[hnode]) continue;
      if (!feature_equal(pnode, hnode)) continue;
      if (pat->degree(pnode) > host->degree(hnode)) continue;
      if (!consistent(pnode, hnode)) continue;
      assignment[pnode] = hnode;
      used[hnode] = 1;
      search(idx + 1);
      used[hnode] = 0;
      assignment[pnode] = -1;
    }
  }
};

long long anchored_embeddings_impl(const Graph& g, int v, const AnchoredPattern& p,
                                   bool stop_at_first) {
  if (p.pattern.node_count() > 10)
    throw std::invalid_argument("pattern too large (exhaustive search budget is 10 nodes)");
  if (v < 0 || v >= g.node_count()) throw std::out_of_range("node id out of range");

  EmbeddingSearch s;
  s.host = &g;
  s.pat = &p.pattern;
  s.stop_at_first = stop_at_first;

  // BFS order from the anchor so every node has an already-assigned neighbor.
  int pn = p.pattern.node_count();
  std::vector<int> pos(pn, -1);
  s.order.push_back(p.anchor);
  pos[p.anchor] = 0;
  s.parent.push_back(-1);
  for (size_t i = 0; i < s.order.size(); ++i) {
    for (int u : p.pattern.neighbors(s.order[i])) {
      if (pos[u] < 0) {
        pos[u] = static_cast<int>(s.order.size());
        s.order.push_back(u);
        s.parent.push_back(static_cast<int>(i));
      }
    }
  }
  if (static_cast<int>(s.order.size()) != pn)
    throw std::invalid_argument("pattern must be connected");

  s.assignment.assign(pn, -1);
  s.used.assign(g.node_count(), 0);
  if (!s.feature_equal(p.anchor, v) || p.pattern.degree(p.anchor) > g.degree(v)) return 0;
  s.assignment[p.anchor] = v;
  s.used[v] = 1;
  if (s.consistent(p.anchor, v)) s.search(1);
  return s.count;
}

}  // namespace

long long count_anchored_embeddings(const Graph& g, int v, const AnchoredPattern& p) {
  return anchored_embeddings_impl(g, v, p, false);
}

long long count_anchored_occurrences(const Graph& g, int v, const AnchoredPattern& p) {
  long long embeddings = anchored_embeddings_impl(g, v, p, false);
  if (embeddings == 0) return 0;
  // Anchored automorphism count = embeddings of the pattern into itself with
  // the anchor fixed.
  long long aut = anchored_embeddings_impl(p.pattern, p.anchor, p, false);
  return embeddings / aut;
}

long long pattern_incident_nodes(const Graph& g, const AnchoredPattern& p) {
  long long count = 0;
  for (int v = 0; v < g.node_count(); ++v)
    if (anchored_embeddings_impl(g, v, p, true) > 0) count += 1;
  return count;
}

namespace {

struct IsoSearch {
  const Graph* g1;
  const Graph* g2;
  std::vector<int> order;  // g1 nodes, connectivity-first
  std::vector<int> map12;
  std::vector<char> used2;

  bool candidate_ok(int a, int b) const {
    if (g1->degree(a) != g2->degree(b)) return false;
    auto fa = g1->features(a);
    auto fb = g2->features(b);
    if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) return false;
    for (int q = 0; q < g1->node_count(); ++q) {
      if (map12[q] < 0 || q == a) continue;
      if (g1->has_edge(a, q) != g2->has_edge(b, map12[q])) return false;
    }
    return true;
  }

  bool search(size_t idx) {
    if (idx == order.size()) return true;
    int a = order[idx];
    for (int b = 0; b < g2->node_count(); ++b) {
      if (used2[b] || !candidate_ok(a, b)) continue;
      map12[a] = b;
      used2[b] = 1;
      if (search(idx + 1)) return true;
      used2[b] = 0;
      map12[a] = -1;
    }
    return false;
  }
};

std::vector<std::vector<double>> sorted_feature_rows(const Graph& g) {
  std::vector<std::vector<double>> rows;
  rows.reserve(g.node_count());
  for (int v = 0; v < g.node_count(); ++v) {
    auto f = g.features(v);
    rows.emplace_back(f.begin(), f.end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

bool is_isomorphic_small(const Graph& g1, const Graph& g2) {
  if (g1.node_count() > 24 || g2.node_count() > 24)
    throw std::invalid_argument("isomorphism oracle budget is 24 nodes");
  if (g1.node_count() != g2.node_count()) return false;
  if (g1.edge_count() != g2.edge_count()) return false;
  if (g1.feature_dim() != g2.feature_dim()) return false;

  std::vector<int> deg1, deg2;
  for (int v = 0; v < g1.node_count(); ++v) deg1.push_back(g1.degree(v));
  for (int v = 0; v < g2.node_count(); ++v) deg2.push_back(g2.degree(v));
  std::sort(deg1.begin(), deg1.end());
  std::sort(deg2.begin(), deg2.end());
  if (deg1 != deg2) return false;
  if (sorted_feature_rows(g1) != sorted_feature_rows(g2)) return false;

  IsoSearch s;
  s.g1 = &g1;
  s.g2 = &g2;
  s.map12.assign(g1.node_count(), -1);
  s.used2.assign(g2.node_count(), 0);

  // Map high-degree nodes early, keeping the frontier connected where possible.
  std::vector<char> placed(g1.node_count(), 0);
  std::vector<int> by_degree(g1.node_count());
  for (int v = 0; v < g1.node_count(); ++v) by_degree[v] = v;
  std::sort(by_degree.begin(), by_degree.end(),
            [&](int a, int b) { return g1.degree(a) > g1.degree(b); });
  for (int start : by_degree) {
    if (placed[start]) continue;
    std::vector<int> queue{start};
    placed[start] = 1;
    for (size_t i = 0; i < queue.size(); ++i) {
      s.order.push_back(queue[i]);
      for (int u : g1.neighbors(queue[i])) {
        if (!placed[u]) {
          placed[u] = 1;
          queue.push_back(u);
        }
      }
    }
  }
  return s.search(0);
}

// ---------------------------------------------------------------------------
// Canonical labeling by refinement + individualization.

namespace {

struct CanonSearch {
  const Graph* g;
  int n;
  std::vector<int> init_colors;
  std::string best;
  bool have_best = false;

  // Refine colors to the coarsest equitable refinement.
  std::vector<int> refine(std::vector<int> colors) const {
    while (true) {
      // Signature: (color, sorted neighbor colors).
      std::vector<std::pair<std::vector<int>, int>> sigs(n);
      for (int v = 0; v < n; ++v) {
        std::vector<int> sig;
        sig.push_back(colors[v]);
        for (int u : g->neighbors(v)) sig.push_back(colors[u]);
        std::sort(sig.begin() + 1, sig.end());
        sigs[v] = {std::move(sig), v};
      }
      std::map<std::vector<int>, int> rank;
      for (const auto& [sig, v] : sigs) rank.emplace(sig, 0);
      int next = 0;
      for (auto& [sig, r] : rank) r = next++;
      std::vector<int> refined(n);
      for (const auto& [sig, v] : sigs) refined[v] = rank[sig];
      int old_classes = 1 + *std::max_element(colors.begin(), colors.end());
      if (next == old_classes) return refined;
      colors = std::move(refined);
    }
  }

  std::string certificate(const std::vector<int>& colors) const {
    // Discrete coloring: colors[v] is the canonical position of v.
    std::vector<int> at(n);
    for (int v = 0; v < n; ++v) at[colors[v]] = v;
    std::string cert;
    cert.reserve(static_cast<size_t>(n) * (8 + n / 8 + 2));
    for (int i = 0; i < n; ++i) {
      int v = at[i];
      auto f = g->features(v);
      for (double x : f) {
        char buf[sizeof(double)];
        std::memcpy(buf, &x, sizeof(double));
        cert.append(buf, sizeof(double));
      }
      cert.push_back('|');
      for (int j = 0; j < n; ++j) cert.push_back(g->has_edge(v, at[j]) ? '1' : '0');
      cert.push_back(';');
    }
    return cert;
  }

  void search(const std::vector<int>& colors) {
    auto refined = refine(colors);
    int classes = 1 + *std::max_element(refined.begin(), refined.end());
    if (classes == n) {
      std::string cert = certificate(refined);
      if (!have_best || cert < best) {
        best = std::move(cert);
        have_best = true;
      }
      return;
    }
    // Individualize each vertex of the first non-singleton color class.
    std::vector<int> cell;
    for (int c = 0; c < classes && cell.size() < 2; ++c) {
      cell.clear();
      for (int v = 0; v < n; ++v)
        if (refined[v] == c) cell.push_back(v);
    }
    for (int v : cell) {
      auto next = refined;
      for (int u = 0; u < n; ++u)
        if (next[u] > next[v] || (next[u] == next[v] && u != v)) next[u] += 1;
      search(next);
    }
  }
};

std::string canonical_code_impl(const Graph& g, int anchor) {
  int n = g.node_count();
  if (n == 0) return "empty";
  CanonSearch s;
  s.g = &g;
  s.n = n;

  // Initial colors: rank of (anchor flag, feature vector).
  std::map<std::pair<int, std::vector<double>>, int> rank;
  std::vector<std::pair<int, std::vector<double>>> keys(n);
  for (int v = 0; v < n; ++v) {
    auto f = g.features(v);
    keys[v] = {v == anchor ? 0 : 1, std::vector<double>(f.begin(), f.end())};
    rank.emplace(keys[v], 0);
  }
  int next = 0;
  for (auto& [k, r] : rank) r = next++;
  std::vector<int> colors(n);
  for (int v = 0; v < n; ++v) colors[v] = rank[keys[v]];

  s.search(colors);
  return s.best;
}

}  // namespace

std::string canonical_code(const Graph& g) { return canonical_code_impl(g, -1); }

std::string canonical_code_anchored(const Graph& g, int anchor) {
  if (anchor < 0 || anchor >= g.node_count()) throw std::out_of_range("anchor out of range");
  return canonical_code_impl(g, anchor);
}

// ---------------------------------------------------------------------------
// 1-WL color refinement.

namespace {

// Joint refinement over a list of graphs; returns per-graph stable colors.
std::vector<std::vector<int>> wl_joint(const std::vector<const Graph*>& graphs) {
  std::vector<std::vector<int>> colors(graphs.size());

  // Initial colors from feature vectors, shared across graphs.
  std::map<std::vector<double>, int> feat_rank;
  for (const Graph* g : graphs)
    for (int v = 0; v < g->node_count(); ++v) {
      auto f = g->features(v);
      feat_rank.emplace(std::vector<double>(f.begin(), f.end()), 0);
    }
  int next = 0;
  for (auto& [k, r] : feat_rank) r = next++;
  for (size_t i = 0; i < graphs.size(); ++i) {
    colors[i].resize(graphs[i]->node_count());
    for (int v = 0; v < graphs[i]->node_count(); ++v) {
      auto f = graphs[i]->features(v);
      colors[i][v] = feat_rank[std::vector<double>(f.begin(), f.end())];
    }
  }

  int total_nodes = 0;
  for (const Graph* g : graphs) total_nodes += g->node_count();

  int classes = next;
  while (true) {
    std::map<std::vector<int>, int> rank;
    std::vector<std::vector<std::vector<int>>> sigs(graphs.size());
    for (size_t i = 0; i < graphs.size(); ++i) {
      const Graph* g = graphs[i];
      sigs[i].resize(g->node_count());
      for (int v = 0; v < g->node_count(); ++v) {
        std::vector<int> sig{colors[i][v]};
        for (int u : g->neighbors(v)) sig.push_back(colors[i][u]);
        std::sort(sig.begin() + 1, sig.end());
        rank.emplace(sig, 0);
        sigs[i][v] = std::move(sig);
      }
    }
    int fresh = 0;
    for (auto& [k, r] : rank) r = fresh++;
    for (size_t i = 0; i < graphs.size(); ++i)
      for (int v = 0; v < graphs[i]->node_count(); ++v) colors[i][v] = rank[sigs[i][v]];
    if (fresh == classes || fresh == total_nodes) break;
    classes = fresh;
  }
  return colors;
}

}  // namespace

bool wl_indistinguishable(const Graph& g1, const Graph& g2) {
  if (g1.node_count() != g2.node_count()) return false;
  auto colors = wl_joint({&g1, &g2});
  auto h1 = colors[0];
  auto h2 = colors[1];
  std::sort(h1.begin(), h1.end());
  std::sort(h2.begin(), h2.end());
  return h1 == h2;
}

std::vector<int> wl_colors(const Graph& g) { return wl_joint({&g})[0]; }

bool has_feature_path(const Graph& g, const std::vector<double>& features) {
  if (features.empty()) return true;
  int len = static_cast<int>(features.size());
  std::vector<char> used(g.node_count(), 0);
  std::function<bool(int, int)> extend = [&](int v, int idx) {
    if (idx == len) return true;
    for (int u : g.neighbors(v)) {
      if (used[u] || g.features(u)[0] != features[idx]) continue;
      used[u] = 1;
      if (extend(u, idx + 1)) return true;
      used[u] = 0;
    }
    return false;
  };
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.features(v)[0] != features[0]) continue;
    used.assign(g.node_count(), 0);
    used[v] = 1;
    if (extend(v, 1)) return true;
  }
  return false;
}

}  // namespace agentnet
