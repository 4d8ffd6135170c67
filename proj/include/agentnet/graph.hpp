#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace agentnet {

/// Undirected simple graph with dense per-node feature vectors.
///
/// Adjacency lists are kept sorted and symmetric; node ids are contiguous
/// integers starting at 0. Immutable after construction, so instances can be
/// shared freely across threads.
class Graph {
 public:
  Graph() = default;

  /// Build from an undirected edge list. Every node gets the same feature
  /// vector `uniform_feature` (defaults to the 1-dimensional vector [1]).
  static Graph from_edges(int node_count, const std::vector<std::pair<int, int>>& edges,
                          const std::vector<double>& uniform_feature = {1.0});

  /// Build from an edge list plus an explicit feature matrix
  /// (features[v] is node v's feature vector; all rows must have equal size).
  static Graph from_edges_features(int node_count, const std::vector<std::pair<int, int>>& edges,
                                   const std::vector<std::vector<double>>& features);

  int node_count() const { return n_; }
  int feature_dim() const { return d_; }
  int edge_count() const { return edge_count_; }
  int max_degree() const { return max_degree_; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  bool has_edge(int u, int v) const;

  std::span<const double> features(int v) const {
    return std::span<const double>(feat_.data() + static_cast<size_t>(v) * d_, d_);
  }
  const std::vector<double>& feature_storage() const { return feat_; }

  /// Undirected edge list with u < v, sorted.
  std::vector<std::pair<int, int>> edges() const;

  /// Graph with node ids renamed by `perm` (new id of v is perm[v]).
  Graph permuted(const std::vector<int>& perm) const;

  /// Disjoint union; the nodes of `other` are shifted by node_count().
  Graph disjoint_union(const Graph& other) const;

  bool same_features(int u, int v) const;

  /// BFS distances from `start` (-1 for unreachable nodes).
  std::vector<int> bfs_distances(int start) const;

  // Line-oriented text format: header "n d", then n lines of d feature
  // values, then one "u v" line per undirected edge.
  std::string to_text() const;
  static Graph from_text(const std::string& text);

 private:
  void finalize();

  int n_ = 0;
  int d_ = 0;
  int edge_count_ = 0;
  int max_degree_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<double> feat_;  // row-major n x d
};

/// A connected pattern graph with a distinguished anchor node and the radius
/// within which the whole pattern lies around the anchor.
struct AnchoredPattern {
  Graph pattern;
  int anchor = 0;
  int radius = 0;

  /// Validates connectivity and that every node is within `radius` of the
  /// anchor; throws std::invalid_argument otherwise.
  static AnchoredPattern make(Graph pattern, int anchor);

  /// Triangle with all features equal to `feature`.
  static AnchoredPattern triangle(double feature = 1.0);

  /// Single edge anchored at one endpoint.
  static AnchoredPattern edge(double feature = 1.0);

  /// Single node (radius 0) with the given feature vector.
  static AnchoredPattern single_node(const std::vector<double>& feature);
};

/// A classification dataset: graphs with integer labels.
struct LabeledDataset {
  struct Item {
    Graph graph;
    int label = 0;
  };
  std::vector<Item> items;
  int class_count = 0;
  std::string name;
  uint64_t generator_seed = 0;

  void validate() const;  // labels in range, uniform feature dim

  std::string to_json() const;
  static LabeledDataset from_json(const std::string& text);
  void save(const std::string& path) const;
  static LabeledDataset load(const std::string& path);
};

}  // namespace agentnet
