#include "agentnet/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace agentnet {

void Graph::finalize() {
  edge_count_ = 0;
  max_degree_ = 0;
  for (int v = 0; v < n_; ++v) {
    auto& a = adj_[v];
    std::sort(a.begin(), a.end());
    for (size_t i = 0; i + 1 < a.size(); ++i) {
      if (a[i] == a[i + 1]) throw std::invalid_argument("duplicate edge");
    }
    for (int u : a) {
      if (u == v) throw std::invalid_argument("self-loop");
      if (u < 0 || u >= n_) throw std::invalid_argument("edge endpoint out of range");
    }
    edge_count_ += static_cast<int>(a.size());
    max_degree_ = std::max(max_degree_, static_cast<int>(a.size()));
  }
  edge_count_ /= 2;
}

Graph Graph::from_edges(int node_count, const std::vector<std::pair<int, int>>& edges,
                        const std::vector<double>& uniform_feature) {
  std::vector<std::vector<double>> feats(node_count, uniform_feature);
  return from_edges_features(node_count, edges, feats);
}

Graph Graph::from_edges_features(int node_count, const std::vector<std::pair<int, int>>& edges,
                                 const std::vector<std::vector<double>>& features) {
  if (node_count < 0) throw std::invalid_argument("negative node count");
  if (static_cast<int>(features.size()) != node_count)
    throw std::invalid_argument("feature row count != node count");
  Graph g;
  g.n_ = node_count;
  g.d_ = node_count > 0 ? static_cast<int>(features[0].size()) : 0;
  if (node_count > 0 && g.d_ < 1) throw std::invalid_argument("feature dimension must be >= 1");
  g.adj_.assign(node_count, {});
  g.feat_.reserve(static_cast<size_t>(node_count) * g.d_);
  for (const auto& row : features) {
    if (static_cast<int>(row.size()) != g.d_)
      throw std::invalid_argument("ragged feature rows");
    g.feat_.insert(g.feat_.end(), row.begin(), row.end());
  }
  for (auto [u, v] : edges) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count)
      throw std::invalid_argument("edge endpoint out of range");
    g.adj_[u].push_back(v);
    g.adj_[v].push_back(u);
  }
  g.finalize();
  return g;
}

bool Graph::has_edge(int u, int v) const {
  const auto& a = adj_[u];
  return std::binary_search(a.begin(), a.end(), v);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int v = 0; v < n_; ++v)
    for (int u : adj_[v])
      if (v < u) out.emplace_back(v, u);
  return out;
}

Graph Graph::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != n_) throw std::invalid_argument("bad permutation size");
  std::vector<std::pair<int, int>> new_edges;
  new_edges.reserve(edge_count_);
  for (auto [u, v] : edges()) new_edges.emplace_back(perm[u], perm[v]);
  std::vector<std::vector<double>> feats(n_);
  for (int v = 0; v < n_; ++v) {
    auto f = features(v);
    feats[perm[v]] = std::vector<double>(f.begin(), f.end());
  }
  return from_edges_features(n_, new_edges, feats);
}

Graph Graph::disjoint_union(const Graph& other) const {
  if (n_ > 0 && other.n_ > 0 && d_ != other.d_)
    throw std::invalid_argument("feature dimension mismatch in disjoint union");
  std::vector<std::pair<int, int>> all = edges();
  for (auto [u, v] : other.edges()) all.emplace_back(u + n_, v + n_);
  std::vector<std::vector<double>> feats;
  feats.reserve(n_ + other.n_);
  for (int v = 0; v < n_; ++v) {
    auto f = features(v);
    feats.emplace_back(f.begin(), f.end());
  }
  for (int v = 0; v < other.n_; ++v) {
    auto f = other.features(v);
    feats.emplace_back(f.begin(), f.end());
  }
  return from_edges_features(n_ + other.n_, all, feats);
}

bool Graph::same_features(int u, int v) const {
  auto a = features(u);
  auto b = features(v);
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<int> Graph::bfs_distances(int start) const {
  std::vector<int> dist(n_, -1);
  std::deque<int> q;
  dist[start] = 0;
  q.push_back(start);
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj_[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
    }
  }
  return dist;
}

std::string Graph::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << n_ << ' ' << d_ << '\n';
  for (int v = 0; v < n_; ++v) {
    auto f = features(v);
    for (int j = 0; j < d_; ++j) os << (j ? " " : "") << f[j];
    os << '\n';
  }
  for (auto [u, v] : edges()) os << u << ' ' << v << '\n';
  return os.str();
}

Graph Graph::from_text(const std::string& text) {
  std::istringstream is(text);
  int n = 0, d = 0;
  if (!(is >> n >> d)) throw std::invalid_argument("graph text: bad header");
  std::vector<std::vector<double>> feats(n, std::vector<double>(d));
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < d; ++j)
      if (!(is >> feats[v][j])) throw std::invalid_argument("graph text: bad feature row");
  std::vector<std::pair<int, int>> edges;
  int u, v;
  while (is >> u >> v) edges.emplace_back(u, v);
  return from_edges_features(n, edges, feats);
}

AnchoredPattern AnchoredPattern::make(Graph pattern, int anchor) {
  if (anchor < 0 || anchor >= pattern.node_count())
    throw std::invalid_argument("anchor out of range");
  auto dist = pattern.bfs_distances(anchor);
  int radius = 0;
  for (int v = 0; v < pattern.node_count(); ++v) {
    if (dist[v] < 0) throw std::invalid_argument("pattern must be connected");
    radius = std::max(radius, dist[v]);
  }
  return AnchoredPattern{std::move(pattern), anchor, radius};
}

AnchoredPattern AnchoredPattern::triangle(double feature) {
  return make(Graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}}, {feature}), 0);
}

AnchoredPattern AnchoredPattern::edge(double feature) {
  return make(Graph::from_edges(2, {{0, 1}}, {feature}), 0);
}

AnchoredPattern AnchoredPattern::single_node(const std::vector<double>& feature) {
  return make(Graph::from_edges_features(1, {}, {feature}), 0);
}

void LabeledDataset::validate() const {
  int d = -1;
  for (const auto& item : items) {
    if (item.label < 0 || item.label >= class_count)
      throw std::runtime_error("dataset label out of range");
    if (d < 0) d = item.graph.feature_dim();
    if (item.graph.feature_dim() != d)
      throw std::runtime_error("dataset graphs disagree on feature dimension");
  }
}

namespace {

nlohmann::ordered_json graph_to_json(const Graph& g) {
  nlohmann::ordered_json j;
  j["n"] = g.node_count();
  j["d"] = g.feature_dim();
  auto feats = nlohmann::ordered_json::array();
  for (int v = 0; v < g.node_count(); ++v) {
    auto f = g.features(v);
    feats.push_back(std::vector<double>(f.begin(), f.end()));
  }
  j["features"] = std::move(feats);
  auto es = nlohmann::ordered_json::array();
  for (auto [u, v] : g.edges()) es.push_back({u, v});
  j["edges"] = std::move(es);
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  int n = j.at("n").get<int>();
  std::vector<std::vector<double>> feats = j.at("features").get<std::vector<std::vector<double>>>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return Graph::from_edges_features(n, edges, feats);
}

}  // namespace

std::string LabeledDataset::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["class_count"] = class_count;
  j["generator_seed"] = generator_seed;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& item : items) {
    nlohmann::ordered_json e;
    e["graph"] = graph_to_json(item.graph);
    e["label"] = item.label;
    arr.push_back(std::move(e));
  }
  j["items"] = std::move(arr);
  return j.dump(1);
}

LabeledDataset LabeledDataset::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  LabeledDataset ds;
  ds.name = j.at("name").get<std::string>();
  ds.class_count = j.at("class_count").get<int>();
  ds.generator_seed = j.at("generator_seed").get<uint64_t>();
  for (const auto& e : j.at("items"))
    ds.items.push_back({graph_from_json(e.at("graph")), e.at("label").get<int>()});
  ds.validate();
  return ds;
}

void LabeledDataset::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << to_json() << '\n';
}

LabeledDataset LabeledDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace agentnet
