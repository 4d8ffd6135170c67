#include "agentnet/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace agentnet {

size_t ParamStore::add(const std::string& name, int rows, int cols) {
  for (const auto& e : entries_)
    if (e.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  Entry e;
  e.name = name;
  e.rows = rows;
  e.cols = cols;
  e.offset = values_.size();
  entries_.push_back(e);
  values_.resize(values_.size() + static_cast<size_t>(rows) * cols, 0.0);
  return entries_.size() - 1;
}

void ParamStore::fill(size_t idx, double v) {
  for (double& x : view(idx)) x = v;
}

void ParamStore::fill_kaiming_uniform(size_t idx, Rng& rng) {
  const Entry& e = entries_[idx];
  double bound = 1.0 / std::sqrt(static_cast<double>(e.rows));
  for (double& x : view(idx)) x = rng.uniform(-bound, bound);
}

void ParamStore::fill_normal(size_t idx, Rng& rng, double stddev) {
  for (double& x : view(idx)) x = rng.normal() * stddev;
}

void ParamStore::fill_uniform(size_t idx, Rng& rng, double lo, double hi) {
  for (double& x : view(idx)) x = rng.uniform(lo, hi);
}

uint64_t ParamStore::content_hash() const {
  uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& e : entries_) feed(e.name.data(), e.name.size());
  feed(values_.data(), values_.size() * sizeof(double));
  return h;
}

std::string ParamStore::to_json() const {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json je;
    je["name"] = e.name;
    je["shape"] = {e.rows, e.cols};
    auto v = view(&e - entries_.data());
    je["values"] = std::vector<double>(v.begin(), v.end());
    arr.push_back(std::move(je));
  }
  j["params"] = std::move(arr);
  return j.dump(1);
}

ParamStore ParamStore::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ParamStore store;
  for (const auto& je : j.at("params")) {
    int rows = je.at("shape").at(0).get<int>();
    int cols = je.at("shape").at(1).get<int>();
    size_t idx = store.add(je.at("name").get<std::string>(), rows, cols);
    auto values = je.at("values").get<std::vector<double>>();
    auto v = store.view(idx);
    if (values.size() != v.size()) throw std::runtime_error("checkpoint shape mismatch");
    std::copy(values.begin(), values.end(), v.begin());
  }
  return store;
}

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << to_json() << '\n';
}

ParamStore ParamStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

BoundParams bind_params(const ParamStore& store, Tape* tape) {
  BoundParams bp;
  bp.store = &store;
  bp.tensors.reserve(store.entry_count());
  for (size_t i = 0; i < store.entry_count(); ++i) {
    const auto& e = store.entry(i);
    auto v = store.view(i);
    if (tape) {
      bp.tensors.push_back(tape->leaf(e.rows, e.cols, v.data()));
    } else {
      bp.tensors.push_back(Tensor::constant(e.rows, e.cols, {v.begin(), v.end()}));
    }
  }
  return bp;
}

void BoundParams::harvest_grad(std::vector<double>& flat) const {
  if (flat.size() != store->total_size())
    throw std::invalid_argument("harvest_grad: flat vector size mismatch");
  for (size_t i = 0; i < tensors.size(); ++i) {
    const auto& g = tensors[i].grad();
    if (g.empty()) continue;
    size_t off = store->entry(i).offset;
    for (size_t k = 0; k < g.size(); ++k) flat[off + k] += g[k];
  }
}

MlpBlock MlpBlock::create(ParamStore& store, const std::string& prefix, int input_dim,
                          int hidden_dim, int output_dim) {
  MlpBlock b;
  b.input_dim = input_dim;
  b.hidden_dim = hidden_dim;
  b.output_dim = output_dim;
  b.w1 = store.add(prefix + ".w1", input_dim, hidden_dim);
  b.b1 = store.add(prefix + ".b1", 1, hidden_dim);
  b.w2 = store.add(prefix + ".w2", hidden_dim, output_dim);
  b.b2 = store.add(prefix + ".b2", 1, output_dim);
  b.ln_gain = store.add(prefix + ".ln_gain", 1, input_dim);
  b.ln_bias = store.add(prefix + ".ln_bias", 1, input_dim);
  return b;
}

void MlpBlock::init(ParamStore& store, Rng& rng, bool zero_output) const {
  store.fill_kaiming_uniform(w1, rng);
  store.fill_kaiming_uniform(b1, rng);
  if (zero_output) {
    store.fill(w2, 0.0);
    store.fill(b2, 0.0);
  } else {
    store.fill_kaiming_uniform(w2, rng);
    store.fill_kaiming_uniform(b2, rng);
  }
  store.fill(ln_gain, 1.0);
  store.fill(ln_bias, 0.0);
}

Tensor MlpBlock::apply_no_residual(const BoundParams& p, const Tensor& input) const {
  Tensor h = layer_norm(input, p[ln_gain], p[ln_bias]);
  h = leaky_relu(add_rowvec(matmul(h, p[w1]), p[b1]), 0.01);
  return add_rowvec(matmul(h, p[w2]), p[b2]);
}

Tensor MlpBlock::apply(const BoundParams& p, const Tensor& residual, const Tensor& input) const {
  return add(residual, apply_no_residual(p, input));
}

std::vector<double> sinusoidal_time_embedding(int t, int dim) {
  if (dim <= 0 || dim % 2 != 0)
    throw std::invalid_argument("time embedding dimension must be positive and even");
  std::vector<double> emb(dim);
  for (int i = 0; i < dim / 2; ++i) {
    double freq = std::pow(10000.0, -2.0 * i / dim);
    emb[2 * i] = std::sin(t * freq);
    emb[2 * i + 1] = std::cos(t * freq);
  }
  return emb;
}

void AdamW::step(std::vector<double>& params, const std::vector<double>& grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("adamw: size mismatch");
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  for (size_t i = 0; i < grads.size(); ++i)
    if (!std::isfinite(grads[i]))
      throw std::runtime_error("adamw: non-finite gradient at coordinate " + std::to_string(i) +
                               " (step " + std::to_string(step_count + 1) + ")");
  step_count += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    params[i] *= 1.0 - lr * weight_decay;
    m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

double cosine_lr(int64_t step, int64_t total_steps, double lr_start, double lr_end) {
  if (step < 0 || step > total_steps) throw std::invalid_argument("cosine_lr: step out of range");
  double phase = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + std::cos(M_PI * phase));
}

double clip_global_norm(std::vector<double>& grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  double norm = std::sqrt(sq);
  if (norm > max_norm) {
    double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace agentnet
