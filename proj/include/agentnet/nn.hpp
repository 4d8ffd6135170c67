#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agentnet/rng.hpp"
#include "agentnet/tensor.hpp"

namespace agentnet {

/// Flat named parameter storage. All learnable weights live in one
/// contiguous vector so the optimizer, gradient clipping, checkpointing and
/// finite-difference checks can treat them uniformly.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    int rows = 0;
    int cols = 0;
    size_t offset = 0;
  };

  size_t add(const std::string& name, int rows, int cols);

  size_t entry_count() const { return entries_.size(); }
  const Entry& entry(size_t idx) const { return entries_[idx]; }
  const std::vector<Entry>& entries() const { return entries_; }
  size_t total_size() const { return values_.size(); }

  std::span<double> view(size_t idx) {
    const Entry& e = entries_[idx];
    return {values_.data() + e.offset, static_cast<size_t>(e.rows) * e.cols};
  }
  std::span<const double> view(size_t idx) const {
    const Entry& e = entries_[idx];
    return {values_.data() + e.offset, static_cast<size_t>(e.rows) * e.cols};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void fill(size_t idx, double v);
  void fill_kaiming_uniform(size_t idx, Rng& rng);   // bound 1/sqrt(fan_in)
  void fill_normal(size_t idx, Rng& rng, double stddev = 1.0);
  void fill_uniform(size_t idx, Rng& rng, double lo, double hi);

  /// FNV-1a over entry names and raw parameter bytes.
  uint64_t content_hash() const;

  std::string to_json() const;
  static ParamStore from_json(const std::string& text);
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::vector<Entry> entries_;
  std::vector<double> values_;
};

/// Per-rollout leaf tensors over a ParamStore. With a tape the leaves
/// require gradients (harvested back into a flat vector after backward);
/// without one they are plain constants for evaluation-only rollouts.
struct BoundParams {
  const ParamStore* store = nullptr;
  std::vector<Tensor> tensors;  // indexed like store entries

  const Tensor& operator[](size_t idx) const { return tensors[idx]; }

  /// Accumulate leaf gradients into `flat` (size total_size()).
  void harvest_grad(std::vector<double>& flat) const;
};
BoundParams bind_params(const ParamStore& store, Tape* tape);

/// Pre-LN residual block: two affine maps with leaky-relu(0.01) between,
/// layer norm over the concatenated input, output added to the residual
/// stream. With the output affine zero-initialized the block is exactly the
/// identity on the residual stream.
struct MlpBlock {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, ln_gain = 0, ln_bias = 0;

  static MlpBlock create(ParamStore& store, const std::string& prefix, int input_dim,
                         int hidden_dim, int output_dim);

  /// Kaiming-uniform hidden layer, zero output layer (identity block), unit
  /// layer-norm gain.
  void init(ParamStore& store, Rng& rng, bool zero_output = true) const;

  /// residual + W2 * leaky_relu(W1 * LN(input) + b1) + b2
  Tensor apply(const BoundParams& p, const Tensor& residual, const Tensor& input) const;

  /// The block body without the residual add (used for non-residual heads).
  Tensor apply_no_residual(const BoundParams& p, const Tensor& input) const;
};

/// Interleaved sin/cos embedding of an integer time step at geometric
/// frequencies (the Transformer convention). dim must be even.
std::vector<double> sinusoidal_time_embedding(int t, int dim);

/// Decoupled-weight-decay Adam over a flat parameter vector.
struct AdamW {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.1;
  int64_t step_count = 0;
  std::vector<double> m;
  std::vector<double> v;

  /// Applies decay directly to the parameters (scaled by lr), then the
  /// bias-corrected moment update. Throws on non-finite gradients with a
  /// diagnostic message; the step is not applied.
  void step(std::vector<double>& params, const std::vector<double>& grads);
};

/// lr_end + 0.5 * (lr_start - lr_end) * (1 + cos(pi * step / total_steps))
double cosine_lr(int64_t step, int64_t total_steps, double lr_start = 1e-4,
                 double lr_end = 1e-11);

/// Scale all gradients by max_norm/||g||_2 when the global norm exceeds
/// max_norm. Returns the pre-clip norm.
double clip_global_norm(std::vector<double>& grads, double max_norm = 1.0);

}  // namespace agentnet
