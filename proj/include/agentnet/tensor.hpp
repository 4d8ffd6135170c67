#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace agentnet {

class Tape;

struct TensorData {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;  // row-major rows x cols
  std::vector<double> grad;   // allocated lazily, same length as value
  bool requires_grad = false;
  Tape* tape = nullptr;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

/// Dense matrix (vectors are 1 x m, scalars 1 x 1) participating in a
/// reverse-mode gradient tape. Cheap handle; copying shares storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}

  static Tensor constant(int rows, int cols, std::vector<double> values);
  static Tensor zeros(int rows, int cols);
  static Tensor scalar(double v) { return constant(1, 1, {v}); }
  static Tensor row(std::vector<double> values);

  bool defined() const { return static_cast<bool>(d_); }
  int rows() const { return d_->rows; }
  int cols() const { return d_->cols; }
  int64_t size() const { return static_cast<int64_t>(d_->value.size()); }
  bool requires_grad() const { return d_->requires_grad; }

  double at(int r, int c) const { return d_->value[static_cast<size_t>(r) * d_->cols + c]; }
  double scalar_value() const { return d_->value[0]; }
  const std::vector<double>& value() const { return d_->value; }
  std::vector<double>& value() { return d_->value; }
  const std::vector<double>& grad() const { return d_->grad; }

  TensorData* data() const { return d_.get(); }
  const std::shared_ptr<TensorData>& ptr() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

/// Append-only record of differentiable operations. One tape per rollout;
/// tapes are not shared across threads.
class Tape {
 public:
  /// Leaf tensor the tape will differentiate with respect to.
  Tensor leaf(int rows, int cols, const double* values);
  Tensor leaf(int rows, int cols, const std::vector<double>& values) {
    return leaf(rows, cols, values.data());
  }

  void record(std::function<void()> backward_fn) { nodes_.push_back(std::move(backward_fn)); }

  /// Reverse pass from a scalar output: seeds its gradient with 1 and visits
  /// every node exactly once in reverse topological (= recording) order.
  void backward(const Tensor& scalar_output);

  size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<std::function<void()>> nodes_;
};

// --- elementwise / scalar ---------------------------------------------------
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);      // elementwise
Tensor smul(const Tensor& a, double s);
Tensor sadd(const Tensor& a, double s);
Tensor mul_scalar_t(const Tensor& a, const Tensor& s);  // s is 1x1
Tensor log_t(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double negative_slope = 0.01);

// --- shape ------------------------------------------------------------------
Tensor transpose(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);  // along the last axis
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int begin, int count);
Tensor gather_rows(const Tensor& a, const std::vector<int>& indices);
Tensor scatter_rows_add(const Tensor& base, const std::vector<int>& indices, const Tensor& rows);
Tensor elem(const Tensor& a, int r, int c);  // 1x1 view of one entry

// --- linear algebra ----------------------------------------------------------
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add_rowvec(const Tensor& a, const Tensor& v);       // broadcast 1 x c over rows
Tensor scale_rows(const Tensor& a, const Tensor& w);       // w is m x 1
Tensor scale_rows_const(const Tensor& a, const std::vector<double>& w);

// --- reductions / groups -----------------------------------------------------
Tensor sum_all(const Tensor& a);
Tensor sum_cols(const Tensor& a);   // m x 1, row-wise sum
Tensor mean_rows(const Tensor& a);  // 1 x c
Tensor max_rows(const Tensor& a);   // 1 x c, subgradient to the first maximal row
Tensor segment_sum(const Tensor& rows, const std::vector<int>& group_ids, int group_count);
Tensor segment_mean(const Tensor& rows, const std::vector<int>& group_ids, int group_count);
Tensor segment_max(const Tensor& rows, const std::vector<int>& group_ids, int group_count);

/// Mean of each group's rows scaled by ln(group size + 1); group sizes enter
/// as constants. Empty groups are an error.
Tensor log_scaled_sum(const Tensor& rows, const std::vector<int>& group_ids, int group_count);

// --- neural-net specific -----------------------------------------------------
/// Row-wise layer normalization over the last axis with learnable gain/bias
/// (both 1 x c).
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor softmax(const Tensor& a);  // row-wise
Tensor cross_entropy(const Tensor& logits, int label);  // logits 1 x C -> scalar

/// Straight-through Gumbel softmax over a 1 x m logit row. `noise` holds m
/// pre-drawn standard Gumbel samples (drawing them outside the op keeps
/// replays deterministic). Forward emits the exact one-hot at
/// argmax(logits + noise); backward routes gradients as if the forward had
/// been softmax((logits + noise) / tau).
Tensor gumbel_softmax_st(const Tensor& logits, double tau, const std::vector<double>& noise,
                         int* argmax_out = nullptr);

// --- finite-difference gradient checking -------------------------------------
struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int excluded = 0;  // coordinates skipped at nondifferentiable points
  int worst_index = -1;
};

/// Central finite differences against analytic gradients over the flat
/// parameter vector. `value` evaluates the scalar objective at the current
/// parameters; `gradient` returns the analytic gradient (same length as
/// params). All stochastic choices inside the objective must be frozen.
/// Coordinates where the two one-sided differences disagree strongly
/// (kinks such as the leaky_relu corner) are reported as excluded, not
/// failed. Relative error uses denominator max(|analytic|, |numeric|, 1e-8).
GradCheckResult grad_check(const std::function<double()>& value,
                           const std::function<std::vector<double>()>& gradient,
                           std::vector<double>& params, double epsilon = 1e-5,
                           int max_coordinates = -1, uint64_t sample_seed = 0);

}  // namespace agentnet
