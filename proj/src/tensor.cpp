#include "agentnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "agentnet/rng.hpp"

namespace agentnet {

namespace {

std::shared_ptr<TensorData> make_data(int rows, int cols) {
  auto d = std::make_shared<TensorData>();
  d->rows = rows;
  d->cols = cols;
  d->value.assign(static_cast<size_t>(rows) * cols, 0.0);
  return d;
}

Tape* tape_of(std::initializer_list<const Tensor*> inputs) {
  for (const Tensor* t : inputs)
    if (t->defined() && t->data()->requires_grad && t->data()->tape) return t->data()->tape;
  return nullptr;
}

Tensor make_output(int rows, int cols, Tape* tape) {
  auto d = make_data(rows, cols);
  d->tape = tape;
  d->requires_grad = tape != nullptr;
  return Tensor(std::move(d));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_acc(const double* __restrict A, const double* __restrict B, double* __restrict C,
              int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* __restrict a = A + static_cast<size_t>(i) * k;
    double* __restrict c = C + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = a[p];
      const double* __restrict b = B + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

// C[m x k] += A[m x n] * B^T where B is [k x n]
void gemm_nt_acc(const double* __restrict A, const double* __restrict B, double* __restrict C,
                 int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const double* __restrict a = A + static_cast<size_t>(i) * n;
    double* __restrict c = C + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* __restrict b = B + static_cast<size_t>(p) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += a[j] * b[j];
      c[p] += acc;
    }
  }
}

// C[k x n] += A^T * B where A is [m x k], B is [m x n]
void gemm_tn_acc(const double* __restrict A, const double* __restrict B, double* __restrict C,
                 int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* __restrict a = A + static_cast<size_t>(i) * k;
    const double* __restrict b = B + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = a[p];
      double* __restrict c = C + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) c[j] += av * b[j];
    }
  }
}

}  // namespace

Tensor Tensor::constant(int rows, int cols, std::vector<double> values) {
  if (static_cast<size_t>(rows) * cols != values.size())
    throw std::invalid_argument("constant: value count does not match shape");
  auto d = std::make_shared<TensorData>();
  d->rows = rows;
  d->cols = cols;
  d->value = std::move(values);
  return Tensor(std::move(d));
}

Tensor Tensor::zeros(int rows, int cols) { return Tensor(make_data(rows, cols)); }

Tensor Tensor::row(std::vector<double> values) {
  int c = static_cast<int>(values.size());
  return constant(1, c, std::move(values));
}

Tensor Tape::leaf(int rows, int cols, const double* values) {
  auto d = make_data(rows, cols);
  std::copy(values, values + d->value.size(), d->value.begin());
  d->tape = this;
  d->requires_grad = true;
  return Tensor(std::move(d));
}

void Tape::backward(const Tensor& scalar_output) {
  if (scalar_output.size() != 1) throw std::invalid_argument("backward: output must be scalar");
  scalar_output.data()->ensure_grad();
  scalar_output.data()->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

namespace {

// Gradient accumulation helper shared by all backward closures.
inline bool pull(const std::shared_ptr<TensorData>& out) { return !out->grad.empty(); }
inline std::vector<double>* push(const std::shared_ptr<TensorData>& in) {
  if (!in->requires_grad) return nullptr;
  in->ensure_grad();
  return &in->grad;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tape* tape = tape_of({&a, &b});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i)
    out.data()->value[i] = a.value()[i] + b.value()[i];
  if (tape) {
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    tape->record([ad, bd, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
      if (auto* g = push(bd))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tape* tape = tape_of({&a, &b});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i)
    out.data()->value[i] = a.value()[i] - b.value()[i];
  if (tape) {
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    tape->record([ad, bd, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
      if (auto* g = push(bd))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] -= od->grad[i];
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tape* tape = tape_of({&a, &b});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i)
    out.data()->value[i] = a.value()[i] * b.value()[i];
  if (tape) {
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    tape->record([ad, bd, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i] * bd->value[i];
      if (auto* g = push(bd))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i] * ad->value[i];
    });
  }
  return out;
}

Tensor smul(const Tensor& a, double s) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i) out.data()->value[i] = a.value()[i] * s;
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, s] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i] * s;
    });
  }
  return out;
}

Tensor sadd(const Tensor& a, double s) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i) out.data()->value[i] = a.value()[i] + s;
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
    });
  }
  return out;
}

Tensor mul_scalar_t(const Tensor& a, const Tensor& s) {
  if (s.size() != 1) throw std::invalid_argument("mul_scalar_t: s must be 1x1");
  Tape* tape = tape_of({&a, &s});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  double sv = s.scalar_value();
  for (int64_t i = 0; i < a.size(); ++i) out.data()->value[i] = a.value()[i] * sv;
  if (tape) {
    auto ad = a.ptr(), sd = s.ptr(), od = out.ptr();
    tape->record([ad, sd, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i] * sd->value[0];
      if (auto* g = push(sd)) {
        double acc = 0.0;
        for (size_t i = 0; i < ad->value.size(); ++i) acc += od->grad[i] * ad->value[i];
        (*g)[0] += acc;
      }
    });
  }
  return out;
}

Tensor log_t(const Tensor& a) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i) out.data()->value[i] = std::log(a.value()[i]);
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i] / ad->value[i];
    });
  }
  return out;
}

Tensor leaky_relu(const Tensor& a, double negative_slope) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  for (int64_t i = 0; i < a.size(); ++i) {
    double x = a.value()[i];
    out.data()->value[i] = x >= 0.0 ? x : negative_slope * x;
  }
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, negative_slope] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) {
          // Subgradient at 0: the right derivative (slope 1).
          double slope = ad->value[i] >= 0.0 ? 1.0 : negative_slope;
          (*g)[i] += od->grad[i] * slope;
        }
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.cols(), a.rows(), tape);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.data()->value[static_cast<size_t>(j) * a.rows() + i] = a.at(i, j);
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int r = ad->rows, c = ad->cols;
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j)
            (*g)[static_cast<size_t>(i) * c + j] += od->grad[static_cast<size_t>(j) * r + i];
      }
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  int rows = parts[0].rows();
  int cols = 0;
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
    if (!tape) tape = tape_of({&p});
  }
  Tensor out = make_output(rows, cols, tape);
  int col0 = 0;
  for (const Tensor& p : parts) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < p.cols(); ++j)
        out.data()->value[static_cast<size_t>(i) * cols + col0 + j] = p.at(i, j);
    col0 += p.cols();
  }
  if (tape) {
    std::vector<std::shared_ptr<TensorData>> ps;
    for (const Tensor& p : parts) ps.push_back(p.ptr());
    auto od = out.ptr();
    tape->record([ps, od] {
      if (!pull(od)) return;
      int rows = od->rows, cols = od->cols;
      int col0 = 0;
      for (const auto& pd : ps) {
        if (auto* g = push(pd)) {
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < pd->cols; ++j)
              (*g)[static_cast<size_t>(i) * pd->cols + j] +=
                  od->grad[static_cast<size_t>(i) * cols + col0 + j];
        }
        col0 += pd->cols;
      }
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  int cols = parts[0].cols();
  int rows = 0;
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p.rows();
    if (!tape) tape = tape_of({&p});
  }
  Tensor out = make_output(rows, cols, tape);
  size_t off = 0;
  for (const Tensor& p : parts) {
    std::copy(p.value().begin(), p.value().end(), out.data()->value.begin() + off);
    off += p.value().size();
  }
  if (tape) {
    std::vector<std::shared_ptr<TensorData>> ps;
    for (const Tensor& p : parts) ps.push_back(p.ptr());
    auto od = out.ptr();
    tape->record([ps, od] {
      if (!pull(od)) return;
      size_t off = 0;
      for (const auto& pd : ps) {
        if (auto* g = push(pd))
          for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[off + i];
        off += pd->value.size();
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& a, int begin, int count) {
  if (begin < 0 || count < 0 || begin + count > a.rows())
    throw std::invalid_argument("slice_rows: out of range");
  Tape* tape = tape_of({&a});
  Tensor out = make_output(count, a.cols(), tape);
  size_t off = static_cast<size_t>(begin) * a.cols();
  std::copy(a.value().begin() + off, a.value().begin() + off + out.size(),
            out.data()->value.begin());
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, off] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < od->grad.size(); ++i) (*g)[off + i] += od->grad[i];
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& indices) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(static_cast<int>(indices.size()), a.cols(), tape);
  int c = a.cols();
  for (size_t k = 0; k < indices.size(); ++k) {
    int idx = indices[k];
    if (idx < 0 || idx >= a.rows()) throw std::invalid_argument("gather_rows: index out of range");
    std::copy(a.value().begin() + static_cast<size_t>(idx) * c,
              a.value().begin() + static_cast<size_t>(idx + 1) * c,
              out.data()->value.begin() + k * c);
  }
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, indices] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (size_t k = 0; k < indices.size(); ++k)
          for (int j = 0; j < c; ++j)
            (*g)[static_cast<size_t>(indices[k]) * c + j] += od->grad[k * c + j];
      }
    });
  }
  return out;
}

Tensor scatter_rows_add(const Tensor& base, const std::vector<int>& indices, const Tensor& rows) {
  if (static_cast<int>(indices.size()) != rows.rows())
    throw std::invalid_argument("scatter_rows_add: index count mismatch");
  if (base.cols() != rows.cols()) throw std::invalid_argument("scatter_rows_add: column mismatch");
  Tape* tape = tape_of({&base, &rows});
  Tensor out = make_output(base.rows(), base.cols(), tape);
  out.data()->value = base.value();
  int c = base.cols();
  for (size_t k = 0; k < indices.size(); ++k) {
    int idx = indices[k];
    if (idx < 0 || idx >= base.rows())
      throw std::invalid_argument("scatter_rows_add: index out of range");
    for (int j = 0; j < c; ++j)
      out.data()->value[static_cast<size_t>(idx) * c + j] += rows.at(static_cast<int>(k), j);
  }
  if (tape) {
    auto bd = base.ptr(), rd = rows.ptr(), od = out.ptr();
    tape->record([bd, rd, od, indices] {
      if (!pull(od)) return;
      if (auto* g = push(bd))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
      if (auto* g = push(rd)) {
        int c = rd->cols;
        for (size_t k = 0; k < indices.size(); ++k)
          for (int j = 0; j < c; ++j)
            (*g)[k * c + j] += od->grad[static_cast<size_t>(indices[k]) * c + j];
      }
    });
  }
  return out;
}

Tensor elem(const Tensor& a, int r, int c) {
  if (r < 0 || r >= a.rows() || c < 0 || c >= a.cols())
    throw std::invalid_argument("elem: out of range");
  Tape* tape = tape_of({&a});
  Tensor out = make_output(1, 1, tape);
  out.data()->value[0] = a.at(r, c);
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    size_t off = static_cast<size_t>(r) * a.cols() + c;
    tape->record([ad, od, off] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) (*g)[off] += od->grad[0];
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Tape* tape = tape_of({&a, &b});
  Tensor out = make_output(a.rows(), b.cols(), tape);
  gemm_acc(a.value().data(), b.value().data(), out.data()->value.data(), a.rows(), a.cols(),
           b.cols());
  if (tape) {
    auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
    tape->record([ad, bd, od] {
      if (!pull(od)) return;
      int m = ad->rows, k = ad->cols, n = bd->cols;
      if (auto* g = push(ad))
        gemm_nt_acc(od->grad.data(), bd->value.data(), g->data(), m, n, k);
      if (auto* g = push(bd))
        gemm_tn_acc(ad->value.data(), od->grad.data(), g->data(), m, k, n);
    });
  }
  return out;
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  if (v.rows() != 1 || v.cols() != a.cols())
    throw std::invalid_argument("add_rowvec: v must be 1 x cols(a)");
  Tape* tape = tape_of({&a, &v});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  int c = a.cols();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < c; ++j)
      out.data()->value[static_cast<size_t>(i) * c + j] = a.at(i, j) + v.value()[j];
  if (tape) {
    auto ad = a.ptr(), vd = v.ptr(), od = out.ptr();
    tape->record([ad, vd, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[i];
      if (auto* g = push(vd)) {
        int c = vd->cols;
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j) (*g)[j] += od->grad[static_cast<size_t>(i) * c + j];
      }
    });
  }
  return out;
}

Tensor scale_rows(const Tensor& a, const Tensor& w) {
  if (w.cols() != 1 || w.rows() != a.rows())
    throw std::invalid_argument("scale_rows: w must be rows(a) x 1");
  Tape* tape = tape_of({&a, &w});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  int c = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double wi = w.value()[i];
    for (int j = 0; j < c; ++j)
      out.data()->value[static_cast<size_t>(i) * c + j] = a.at(i, j) * wi;
  }
  if (tape) {
    auto ad = a.ptr(), wd = w.ptr(), od = out.ptr();
    tape->record([ad, wd, od] {
      if (!pull(od)) return;
      int c = ad->cols;
      if (auto* g = push(ad))
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j)
            (*g)[static_cast<size_t>(i) * c + j] +=
                od->grad[static_cast<size_t>(i) * c + j] * wd->value[i];
      if (auto* g = push(wd))
        for (int i = 0; i < ad->rows; ++i) {
          double acc = 0.0;
          for (int j = 0; j < c; ++j)
            acc += od->grad[static_cast<size_t>(i) * c + j] *
                   ad->value[static_cast<size_t>(i) * c + j];
          (*g)[i] += acc;
        }
    });
  }
  return out;
}

Tensor scale_rows_const(const Tensor& a, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != a.rows())
    throw std::invalid_argument("scale_rows_const: weight count mismatch");
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  int c = a.cols();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < c; ++j)
      out.data()->value[static_cast<size_t>(i) * c + j] = a.at(i, j) * w[i];
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, w] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j)
            (*g)[static_cast<size_t>(i) * c + j] +=
                od->grad[static_cast<size_t>(i) * c + j] * w[i];
      }
    });
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(1, 1, tape);
  double acc = 0.0;
  for (double x : a.value()) acc += x;
  out.data()->value[0] = acc;
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad))
        for (size_t i = 0; i < g->size(); ++i) (*g)[i] += od->grad[0];
    });
  }
  return out;
}

Tensor sum_cols(const Tensor& a) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), 1, tape);
  int c = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += a.at(i, j);
    out.data()->value[i] = acc;
  }
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j) (*g)[static_cast<size_t>(i) * c + j] += od->grad[i];
      }
    });
  }
  return out;
}

Tensor mean_rows(const Tensor& a) {
  if (a.rows() < 1) throw std::invalid_argument("mean_rows: empty input");
  Tape* tape = tape_of({&a});
  Tensor out = make_output(1, a.cols(), tape);
  int c = a.cols();
  double inv = 1.0 / a.rows();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < c; ++j) out.data()->value[j] += a.at(i, j) * inv;
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, inv] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j) (*g)[static_cast<size_t>(i) * c + j] += od->grad[j] * inv;
      }
    });
  }
  return out;
}

Tensor max_rows(const Tensor& a) {
  if (a.rows() < 1) throw std::invalid_argument("max_rows: empty input");
  Tape* tape = tape_of({&a});
  Tensor out = make_output(1, a.cols(), tape);
  int c = a.cols();
  std::vector<int> argmax(c, 0);
  for (int j = 0; j < c; ++j) {
    double best = a.at(0, j);
    for (int i = 1; i < a.rows(); ++i)
      if (a.at(i, j) > best) {
        best = a.at(i, j);
        argmax[j] = i;
      }
    out.data()->value[j] = best;
  }
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od, argmax] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (int j = 0; j < c; ++j)
          (*g)[static_cast<size_t>(argmax[j]) * c + j] += od->grad[j];
      }
    });
  }
  return out;
}

namespace {

std::vector<int> group_sizes(const std::vector<int>& group_ids, int group_count, int rows) {
  if (static_cast<int>(group_ids.size()) != rows)
    throw std::invalid_argument("group id count mismatch");
  std::vector<int> sizes(group_count, 0);
  for (int gid : group_ids) {
    if (gid < 0 || gid >= group_count) throw std::invalid_argument("group id out of range");
    sizes[gid] += 1;
  }
  return sizes;
}

Tensor segment_scaled_sum(const Tensor& rows, const std::vector<int>& group_ids, int group_count,
                          const std::vector<double>& scale) {
  Tape* tape = tape_of({&rows});
  Tensor out = make_output(group_count, rows.cols(), tape);
  int c = rows.cols();
  for (int i = 0; i < rows.rows(); ++i) {
    int gid = group_ids[i];
    for (int j = 0; j < c; ++j)
      out.data()->value[static_cast<size_t>(gid) * c + j] += rows.at(i, j) * scale[gid];
  }
  if (tape) {
    auto rd = rows.ptr(), od = out.ptr();
    tape->record([rd, od, group_ids, scale] {
      if (!pull(od)) return;
      if (auto* g = push(rd)) {
        int c = rd->cols;
        for (int i = 0; i < rd->rows; ++i) {
          int gid = group_ids[i];
          for (int j = 0; j < c; ++j)
            (*g)[static_cast<size_t>(i) * c + j] +=
                od->grad[static_cast<size_t>(gid) * c + j] * scale[gid];
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor segment_sum(const Tensor& rows, const std::vector<int>& group_ids, int group_count) {
  group_sizes(group_ids, group_count, rows.rows());
  return segment_scaled_sum(rows, group_ids, group_count, std::vector<double>(group_count, 1.0));
}

Tensor segment_mean(const Tensor& rows, const std::vector<int>& group_ids, int group_count) {
  auto sizes = group_sizes(group_ids, group_count, rows.rows());
  std::vector<double> scale(group_count);
  for (int g = 0; g < group_count; ++g) {
    if (sizes[g] == 0) throw std::invalid_argument("segment_mean: empty group");
    scale[g] = 1.0 / sizes[g];
  }
  return segment_scaled_sum(rows, group_ids, group_count, scale);
}

Tensor segment_max(const Tensor& rows, const std::vector<int>& group_ids, int group_count) {
  auto sizes = group_sizes(group_ids, group_count, rows.rows());
  for (int g = 0; g < group_count; ++g)
    if (sizes[g] == 0) throw std::invalid_argument("segment_max: empty group");
  Tape* tape = tape_of({&rows});
  Tensor out = make_output(group_count, rows.cols(), tape);
  int c = rows.cols();
  std::vector<int> argmax(static_cast<size_t>(group_count) * c, -1);
  for (int i = 0; i < rows.rows(); ++i) {
    int gid = group_ids[i];
    for (int j = 0; j < c; ++j) {
      size_t o = static_cast<size_t>(gid) * c + j;
      if (argmax[o] < 0 || rows.at(i, j) > out.data()->value[o]) {
        out.data()->value[o] = rows.at(i, j);
        argmax[o] = i;
      }
    }
  }
  if (tape) {
    auto rd = rows.ptr(), od = out.ptr();
    tape->record([rd, od, argmax] {
      if (!pull(od)) return;
      if (auto* g = push(rd)) {
        int c = rd->cols;
        for (size_t o = 0; o < argmax.size(); ++o)
          (*g)[static_cast<size_t>(argmax[o]) * c + o % c] += od->grad[o];
      }
    });
  }
  return out;
}

Tensor log_scaled_sum(const Tensor& rows, const std::vector<int>& group_ids, int group_count) {
  auto sizes = group_sizes(group_ids, group_count, rows.rows());
  std::vector<double> scale(group_count);
  for (int g = 0; g < group_count; ++g) {
    if (sizes[g] == 0) throw std::invalid_argument("log_scaled_sum: empty group");
    scale[g] = std::log(static_cast<double>(sizes[g]) + 1.0) / sizes[g];
  }
  return segment_scaled_sum(rows, group_ids, group_count, scale);
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != a.cols() || bias.rows() != 1 || bias.cols() != a.cols())
    throw std::invalid_argument("layer_norm: gain/bias must be 1 x cols(a)");
  Tape* tape = tape_of({&a, &gain, &bias});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  int c = a.cols();
  std::vector<double> xhat(a.value().size());
  std::vector<double> inv_std(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < c; ++j) mean += a.at(i, j);
    mean /= c;
    double var = 0.0;
    for (int j = 0; j < c; ++j) {
      double d = a.at(i, j) - mean;
      var += d * d;
    }
    var /= c;
    double inv = 1.0 / std::sqrt(var + eps);
    inv_std[i] = inv;
    for (int j = 0; j < c; ++j) {
      size_t o = static_cast<size_t>(i) * c + j;
      xhat[o] = (a.at(i, j) - mean) * inv;
      out.data()->value[o] = xhat[o] * gain.value()[j] + bias.value()[j];
    }
  }
  if (tape) {
    auto ad = a.ptr(), gd = gain.ptr(), bd = bias.ptr(), od = out.ptr();
    tape->record([ad, gd, bd, od, xhat, inv_std] {
      if (!pull(od)) return;
      int c = ad->cols;
      if (auto* g = push(gd))
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j) {
            size_t o = static_cast<size_t>(i) * c + j;
            (*g)[j] += od->grad[o] * xhat[o];
          }
      if (auto* g = push(bd))
        for (int i = 0; i < ad->rows; ++i)
          for (int j = 0; j < c; ++j) (*g)[j] += od->grad[static_cast<size_t>(i) * c + j];
      if (auto* g = push(ad)) {
        for (int i = 0; i < ad->rows; ++i) {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int j = 0; j < c; ++j) {
            size_t o = static_cast<size_t>(i) * c + j;
            double dxhat = od->grad[o] * gd->value[j];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat[o];
          }
          mean_dxhat /= c;
          mean_dxhat_xhat /= c;
          for (int j = 0; j < c; ++j) {
            size_t o = static_cast<size_t>(i) * c + j;
            double dxhat = od->grad[o] * gd->value[j];
            (*g)[o] += inv_std[i] * (dxhat - mean_dxhat - xhat[o] * mean_dxhat_xhat);
          }
        }
      }
    });
  }
  return out;
}

Tensor softmax(const Tensor& a) {
  Tape* tape = tape_of({&a});
  Tensor out = make_output(a.rows(), a.cols(), tape);
  int c = a.cols();
  for (int i = 0; i < a.rows(); ++i) {
    double m = a.at(i, 0);
    for (int j = 1; j < c; ++j) m = std::max(m, a.at(i, j));
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      double e = std::exp(a.at(i, j) - m);
      out.data()->value[static_cast<size_t>(i) * c + j] = e;
      z += e;
    }
    for (int j = 0; j < c; ++j) out.data()->value[static_cast<size_t>(i) * c + j] /= z;
  }
  if (tape) {
    auto ad = a.ptr(), od = out.ptr();
    tape->record([ad, od] {
      if (!pull(od)) return;
      if (auto* g = push(ad)) {
        int c = ad->cols;
        for (int i = 0; i < ad->rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < c; ++j) {
            size_t o = static_cast<size_t>(i) * c + j;
            dot += od->grad[o] * od->value[o];
          }
          for (int j = 0; j < c; ++j) {
            size_t o = static_cast<size_t>(i) * c + j;
            (*g)[o] += od->value[o] * (od->grad[o] - dot);
          }
        }
      }
    });
  }
  return out;
}

Tensor cross_entropy(const Tensor& logits, int label) {
  if (logits.rows() != 1) throw std::invalid_argument("cross_entropy: logits must be 1 x C");
  if (label < 0 || label >= logits.cols())
    throw std::invalid_argument("cross_entropy: label out of range");
  for (double v : logits.value())
    if (!std::isfinite(v)) throw std::runtime_error("cross_entropy: non-finite logits");
  Tape* tape = tape_of({&logits});
  Tensor out = make_output(1, 1, tape);
  int c = logits.cols();
  double m = logits.value()[0];
  for (int j = 1; j < c; ++j) m = std::max(m, logits.value()[j]);
  double z = 0.0;
  for (int j = 0; j < c; ++j) z += std::exp(logits.value()[j] - m);
  out.data()->value[0] = std::log(z) + m - logits.value()[label];
  if (tape) {
    std::vector<double> probs(c);
    for (int j = 0; j < c; ++j) probs[j] = std::exp(logits.value()[j] - m) / z;
    auto ld = logits.ptr(), od = out.ptr();
    tape->record([ld, od, probs, label] {
      if (!pull(od)) return;
      if (auto* g = push(ld)) {
        for (size_t j = 0; j < probs.size(); ++j)
          (*g)[j] += od->grad[0] * (probs[j] - (static_cast<int>(j) == label ? 1.0 : 0.0));
      }
    });
  }
  return out;
}

Tensor gumbel_softmax_st(const Tensor& logits, double tau, const std::vector<double>& noise,
                         int* argmax_out) {
  if (logits.rows() != 1) throw std::invalid_argument("gumbel_softmax_st: logits must be 1 x m");
  if (tau <= 0.0) throw std::invalid_argument("gumbel_softmax_st: temperature must be positive");
  if (noise.size() != static_cast<size_t>(logits.cols()))
    throw std::invalid_argument("gumbel_softmax_st: noise size mismatch");
  for (double v : logits.value())
    if (!std::isfinite(v)) throw std::runtime_error("gumbel_softmax_st: non-finite logits");

  int m = logits.cols();
  std::vector<double> perturbed(m);
  int best = 0;
  for (int j = 0; j < m; ++j) {
    perturbed[j] = (logits.value()[j] + noise[j]) / tau;
    if (perturbed[j] > perturbed[best]) best = j;
  }
  if (argmax_out) *argmax_out = best;

  Tape* tape = tape_of({&logits});
  Tensor out = make_output(1, m, tape);
  out.data()->value[best] = 1.0;

  if (tape) {
    // Soft probabilities at the sampled noise, saved for the backward pass.
    double mx = perturbed[0];
    for (int j = 1; j < m; ++j) mx = std::max(mx, perturbed[j]);
    double z = 0.0;
    std::vector<double> soft(m);
    for (int j = 0; j < m; ++j) {
      soft[j] = std::exp(perturbed[j] - mx);
      z += soft[j];
    }
    for (int j = 0; j < m; ++j) soft[j] /= z;

    auto ld = logits.ptr(), od = out.ptr();
    tape->record([ld, od, soft, tau] {
      if (!pull(od)) return;
      if (auto* g = push(ld)) {
        double dot = 0.0;
        for (size_t j = 0; j < soft.size(); ++j) dot += od->grad[j] * soft[j];
        for (size_t j = 0; j < soft.size(); ++j)
          (*g)[j] += soft[j] * (od->grad[j] - dot) / tau;
      }
    });
  }
  return out;
}

GradCheckResult grad_check(const std::function<double()>& value,
                           const std::function<std::vector<double>()>& gradient,
                           std::vector<double>& params, double epsilon, int max_coordinates,
                           uint64_t sample_seed) {
  GradCheckResult result;
  std::vector<double> analytic = gradient();
  if (analytic.size() != params.size())
    throw std::invalid_argument("grad_check: gradient size mismatch");
  double f0 = value();
  if (!std::isfinite(f0)) throw std::runtime_error("grad_check: non-finite objective");

  std::vector<size_t> coords;
  if (max_coordinates < 0 || static_cast<size_t>(max_coordinates) >= params.size()) {
    coords.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) coords[i] = i;
  } else {
    std::vector<size_t> all(params.size());
    for (size_t i = 0; i < params.size(); ++i) all[i] = i;
    Rng rng(Rng::derive(sample_seed, {0xC0DE}));
    rng.shuffle(all);
    coords.assign(all.begin(), all.begin() + max_coordinates);
  }

  for (size_t i : coords) {
    double orig = params[i];
    params[i] = orig + epsilon;
    double fp = value();
    params[i] = orig - epsilon;
    double fm = value();
    params[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("grad_check: non-finite objective under perturbation");

    double right = (fp - f0) / epsilon;
    double left = (f0 - fm) / epsilon;
    double disagreement = std::abs(right - left);
    if (disagreement > 0.05 * std::max({std::abs(right), std::abs(left), 1e-10})) {
      // One-sided slopes disagree: a kink crosses the probe interval.
      result.excluded += 1;
      continue;
    }
    double central = (fp - fm) / (2.0 * epsilon);
    double denom = std::max({std::abs(central), std::abs(analytic[i]), 1e-8});
    // Differences below the cancellation noise of (fp - fm) itself carry no
    // signal about the analytic gradient.
    double fd_noise =
        8.0 * 2.220446049250313e-16 * std::max(1.0, std::abs(f0)) / epsilon;
    double abs_err = std::abs(central - analytic[i]);
    double rel = abs_err <= fd_noise ? 0.0 : abs_err / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = static_cast<int>(i);
    }
    result.checked += 1;
  }
  return result;
}

}  // namespace agentnet
