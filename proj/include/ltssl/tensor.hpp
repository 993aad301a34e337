#ifndef LTSSL_TENSOR_HPP
#define LTSSL_TENSOR_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ltssl {

// Dense row-major float64 tensor participating in reverse-mode
// differentiation over a dynamic tape. Tensor is a value-semantics handle to
// a shared impl; copies alias the same storage. Data is immutable after
// creation except for gradient accumulation during backward and in-place
// parameter updates by the optimizer (which happen between tapes).
//
// Supported ranks are 1 and 2. A scalar is shape {1}. There is no general
// broadcasting: the only shape-extending rules are add([n,m], [m]) (bias
// vector over the batch) and scale_rows([n,m], [n]) (per-row scalar), each
// documented at the op.

struct TensorImpl {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until populated by backward
  bool requires_grad = false;
  int node = -1;  // tape node that produced this tensor, -1 for leaves
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const { return impl_->shape; }
  std::int64_t numel() const { return static_cast<std::int64_t>(impl_->data.size()); }
  int rows() const;  // first dimension
  int cols() const;  // last dimension (1D tensors: the length)

  const double* data() const { return impl_->data.data(); }
  double* data() { return impl_->data.data(); }
  std::vector<double>& values() { return impl_->data; }
  const std::vector<double>& values() const { return impl_->data; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool v) { impl_->requires_grad = v; }
  bool grad_populated() const { return impl_->grad.size() == impl_->data.size(); }
  std::vector<double>& grad() { return impl_->grad; }
  const std::vector<double>& grad() const { return impl_->grad; }
  void clear_grad() { impl_->grad.clear(); }

  double item() const;                    // scalar tensors only
  double at(int i) const;                 // 1D
  double at(int i, int j) const;          // 2D

  // A non-recording copy of the values: same data vector copied, no grad, no
  // tape link.
  Tensor detach() const;

  std::shared_ptr<TensorImpl> impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

std::string shape_str(const std::vector<int>& shape);

// Ordered record of differentiable operations. Nodes are appended in
// execution order, which is a topological order of the computation graph;
// backward(loss) seeds d loss/d loss = 1 and runs the recorded backward
// rules once each, in reverse order from the loss node. Gradients accumulate
// additively across fan-out. One tape per training step; recording can be
// switched off for evaluation-only forwards.
class Tape {
 public:
  bool recording() const { return recording_; }
  void set_recording(bool v) { recording_ = v; }

  int record(std::function<void()> backward_rule);
  void backward(const Tensor& loss);
  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<std::function<void()>> nodes_;
  bool recording_ = true;
};

// ------------------------------------------------------------------ ops
// Every op writes its forward result eagerly and, when recording and any
// operand requires grad, records a backward rule on the tape.

// [n,k] x [k,m] -> [n,m]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// same shape, or [n,m] + [m] bias broadcast over rows
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
// elementwise, same shape only
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
// [n,m] scaled per row by s[n]
Tensor scale_rows(Tape& tape, const Tensor& x, const Tensor& s);
Tensor relu(Tape& tape, const Tensor& x);
// softmax over the last axis; 1D input is one row
Tensor softmax(Tape& tape, const Tensor& x);
// elementwise natural log (IEEE semantics at/below zero)
Tensor tlog(Tape& tape, const Tensor& x);
Tensor scalar_mul(Tape& tape, const Tensor& x, double c);
// fixed left-to-right reduction order, deterministic
Tensor sum_all(Tape& tape, const Tensor& x);
Tensor mean_all(Tape& tape, const Tensor& x);
// concatenate over the last axis: [n,a],[n,b],... -> [n,a+b+...]
Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts);
// out[i] = x[i, idx[i]], shape [n]
Tensor gather_cols(Tape& tape, const Tensor& x, const std::vector<int>& idx);
// mean over rows of -log p[i, y_i], masked rows contribute zero but the
// denominator stays the row count; probs rows are assumed to sum to 1
Tensor cross_entropy(Tape& tape, const Tensor& probs, const std::vector<int>& targets,
                     const std::vector<double>* mask = nullptr);

}  // namespace ltssl

#endif
