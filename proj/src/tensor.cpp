#include "ltssl/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "ltssl/kernels.hpp"

namespace ltssl {

namespace {

std::int64_t product(const std::vector<int>& shape) {
  std::int64_t p = 1;
  for (int d : shape) p *= d;
  return p;
}

void check_shape(const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 2)
    throw std::invalid_argument("tensor: rank must be 1 or 2, got " + shape_str(shape));
  for (int d : shape)
    if (d <= 0) throw std::invalid_argument("tensor: nonpositive dim in " + shape_str(shape));
}

void ensure_grad(TensorImpl& t) {
  if (t.grad.size() != t.data.size()) t.grad.assign(t.data.size(), 0.0);
}

bool track(const Tape& tape, const Tensor& a) {
  return tape.recording() && a.requires_grad();
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  check_shape(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(static_cast<std::size_t>(product(shape)), 0.0);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t = zeros(std::move(shape));
  for (auto& v : t.impl()->data) v = value;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (static_cast<std::int64_t>(values.size()) != product(shape))
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values do not fill shape " + shape_str(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

int Tensor::rows() const { return impl_->shape.front(); }
int Tensor::cols() const { return impl_->shape.back(); }

double Tensor::item() const {
  if (numel() != 1)
    throw std::invalid_argument("item: tensor of shape " + shape_str(impl_->shape) + " is not scalar");
  return impl_->data[0];
}

double Tensor::at(int i) const { return impl_->data[static_cast<std::size_t>(i)]; }

double Tensor::at(int i, int j) const {
  return impl_->data[static_cast<std::size_t>(i) * cols() + j];
}

Tensor Tensor::detach() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

int Tape::record(std::function<void()> backward_rule) {
  nodes_.push_back(std::move(backward_rule));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  if (!loss.requires_grad())
    throw std::invalid_argument("backward: loss does not require grad");
  ensure_grad(*loss.impl());
  loss.impl()->grad[0] += 1.0;
  for (int id = loss.impl()->node; id >= 0; --id) nodes_[static_cast<std::size_t>(id)]();
}

// ------------------------------------------------------------------ ops

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows())
    throw std::invalid_argument("matmul: shape mismatch " + shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros({n, m});
  kernels::matmul_nn(a.data(), b.data(), out.data(), n, k, m);
  if (track(tape, a) || track(tape, b)) {
    out.set_requires_grad(true);
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    oi->node = tape.record([ai, bi, oi, n, k, m] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        ensure_grad(*ai);
        kernels::matmul_nt_acc(oi->grad.data(), bi->data.data(), ai->grad.data(), n, k, m);
      }
      if (bi->requires_grad) {
        ensure_grad(*bi);
        kernels::matmul_tn_acc(ai->data.data(), oi->grad.data(), bi->grad.data(), n, k, m);
      }
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  const bool bias_case = a.shape().size() == 2 && b.shape().size() == 1 && a.cols() == b.cols();
  if (!bias_case && a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) + " + " +
                                shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape());
  if (bias_case)
    kernels::add_bias(a.data(), b.data(), out.data(), a.rows(), a.cols());
  else
    kernels::add(a.data(), b.data(), out.data(), static_cast<std::size_t>(a.numel()));
  if (track(tape, a) || track(tape, b)) {
    out.set_requires_grad(true);
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    oi->node = tape.record([ai, bi, oi, bias_case] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        ensure_grad(*ai);
        for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        ensure_grad(*bi);
        if (bias_case) {
          const std::size_t m = bi->data.size();
          for (std::size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i % m] += oi->grad[i];
        } else {
          for (std::size_t i = 0; i < oi->grad.size(); ++i) bi->grad[i] += oi->grad[i];
        }
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) + " * " +
                                shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape());
  kernels::mul(a.data(), b.data(), out.data(), static_cast<std::size_t>(a.numel()));
  if (track(tape, a) || track(tape, b)) {
    out.set_requires_grad(true);
    auto ai = a.impl(), bi = b.impl(), oi = out.impl();
    oi->node = tape.record([ai, bi, oi] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        ensure_grad(*ai);
        for (std::size_t i = 0; i < oi->grad.size(); ++i)
          ai->grad[i] += oi->grad[i] * bi->data[i];
      }
      if (bi->requires_grad) {
        ensure_grad(*bi);
        for (std::size_t i = 0; i < oi->grad.size(); ++i)
          bi->grad[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return out;
}

Tensor scale_rows(Tape& tape, const Tensor& x, const Tensor& s) {
  if (x.shape().size() != 2 || s.shape().size() != 1 || s.cols() != x.rows())
    throw std::invalid_argument("scale_rows: shape mismatch " + shape_str(x.shape()) + " by " +
                                shape_str(s.shape()));
  const int n = x.rows(), m = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  kernels::scale_rows(x.data(), s.data(), out.data(), n, m);
  if (track(tape, x) || track(tape, s)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), si = s.impl(), oi = out.impl();
    oi->node = tape.record([xi, si, oi, n, m] {
      if (oi->grad.empty()) return;
      if (xi->requires_grad) {
        ensure_grad(*xi);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j)
            xi->grad[static_cast<std::size_t>(i) * m + j] +=
                oi->grad[static_cast<std::size_t>(i) * m + j] * si->data[static_cast<std::size_t>(i)];
      }
      if (si->requires_grad) {
        ensure_grad(*si);
        for (int i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < m; ++j)
            acc += oi->grad[static_cast<std::size_t>(i) * m + j] *
                   xi->data[static_cast<std::size_t>(i) * m + j];
          si->grad[static_cast<std::size_t>(i)] += acc;
        }
      }
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  kernels::relu(x.data(), out.data(), static_cast<std::size_t>(x.numel()));
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      kernels::relu_bwd_acc(xi->data.data(), oi->grad.data(), xi->grad.data(), xi->data.size());
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& x) {
  const int n = x.shape().size() == 2 ? x.rows() : 1;
  const int m = x.cols();
  Tensor out = Tensor::zeros(x.shape());
  kernels::softmax_rows(x.data(), out.data(), n, m);
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi, n, m] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      kernels::softmax_rows_bwd_acc(oi->data.data(), oi->grad.data(), xi->grad.data(), n, m);
    });
  }
  return out;
}

Tensor tlog(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) out.data()[i] = std::log(x.data()[i]);
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      for (std::size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += oi->grad[i] / xi->data[i];
    });
  }
  return out;
}

Tensor scalar_mul(Tape& tape, const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * c;
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi, c] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      for (std::size_t i = 0; i < oi->grad.size(); ++i) xi->grad[i] += oi->grad[i] * c;
    });
  }
  return out;
}

Tensor sum_all(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.numel(); ++i) acc += x.data()[i];
  Tensor out = Tensor::scalar(acc);
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      for (auto& g : xi->grad) g += oi->grad[0];
    });
  }
  return out;
}

Tensor mean_all(Tape& tape, const Tensor& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.numel(); ++i) acc += x.data()[i];
  const double inv_n = 1.0 / static_cast<double>(x.numel());
  Tensor out = Tensor::scalar(acc * inv_n);
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi, inv_n] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      for (auto& g : xi->grad) g += oi->grad[0] * inv_n;
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
  const int n = parts.front().shape().size() == 2 ? parts.front().rows() : 1;
  int total = 0;
  for (const auto& p : parts) {
    const int pn = p.shape().size() == 2 ? p.rows() : 1;
    if (pn != n)
      throw std::invalid_argument("concat_cols: row mismatch " + shape_str(parts.front().shape()) +
                                  " vs " + shape_str(p.shape()));
    total += p.cols();
  }
  Tensor out = Tensor::zeros(n == 1 && parts.front().shape().size() == 1
                                 ? std::vector<int>{total}
                                 : std::vector<int>{n, total});
  int off = 0;
  for (const auto& p : parts) {
    const int m = p.cols();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        out.data()[static_cast<std::size_t>(i) * total + off + j] = p.at(i * m + j);
    off += m;
  }
  bool any = false;
  for (const auto& p : parts) any = any || track(tape, p);
  if (any) {
    out.set_requires_grad(true);
    std::vector<std::shared_ptr<TensorImpl>> impls;
    impls.reserve(parts.size());
    for (const auto& p : parts) impls.push_back(p.impl());
    auto oi = out.impl();
    oi->node = tape.record([impls, oi, n, total] {
      if (oi->grad.empty()) return;
      int off2 = 0;
      for (const auto& pi : impls) {
        const int m = static_cast<int>(pi->data.size()) / n;
        if (pi->requires_grad) {
          ensure_grad(*pi);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
              pi->grad[static_cast<std::size_t>(i) * m + j] +=
                  oi->grad[static_cast<std::size_t>(i) * total + off2 + j];
        }
        off2 += m;
      }
    });
  }
  return out;
}

Tensor gather_cols(Tape& tape, const Tensor& x, const std::vector<int>& idx) {
  if (x.shape().size() != 2)
    throw std::invalid_argument("gather_cols: need 2D input, got " + shape_str(x.shape()));
  const int n = x.rows(), m = x.cols();
  if (static_cast<int>(idx.size()) != n)
    throw std::invalid_argument("gather_cols: " + std::to_string(idx.size()) +
                                " indices for " + std::to_string(n) + " rows");
  for (int i : idx)
    if (i < 0 || i >= m)
      throw std::invalid_argument("gather_cols: index " + std::to_string(i) +
                                  " out of range for " + shape_str(x.shape()));
  Tensor out = Tensor::zeros({n});
  for (int i = 0; i < n; ++i) out.data()[i] = x.at(i, idx[static_cast<std::size_t>(i)]);
  if (track(tape, x)) {
    out.set_requires_grad(true);
    auto xi = x.impl(), oi = out.impl();
    oi->node = tape.record([xi, oi, idx, m] {
      if (oi->grad.empty()) return;
      ensure_grad(*xi);
      for (std::size_t i = 0; i < oi->grad.size(); ++i)
        xi->grad[i * m + static_cast<std::size_t>(idx[i])] += oi->grad[i];
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& probs, const std::vector<int>& targets,
                     const std::vector<double>* mask) {
  const int n = probs.shape().size() == 2 ? probs.rows() : 1;
  const int m = probs.cols();
  if (static_cast<int>(targets.size()) != n)
    throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) +
                                " targets for " + std::to_string(n) + " rows of " +
                                shape_str(probs.shape()));
  if (mask && static_cast<int>(mask->size()) != n)
    throw std::invalid_argument("cross_entropy: mask length " + std::to_string(mask->size()) +
                                " does not match " + std::to_string(n) + " rows");
  for (int y : targets)
    if (y < 0 || y >= m)
      throw std::invalid_argument("cross_entropy: target " + std::to_string(y) +
                                  " out of range for " + shape_str(probs.shape()));
  const double inv_n = 1.0 / static_cast<double>(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = mask ? (*mask)[static_cast<std::size_t>(i)] : 1.0;
    if (w == 0.0) continue;  // keeps 0 * log(0) out of the sum
    acc += w * -std::log(probs.at(i, targets[static_cast<std::size_t>(i)]));
  }
  Tensor out = Tensor::scalar(acc * inv_n);
  if (track(tape, probs)) {
    out.set_requires_grad(true);
    auto pi = probs.impl(), oi = out.impl();
    std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
    if (mask) weights = *mask;
    oi->node = tape.record([pi, oi, targets, weights, m, inv_n] {
      if (oi->grad.empty()) return;
      ensure_grad(*pi);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const std::size_t at = i * m + static_cast<std::size_t>(targets[i]);
        pi->grad[at] -= oi->grad[0] * weights[i] * inv_n / pi->data[at];
      }
    });
  }
  return out;
}

}  // namespace ltssl
