#include "tsc/autodiff.hpp"

#include <cmath>
#include <utility>

namespace tsc::autodiff {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

Tape& same_tape(Tensor a, Tensor b, const char* op) {
  if (!a || !b) throw std::invalid_argument(std::string(op) + ": empty tensor handle");
  if (a.tape() != b.tape()) {
    throw std::invalid_argument(std::string(op) + ": operands belong to different tapes");
  }
  return *a.tape();
}

Tape& own_tape(Tensor a, const char* op) {
  if (!a) throw std::invalid_argument(std::string(op) + ": empty tensor handle");
  return *a.tape();
}

void require_rank2(Tensor t, const char* op) {
  if (t.shape().size() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " +
                                shape_str(t.shape()));
  }
}

void require_same_shape(Tensor a, Tensor b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch: " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
}

// Elementwise op with f(x) and df(x, fx) -> local derivative.
template <typename F, typename DF>
Tensor unary_elementwise(Tensor x, const char* /*op*/, F f, DF df) {
  Tape& t = *x.tape();
  auto v = x.value();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f(v[i]);
  const std::size_t xid = x.id();
  Tape::BackwardFn bwd;
  if (x.requires_grad()) {
    bwd = [xid, df](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      auto xv = tp.value(xid);
      auto ov = tp.value(self);
      auto xg = tp.grad_mut(xid);
      for (std::size_t i = 0; i < g.size(); ++i) xg[i] += df(xv[i], ov[i]) * g[i];
    };
  }
  return t.emplace(Shape(x.shape()), std::move(out), x.requires_grad(), std::move(bwd));
}

}  // namespace

// ---- Tensor ------------------------------------------------------------

const Shape& Tensor::shape() const { return tape_->shape(id_); }
std::size_t Tensor::numel() const { return shape_numel(shape()); }
bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }
std::span<const double> Tensor::value() const { return tape_->value(id_); }
std::span<const double> Tensor::grad() const { return tape_->grad(id_); }

double Tensor::scalar() const {
  auto v = value();
  if (v.size() != 1) {
    throw std::invalid_argument("Tensor::scalar: tensor has " + std::to_string(v.size()) +
                                " elements, expected 1");
  }
  return v[0];
}

// ---- Tape --------------------------------------------------------------

Tensor Tape::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  return emplace(std::move(shape), std::move(values), requires_grad, nullptr);
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  return leaf(std::move(shape), std::move(values), false);
}

Tensor Tape::scalar_constant(double value) { return constant({1}, {value}); }

Tensor Tape::emplace(Shape shape, std::vector<double> value, bool requires_grad,
                     BackwardFn backward) {
  if (shape_numel(shape) != value.size()) {
    throw std::invalid_argument("Tape::emplace: shape " + shape_str(shape) + " implies " +
                                std::to_string(shape_numel(shape)) + " elements, got " +
                                std::to_string(value.size()));
  }
  Node node;
  node.shape = std::move(shape);
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.grad.assign(node.value.size(), 0.0);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Tensor(this, nodes_.size() - 1);
}

std::span<const double> Tape::grad(std::size_t id) const {
  const Node& n = nodes_.at(id);
  if (!n.requires_grad) {
    throw std::logic_error("Tape::grad: node does not track gradients");
  }
  return n.grad;
}

std::span<double> Tape::grad_mut(std::size_t id) {
  Node& n = nodes_.at(id);
  if (!n.requires_grad) {
    throw std::logic_error("Tape::grad_mut: node does not track gradients");
  }
  return n.grad;
}

void Tape::backward(Tensor loss) {
  if (loss.tape() != this) {
    throw std::invalid_argument("Tape::backward: loss belongs to a different tape");
  }
  if (loss.numel() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument("Tape::backward: loss does not track gradients");
  }
  if (backward_done_) {
    throw std::logic_error("Tape::backward: backward already run on this tape");
  }
  backward_done_ = true;
  nodes_[loss.id()].grad[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.requires_grad) n.backward(*this, i);
  }
}

void Tape::check_finite(Tensor t, const std::string& what) const {
  const Node& n = nodes_.at(t.id());
  for (double v : n.value) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(what + ": non-finite value in forward result");
    }
  }
  for (double g : n.grad) {
    if (!std::isfinite(g)) {
      throw NonFiniteError(what + ": non-finite value in gradient");
    }
  }
}

// ---- ops ---------------------------------------------------------------

Tensor matmul(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b, "matmul");
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
    }
  }
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t aid = a.id(), bid = b.id();
  Tape::BackwardFn bwd;
  if (rg) {
    bwd = [aid, bid, m, k, n](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      if (tp.requires_grad(aid)) {
        auto bvv = tp.value(bid);
        auto ag = tp.grad_mut(aid);
        // a.grad += g . b^T
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bvv[p * n + j];
            ag[i * k + p] += acc;
          }
        }
      }
      if (tp.requires_grad(bid)) {
        auto avv = tp.value(aid);
        auto bg = tp.grad_mut(bid);
        // b.grad += a^T . g
        for (std::size_t p = 0; p < k; ++p) {
          for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += avv[i * k + p] * g[i * n + j];
            bg[p * n + j] += acc;
          }
        }
      }
    };
  }
  return t.emplace({m, n}, std::move(out), rg, std::move(bwd));
}

Tensor add(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b, "add");
  require_same_shape(a, b, "add");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t aid = a.id(), bid = b.id();
  Tape::BackwardFn bwd;
  if (rg) {
    bwd = [aid, bid](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      if (tp.requires_grad(aid)) {
        auto ag = tp.grad_mut(aid);
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
      }
      if (tp.requires_grad(bid)) {
        auto bg = tp.grad_mut(bid);
        for (std::size_t i = 0; i < g.size(); ++i) bg[i] += g[i];
      }
    };
  }
  return t.emplace(Shape(a.shape()), std::move(out), rg, std::move(bwd));
}

Tensor mul(Tensor a, Tensor b) {
  Tape& t = same_tape(a, b, "mul");
  require_same_shape(a, b, "mul");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  const bool rg = a.requires_grad() || b.requires_grad();
  const std::size_t aid = a.id(), bid = b.id();
  Tape::BackwardFn bwd;
  if (rg) {
    bwd = [aid, bid](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      if (tp.requires_grad(aid)) {
        auto ag = tp.grad_mut(aid);
        auto bvv = tp.value(bid);
        for (std::size_t i = 0; i < g.size(); ++i) ag[i] += bvv[i] * g[i];
      }
      if (tp.requires_grad(bid)) {
        auto bg = tp.grad_mut(bid);
        auto avv = tp.value(aid);
        for (std::size_t i = 0; i < g.size(); ++i) bg[i] += avv[i] * g[i];
      }
    };
  }
  return t.emplace(Shape(a.shape()), std::move(out), rg, std::move(bwd));
}

Tensor add_bias(Tensor x, Tensor bias) {
  Tape& t = same_tape(x, bias, "add_bias");
  require_rank2(x, "add_bias");
  if (bias.shape().size() != 1 || bias.shape()[0] != x.shape()[1]) {
    throw std::invalid_argument("add_bias: bias shape " + shape_str(bias.shape()) +
                                " does not match rows of " + shape_str(x.shape()));
  }
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  auto xv = x.value();
  auto bv = bias.value();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xv[i * n + j] + bv[j];
  }
  const bool rg = x.requires_grad() || bias.requires_grad();
  const std::size_t xid = x.id(), bid = bias.id();
  Tape::BackwardFn bwd;
  if (rg) {
    bwd = [xid, bid, m, n](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      if (tp.requires_grad(xid)) {
        auto xg = tp.grad_mut(xid);
        for (std::size_t i = 0; i < g.size(); ++i) xg[i] += g[i];
      }
      if (tp.requires_grad(bid)) {
        auto bg = tp.grad_mut(bid);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) bg[j] += g[i * n + j];
        }
      }
    };
  }
  return t.emplace({m, n}, std::move(out), rg, std::move(bwd));
}

Tensor affine(Tensor x, double a, double b) {
  own_tape(x, "affine");
  return unary_elementwise(
      x, "affine", [a, b](double v) { return a * v + b; },
      [a](double, double) { return a; });
}

Tensor scale(Tensor x, double c) { return affine(x, c, 0.0); }

Tensor relu(Tensor x) {
  own_tape(x, "relu");
  return unary_elementwise(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(Tensor x) {
  own_tape(x, "tanh");
  return unary_elementwise(
      x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double o) { return 1.0 - o * o; });
}

Tensor sigmoid(Tensor x) {
  own_tape(x, "sigmoid");
  return unary_elementwise(
      x, "sigmoid",
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double o) { return o * (1.0 - o); });
}

Tensor log(Tensor x) {
  own_tape(x, "log");
  auto v = x.value();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) {
      throw std::domain_error("log: non-positive input " + std::to_string(v[i]) +
                              " at element " + std::to_string(i));
    }
  }
  return unary_elementwise(
      x, "log", [](double vv) { return std::log(vv); },
      [](double vv, double) { return 1.0 / vv; });
}

Tensor clamp(Tensor x, double lo, double hi) {
  own_tape(x, "clamp");
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  return unary_elementwise(
      x, "clamp",
      [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor softmax(Tensor logits) {
  Tape& t = own_tape(logits, "softmax");
  require_rank2(logits, "softmax");
  const std::size_t b = logits.shape()[0], k = logits.shape()[1];
  if (k < 2) {
    throw std::invalid_argument("softmax: need at least 2 classes, got " +
                                shape_str(logits.shape()));
  }
  auto v = logits.value();
  std::vector<double> out(b * k);
  for (std::size_t i = 0; i < b; ++i) {
    double mx = v[i * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, v[i * k + j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[i * k + j] = std::exp(v[i * k + j] - mx);
      denom += out[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= denom;
  }
  const std::size_t xid = logits.id();
  Tape::BackwardFn bwd;
  if (logits.requires_grad()) {
    bwd = [xid, b, k](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      auto s = tp.value(self);
      auto xg = tp.grad_mut(xid);
      for (std::size_t i = 0; i < b; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < k; ++j) dot += g[i * k + j] * s[i * k + j];
        for (std::size_t j = 0; j < k; ++j) {
          xg[i * k + j] += s[i * k + j] * (g[i * k + j] - dot);
        }
      }
    };
  }
  return t.emplace({b, k}, std::move(out), logits.requires_grad(), std::move(bwd));
}

Tensor pick(Tensor x, const std::vector<int>& indices) {
  Tape& t = own_tape(x, "pick");
  require_rank2(x, "pick");
  const std::size_t b = x.shape()[0], k = x.shape()[1];
  if (indices.size() != b) {
    throw std::invalid_argument("pick: got " + std::to_string(indices.size()) +
                                " indices for " + std::to_string(b) + " rows");
  }
  for (std::size_t i = 0; i < b; ++i) {
    if (indices[i] < 0 || static_cast<std::size_t>(indices[i]) >= k) {
      throw std::out_of_range("pick: index " + std::to_string(indices[i]) + " at row " +
                              std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
    }
  }
  auto v = x.value();
  std::vector<double> out(b);
  for (std::size_t i = 0; i < b; ++i) out[i] = v[i * k + static_cast<std::size_t>(indices[i])];
  const std::size_t xid = x.id();
  Tape::BackwardFn bwd;
  if (x.requires_grad()) {
    bwd = [xid, idx = indices, k](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      auto xg = tp.grad_mut(xid);
      for (std::size_t i = 0; i < g.size(); ++i) {
        xg[i * k + static_cast<std::size_t>(idx[i])] += g[i];
      }
    };
  }
  return t.emplace({b}, std::move(out), x.requires_grad(), std::move(bwd));
}

Tensor sum(Tensor x) {
  Tape& t = own_tape(x, "sum");
  auto v = x.value();
  double acc = 0.0;
  for (double e : v) acc += e;
  const std::size_t xid = x.id();
  Tape::BackwardFn bwd;
  if (x.requires_grad()) {
    bwd = [xid](Tape& tp, std::size_t self) {
      const double g = tp.grad(self)[0];
      auto xg = tp.grad_mut(xid);
      for (std::size_t i = 0; i < xg.size(); ++i) xg[i] += g;
    };
  }
  return t.emplace({1}, {acc}, x.requires_grad(), std::move(bwd));
}

Tensor mean(Tensor x) {
  const std::size_t n = x.numel();
  if (n == 0) throw std::invalid_argument("mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

Tensor grl(Tensor x, double coeff) {
  Tape& t = own_tape(x, "grl");
  if (coeff < 0.0) throw std::invalid_argument("grl: coeff must be >= 0");
  auto v = x.value();
  std::vector<double> out(v.begin(), v.end());
  const std::size_t xid = x.id();
  Tape::BackwardFn bwd;
  if (x.requires_grad()) {
    bwd = [xid, coeff](Tape& tp, std::size_t self) {
      auto g = tp.grad(self);
      auto xg = tp.grad_mut(xid);
      for (std::size_t i = 0; i < g.size(); ++i) xg[i] += -coeff * g[i];
    };
  }
  return t.emplace(Shape(x.shape()), std::move(out), x.requires_grad(), std::move(bwd));
}

Tensor row_outer(Tensor f, Tensor g) {
  Tape& t = same_tape(f, g, "row_outer");
  require_rank2(f, "row_outer");
  require_rank2(g, "row_outer");
  if (f.shape()[0] != g.shape()[0]) {
    throw std::invalid_argument("row_outer: batch sizes disagree: " + shape_str(f.shape()) +
                                " vs " + shape_str(g.shape()));
  }
  const std::size_t b = f.shape()[0], p = f.shape()[1], q = g.shape()[1];
  auto fv = f.value();
  auto gv = g.value();
  std::vector<double> out(b * p * q);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      const double fa = fv[i * p + a];
      for (std::size_t c = 0; c < q; ++c) out[(i * p + a) * q + c] = fa * gv[i * q + c];
    }
  }
  const bool rg = f.requires_grad() || g.requires_grad();
  const std::size_t fid = f.id(), gid = g.id();
  Tape::BackwardFn bwd;
  if (rg) {
    bwd = [fid, gid, b, p, q](Tape& tp, std::size_t self) {
      auto go = tp.grad(self);
      if (tp.requires_grad(fid)) {
        auto gvv = tp.value(gid);
        auto fg = tp.grad_mut(fid);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t a = 0; a < p; ++a) {
            double acc = 0.0;
            for (std::size_t c = 0; c < q; ++c) acc += go[(i * p + a) * q + c] * gvv[i * q + c];
            fg[i * p + a] += acc;
          }
        }
      }
      if (tp.requires_grad(gid)) {
        auto fvv = tp.value(fid);
        auto gg = tp.grad_mut(gid);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t c = 0; c < q; ++c) {
            double acc = 0.0;
            for (std::size_t a = 0; a < p; ++a) acc += go[(i * p + a) * q + c] * fvv[i * p + a];
            gg[i * q + c] += acc;
          }
        }
      }
    };
  }
  return t.emplace({b, p * q}, std::move(out), rg, std::move(bwd));
}

}  // namespace tsc::autodiff
