#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsc::autodiff {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

// Handle into a Tape node. Cheap to copy; valid while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  const Shape& shape() const;
  std::size_t numel() const;
  bool requires_grad() const;
  std::span<const double> value() const;
  std::span<const double> grad() const;
  double scalar() const;  // value of a single-element tensor

  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Raised when a forward or backward pass produces a non-finite value.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Define-by-run computation graph. Nodes are recorded in insertion order;
// parents always precede their consumers. backward() walks the record in
// exact reverse insertion order, which makes gradient accumulation
// deterministic: identical graphs on identical inputs produce bitwise
// identical results.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = false);
  Tensor constant(Shape shape, std::vector<double> values);
  Tensor scalar_constant(double value);

  // Records an interior node. `backward` receives this tape and the node id
  // and accumulates into parent grads; pass nullptr for nodes that do not
  // track gradients.
  Tensor emplace(Shape shape, std::vector<double> value, bool requires_grad,
                 BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates through every recorded node in
  // reverse insertion order. `loss` must be a single-element tensor that
  // tracks gradients. May be called once per tape.
  void backward(Tensor loss);

  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  const Shape& shape(std::size_t id) const { return nodes_.at(id).shape; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::span<const double> value(std::size_t id) const { return nodes_.at(id).value; }
  std::span<double> value_mut(std::size_t id) { return nodes_.at(id).value; }
  std::span<const double> grad(std::size_t id) const;
  std::span<double> grad_mut(std::size_t id);

  // Throws NonFiniteError naming `what` if any value (or grad, when present)
  // of the tensor is NaN or infinite.
  void check_finite(Tensor t, const std::string& what) const;

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated only when requires_grad
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// ---- elementwise and structural ops -----------------------------------

// Standard matrix product of a [m x k] and b [k x n].
Tensor matmul(Tensor a, Tensor b);

// Elementwise sum of two same-shape tensors.
Tensor add(Tensor a, Tensor b);

// Elementwise product of two same-shape tensors.
Tensor mul(Tensor a, Tensor b);

// x [m x n] plus a row vector bias [n], broadcast over rows.
Tensor add_bias(Tensor x, Tensor bias);

// a * x + b with scalar constants, elementwise.
Tensor affine(Tensor x, double a, double b);
Tensor scale(Tensor x, double c);

Tensor relu(Tensor x);
Tensor tanh(Tensor x);
Tensor sigmoid(Tensor x);

// Natural log; throws std::domain_error on non-positive input. Loss code is
// expected to clamp first.
Tensor log(Tensor x);

// Elementwise clamp to [lo, hi]; gradient passes where lo <= x <= hi.
Tensor clamp(Tensor x, double lo, double hi);

// Row-wise softmax of [b x K] logits, K >= 2, computed with max-subtraction.
Tensor softmax(Tensor logits);

// out[i] = x[i, indices[i]] for x [b x K]; indices must lie in [0, K).
Tensor pick(Tensor x, const std::vector<int>& indices);

Tensor sum(Tensor x);
Tensor mean(Tensor x);

// Gradient reversal: identity forward, -coeff * upstream gradient backward.
Tensor grl(Tensor x, double coeff);

// Per-row outer product: f [b x p], g [b x q] -> [b x p*q] where
// out[i, a*q + c] = f[i, a] * g[i, c].
Tensor row_outer(Tensor f, Tensor g);

}  // namespace tsc::autodiff
