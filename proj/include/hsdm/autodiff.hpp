#pragma once

// Reverse-mode differentiation over a closed set of matrix operations.
//
// A Tape records every operation applied to Vars created on it. Calling
// backward() on a 1x1 result accumulates exact gradients into every node
// that transitively depends on a parameter. Only the operations declared
// here are differentiable; that set covers the MLPs, message passing, the
// dot-product decoder and the logit cross-entropy loss.

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "hsdm/activation.hpp"
#include "hsdm/matrix.hpp"

namespace hsdm {

enum class Aggregation { segment_sum, segment_mean };

/// Row s of the result is the sum (or mean) of the rows of `values` whose id is s.
/// Empty segments produce zero rows in both modes. Throws IndexOutOfBoundsError.
Matrix segment_reduce(const Matrix& values, std::span<const std::size_t> segment_ids,
                      std::size_t num_segments, Aggregation mode);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Accumulated gradient; a zero matrix if backward never reached this node.
  Matrix grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Matrix value);

  /// Records an op result. `backward` is kept only if some parent needs gradients.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, std::span<const Var> parents, Backward backward);

  /// Seeds d(root)/d(root) = 1 and propagates to every upstream node.
  void backward(Var root);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  Matrix grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;
};

namespace ad {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// x + broadcast of the 1 x d row `bias` onto every row.
Var add_row(Var x, Var bias);
Var scale(Var x, double factor);
Var activate(Var x, Activation act);
Var concat_cols(std::span<const Var> parts);
Var gather_rows(Var x, std::span<const std::size_t> indices);
Var segment_reduce(Var values, std::span<const std::size_t> segment_ids, std::size_t num_segments,
                   Aggregation mode);
/// n x 1 column of row-wise dot products.
Var rowwise_dot(Var a, Var b);
Var sum(Var x);
/// Mean sigmoid cross-entropy of an n x 1 logit column against 0/1 labels.
Var bce_with_logits_mean(Var scores, std::span<const double> labels);
/// Mean over all entries of elementwise sigmoid cross-entropy (multi-label head).
Var bce_with_logits_mean(Var logits, const Matrix& labels);

}  // namespace ad

}  // namespace hsdm
