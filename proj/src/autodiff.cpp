#include "hsdm/autodiff.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "hsdm/errors.hpp"

namespace hsdm {

Matrix segment_reduce(const Matrix& values, std::span<const std::size_t> segment_ids,
                      std::size_t num_segments, Aggregation mode) {
  if (static_cast<std::size_t>(values.rows()) != segment_ids.size()) {
    throw ShapeMismatchError(fmt::format("segment_reduce: {} rows but {} segment ids",
                                         values.rows(), segment_ids.size()));
  }
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(num_segments), values.cols());
  std::vector<std::size_t> counts(num_segments, 0);
  for (std::size_t i = 0; i < segment_ids.size(); ++i) {
    const std::size_t s = segment_ids[i];
    if (s >= num_segments) {
      throw IndexOutOfBoundsError(
          fmt::format("segment_reduce: segment id {} >= {}", s, num_segments));
    }
    out.row(static_cast<Eigen::Index>(s)) += values.row(static_cast<Eigen::Index>(i));
    ++counts[s];
  }
  if (mode == Aggregation::segment_mean) {
    for (std::size_t s = 0; s < num_segments; ++s) {
      if (counts[s] > 1) out.row(static_cast<Eigen::Index>(s)) /= static_cast<double>(counts[s]);
    }
  }
  return out;
}

const Matrix& Var::value() const { return tape_->value(id_); }

Matrix Var::grad() const { return tape_->grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw Error("autodiff: operands recorded on different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs});
  return Var(this, nodes_.size() - 1);
}

Matrix Tape::grad(std::size_t id) const {
  const Node& node = nodes_[id];
  if (node.grad.size() == 0) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("autodiff: root belongs to another tape");
  const Matrix& v = nodes_[root.id()].value;
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeMismatchError(
        fmt::format("backward: root must be 1x1, got {}x{}", v.rows(), v.cols()));
  }
  for (Node& node : nodes_) node.grad.resize(0, 0);
  if (!nodes_[root.id()].requires_grad) return;
  nodes_[root.id()].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.size() == 0) continue;
    // Copy: the callback may accumulate into other nodes but never into itself.
    const Matrix g = node.grad;
    node.backward(*this, g);
  }
}

namespace ad {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatchError(fmt::format("{}: shapes {}x{} and {}x{} differ", op, a.rows(),
                                         a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeMismatchError(fmt::format("matmul: {}x{} times {}x{}", av.rows(), av.cols(),
                                         bv.rows(), bv.cols()));
  }
  Matrix out = av * bv;
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value() + b.value();
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var add_row(Var x, Var bias) {
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeMismatchError(fmt::format("add_row: bias {}x{} against {}x{}", bv.rows(),
                                         bv.cols(), xv.rows(), xv.cols()));
  }
  Matrix out = xv.rowwise() + bv.row(0);
  const std::size_t ix = x.id();
  const std::size_t ib = bias.id();
  return x.tape()->record(std::move(out), {x, bias}, [ix, ib](Tape& t, const Matrix& g) {
    t.accumulate(ix, g);
    if (t.requires_grad(ib)) t.accumulate(ib, g.colwise().sum());
  });
}

Var scale(Var x, double factor) {
  Matrix out = x.value() * factor;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, factor](Tape& t, const Matrix& g) {
    t.accumulate(ix, g * factor);
  });
}

Var activate(Var x, Activation act) {
  Matrix out = hsdm::activate(act, x.value());
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {x}, [ix, act](Tape& t, const Matrix& g) {
    t.accumulate(ix, g.cwiseProduct(activate_derivative(act, t.value(ix))));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatchError("concat_cols: no operands");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<std::size_t> ids;
  std::vector<Eigen::Index> widths;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw ShapeMismatchError(
          fmt::format("concat_cols: row counts {} and {} differ", rows, p.rows()));
    }
    ids.push_back(p.id());
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return parts.front().tape()->record(
      std::move(out), parts,
      [ids = std::move(ids), widths = std::move(widths)](Tape& t, const Matrix& g) {
        Eigen::Index off = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (t.requires_grad(ids[k])) t.accumulate(ids[k], g.middleCols(off, widths[k]));
          off += widths[k];
        }
      });
}

Var gather_rows(Var x, std::span<const std::size_t> indices) {
  const Matrix& xv = x.value();
  Matrix out(static_cast<Eigen::Index>(indices.size()), xv.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= static_cast<std::size_t>(xv.rows())) {
      throw IndexOutOfBoundsError(
          fmt::format("gather_rows: index {} >= {}", indices[i], xv.rows()));
    }
    out.row(static_cast<Eigen::Index>(i)) = xv.row(static_cast<Eigen::Index>(indices[i]));
  }
  const std::size_t ix = x.id();
  const Eigen::Index src_rows = xv.rows();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return x.tape()->record(std::move(out), {x},
                          [ix, src_rows, idx = std::move(idx)](Tape& t, const Matrix& g) {
                            Matrix dx = Matrix::Zero(src_rows, g.cols());
                            for (std::size_t i = 0; i < idx.size(); ++i) {
                              dx.row(static_cast<Eigen::Index>(idx[i])) +=
                                  g.row(static_cast<Eigen::Index>(i));
                            }
                            t.accumulate(ix, dx);
                          });
}

Var segment_reduce(Var values, std::span<const std::size_t> segment_ids, std::size_t num_segments,
                   Aggregation mode) {
  Matrix out = hsdm::segment_reduce(values.value(), segment_ids, num_segments, mode);
  std::vector<std::size_t> ids(segment_ids.begin(), segment_ids.end());
  std::vector<double> weight(ids.size(), 1.0);
  if (mode == Aggregation::segment_mean) {
    std::vector<std::size_t> counts(num_segments, 0);
    for (std::size_t s : ids) ++counts[s];
    for (std::size_t i = 0; i < ids.size(); ++i) weight[i] = 1.0 / static_cast<double>(counts[ids[i]]);
  }
  const std::size_t iv = values.id();
  return values.tape()->record(
      std::move(out), {values},
      [iv, ids = std::move(ids), weight = std::move(weight)](Tape& t, const Matrix& g) {
        Matrix dv(static_cast<Eigen::Index>(ids.size()), g.cols());
        for (std::size_t i = 0; i < ids.size(); ++i) {
          dv.row(static_cast<Eigen::Index>(i)) = g.row(static_cast<Eigen::Index>(ids[i])) * weight[i];
        }
        t.accumulate(iv, dv);
      });
}

Var rowwise_dot(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "rowwise_dot");
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    // g is n x 1; broadcast across the latent width.
    if (t.requires_grad(ia)) {
      t.accumulate(ia, (t.value(ib).array().colwise() * g.col(0).array()).matrix());
    }
    if (t.requires_grad(ib)) {
      t.accumulate(ib, (t.value(ia).array().colwise() * g.col(0).array()).matrix());
    }
  });
}

Var sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const std::size_t ix = x.id();
  const Eigen::Index r = x.rows();
  const Eigen::Index c = x.cols();
  return x.tape()->record(std::move(out), {x}, [ix, r, c](Tape& t, const Matrix& g) {
    t.accumulate(ix, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var bce_with_logits_mean(Var scores, std::span<const double> labels) {
  const Matrix& s = scores.value();
  if (s.cols() != 1 || static_cast<std::size_t>(s.rows()) != labels.size()) {
    throw ShapeMismatchError(fmt::format("bce_with_logits_mean: scores {}x{} vs {} labels",
                                         s.rows(), s.cols(), labels.size()));
  }
  if (labels.empty()) throw EmptyInputError("bce_with_logits_mean: no pairs");
  Matrix labels_col(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) labels_col(static_cast<Eigen::Index>(i), 0) = labels[i];
  return bce_with_logits_mean(scores, labels_col);
}

Var bce_with_logits_mean(Var logits, const Matrix& labels) {
  const Matrix& z = logits.value();
  require_same_shape(z, labels, "bce_with_logits_mean");
  if (z.size() == 0) throw EmptyInputError("bce_with_logits_mean: no entries");
  const double n = static_cast<double>(z.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) total += sigmoid_cross_entropy(z(i, j), labels(i, j));
  }
  Matrix out(1, 1);
  out(0, 0) = total / n;
  const std::size_t iz = logits.id();
  return logits.tape()->record(std::move(out), {logits}, [iz, labels, n](Tape& t, const Matrix& g) {
    const Matrix& zv = t.value(iz);
    Matrix dz(zv.rows(), zv.cols());
    for (Eigen::Index i = 0; i < zv.rows(); ++i) {
      for (Eigen::Index j = 0; j < zv.cols(); ++j) {
        dz(i, j) = (sigmoid(zv(i, j)) - labels(i, j)) * g(0, 0) / n;
      }
    }
    t.accumulate(iz, dz);
  });
}

}  // namespace ad

}  // namespace hsdm
