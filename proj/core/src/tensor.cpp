#include "hap/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace hap {

namespace {

std::shared_ptr<const Matrix> share(Matrix m) {
  return std::make_shared<const Matrix>(std::move(m));
}

Tape* tape_of(const DiffMatrix& a, const DiffMatrix& b) {
  if (a.tape() && b.tape() && a.tape() != b.tape())
    throw std::invalid_argument("primitive: operands live on different tapes");
  return a.tape() ? a.tape() : b.tape();
}

void require_same_shape(const char* op, const DiffMatrix& a,
                        const DiffMatrix& b) {
  if (!a.value().same_shape(b.value()))
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.value()) +
                     " and " + shape_str(b.value()) + " do not match");
}

// Records a unary/binary node when a gradient will be needed; otherwise the
// result stays an unrecorded constant.
DiffMatrix finish(Tape* tape, TapeNode node, const DiffMatrix& a,
                  const DiffMatrix& b) {
  bool needs_grad = a.requires_grad() || b.requires_grad();
  if (!needs_grad || tape == nullptr) {
    DiffMatrix out = DiffMatrix::constant(node.out);
    return out;
  }
  node.in0 = a.node();
  node.in1 = b.node();
  node.v0 = a.shared_value();
  node.v1 = b.shared_value();
  return tape->emit(std::move(node), true);
}

DiffMatrix finish(Tape* tape, TapeNode node, const DiffMatrix& a) {
  return finish(tape, std::move(node), a, DiffMatrix());
}

Matrix softmax_rows(const Matrix& x, const Matrix* mask) {
  Matrix y(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i) {
    double mx = -HUGE_VAL;
    for (int j = 0; j < x.cols(); ++j) {
      if (mask && mask->at(i, j) == 0.0) continue;
      mx = std::max(mx, x.at(i, j));
    }
    if (mx == -HUGE_VAL)
      throw DomainError("row_softmax: row " + std::to_string(i) +
                        " has empty support");
    double denom = 0.0;
    for (int j = 0; j < x.cols(); ++j) {
      if (mask && mask->at(i, j) == 0.0) continue;
      double e = std::exp(x.at(i, j) - mx);
      y.at(i, j) = e;
      denom += e;
    }
    for (int j = 0; j < x.cols(); ++j) {
      if (mask && mask->at(i, j) == 0.0) continue;
      y.at(i, j) /= denom;
    }
  }
  return y;
}

}  // namespace

DiffMatrix DiffMatrix::constant(Matrix value) {
  return constant(share(std::move(value)));
}

DiffMatrix DiffMatrix::constant(std::shared_ptr<const Matrix> value) {
  DiffMatrix m;
  m.value_ = std::move(value);
  return m;
}

DiffMatrix Tape::leaf(Matrix value, bool requires_grad) {
  return leaf(share(std::move(value)), requires_grad);
}

DiffMatrix Tape::leaf(std::shared_ptr<const Matrix> value, bool requires_grad) {
  if (!requires_grad) return DiffMatrix::constant(std::move(value));
  TapeNode n;
  n.op = OpKind::kLeaf;
  n.out = std::move(value);
  return emit(std::move(n), true);
}

DiffMatrix Tape::emit(TapeNode node, bool requires_grad) {
  DiffMatrix out;
  out.value_ = node.out;
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size());
  out.requires_grad_ = requires_grad;
  nodes_.push_back(std::move(node));
  return out;
}

const Matrix& GradientMap::at(const DiffMatrix& leaf) const {
  if (leaf.node() < 0 || leaf.tape() != tape_)
    throw std::invalid_argument("GradientMap: value is not a leaf of this tape");
  const auto& g = by_node_[static_cast<size_t>(leaf.node())];
  if (!g)
    throw std::invalid_argument("GradientMap: node is not a requires-grad leaf");
  return *g;
}

GradientMap Tape::backward(const DiffMatrix& loss) const {
  if (!loss.valid() || loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward: loss must be 1x1, got " +
                     (loss.valid() ? shape_str(loss.value()) : std::string("<empty>")));
  if (loss.tape() != this || loss.node() < 0)
    throw std::invalid_argument("backward: loss is not recorded on this tape");

  std::vector<Matrix> grads(nodes_.size());
  std::vector<char> has(nodes_.size(), 0);

  auto accum = [&](int id, int i, int j, double v) {
    grads[static_cast<size_t>(id)].at(i, j) += v;
  };
  auto touch = [&](int id, int rows, int cols) {
    if (!has[static_cast<size_t>(id)]) {
      grads[static_cast<size_t>(id)] = Matrix(rows, cols);
      has[static_cast<size_t>(id)] = 1;
    }
  };

  int root = loss.node();
  touch(root, 1, 1);
  grads[static_cast<size_t>(root)].at(0, 0) = 1.0;

  for (int id = root; id >= 0; --id) {
    if (!has[static_cast<size_t>(id)]) continue;
    const TapeNode& n = nodes_[static_cast<size_t>(id)];
    const Matrix& g = grads[static_cast<size_t>(id)];
    const int r = n.out->rows();
    const int c = n.out->cols();

    auto want0 = [&]() {
      if (n.in0 < 0) return false;
      touch(n.in0, n.v0->rows(), n.v0->cols());
      return true;
    };
    auto want1 = [&]() {
      if (n.in1 < 0) return false;
      touch(n.in1, n.v1->rows(), n.v1->cols());
      return true;
    };

    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatMul: {
        // dA = G.B^T, dB = A^T.G
        if (want0()) {
          Matrix& da = grads[static_cast<size_t>(n.in0)];
          const Matrix& B = *n.v1;
          for (int i = 0; i < g.rows(); ++i)
            for (int j = 0; j < g.cols(); ++j) {
              double gij = g.at(i, j);
              if (gij == 0.0) continue;
              for (int k = 0; k < B.rows(); ++k)
                da.at(i, k) += gij * B.at(k, j);
            }
        }
        if (want1()) {
          Matrix& db = grads[static_cast<size_t>(n.in1)];
          const Matrix& A = *n.v0;
          for (int i = 0; i < A.rows(); ++i)
            for (int k = 0; k < A.cols(); ++k) {
              double aik = A.at(i, k);
              if (aik == 0.0) continue;
              for (int j = 0; j < g.cols(); ++j)
                db.at(k, j) += aik * g.at(i, j);
            }
        }
        break;
      }
      case OpKind::kTranspose:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, j, i, g.at(i, j));
        break;
      case OpKind::kAdd:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, i, j, g.at(i, j));
        if (want1())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in1, i, j, g.at(i, j));
        break;
      case OpKind::kSub:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, i, j, g.at(i, j));
        if (want1())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in1, i, j, -g.at(i, j));
        break;
      case OpKind::kMul:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              accum(n.in0, i, j, g.at(i, j) * n.v1->at(i, j));
        if (want1())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              accum(n.in1, i, j, g.at(i, j) * n.v0->at(i, j));
        break;
      case OpKind::kScalarMul:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, i, j, n.s0 * g.at(i, j));
        break;
      case OpKind::kAddScalar:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, i, j, g.at(i, j));
        break;
      case OpKind::kRowSoftmax:
      case OpKind::kMaskedRowSoftmax: {
        if (!want0()) break;
        const Matrix& y = *n.out;
        for (int i = 0; i < r; ++i) {
          double dot = 0.0;
          for (int k = 0; k < c; ++k) dot += g.at(i, k) * y.at(i, k);
          for (int j = 0; j < c; ++j)
            accum(n.in0, i, j, y.at(i, j) * (g.at(i, j) - dot));
        }
        break;
      }
      case OpKind::kLeakyRelu:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
              double slope = n.v0->at(i, j) > 0.0 ? 1.0 : kLeakyReluSlope;
              accum(n.in0, i, j, slope * g.at(i, j));
            }
        break;
      case OpKind::kRelu:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              if (n.v0->at(i, j) > 0.0) accum(n.in0, i, j, g.at(i, j));
        break;
      case OpKind::kSigmoid:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
              double y = n.out->at(i, j);
              accum(n.in0, i, j, y * (1.0 - y) * g.at(i, j));
            }
        break;
      case OpKind::kExp:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              accum(n.in0, i, j, n.out->at(i, j) * g.at(i, j));
        break;
      case OpKind::kLog:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              accum(n.in0, i, j, g.at(i, j) / n.v0->at(i, j));
        break;
      case OpKind::kSqrt:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
              accum(n.in0, i, j, 0.5 / n.out->at(i, j) * g.at(i, j));
        break;
      case OpKind::kClamp:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
              double x = n.v0->at(i, j);
              if (x > n.s0 && x < n.s1) accum(n.in0, i, j, g.at(i, j));
            }
        break;
      case OpKind::kConcatCols: {
        int ca = n.v0->cols();
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < ca; ++j) accum(n.in0, i, j, g.at(i, j));
        if (want1())
          for (int i = 0; i < r; ++i)
            for (int j = ca; j < c; ++j) accum(n.in1, i, j - ca, g.at(i, j));
        break;
      }
      case OpKind::kSliceCols:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) accum(n.in0, i, j + n.i0, g.at(i, j));
        break;
      case OpKind::kResizeCols: {
        if (!want0()) break;
        int keep = std::min(c, n.v0->cols());
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < keep; ++j) accum(n.in0, i, j, g.at(i, j));
        break;
      }
      case OpKind::kRowSum:
        if (want0())
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < n.v0->cols(); ++j)
              accum(n.in0, i, j, g.at(i, 0));
        break;
      case OpKind::kRowMean: {
        if (!want0()) break;
        double inv = 1.0 / n.v0->cols();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < n.v0->cols(); ++j)
            accum(n.in0, i, j, inv * g.at(i, 0));
        break;
      }
      case OpKind::kFullSum:
        if (want0())
          for (int i = 0; i < n.v0->rows(); ++i)
            for (int j = 0; j < n.v0->cols(); ++j)
              accum(n.in0, i, j, g.at(0, 0));
        break;
      case OpKind::kBroadcastRow:
        if (want0())
          for (int j = 0; j < c; ++j) {
            double s = 0.0;
            for (int i = 0; i < r; ++i) s += g.at(i, j);
            accum(n.in0, 0, j, s);
          }
        break;
    }
  }

  GradientMap out;
  out.tape_ = this;
  out.by_node_.resize(nodes_.size());
  for (size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].op != OpKind::kLeaf) continue;
    if (has[id]) {
      out.by_node_[id] = std::make_shared<Matrix>(std::move(grads[id]));
    } else {
      // requires-grad leaf unreachable from the loss: gradient is zero
      out.by_node_[id] =
          std::make_shared<Matrix>(nodes_[id].out->rows(), nodes_[id].out->cols());
    }
  }
  return out;
}

// --- plain kernels -------------------------------------------------------

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions " + shape_str(a) + " * " +
                     shape_str(b) + " do not agree");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    double* orow = out.data() + static_cast<size_t>(i) * out.cols();
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data() + static_cast<size_t>(k) * b.cols();
      for (int j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix mat_transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Matrix mat_row_softmax(const Matrix& a) { return softmax_rows(a, nullptr); }

// --- recorded primitives --------------------------------------------------

DiffMatrix matmul(const DiffMatrix& a, const DiffMatrix& b) {
  TapeNode n;
  n.op = OpKind::kMatMul;
  n.out = share(mat_mul(a.value(), b.value()));
  return finish(tape_of(a, b), std::move(n), a, b);
}

DiffMatrix transpose(const DiffMatrix& a) {
  TapeNode n;
  n.op = OpKind::kTranspose;
  n.out = share(mat_transpose(a.value()));
  return finish(a.tape(), std::move(n), a);
}

namespace {
template <typename F>
DiffMatrix elementwise2(OpKind op, const char* name, const DiffMatrix& a,
                        const DiffMatrix& b, F fn) {
  require_same_shape(name, a, b);
  Matrix out(a.rows(), a.cols());
  for (size_t k = 0; k < out.size(); ++k)
    out[k] = fn(a.value()[k], b.value()[k]);
  TapeNode n;
  n.op = op;
  n.out = share(std::move(out));
  return finish(tape_of(a, b), std::move(n), a, b);
}
}  // namespace

DiffMatrix add(const DiffMatrix& a, const DiffMatrix& b) {
  return elementwise2(OpKind::kAdd, "add", a, b,
                      [](double x, double y) { return x + y; });
}

DiffMatrix sub(const DiffMatrix& a, const DiffMatrix& b) {
  return elementwise2(OpKind::kSub, "subtract", a, b,
                      [](double x, double y) { return x - y; });
}

DiffMatrix mul(const DiffMatrix& a, const DiffMatrix& b) {
  return elementwise2(OpKind::kMul, "multiply", a, b,
                      [](double x, double y) { return x * y; });
}

namespace {
template <typename F>
DiffMatrix elementwise1(OpKind op, const DiffMatrix& a, F fn, double s0 = 0.0,
                        double s1 = 0.0) {
  Matrix out(a.rows(), a.cols());
  for (size_t k = 0; k < out.size(); ++k) out[k] = fn(a.value()[k]);
  TapeNode n;
  n.op = op;
  n.s0 = s0;
  n.s1 = s1;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}
}  // namespace

DiffMatrix scalar_mul(const DiffMatrix& a, double c) {
  return elementwise1(OpKind::kScalarMul, a,
                      [c](double x) { return c * x; }, c);
}

DiffMatrix add_scalar(const DiffMatrix& a, double c) {
  return elementwise1(OpKind::kAddScalar, a,
                      [c](double x) { return x + c; }, c);
}

DiffMatrix row_softmax(const DiffMatrix& a) {
  TapeNode n;
  n.op = OpKind::kRowSoftmax;
  n.out = share(softmax_rows(a.value(), nullptr));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix masked_row_softmax(const DiffMatrix& a,
                              std::shared_ptr<const Matrix> mask) {
  if (!mask || !mask->same_shape(a.value()))
    throw ShapeError("masked_row_softmax: mask shape does not match input " +
                     shape_str(a.value()));
  TapeNode n;
  n.op = OpKind::kMaskedRowSoftmax;
  n.out = share(softmax_rows(a.value(), mask.get()));
  n.aux = std::move(mask);
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix leaky_relu(const DiffMatrix& a) {
  return elementwise1(OpKind::kLeakyRelu, a, [](double x) {
    return x > 0.0 ? x : kLeakyReluSlope * x;
  });
}

DiffMatrix relu(const DiffMatrix& a) {
  return elementwise1(OpKind::kRelu, a,
                      [](double x) { return x > 0.0 ? x : 0.0; });
}

DiffMatrix sigmoid(const DiffMatrix& a) {
  return elementwise1(OpKind::kSigmoid, a,
                      [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

DiffMatrix exp(const DiffMatrix& a) {
  return elementwise1(OpKind::kExp, a, [](double x) { return std::exp(x); });
}

DiffMatrix log(const DiffMatrix& a) {
  return elementwise1(OpKind::kLog, a, [](double x) {
    if (x <= 0.0)
      throw DomainError("log: non-positive input " + std::to_string(x));
    return std::log(x);
  });
}

DiffMatrix sqrt(const DiffMatrix& a) {
  return elementwise1(OpKind::kSqrt, a, [](double x) {
    if (x < 0.0)
      throw DomainError("sqrt: negative input " + std::to_string(x));
    return std::sqrt(x);
  });
}

DiffMatrix clamp(const DiffMatrix& a, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  return elementwise1(
      OpKind::kClamp, a,
      [lo, hi](double x) { return std::min(std::max(x, lo), hi); }, lo, hi);
}

DiffMatrix concat_cols(const DiffMatrix& a, const DiffMatrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("concat_cols: row counts " + shape_str(a.value()) +
                     " vs " + shape_str(b.value()));
  Matrix out(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.value().at(i, j);
    for (int j = 0; j < b.cols(); ++j)
      out.at(i, a.cols() + j) = b.value().at(i, j);
  }
  TapeNode n;
  n.op = OpKind::kConcatCols;
  n.out = share(std::move(out));
  return finish(tape_of(a, b), std::move(n), a, b);
}

DiffMatrix slice_cols(const DiffMatrix& a, int start, int count) {
  if (start < 0 || count < 1 || start + count > a.cols())
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of range for " +
                     shape_str(a.value()));
  Matrix out(a.rows(), count);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < count; ++j) out.at(i, j) = a.value().at(i, start + j);
  TapeNode n;
  n.op = OpKind::kSliceCols;
  n.i0 = start;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix resize_cols(const DiffMatrix& a, int count) {
  if (count < 1) throw ShapeError("resize_cols: count must be >= 1");
  Matrix out(a.rows(), count);
  int keep = std::min(count, a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < keep; ++j) out.at(i, j) = a.value().at(i, j);
  TapeNode n;
  n.op = OpKind::kResizeCols;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix row_sum(const DiffMatrix& a) {
  Matrix out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a.value().at(i, j);
    out.at(i, 0) = s;
  }
  TapeNode n;
  n.op = OpKind::kRowSum;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix row_mean(const DiffMatrix& a) {
  Matrix out(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a.value().at(i, j);
    out.at(i, 0) = s / a.cols();
  }
  TapeNode n;
  n.op = OpKind::kRowMean;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix full_sum(const DiffMatrix& a) {
  double s = 0.0;
  for (size_t k = 0; k < a.value().size(); ++k) s += a.value()[k];
  TapeNode n;
  n.op = OpKind::kFullSum;
  n.out = share(Matrix(1, 1, std::vector<double>{s}));
  return finish(a.tape(), std::move(n), a);
}

DiffMatrix broadcast_row(const DiffMatrix& a, int nrows) {
  if (a.rows() != 1)
    throw ShapeError("broadcast_row: input must be 1xC, got " +
                     shape_str(a.value()));
  if (nrows < 1) throw ShapeError("broadcast_row: nrows must be >= 1");
  Matrix out(nrows, a.cols());
  for (int i = 0; i < nrows; ++i)
    for (int j = 0; j < a.cols(); ++j) out.at(i, j) = a.value().at(0, j);
  TapeNode n;
  n.op = OpKind::kBroadcastRow;
  n.out = share(std::move(out));
  return finish(a.tape(), std::move(n), a);
}

// --- finite-difference harness ---------------------------------------------

double grad_check(const ExprBuilder& f, const std::vector<Matrix>& theta,
                  double h) {
  if (h <= 0.0) throw std::invalid_argument("grad_check: step must be > 0");

  Tape tape;
  std::vector<DiffMatrix> leaves;
  leaves.reserve(theta.size());
  for (const Matrix& m : theta) leaves.push_back(tape.leaf(m, true));
  DiffMatrix loss = f(tape, leaves);
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("grad_check: expression must be scalar-valued");
  GradientMap grads = tape.backward(loss);

  auto eval = [&](const std::vector<Matrix>& params) {
    Tape t;
    std::vector<DiffMatrix> ls;
    ls.reserve(params.size());
    for (const Matrix& m : params) ls.push_back(t.leaf(m, true));
    return f(t, ls).value().at(0, 0);
  };

  std::vector<Matrix> work = theta;
  double worst = 0.0;
  for (size_t p = 0; p < theta.size(); ++p) {
    const Matrix& analytic = grads.at(leaves[p]);
    for (size_t k = 0; k < work[p].size(); ++k) {
      double keep = work[p][k];
      work[p][k] = keep + h;
      double up = eval(work);
      work[p][k] = keep - h;
      double down = eval(work);
      work[p][k] = keep;
      double numeric = (up - down) / (2.0 * h);
      double err = std::fabs(analytic[k] - numeric) /
                   std::max(1.0, std::fabs(analytic[k]));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace hap
