#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hap/matrix.hpp"

namespace hap {

inline constexpr double kLeakyReluSlope = 0.01;

class Tape;

// A dense matrix participating in a recorded computation. Holds the forward
// value (shared, immutable) plus a handle into the tape that produced it.
// Constants and non-trainable leaves carry node() == -1 and are never
// recorded.
class DiffMatrix {
 public:
  DiffMatrix() = default;

  // A value that never receives a gradient and is not recorded.
  static DiffMatrix constant(Matrix value);
  static DiffMatrix constant(std::shared_ptr<const Matrix> value);

  const Matrix& value() const { return *value_; }
  std::shared_ptr<const Matrix> shared_value() const { return value_; }
  int rows() const { return value_->rows(); }
  int cols() const { return value_->cols(); }

  int node() const { return node_; }
  bool requires_grad() const { return requires_grad_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return value_ != nullptr; }

 private:
  friend class Tape;
  std::shared_ptr<const Matrix> value_;
  Tape* tape_ = nullptr;
  int node_ = -1;
  bool requires_grad_ = false;
};

enum class OpKind {
  kLeaf,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kScalarMul,
  kAddScalar,
  kRowSoftmax,
  kMaskedRowSoftmax,
  kLeakyRelu,
  kRelu,
  kSigmoid,
  kExp,
  kLog,
  kSqrt,
  kClamp,
  kConcatCols,
  kSliceCols,
  kResizeCols,
  kRowSum,
  kRowMean,
  kFullSum,
  kBroadcastRow,
};

struct TapeNode {
  OpKind op;
  int in0 = -1;
  int in1 = -1;
  std::shared_ptr<const Matrix> v0;   // saved input values for the reverse pass
  std::shared_ptr<const Matrix> v1;
  std::shared_ptr<const Matrix> out;
  std::shared_ptr<const Matrix> aux;  // e.g. softmax support mask
  double s0 = 0.0;
  double s1 = 0.0;
  int i0 = 0;
  int i1 = 0;
};

// Result of a backward sweep: one gradient per requires-grad leaf.
class GradientMap {
 public:
  // Gradient of the loss w.r.t. a recorded leaf; zero matrix if the leaf is
  // not reachable from the loss.
  const Matrix& at(const DiffMatrix& leaf) const;

 private:
  friend class Tape;
  std::vector<std::shared_ptr<Matrix>> by_node_;
  const Tape* tape_ = nullptr;
};

// Ordered record of primitive applications for one example. Confined to a
// single thread; distinct examples get distinct tapes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  DiffMatrix leaf(Matrix value, bool requires_grad = true);
  DiffMatrix leaf(std::shared_ptr<const Matrix> value, bool requires_grad = true);

  // Reverse sweep from a 1x1 loss node. Deterministic for a fixed tape.
  GradientMap backward(const DiffMatrix& loss) const;

  size_t size() const { return nodes_.size(); }
  const TapeNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }

  // Internal: appends a node and wraps its output. Used by the primitive
  // implementations; not part of the public surface proper.
  DiffMatrix emit(TapeNode node, bool requires_grad);

 private:
  std::vector<TapeNode> nodes_;
};

// --- forward primitives ------------------------------------------------
// Each computes the forward value and records a tape node when any input
// requires a gradient. Shape mismatches raise ShapeError with the offending
// dimensions; log of a non-positive value raises DomainError.

DiffMatrix matmul(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix transpose(const DiffMatrix& a);
DiffMatrix add(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix sub(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix mul(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix scalar_mul(const DiffMatrix& a, double c);
DiffMatrix add_scalar(const DiffMatrix& a, double c);
DiffMatrix row_softmax(const DiffMatrix& a);
// Softmax restricted to mask's nonzero support; masked entries are exactly 0.
DiffMatrix masked_row_softmax(const DiffMatrix& a,
                              std::shared_ptr<const Matrix> mask);
DiffMatrix leaky_relu(const DiffMatrix& a);
DiffMatrix relu(const DiffMatrix& a);
DiffMatrix sigmoid(const DiffMatrix& a);
DiffMatrix exp(const DiffMatrix& a);
DiffMatrix log(const DiffMatrix& a);
DiffMatrix sqrt(const DiffMatrix& a);
DiffMatrix clamp(const DiffMatrix& a, double lo, double hi);
DiffMatrix concat_cols(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix slice_cols(const DiffMatrix& a, int start, int count);
// Pads with zero columns (count > cols) or truncates (count < cols).
DiffMatrix resize_cols(const DiffMatrix& a, int count);
DiffMatrix row_sum(const DiffMatrix& a);
DiffMatrix row_mean(const DiffMatrix& a);
DiffMatrix full_sum(const DiffMatrix& a);
DiffMatrix broadcast_row(const DiffMatrix& a, int nrows);

// --- plain-matrix kernels ----------------------------------------------
// Shared by the recorded primitives and by code that wants the same
// arithmetic without a tape (evaluation paths, data generators).

Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix mat_transpose(const Matrix& a);
Matrix mat_row_softmax(const Matrix& a);

// --- verification harness ----------------------------------------------
// Builds the expression from leaves it creates over `theta`, then compares
// the analytic gradient of every entry against central finite differences.
// Returns max over entries of |analytic - numeric| / max(1, |analytic|).
using ExprBuilder =
    std::function<DiffMatrix(Tape&, const std::vector<DiffMatrix>&)>;

double grad_check(const ExprBuilder& f, const std::vector<Matrix>& theta,
                  double h = 1e-5);

}  // namespace hap
