#include "hap/embed.hpp"

#include <cmath>

namespace hap {

namespace {

// A + I, keeping isolated nodes connected to themselves.
DiffMatrix with_self_loops(const DiffMatrix& A) {
  return add(A, DiffMatrix::constant(Matrix::identity(A.rows())));
}

DiffMatrix ones_const(int rows, int cols) {
  return DiffMatrix::constant(Matrix::ones(rows, cols));
}

}  // namespace

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(-bound, bound);
  return m;
}

GcnLayer GcnLayer::init(int f_in, int f_out, Tape& tape, Rng& rng,
                        Activation act) {
  GcnLayer l;
  l.W = tape.leaf(glorot_uniform(f_in, f_out, rng));
  l.activation = act;
  return l;
}

GatLayer GatLayer::init(int f_in, int f_out, Tape& tape, Rng& rng,
                        Activation act) {
  GatLayer l;
  l.W = tape.leaf(glorot_uniform(f_in, f_out, rng));
  l.attn = tape.leaf(glorot_uniform(1, 2 * f_out, rng));
  l.activation = act;
  return l;
}

namespace {
DiffMatrix activate(Activation act, const DiffMatrix& x) {
  return act == Activation::kSigmoid ? sigmoid(x) : relu(x);
}
}  // namespace

DiffMatrix gcn_forward(const GcnLayer& layer, const DiffMatrix& A,
                       const DiffMatrix& H) {
  int n = A.rows();
  DiffMatrix At = with_self_loops(A);
  // d^{-1/2} via exp(-0.5 log d); degrees are strictly positive thanks to the
  // self-loop.
  DiffMatrix d = row_sum(At);
  DiffMatrix s = exp(scalar_mul(log(d), -0.5));  // n x 1
  DiffMatrix left = matmul(s, ones_const(1, n));
  DiffMatrix right = matmul(ones_const(n, 1), transpose(s));
  DiffMatrix norm = mul(mul(left, At), right);
  return activate(layer.activation, matmul(matmul(norm, H), layer.W));
}

namespace {

DiffMatrix attention_over(const GatLayer& layer, const DiffMatrix& A,
                          const DiffMatrix& Z) {
  int n = A.rows();
  int f_out = layer.W.cols();
  DiffMatrix a_src = slice_cols(layer.attn, 0, f_out);
  DiffMatrix a_dst = slice_cols(layer.attn, f_out, f_out);
  DiffMatrix u = matmul(Z, transpose(a_src));  // n x 1
  DiffMatrix v = matmul(Z, transpose(a_dst));  // n x 1
  DiffMatrix logits = leaky_relu(
      add(matmul(u, ones_const(1, n)), matmul(ones_const(n, 1), transpose(v))));

  auto mask = std::make_shared<Matrix>(n, n);
  const Matrix& a = A.value();
  for (int i = 0; i < n; ++i) {
    mask->at(i, i) = 1.0;
    for (int j = 0; j < n; ++j)
      if (a.at(i, j) != 0.0) mask->at(i, j) = 1.0;
  }
  return masked_row_softmax(logits, std::move(mask));
}

}  // namespace

DiffMatrix gat_attention(const GatLayer& layer, const DiffMatrix& A,
                         const DiffMatrix& H) {
  return attention_over(layer, A, matmul(H, layer.W));
}

DiffMatrix gat_forward(const GatLayer& layer, const DiffMatrix& A,
                       const DiffMatrix& H) {
  DiffMatrix Z = matmul(H, layer.W);
  DiffMatrix alpha = attention_over(layer, A, Z);
  return activate(layer.activation, matmul(alpha, Z));
}

}  // namespace hap
