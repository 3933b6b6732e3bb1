#include "hap/coarsen.hpp"

#include <cmath>

#include "hap/embed.hpp"

namespace hap {

CoarseningLayer CoarseningLayer::init(int f_dim, int n_clusters, double tau,
                                      ColumnMode mode, Tape& tape, Rng& rng) {
  if (n_clusters < 1)
    throw std::invalid_argument("CoarseningLayer: n_clusters must be >= 1");
  if (tau <= 0.0) throw std::invalid_argument("CoarseningLayer: tau must be > 0");
  CoarseningLayer l;
  l.T = tape.leaf(glorot_uniform(f_dim, n_clusters, rng));
  l.a_row = tape.leaf(glorot_uniform(1, n_clusters, rng));
  l.a_col = tape.leaf(glorot_uniform(1, n_clusters, rng));
  l.n_clusters = n_clusters;
  l.tau = tau;
  l.column_mode = mode;
  return l;
}

DiffMatrix build_gcont(const DiffMatrix& H, const DiffMatrix& T) {
  return matmul(H, T);
}

Matrix cluster_descriptor(const Matrix& C, int j, ColumnMode mode,
                          int n_clusters) {
  if (j < 0 || j >= C.cols())
    throw std::invalid_argument("cluster_descriptor: column index out of range");
  Matrix d(1, n_clusters);
  if (mode == ColumnMode::kAffinitySummary) {
    for (int i = 0; i < C.rows(); ++i) {
      double w = C.at(i, j);
      for (int k = 0; k < C.cols(); ++k) d.at(0, k) += w * C.at(i, k);
    }
    for (int k = 0; k < n_clusters; ++k) d.at(0, k) /= C.rows();
  } else {
    int keep = std::min(C.rows(), n_clusters);
    for (int i = 0; i < keep; ++i) d.at(0, i) = C.at(i, j);
  }
  return d;
}

namespace {

// All cluster descriptors stacked: row j is D_j.
DiffMatrix descriptor_matrix(const DiffMatrix& C, ColumnMode mode,
                             int n_clusters) {
  if (mode == ColumnMode::kAffinitySummary) {
    // row j of (1/N) C^T C equals the affinity-weighted mean of node
    // descriptors for cluster j
    return scalar_mul(matmul(transpose(C), C), 1.0 / C.rows());
  }
  return resize_cols(transpose(C), n_clusters);
}

}  // namespace

DiffMatrix moa_scores(const DiffMatrix& C, const DiffMatrix& a_row,
                      const DiffMatrix& a_col, ColumnMode mode) {
  int n = C.rows();
  int nc = C.cols();
  if (a_row.cols() != nc || a_col.cols() != nc)
    throw ShapeError("moa_scores: attention length " +
                     std::to_string(a_row.cols()) + " does not match " +
                     std::to_string(nc) + " clusters");
  DiffMatrix D = descriptor_matrix(C, mode, nc);
  DiffMatrix row_part = matmul(C, transpose(a_row));  // n x 1
  DiffMatrix col_part = matmul(D, transpose(a_col));  // nc x 1
  DiffMatrix ones_row = DiffMatrix::constant(Matrix::ones(1, nc));
  DiffMatrix ones_col = DiffMatrix::constant(Matrix::ones(n, 1));
  return leaky_relu(
      add(matmul(row_part, ones_row), matmul(ones_col, transpose(col_part))));
}

AssignmentMatrix normalize_assignment(const DiffMatrix& raw,
                                      const DiffMatrix& C) {
  AssignmentMatrix out;
  out.M = row_softmax(raw);
  out.C = C;
  return out;
}

std::pair<DiffMatrix, DiffMatrix> form_clusters(const DiffMatrix& M,
                                                const DiffMatrix& H,
                                                const DiffMatrix& A) {
  DiffMatrix Mt = transpose(M);
  DiffMatrix Hc = matmul(Mt, H);
  DiffMatrix Ac = matmul(Mt, matmul(A, M));
  return {Hc, Ac};
}

DiffMatrix soft_sample(const DiffMatrix& A_coarse, double tau, Rng& rng,
                       bool training) {
  if (tau <= 0.0) throw std::invalid_argument("soft_sample: tau must be > 0");
  DiffMatrix logits = log(add_scalar(A_coarse, kSoftSampleEps));
  if (training) {
    Matrix noise(A_coarse.rows(), A_coarse.cols());
    for (size_t k = 0; k < noise.size(); ++k) noise[k] = rng.gumbel();
    logits = add(logits, DiffMatrix::constant(std::move(noise)));
  }
  return row_softmax(scalar_mul(logits, 1.0 / tau));
}

CoarsenOutput coarsen_forward(const CoarseningLayer& layer, const DiffMatrix& H,
                              const DiffMatrix& A, Rng& rng, bool training) {
  CoarsenOutput out;
  DiffMatrix C = build_gcont(H, layer.T);
  DiffMatrix raw = moa_scores(C, layer.a_row, layer.a_col, layer.column_mode);
  out.assignment = normalize_assignment(raw, C);
  auto [Hc, Ac] = form_clusters(out.assignment.M, H, A);
  out.H_coarse = Hc;
  out.A_coarse = Ac;
  out.A_sampled = soft_sample(Ac, layer.tau, rng, training);
  return out;
}

double moa_score_padded_column(const std::vector<double>& a_row,
                               const std::vector<double>& a_col,
                               const std::vector<double>& c_row,
                               const std::vector<double>& c_col) {
  size_t nc = a_row.size();
  if (a_col.size() != nc || c_row.size() != nc)
    throw ShapeError("moa_score: parameter/row length mismatch");
  if (c_col.size() > nc)
    throw ShapeError("moa_score: column longer than the parameter");
  double s = 0.0;
  for (size_t t = 0; t < nc; ++t) s += a_row[t] * c_row[t];
  for (size_t t = 0; t < nc; ++t) {
    double padded = t < c_col.size() ? c_col[t] : 0.0;
    s += a_col[t] * padded;
  }
  return s > 0.0 ? s : kLeakyReluSlope * s;
}

double moa_score_extended_param(const std::vector<double>& a_row,
                                const std::vector<double>& a_col,
                                const std::vector<double>& c_row,
                                const std::vector<double>& c_col) {
  size_t nc = a_row.size();
  if (a_col.size() != nc || c_row.size() != nc)
    throw ShapeError("moa_score: parameter/row length mismatch");
  if (c_col.size() > nc)
    throw ShapeError("moa_score: column longer than the parameter");
  double s = 0.0;
  for (size_t t = 0; t < nc; ++t) s += a_row[t] * c_row[t];
  for (size_t t = 0; t < nc; ++t) {
    double param = t < c_col.size() ? a_col[t] : 0.0;
    double value = t < c_col.size() ? c_col[t] : 0.0;
    s += param * value;
  }
  return s > 0.0 ? s : kLeakyReluSlope * s;
}

DiffMatrix baseline_pool(PoolKind kind, const DiffMatrix& H) {
  int n = H.rows();
  switch (kind) {
    case PoolKind::kSum:
      return matmul(DiffMatrix::constant(Matrix::ones(1, n)), H);
    case PoolKind::kMean:
      return scalar_mul(matmul(DiffMatrix::constant(Matrix::ones(1, n)), H),
                        1.0 / n);
    case PoolKind::kMeanAttention: {
      DiffMatrix c = scalar_mul(
          matmul(DiffMatrix::constant(Matrix::ones(1, n)), H), 1.0 / n);
      DiffMatrix w = sigmoid(matmul(H, transpose(c)));  // n x 1
      return matmul(transpose(w), H);
    }
    case PoolKind::kHap:
      break;
  }
  throw std::invalid_argument("baseline_pool: kHap is not a flat pooler");
}

}  // namespace hap
