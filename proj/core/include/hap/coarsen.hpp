#pragma once

#include "hap/rng.hpp"
#include "hap/tensor.hpp"

namespace hap {

// How the per-cluster column descriptor D_j is realized. The concatenation of
// a node descriptor (length N') with a raw content column (length N) only
// typechecks when N == N', so two realizations are provided:
//   kAffinitySummary  D_j = (1/N) sum_i C_ij * C_(i,.)  -- size-agnostic and
//                     invariant to node order (the default).
//   kPadTruncate      D_j = column j zero-padded or truncated to length N'.
//                     Order-sensitive for N > N'; kept for the padding
//                     equivalence check and literal fidelity.
enum class ColumnMode { kAffinitySummary, kPadTruncate };

inline constexpr double kSoftSampleEps = 1e-12;

// One coarsening module: content map T plus the decomposed attention vector
// (a_row scores node descriptors, a_col scores cluster descriptors; their
// concatenation is the full length-2N' attention parameter).
struct CoarseningLayer {
  DiffMatrix T;      // F x N'
  DiffMatrix a_row;  // 1 x N'
  DiffMatrix a_col;  // 1 x N'
  int n_clusters = 1;
  double tau = 0.1;
  ColumnMode column_mode = ColumnMode::kAffinitySummary;

  static CoarseningLayer init(int f_dim, int n_clusters, double tau,
                              ColumnMode mode, Tape& tape, Rng& rng);
};

struct AssignmentMatrix {
  DiffMatrix M;  // N x N', rows sum to 1
  DiffMatrix C;  // N x N', content matrix retained for inspection
};

struct CoarsenOutput {
  DiffMatrix H_coarse;   // N' x F cluster features
  DiffMatrix A_coarse;   // N' x N' dense coarsened adjacency (M^T A M)
  DiffMatrix A_sampled;  // N' x N' soft-sampled adjacency, rows sum to 1
  AssignmentMatrix assignment;
};

// C = H * T; row i describes node i, column j profiles cluster j.
DiffMatrix build_gcont(const DiffMatrix& H, const DiffMatrix& T);

// Plain-matrix descriptor of one cluster column, for inspection and tests.
// The recorded forward path computes all descriptors at once.
Matrix cluster_descriptor(const Matrix& C, int j, ColumnMode mode,
                          int n_clusters);

// Raw attention scores M_ij = LeakyReLU(a_row . C_(i,.) + a_col . D_j).
DiffMatrix moa_scores(const DiffMatrix& C, const DiffMatrix& a_row,
                      const DiffMatrix& a_col, ColumnMode mode);

// Row-wise softmax of the raw scores.
AssignmentMatrix normalize_assignment(const DiffMatrix& raw,
                                      const DiffMatrix& C);

// H' = M^T H, A' = M^T A M.
std::pair<DiffMatrix, DiffMatrix> form_clusters(const DiffMatrix& M,
                                                const DiffMatrix& H,
                                                const DiffMatrix& A);

// Row-wise Gumbel-Softmax over log(A' + eps). Noise is drawn only when
// training; evaluation uses the deterministic tempered softmax.
DiffMatrix soft_sample(const DiffMatrix& A_coarse, double tau, Rng& rng,
                       bool training);

// Full module: build_gcont -> moa_scores -> normalize -> form_clusters ->
// soft_sample.
CoarsenOutput coarsen_forward(const CoarseningLayer& layer, const DiffMatrix& H,
                              const DiffMatrix& A, Rng& rng, bool training);

// --- padding equivalence (two scoring routes) ---------------------------
// For a cluster column shorter than the attention parameter (N < N'), the
// score can be computed either by zero-padding the column to length N' or by
// zeroing the parameter entries beyond the column's true length. Both loops
// run in identical index order so the results can be compared bitwise.
double moa_score_padded_column(const std::vector<double>& a_row,
                               const std::vector<double>& a_col,
                               const std::vector<double>& c_row,
                               const std::vector<double>& c_col);
double moa_score_extended_param(const std::vector<double>& a_row,
                                const std::vector<double>& a_col,
                                const std::vector<double>& c_row,
                                const std::vector<double>& c_col);

// --- ablation poolers ----------------------------------------------------
enum class PoolKind { kHap, kSum, kMean, kMeanAttention };

// Collapses node features to a single row. mean-attention weighs each node by
// sigmoid(h_i . c) against the mean row c.
DiffMatrix baseline_pool(PoolKind kind, const DiffMatrix& H);

}  // namespace hap
