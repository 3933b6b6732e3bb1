#pragma once

#include <vector>

#include "hap/rng.hpp"
#include "hap/tensor.hpp"

namespace hap {

inline constexpr double kProbClamp = 1e-12;

// Two dense layers with a softmax output.
struct ClassifierHead {
  DiffMatrix W1;  // F x hidden
  DiffMatrix b1;  // 1 x hidden
  DiffMatrix W2;  // hidden x c
  DiffMatrix b2;  // 1 x c
  int classes = 0;

  static ClassifierHead init(int f_dim, int hidden, int classes, Tape& tape,
                             Rng& rng);
};

struct SimilarityConfig {
  double scale = 0.5;  // distance -> similarity decay
  int levels = 2;      // coarsening modules contributing readouts
};

// Mean over cluster rows per level; the final level (one cluster) is its row.
std::vector<DiffMatrix> hierarchical_readout(
    const std::vector<DiffMatrix>& level_features);

// softmax(W2 . relu(W1 x + b1) + b2); rows sum to 1.
DiffMatrix classify(const ClassifierHead& head, const DiffMatrix& embedding);

// -sum_g log p_g(y_g); zero probabilities clamp to 1e-12 before the log.
DiffMatrix loss_single(const std::vector<DiffMatrix>& predictions,
                       const std::vector<int>& labels);

// s = exp(-scale * d), plain-value version for evaluation.
double similarity_score(double distance, double scale);

// Euclidean distance between two 1xF readouts (recorded).
DiffMatrix euclidean_distance(const DiffMatrix& a, const DiffMatrix& b);

// Binary cross-entropy over per-level similarity scores. The printed form of
// the pair objective carries only the positive term; paper_literal reproduces
// that, the default adds the (1-y)log(1-s) term so negative pairs carry
// gradient.
DiffMatrix loss_pair(const std::vector<DiffMatrix>& level_distances, int label,
                     double scale, bool paper_literal = false);

// Hierarchical MSE on (d12 - d13) against the relative-distance label r.
// paper_literal drops the square, matching the printed signed form.
DiffMatrix loss_triple(const std::vector<DiffMatrix>& d12,
                       const std::vector<DiffMatrix>& d13, double r,
                       bool paper_literal = false);

}  // namespace hap
