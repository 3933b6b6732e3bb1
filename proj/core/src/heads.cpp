#include "hap/heads.hpp"

#include <cmath>

#include "hap/embed.hpp"

namespace hap {

ClassifierHead ClassifierHead::init(int f_dim, int hidden, int classes,
                                    Tape& tape, Rng& rng) {
  if (classes < 2)
    throw std::invalid_argument("ClassifierHead: need at least 2 classes");
  ClassifierHead h;
  h.W1 = tape.leaf(glorot_uniform(f_dim, hidden, rng));
  h.b1 = tape.leaf(Matrix(1, hidden));
  h.W2 = tape.leaf(glorot_uniform(hidden, classes, rng));
  h.b2 = tape.leaf(Matrix(1, classes));
  h.classes = classes;
  return h;
}

std::vector<DiffMatrix> hierarchical_readout(
    const std::vector<DiffMatrix>& level_features) {
  if (level_features.empty())
    throw std::invalid_argument("hierarchical_readout: no levels given");
  std::vector<DiffMatrix> out;
  out.reserve(level_features.size());
  for (const DiffMatrix& Hk : level_features) {
    // mean over cluster rows -> 1 x F
    DiffMatrix ones = DiffMatrix::constant(Matrix::ones(1, Hk.rows()));
    out.push_back(scalar_mul(matmul(ones, Hk), 1.0 / Hk.rows()));
  }
  return out;
}

DiffMatrix classify(const ClassifierHead& head, const DiffMatrix& embedding) {
  DiffMatrix f1 = relu(add(matmul(embedding, head.W1), head.b1));
  DiffMatrix logits = add(matmul(f1, head.W2), head.b2);
  return row_softmax(logits);
}

DiffMatrix loss_single(const std::vector<DiffMatrix>& predictions,
                       const std::vector<int>& labels) {
  if (predictions.empty() || predictions.size() != labels.size())
    throw std::invalid_argument("loss_single: predictions/labels mismatch");
  DiffMatrix total;
  for (size_t g = 0; g < predictions.size(); ++g) {
    const DiffMatrix& p = predictions[g];
    int y = labels[g];
    if (y < 0 || y >= p.cols())
      throw std::invalid_argument("loss_single: label " + std::to_string(y) +
                                  " out of range");
    DiffMatrix py = clamp(slice_cols(p, y, 1), kProbClamp, 1.0 + kProbClamp);
    DiffMatrix term = scalar_mul(log(py), -1.0);
    total = g == 0 ? term : add(total, term);
  }
  return total;
}

double similarity_score(double distance, double scale) {
  if (distance < 0.0)
    throw std::invalid_argument("similarity_score: negative distance");
  return std::exp(-scale * distance);
}

DiffMatrix euclidean_distance(const DiffMatrix& a, const DiffMatrix& b) {
  DiffMatrix diff = sub(a, b);
  DiffMatrix ss = full_sum(mul(diff, diff));
  // keeps sqrt away from its zero-gradient singularity when readouts coincide
  return sqrt(clamp(ss, 1e-18, HUGE_VAL));
}

DiffMatrix loss_pair(const std::vector<DiffMatrix>& level_distances, int label,
                     double scale, bool paper_literal) {
  if (level_distances.empty())
    throw std::invalid_argument("loss_pair: no level distances");
  if (label != 0 && label != 1)
    throw std::invalid_argument("loss_pair: label must be 0 or 1");
  DiffMatrix acc;
  bool first = true;
  for (const DiffMatrix& d : level_distances) {
    DiffMatrix s = exp(scalar_mul(d, -scale));
    DiffMatrix sc = clamp(s, kProbClamp, 1.0 - kProbClamp);
    DiffMatrix term;
    if (label == 1) {
      term = log(sc);
    } else if (paper_literal) {
      // printed objective contributes nothing for negative pairs
      term = scalar_mul(sc, 0.0);
    } else {
      DiffMatrix one = DiffMatrix::constant(Matrix(1, 1, 1.0));
      term = log(sub(one, sc));
    }
    acc = first ? term : add(acc, term);
    first = false;
  }
  return scalar_mul(acc, -1.0 / static_cast<double>(level_distances.size()));
}

DiffMatrix loss_triple(const std::vector<DiffMatrix>& d12,
                       const std::vector<DiffMatrix>& d13, double r,
                       bool paper_literal) {
  if (d12.empty() || d12.size() != d13.size())
    throw std::invalid_argument("loss_triple: level distance lists mismatch");
  DiffMatrix acc;
  for (size_t k = 0; k < d12.size(); ++k) {
    DiffMatrix e = add_scalar(sub(d12[k], d13[k]), -r);
    DiffMatrix term = paper_literal ? e : mul(e, e);
    acc = k == 0 ? term : add(acc, term);
  }
  return scalar_mul(acc, 1.0 / static_cast<double>(d12.size()));
}

}  // namespace hap
