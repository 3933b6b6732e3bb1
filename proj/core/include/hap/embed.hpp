#pragma once

#include "hap/rng.hpp"
#include "hap/tensor.hpp"

namespace hap {

// Glorot-uniform initialization in +-sqrt(6/(fan_in+fan_out)).
Matrix glorot_uniform(int rows, int cols, Rng& rng);

enum class EmbedKind { kGcn, kGat };

// Output nonlinearity of the embedding layers. ReLU is the default; sigmoid
// saturates, which matters for tasks that must compare cluster features whose
// magnitudes scale with graph size (a bias-free ReLU stack is positively
// homogeneous along those rays and cannot tell growth from shrinkage of equal
// magnitude).
enum class Activation { kRelu, kSigmoid };

// Graph convolution: sigma(D~^{-1/2} A~ D~^{-1/2} H W) with A~ = A + I.
struct GcnLayer {
  DiffMatrix W;  // F_in x F_out
  Activation activation = Activation::kRelu;

  static GcnLayer init(int f_in, int f_out, Tape& tape, Rng& rng,
                       Activation act = Activation::kRelu);
};

// Masked pairwise attention over A~'s support; a trainable attention vector
// scores node pairs and the aggregation is softmax-weighted.
struct GatLayer {
  DiffMatrix W;     // F_in x F_out
  DiffMatrix attn;  // 1 x 2*F_out
  Activation activation = Activation::kRelu;

  static GatLayer init(int f_in, int f_out, Tape& tape, Rng& rng,
                       Activation act = Activation::kRelu);
};

DiffMatrix gcn_forward(const GcnLayer& layer, const DiffMatrix& A,
                       const DiffMatrix& H);

// The attention matrix alpha (rows sum to 1 on A~'s support); exposed for
// inspection and tests.
DiffMatrix gat_attention(const GatLayer& layer, const DiffMatrix& A,
                         const DiffMatrix& H);

DiffMatrix gat_forward(const GatLayer& layer, const DiffMatrix& A,
                       const DiffMatrix& H);

}  // namespace hap
