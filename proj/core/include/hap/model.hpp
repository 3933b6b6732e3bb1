#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hap/coarsen.hpp"
#include "hap/embed.hpp"
#include "hap/graph.hpp"
#include "hap/heads.hpp"

namespace hap {

enum class Task { kClassify, kMatch, kSimilarity };

struct ModelConfig {
  Task task = Task::kClassify;
  EmbedKind embed = EmbedKind::kGcn;
  Activation activation = Activation::kRelu;
  int layers_per_block = 2;
  int coarsen_modules = 2;
  std::vector<int> cluster_counts;  // one per module, last usually 1
  double tau = 0.1;
  double scale = 0.5;
  ColumnMode column_mode = ColumnMode::kAffinitySummary;
  PoolKind pool = PoolKind::kHap;  // != kHap swaps the coarsening module out
  bool paper_literal_losses = false;
  int input_dim = 0;   // feature width the first layer projects from
  int embed_dim = 64;
  int classes = 2;            // classification head width
  int classifier_hidden = 0;  // 0 -> embed_dim
};

struct Param {
  std::string name;
  std::shared_ptr<Matrix> value;
};

// Tape-local handles for every parameter, in registry order.
struct ParamBinding {
  std::vector<DiffMatrix> leaves;
};

// The full network: embedding blocks alternating with coarsening modules,
// plus the task head. Parameter values live in a flat named registry so the
// optimizer, checkpoints and the finite-difference harness all see the same
// ordering.
class HapModel {
 public:
  HapModel(ModelConfig config, uint64_t init_seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }

  void set_param_values(const std::vector<Matrix>& values);

  // Creates one leaf per parameter on `tape`. With trainable=false the
  // leaves are unrecorded constants and the forward pass leaves no tape.
  ParamBinding bind(Tape& tape, bool trainable) const;

  // Per-level graph readouts (1 x embed_dim each, one per coarsening
  // module). The final entry is the graph embedding.
  std::vector<DiffMatrix> forward(const ParamBinding& binding, const Graph& g,
                                  Rng& rng, bool training) const;

  // Classification probabilities from the final readout.
  DiffMatrix classify_probs(const ParamBinding& binding, const Graph& g,
                            Rng& rng, bool training) const;

  // Euclidean distances between two graphs' readouts, one per level.
  std::vector<DiffMatrix> level_distances(const ParamBinding& binding,
                                          const Graph& g1, const Graph& g2,
                                          Rng& rng, bool training) const;

 private:
  struct Cursor;
  std::vector<DiffMatrix> forward_levels(Cursor& cur, const Graph& g, Rng& rng,
                                         bool training) const;

  ModelConfig config_;
  std::vector<Param> params_;
};

// Sanity default: degree one-hot for datasets without node labels.
void prepare_features(GraphDataset& ds);

// Resolves per-module cluster counts: explicit list wins, then the ratio
// rule N'_k = max(1, ceil(ratio^k * mean_n)) with a final module of 1, else
// the built-in {16, ..., 16, 1}.
std::vector<int> resolve_cluster_counts(int coarsen_modules,
                                        const std::vector<int>& requested,
                                        double ratio, double mean_nodes);

}  // namespace hap
