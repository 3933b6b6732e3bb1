#include "hap/model.hpp"

#include <cmath>

namespace hap {

namespace {

std::string block_name(int k, const std::string& rest) {
  return "block" + std::to_string(k) + "." + rest;
}

}  // namespace

std::vector<int> resolve_cluster_counts(int coarsen_modules,
                                        const std::vector<int>& requested,
                                        double ratio, double mean_nodes) {
  if (coarsen_modules < 1)
    throw std::invalid_argument("resolve_cluster_counts: need >= 1 module");
  if (!requested.empty()) {
    if (static_cast<int>(requested.size()) != coarsen_modules)
      throw std::invalid_argument(
          "resolve_cluster_counts: got " + std::to_string(requested.size()) +
          " cluster counts for " + std::to_string(coarsen_modules) + " modules");
    for (int c : requested)
      if (c < 1)
        throw std::invalid_argument("resolve_cluster_counts: counts must be >= 1");
    return requested;
  }
  std::vector<int> counts(static_cast<size_t>(coarsen_modules));
  for (int k = 0; k < coarsen_modules; ++k) {
    if (k == coarsen_modules - 1) {
      counts[static_cast<size_t>(k)] = 1;  // final module yields the embedding
    } else if (ratio > 0.0) {
      counts[static_cast<size_t>(k)] = std::max(
          1, static_cast<int>(std::ceil(std::pow(ratio, k + 1) * mean_nodes)));
    } else {
      counts[static_cast<size_t>(k)] = 16;
    }
  }
  return counts;
}

HapModel::HapModel(ModelConfig config, uint64_t init_seed)
    : config_(std::move(config)) {
  if (config_.input_dim < 1)
    throw std::invalid_argument("HapModel: input_dim must be set");
  if (static_cast<int>(config_.cluster_counts.size()) != config_.coarsen_modules)
    throw std::invalid_argument("HapModel: cluster_counts size mismatch");
  if (config_.classifier_hidden == 0) config_.classifier_hidden = config_.embed_dim;

  Rng rng(init_seed);
  auto push = [&](const std::string& name, Matrix value) {
    params_.push_back({name, std::make_shared<Matrix>(std::move(value))});
  };

  int d = config_.embed_dim;
  for (int k = 0; k < config_.coarsen_modules; ++k) {
    for (int l = 0; l < config_.layers_per_block; ++l) {
      int f_in = (k == 0 && l == 0) ? config_.input_dim : d;
      push(block_name(k, "layer" + std::to_string(l) + ".W"),
           glorot_uniform(f_in, d, rng));
      if (config_.embed == EmbedKind::kGat)
        push(block_name(k, "layer" + std::to_string(l) + ".attn"),
             glorot_uniform(1, 2 * d, rng));
    }
    if (config_.pool == PoolKind::kHap) {
      int nc = config_.cluster_counts[static_cast<size_t>(k)];
      push(block_name(k, "coarsen.T"), glorot_uniform(d, nc, rng));
      push(block_name(k, "coarsen.a_row"), glorot_uniform(1, nc, rng));
      push(block_name(k, "coarsen.a_col"), glorot_uniform(1, nc, rng));
    }
  }
  if (config_.task == Task::kClassify) {
    push("head.W1", glorot_uniform(d, config_.classifier_hidden, rng));
    push("head.b1", Matrix(1, config_.classifier_hidden));
    push("head.W2", glorot_uniform(config_.classifier_hidden, config_.classes, rng));
    push("head.b2", Matrix(1, config_.classes));
  }
}

void HapModel::set_param_values(const std::vector<Matrix>& values) {
  if (values.size() != params_.size())
    throw std::invalid_argument("set_param_values: count mismatch");
  for (size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(*params_[i].value))
      throw ShapeError("set_param_values: shape mismatch for " + params_[i].name);
    *params_[i].value = values[i];
  }
}

ParamBinding HapModel::bind(Tape& tape, bool trainable) const {
  ParamBinding b;
  b.leaves.reserve(params_.size());
  for (const Param& p : params_) b.leaves.push_back(tape.leaf(p.value, trainable));
  return b;
}

struct HapModel::Cursor {
  const ParamBinding* binding;
  size_t next = 0;
  DiffMatrix take() {
    if (next >= binding->leaves.size())
      throw std::logic_error("HapModel: parameter cursor overrun");
    return binding->leaves[next++];
  }
};

std::vector<DiffMatrix> HapModel::forward_levels(Cursor& cur, const Graph& g,
                                                 Rng& rng, bool training) const {
  if (g.features.cols() != config_.input_dim)
    throw ShapeError("HapModel: graph features have width " +
                     std::to_string(g.features.cols()) + ", model expects " +
                     std::to_string(config_.input_dim));
  if (g.features.rows() != g.n)
    throw ShapeError("HapModel: feature row count does not match node count");

  DiffMatrix A = DiffMatrix::constant(g.adjacency);
  DiffMatrix H = DiffMatrix::constant(g.features);
  std::vector<DiffMatrix> level_features;
  level_features.reserve(static_cast<size_t>(config_.coarsen_modules));

  for (int k = 0; k < config_.coarsen_modules; ++k) {
    for (int l = 0; l < config_.layers_per_block; ++l) {
      if (config_.embed == EmbedKind::kGat) {
        GatLayer layer;
        layer.W = cur.take();
        layer.attn = cur.take();
        layer.activation = config_.activation;
        H = gat_forward(layer, A, H);
      } else {
        GcnLayer layer;
        layer.W = cur.take();
        layer.activation = config_.activation;
        H = gcn_forward(layer, A, H);
      }
    }
    if (config_.pool == PoolKind::kHap) {
      CoarseningLayer layer;
      layer.T = cur.take();
      layer.a_row = cur.take();
      layer.a_col = cur.take();
      layer.n_clusters = config_.cluster_counts[static_cast<size_t>(k)];
      layer.tau = config_.tau;
      layer.column_mode = config_.column_mode;
      CoarsenOutput out = coarsen_forward(layer, H, A, rng, training);
      H = out.H_coarse;
      A = out.A_sampled;
    } else {
      H = baseline_pool(config_.pool, H);
      A = DiffMatrix::constant(Matrix(1, 1));
    }
    level_features.push_back(H);
  }
  return hierarchical_readout(level_features);
}

std::vector<DiffMatrix> HapModel::forward(const ParamBinding& binding,
                                          const Graph& g, Rng& rng,
                                          bool training) const {
  Cursor cur{&binding};
  std::vector<DiffMatrix> readouts = forward_levels(cur, g, rng, training);
  // skip the classifier head, if any
  return readouts;
}

DiffMatrix HapModel::classify_probs(const ParamBinding& binding, const Graph& g,
                                    Rng& rng, bool training) const {
  if (config_.task != Task::kClassify)
    throw std::logic_error("classify_probs: model has no classification head");
  Cursor cur{&binding};
  std::vector<DiffMatrix> readouts = forward_levels(cur, g, rng, training);
  ClassifierHead head;
  head.W1 = cur.take();
  head.b1 = cur.take();
  head.W2 = cur.take();
  head.b2 = cur.take();
  head.classes = config_.classes;
  return classify(head, readouts.back());
}

std::vector<DiffMatrix> HapModel::level_distances(const ParamBinding& binding,
                                                  const Graph& g1,
                                                  const Graph& g2, Rng& rng,
                                                  bool training) const {
  Cursor c1{&binding};
  std::vector<DiffMatrix> r1 = forward_levels(c1, g1, rng, training);
  Cursor c2{&binding};
  std::vector<DiffMatrix> r2 = forward_levels(c2, g2, rng, training);
  std::vector<DiffMatrix> dists;
  dists.reserve(r1.size());
  for (size_t k = 0; k < r1.size(); ++k)
    dists.push_back(euclidean_distance(r1[k], r2[k]));
  return dists;
}

void prepare_features(GraphDataset& ds) {
  // loaders set feature_dim; freshly generated graphs carry placeholders
  if (ds.feature_dim == 0) apply_degree_onehot(ds);
}

}  // namespace hap
