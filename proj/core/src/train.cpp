#include "hap/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace hap {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

const char* embed_name(EmbedKind k) {
  return k == EmbedKind::kGat ? "gat" : "gcn";
}

const char* column_mode_name(ColumnMode m) {
  return m == ColumnMode::kPadTruncate ? "pad-truncate" : "affinity-summary";
}

const char* pool_name(PoolKind p) {
  switch (p) {
    case PoolKind::kSum: return "sum";
    case PoolKind::kMean: return "mean";
    case PoolKind::kMeanAttention: return "mean-att";
    case PoolKind::kHap: break;
  }
  return "hap";
}

PoolKind parse_pool(const std::string& s) {
  if (s == "hap") return PoolKind::kHap;
  if (s == "sum") return PoolKind::kSum;
  if (s == "mean") return PoolKind::kMean;
  if (s == "mean-att" || s == "mean-attention") return PoolKind::kMeanAttention;
  throw std::invalid_argument("unknown pool kind '" + s + "'");
}

}  // namespace

std::string task_name(Task t) {
  switch (t) {
    case Task::kClassify: return "classify";
    case Task::kMatch: return "match";
    case Task::kSimilarity: return "similarity";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  if (s == "classify") return Task::kClassify;
  if (s == "match") return Task::kMatch;
  if (s == "similarity") return Task::kSimilarity;
  throw std::invalid_argument("unknown task '" + s + "'");
}

std::string serialize_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "task = " << task_name(cfg.task) << "\n";
  out << "lr = " << fmt17(cfg.lr) << "\n";
  out << "epochs = " << cfg.epochs << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "embed = " << embed_name(cfg.embed) << "\n";
  out << "activation = "
      << (cfg.activation == Activation::kSigmoid ? "sigmoid" : "relu") << "\n";
  out << "layers_per_block = " << cfg.layers_per_block << "\n";
  out << "coarsen_modules = " << cfg.coarsen_modules << "\n";
  out << "cluster_counts = ";
  if (cfg.cluster_counts.empty()) {
    out << "auto";
  } else {
    for (size_t i = 0; i < cfg.cluster_counts.size(); ++i)
      out << (i ? "," : "") << cfg.cluster_counts[i];
  }
  out << "\n";
  out << "cluster_ratio = " << fmt17(cfg.cluster_ratio) << "\n";
  out << "tau = " << fmt17(cfg.tau) << "\n";
  out << "scale = " << fmt17(cfg.scale) << "\n";
  out << "split = " << fmt17(cfg.split_ratios[0]) << ","
      << fmt17(cfg.split_ratios[1]) << "," << fmt17(cfg.split_ratios[2]) << "\n";
  out << "column_mode = " << column_mode_name(cfg.column_mode) << "\n";
  out << "pool = " << pool_name(cfg.pool) << "\n";
  out << "paper_literal_losses = " << (cfg.paper_literal_losses ? "true" : "false")
      << "\n";
  out << "embed_dim = " << cfg.embed_dim << "\n";
  out << "patience = " << cfg.patience << "\n";
  out << "threads = " << cfg.threads << "\n";
  return out.str();
}

void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "task") {
    cfg.task = parse_task(value);
  } else if (key == "lr") {
    cfg.lr = std::stod(value);
  } else if (key == "epochs") {
    cfg.epochs = std::stoi(value);
  } else if (key == "batch_size") {
    cfg.batch_size = std::stoi(value);
  } else if (key == "seed") {
    cfg.seed = std::stoull(value);
  } else if (key == "embed") {
    if (value == "gcn") cfg.embed = EmbedKind::kGcn;
    else if (value == "gat") cfg.embed = EmbedKind::kGat;
    else throw std::invalid_argument("unknown embed kind '" + value + "'");
  } else if (key == "activation") {
    if (value == "relu") cfg.activation = Activation::kRelu;
    else if (value == "sigmoid") cfg.activation = Activation::kSigmoid;
    else throw std::invalid_argument("unknown activation '" + value + "'");
  } else if (key == "layers_per_block") {
    cfg.layers_per_block = std::stoi(value);
  } else if (key == "coarsen_modules") {
    cfg.coarsen_modules = std::stoi(value);
  } else if (key == "cluster_counts") {
    cfg.cluster_counts.clear();
    if (value != "auto")
      for (double d : parse_double_list(value))
        cfg.cluster_counts.push_back(static_cast<int>(d));
  } else if (key == "cluster_ratio") {
    cfg.cluster_ratio = std::stod(value);
  } else if (key == "tau") {
    cfg.tau = std::stod(value);
  } else if (key == "scale") {
    cfg.scale = std::stod(value);
  } else if (key == "split") {
    std::string norm = value;
    std::replace(norm.begin(), norm.end(), ':', ',');
    std::vector<double> r = parse_double_list(norm);
    if (r.size() != 3)
      throw std::invalid_argument("split needs three ratios, e.g. 8:1:1");
    for (int i = 0; i < 3; ++i) cfg.split_ratios[i] = r[static_cast<size_t>(i)];
  } else if (key == "column_mode") {
    if (value == "affinity-summary") cfg.column_mode = ColumnMode::kAffinitySummary;
    else if (value == "pad-truncate") cfg.column_mode = ColumnMode::kPadTruncate;
    else throw std::invalid_argument("unknown column_mode '" + value + "'");
  } else if (key == "pool") {
    cfg.pool = parse_pool(value);
  } else if (key == "paper_literal_losses") {
    cfg.paper_literal_losses = (value == "true" || value == "1");
  } else if (key == "embed_dim") {
    cfg.embed_dim = std::stoi(value);
  } else if (key == "patience") {
    cfg.patience = std::stoi(value);
  } else if (key == "threads") {
    cfg.threads = std::stoi(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected 'key = value'");
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const TrainConfig& cfg) {
  std::string text = serialize_config(cfg);
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int TaskData::record_count(Task task) const {
  switch (task) {
    case Task::kClassify:
      return graphs ? static_cast<int>(graphs->graphs.size()) : 0;
    case Task::kMatch:
      return static_cast<int>(pairs.size());
    case Task::kSimilarity:
      return static_cast<int>(triplets.size());
  }
  return 0;
}

void adam_step(std::vector<Param>& params, const std::vector<Matrix>& grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (params.size() != grads.size())
    throw ShapeError("adam_step: got " + std::to_string(grads.size()) +
                     " gradients for " + std::to_string(params.size()) +
                     " parameters");
  if (state.m.empty()) {
    for (const Param& p : params) {
      state.m.emplace_back(p.value->rows(), p.value->cols());
      state.v.emplace_back(p.value->rows(), p.value->cols());
    }
  }
  state.t += 1;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (size_t p = 0; p < params.size(); ++p) {
    Matrix& theta = *params[p].value;
    const Matrix& g = grads[p];
    if (!theta.same_shape(g))
      throw ShapeError("adam_step: gradient shape " + shape_str(g) +
                       " does not match parameter " + params[p].name);
    Matrix& m = state.m[p];
    Matrix& v = state.v[p];
    for (size_t k = 0; k < theta.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      double mhat = m[k] / bc1;
      double vhat = v[k] / bc2;
      theta[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

namespace {

void validate_task_data(const TrainConfig& cfg, const TaskData& data) {
  if (!data.graphs) throw std::invalid_argument("train: no graph dataset given");
  const GraphDataset& ds = *data.graphs;
  if (ds.graphs.empty()) throw std::invalid_argument("train: empty dataset");
  if (ds.feature_dim < 1)
    throw std::invalid_argument(
        "train: dataset features not prepared (feature_dim == 0)");
  int n = static_cast<int>(ds.graphs.size());
  switch (cfg.task) {
    case Task::kClassify:
      if (ds.num_classes < 2)
        throw std::invalid_argument("train: classification needs >= 2 classes");
      for (const Graph& g : ds.graphs)
        if (!g.label)
          throw std::invalid_argument("train: graph " + std::to_string(g.id) +
                                      " has no class label");
      if (!data.pairs.empty() || !data.triplets.empty())
        throw std::invalid_argument("train: classify task given pair/triplet records");
      break;
    case Task::kMatch:
      if (data.pairs.empty())
        throw std::invalid_argument("train: match task needs pair records");
      for (const PairRecord& p : data.pairs) {
        if (!p.label)
          throw std::invalid_argument("train: pair record without 0/1 label");
        if (p.g1 < 0 || p.g1 >= n || p.g2 < 0 || p.g2 >= n)
          throw std::invalid_argument("train: pair record references missing graph");
      }
      break;
    case Task::kSimilarity:
      if (data.triplets.empty())
        throw std::invalid_argument("train: similarity task needs triplet records");
      for (const TripletRecord& t : data.triplets)
        if (t.g1 < 0 || t.g1 >= n || t.g2 < 0 || t.g2 >= n || t.g3 < 0 ||
            t.g3 >= n)
          throw std::invalid_argument("train: triplet record references missing graph");
      break;
  }
}

struct Workspace {
  const TrainConfig* cfg;
  const TaskData* data;
  HapModel* model;
};

DiffMatrix record_loss(const Workspace& ws, const ParamBinding& binding,
                       int idx, Rng& rng, bool training) {
  const TrainConfig& cfg = *ws.cfg;
  const GraphDataset& ds = *ws.data->graphs;
  switch (cfg.task) {
    case Task::kClassify: {
      const Graph& g = ds.graphs[static_cast<size_t>(idx)];
      DiffMatrix probs = ws.model->classify_probs(binding, g, rng, training);
      return loss_single({probs}, {*g.label});
    }
    case Task::kMatch: {
      const PairRecord& pr = ws.data->pairs[static_cast<size_t>(idx)];
      std::vector<DiffMatrix> r1 = ws.model->forward(
          binding, ds.graphs[static_cast<size_t>(pr.g1)], rng, training);
      std::vector<DiffMatrix> r2 = ws.model->forward(
          binding, ds.graphs[static_cast<size_t>(pr.g2)], rng, training);
      std::vector<DiffMatrix> dists;
      for (size_t k = 0; k < r1.size(); ++k)
        dists.push_back(euclidean_distance(r1[k], r2[k]));
      return loss_pair(dists, *pr.label, cfg.scale, cfg.paper_literal_losses);
    }
    case Task::kSimilarity: {
      const TripletRecord& tr = ws.data->triplets[static_cast<size_t>(idx)];
      std::vector<DiffMatrix> r1 = ws.model->forward(
          binding, ds.graphs[static_cast<size_t>(tr.g1)], rng, training);
      std::vector<DiffMatrix> r2 = ws.model->forward(
          binding, ds.graphs[static_cast<size_t>(tr.g2)], rng, training);
      std::vector<DiffMatrix> r3 = ws.model->forward(
          binding, ds.graphs[static_cast<size_t>(tr.g3)], rng, training);
      std::vector<DiffMatrix> d12, d13;
      for (size_t k = 0; k < r1.size(); ++k) {
        d12.push_back(euclidean_distance(r1[k], r2[k]));
        d13.push_back(euclidean_distance(r1[k], r3[k]));
      }
      return loss_triple(d12, d13, tr.r, cfg.paper_literal_losses);
    }
  }
  throw std::logic_error("record_loss: unreachable");
}

Checkpoint snapshot(const TrainConfig& cfg, const HapModel& model,
                    const AdamState& adam, int epoch) {
  Checkpoint c;
  c.config = cfg;
  c.input_dim = model.config().input_dim;
  c.classes = model.config().classes;
  c.cluster_counts = model.config().cluster_counts;
  c.epoch = epoch;
  for (const Param& p : model.params()) c.params.emplace_back(p.name, *p.value);
  c.adam = adam;
  return c;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TaskData& data) {
  validate_task_data(cfg, data);
  const GraphDataset& ds = *data.graphs;

  double mean_n = 0.0;
  for (const Graph& g : ds.graphs) mean_n += g.n;
  mean_n /= static_cast<double>(ds.graphs.size());

  ModelConfig mc;
  mc.task = cfg.task;
  mc.embed = cfg.embed;
  mc.activation = cfg.activation;
  mc.layers_per_block = cfg.layers_per_block;
  mc.coarsen_modules = cfg.coarsen_modules;
  mc.cluster_counts = resolve_cluster_counts(
      cfg.coarsen_modules, cfg.cluster_counts, cfg.cluster_ratio, mean_n);
  mc.tau = cfg.tau;
  mc.scale = cfg.scale;
  mc.column_mode = cfg.column_mode;
  mc.pool = cfg.pool;
  mc.paper_literal_losses = cfg.paper_literal_losses;
  mc.input_dim = ds.feature_dim;
  mc.embed_dim = cfg.embed_dim > 0
                     ? cfg.embed_dim
                     : (cfg.task == Task::kClassify ? 64 : 128);
  mc.classes = std::max(2, ds.num_classes);
  HapModel model(mc, mix_seed(cfg.seed, 0x11));

  int n_records = data.record_count(cfg.task);
  Rng split_rng(mix_seed(cfg.seed, 0x22));
  Split split = make_split(n_records, cfg.split_ratios, split_rng);
  std::vector<int> val_idx = split.val.empty() ? split.train : split.val;

  Workspace ws{&cfg, &data, &model};
  AdamState adam;
  TrainResult result;
  result.split = split;

  double best_val = -1.0;
  int since_improve = 0;
  size_t n_params = model.params().size();
  int workers = std::max(1, cfg.threads);
  bool mean_normalized = cfg.task != Task::kClassify;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order = split.train;
    Rng shuffle_rng(mix_seed(cfg.seed, 0x330000ULL + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(cfg.batch_size)) {
      size_t stop = std::min(order.size(), start + static_cast<size_t>(cfg.batch_size));
      size_t bsize = stop - start;

      std::vector<std::vector<Matrix>> slot_grads(bsize);
      std::vector<double> slot_loss(bsize, 0.0);

      auto run_slot = [&](size_t b) {
        int idx = order[start + b];
        Rng ex_rng(mix_seed(mix_seed(cfg.seed, 0x440000ULL + static_cast<uint64_t>(epoch)),
                            static_cast<uint64_t>(idx)));
        Tape tape;
        ParamBinding binding = model.bind(tape, true);
        DiffMatrix loss = record_loss(ws, binding, idx, ex_rng, true);
        slot_loss[b] = loss.value().at(0, 0);
        GradientMap gm = tape.backward(loss);
        slot_grads[b].reserve(n_params);
        for (size_t p = 0; p < n_params; ++p)
          slot_grads[b].push_back(gm.at(binding.leaves[p]));
      };

      if (workers == 1 || bsize == 1) {
        for (size_t b = 0; b < bsize; ++b) run_slot(b);
      } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        size_t n_threads = std::min(static_cast<size_t>(workers), bsize);
        for (size_t t = 0; t < n_threads; ++t)
          pool.emplace_back([&]() {
            for (size_t b = cursor.fetch_add(1); b < bsize; b = cursor.fetch_add(1))
              run_slot(b);
          });
        for (std::thread& t : pool) t.join();
      }

      // fixed-order reduction keeps results identical across thread counts
      std::vector<Matrix> grads;
      grads.reserve(n_params);
      for (size_t p = 0; p < n_params; ++p) {
        const Param& par = model.params()[p];
        grads.emplace_back(par.value->rows(), par.value->cols());
      }
      for (size_t b = 0; b < bsize; ++b) {
        if (!std::isfinite(slot_loss[b]))
          throw NumericError("train: non-finite loss at epoch " +
                             std::to_string(epoch));
        epoch_loss += slot_loss[b];
        for (size_t p = 0; p < n_params; ++p) {
          Matrix& acc = grads[p];
          const Matrix& g = slot_grads[b][p];
          for (size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
        }
      }
      if (mean_normalized) {
        double inv = 1.0 / static_cast<double>(bsize);
        for (Matrix& g : grads)
          for (size_t k = 0; k < g.size(); ++k) g[k] *= inv;
      }
      adam_step(model.params(), grads, adam, cfg.lr);
    }

    double train_loss =
        order.empty() ? 0.0 : epoch_loss / static_cast<double>(order.size());
    EvalMetrics val = evaluate(model, data, val_idx);
    result.log.push_back({epoch, "train", "loss", train_loss});
    result.log.push_back({epoch, "val", "accuracy", val.accuracy});

    if (val.accuracy > best_val) {
      best_val = val.accuracy;
      since_improve = 0;
      result.best = snapshot(cfg, model, adam, epoch);
      result.best_val_metric = best_val;
    } else {
      ++since_improve;
      if (since_improve >= cfg.patience) break;
    }
  }
  if (result.best.params.empty())
    result.best = snapshot(cfg, model, adam, 0);
  return result;
}

std::vector<std::pair<double, int>> match_scores(const HapModel& model,
                                                 const TaskData& data,
                                                 const std::vector<int>& indices) {
  const GraphDataset& ds = *data.graphs;
  std::vector<std::pair<double, int>> out;
  out.reserve(indices.size());
  Rng rng(0);
  for (int idx : indices) {
    const PairRecord& pr = data.pairs[static_cast<size_t>(idx)];
    Tape tape;
    ParamBinding binding = model.bind(tape, false);
    std::vector<DiffMatrix> r1 =
        model.forward(binding, ds.graphs[static_cast<size_t>(pr.g1)], rng, false);
    std::vector<DiffMatrix> r2 =
        model.forward(binding, ds.graphs[static_cast<size_t>(pr.g2)], rng, false);
    DiffMatrix d = euclidean_distance(r1.back(), r2.back());
    double s = similarity_score(d.value().at(0, 0), model.config().scale);
    out.emplace_back(s, pr.label ? *pr.label : 0);
  }
  return out;
}

EvalMetrics evaluate(const HapModel& model, const TaskData& data,
                     const std::vector<int>& indices) {
  const GraphDataset& ds = *data.graphs;
  EvalMetrics m;
  Rng rng(0);
  switch (model.config().task) {
    case Task::kClassify: {
      int correct = 0;
      for (int idx : indices) {
        const Graph& g = ds.graphs[static_cast<size_t>(idx)];
        Tape tape;
        ParamBinding binding = model.bind(tape, false);
        DiffMatrix probs = model.classify_probs(binding, g, rng, false);
        int argmax = 0;
        for (int c = 1; c < probs.cols(); ++c)
          if (probs.value().at(0, c) > probs.value().at(0, argmax)) argmax = c;
        if (g.label && argmax == *g.label) ++correct;
      }
      m.count = static_cast<int>(indices.size());
      m.accuracy = m.count ? static_cast<double>(correct) / m.count : 0.0;
      return m;
    }
    case Task::kMatch: {
      int correct = 0;
      auto scores = match_scores(model, data, indices);
      for (const auto& [s, label] : scores) {
        int pred = s >= 0.5 ? 1 : 0;
        if (pred == label) ++correct;
      }
      m.count = static_cast<int>(scores.size());
      m.accuracy = m.count ? static_cast<double>(correct) / m.count : 0.0;
      return m;
    }
    case Task::kSimilarity: {
      int correct = 0, counted = 0;
      for (int idx : indices) {
        const TripletRecord& tr = data.triplets[static_cast<size_t>(idx)];
        if (tr.r == 0.0) continue;  // no ordering to predict
        Tape tape;
        ParamBinding binding = model.bind(tape, false);
        std::vector<DiffMatrix> r1 = model.forward(
            binding, ds.graphs[static_cast<size_t>(tr.g1)], rng, false);
        std::vector<DiffMatrix> r2 = model.forward(
            binding, ds.graphs[static_cast<size_t>(tr.g2)], rng, false);
        std::vector<DiffMatrix> r3 = model.forward(
            binding, ds.graphs[static_cast<size_t>(tr.g3)], rng, false);
        double d12 = euclidean_distance(r1.back(), r2.back()).value().at(0, 0);
        double d13 = euclidean_distance(r1.back(), r3.back()).value().at(0, 0);
        ++counted;
        if ((d12 - d13 > 0) == (tr.r > 0)) ++correct;
      }
      m.count = counted;
      m.accuracy = counted ? static_cast<double>(correct) / counted : 0.0;
      return m;
    }
  }
  return m;
}

EvalMetrics evaluate(const Checkpoint& ckpt, const TaskData& data,
                     const std::vector<int>& indices) {
  HapModel model = rebuild_model(ckpt);
  return evaluate(model, data, indices);
}

HapModel rebuild_model(const Checkpoint& ckpt) {
  ModelConfig mc;
  mc.task = ckpt.config.task;
  mc.embed = ckpt.config.embed;
  mc.activation = ckpt.config.activation;
  mc.layers_per_block = ckpt.config.layers_per_block;
  mc.coarsen_modules = ckpt.config.coarsen_modules;
  mc.cluster_counts = ckpt.cluster_counts;
  mc.tau = ckpt.config.tau;
  mc.scale = ckpt.config.scale;
  mc.column_mode = ckpt.config.column_mode;
  mc.pool = ckpt.config.pool;
  mc.paper_literal_losses = ckpt.config.paper_literal_losses;
  mc.input_dim = ckpt.input_dim;
  mc.embed_dim = ckpt.config.embed_dim > 0
                     ? ckpt.config.embed_dim
                     : (ckpt.config.task == Task::kClassify ? 64 : 128);
  mc.classes = ckpt.classes;
  HapModel model(mc, 0);
  if (model.params().size() != ckpt.params.size())
    throw DataError("checkpoint: expected " +
                    std::to_string(model.params().size()) + " parameters, found " +
                    std::to_string(ckpt.params.size()));
  std::vector<Matrix> values;
  values.reserve(ckpt.params.size());
  for (size_t i = 0; i < ckpt.params.size(); ++i) {
    if (ckpt.params[i].first != model.params()[i].name)
      throw DataError("checkpoint: parameter '" + ckpt.params[i].first +
                      "' does not match expected '" + model.params()[i].name + "'");
    values.push_back(ckpt.params[i].second);
  }
  model.set_param_values(values);
  return model;
}

namespace {

void write_matrix(std::ostream& out, const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << " ";
      out << fmt17(m.at(i, j));
    }
    out << "\n";
  }
}

Matrix read_matrix(std::istream& in, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!(in >> m.at(i, j)))
        throw DataError("checkpoint: truncated matrix block");
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << "hap-checkpoint v1\n";
  out << "epoch " << ckpt.epoch << "\n";
  out << "config-hash " << config_hash(ckpt.config) << "\n";
  out << "input-dim " << ckpt.input_dim << "\n";
  out << "classes " << ckpt.classes << "\n";
  out << "clusters ";
  for (size_t i = 0; i < ckpt.cluster_counts.size(); ++i)
    out << (i ? "," : "") << ckpt.cluster_counts[i];
  out << "\n";
  out << "adam-t " << ckpt.adam.t << "\n";
  out << "config-begin\n" << serialize_config(ckpt.config) << "config-end\n";
  for (const auto& [name, value] : ckpt.params) {
    out << "param " << name << " " << value.rows() << " " << value.cols() << "\n";
    write_matrix(out, value);
  }
  for (size_t p = 0; p < ckpt.adam.m.size(); ++p) {
    out << "adam-m " << ckpt.params[p].first << " " << ckpt.adam.m[p].rows()
        << " " << ckpt.adam.m[p].cols() << "\n";
    write_matrix(out, ckpt.adam.m[p]);
    out << "adam-v " << ckpt.params[p].first << " " << ckpt.adam.v[p].rows()
        << " " << ckpt.adam.v[p].cols() << "\n";
    write_matrix(out, ckpt.adam.v[p]);
  }
  out << "end\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path);
  std::string line;
  if (!std::getline(in, line) || line != "hap-checkpoint v1")
    throw DataError(path + ": not a hap checkpoint");
  Checkpoint ckpt;
  std::string stored_hash;
  std::string word;
  while (in >> word) {
    if (word == "epoch") {
      in >> ckpt.epoch;
    } else if (word == "config-hash") {
      in >> stored_hash;
    } else if (word == "input-dim") {
      in >> ckpt.input_dim;
    } else if (word == "classes") {
      in >> ckpt.classes;
    } else if (word == "clusters") {
      std::string list;
      in >> list;
      ckpt.cluster_counts.clear();
      std::istringstream ss(list);
      std::string item;
      while (std::getline(ss, item, ','))
        ckpt.cluster_counts.push_back(std::stoi(item));
    } else if (word == "adam-t") {
      in >> ckpt.adam.t;
    } else if (word == "config-begin") {
      std::getline(in, line);  // consume rest of line
      std::ostringstream cfg_text;
      while (std::getline(in, line) && line != "config-end") cfg_text << line << "\n";
      ckpt.config = parse_config(cfg_text.str());
    } else if (word == "param") {
      std::string name;
      int rows, cols;
      in >> name >> rows >> cols;
      ckpt.params.emplace_back(name, read_matrix(in, rows, cols));
    } else if (word == "adam-m") {
      std::string name;
      int rows, cols;
      in >> name >> rows >> cols;
      ckpt.adam.m.push_back(read_matrix(in, rows, cols));
    } else if (word == "adam-v") {
      std::string name;
      int rows, cols;
      in >> name >> rows >> cols;
      ckpt.adam.v.push_back(read_matrix(in, rows, cols));
    } else if (word == "end") {
      break;
    } else {
      throw DataError(path + ": unexpected token '" + word + "'");
    }
  }
  if (!stored_hash.empty() && stored_hash != config_hash(ckpt.config))
    throw DataError(path + ": config hash mismatch");
  return ckpt;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics " + path);
  out << "epoch,split,metric,value\n";
  for (const MetricRow& r : rows)
    out << r.epoch << "," << r.split << "," << r.metric << "," << fmt17(r.value)
        << "\n";
}

std::vector<std::vector<double>> export_embeddings(
    const HapModel& model, const GraphDataset& ds,
    const std::vector<int>& indices) {
  std::vector<std::vector<double>> out;
  out.reserve(indices.size());
  Rng rng(0);
  for (int idx : indices) {
    Tape tape;
    ParamBinding binding = model.bind(tape, false);
    std::vector<DiffMatrix> readouts =
        model.forward(binding, ds.graphs[static_cast<size_t>(idx)], rng, false);
    out.push_back(readouts.back().value().values());
  }
  return out;
}

}  // namespace hap
