#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hap/datagen.hpp"
#include "hap/model.hpp"

namespace hap {

struct TrainConfig {
  Task task = Task::kClassify;
  double lr = 0.01;
  int epochs = 200;
  int batch_size = 32;
  uint64_t seed = 1;
  EmbedKind embed = EmbedKind::kGcn;
  Activation activation = Activation::kRelu;
  int layers_per_block = 2;
  int coarsen_modules = 2;
  std::vector<int> cluster_counts;  // empty -> resolved default
  double cluster_ratio = 0.0;
  double tau = 0.1;
  double scale = 0.5;
  double split_ratios[3] = {0.8, 0.1, 0.1};
  ColumnMode column_mode = ColumnMode::kAffinitySummary;
  PoolKind pool = PoolKind::kHap;
  bool paper_literal_losses = false;
  int embed_dim = 0;  // 0 -> 64 for classification, 128 otherwise
  int patience = 20;
  int threads = 1;
};

// key = value text form; the same format the CLI accepts as --config.
std::string serialize_config(const TrainConfig& cfg);
TrainConfig parse_config(const std::string& text);
TrainConfig parse_config_file(const std::string& path);
void apply_config_entry(TrainConfig& cfg, const std::string& key,
                        const std::string& value);

// FNV-1a over the serialized config.
std::string config_hash(const TrainConfig& cfg);

std::string task_name(Task t);
Task parse_task(const std::string& s);

// --- optimizer ------------------------------------------------------------

struct AdamState {
  std::vector<Matrix> m, v;
  long t = 0;
};

// Standard bias-corrected moment update, applied in place.
void adam_step(std::vector<Param>& params, const std::vector<Matrix>& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// --- training / evaluation -----------------------------------------------

// The records a task trains on. `graphs` is always required; pairs/triplets
// only for their tasks.
struct TaskData {
  const GraphDataset* graphs = nullptr;
  std::vector<PairRecord> pairs;
  std::vector<TripletRecord> triplets;

  int record_count(Task task) const;
};

struct MetricRow {
  int epoch;
  std::string split;
  std::string metric;
  double value;
};

struct Checkpoint {
  TrainConfig config;
  int input_dim = 0;
  int classes = 2;
  std::vector<int> cluster_counts;  // resolved
  int epoch = 0;
  std::vector<std::pair<std::string, Matrix>> params;
  AdamState adam;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Reconstructs the network a checkpoint was trained with.
HapModel rebuild_model(const Checkpoint& ckpt);

struct TrainResult {
  Checkpoint best;
  std::vector<MetricRow> log;
  double best_val_metric = 0.0;
  Split split;
};

// Per-example forward/backward with fixed-order gradient accumulation over
// each batch; Adam per batch; validation metric per epoch; early stopping on
// the validation metric. Deterministic for a fixed seed and any thread count.
TrainResult train(const TrainConfig& cfg, const TaskData& data);

struct EvalMetrics {
  double accuracy = 0.0;
  int count = 0;
};

// classify: argmax accuracy. match: accuracy of (s >= 0.5) on the
// final-level similarity score. similarity: fraction of triplets with
// sign(d12 - d13) == sign(r), r == 0 excluded.
EvalMetrics evaluate(const HapModel& model, const TaskData& data,
                     const std::vector<int>& indices);
EvalMetrics evaluate(const Checkpoint& ckpt, const TaskData& data,
                     const std::vector<int>& indices);

// Final-level similarity score and label per pair record; the match metric
// and its threshold-free ROC cousin are both computed from these.
std::vector<std::pair<double, int>> match_scores(const HapModel& model,
                                                 const TaskData& data,
                                                 const std::vector<int>& indices);

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricRow>& rows);

// Per-graph final embeddings, noise off; rows align with `indices`.
std::vector<std::vector<double>> export_embeddings(const HapModel& model,
                                                   const GraphDataset& ds,
                                                   const std::vector<int>& indices);

}  // namespace hap
