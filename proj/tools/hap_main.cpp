// hap: hierarchical graph pooling toolkit.
//
// Subcommands: generate, train, eval, embed, ged, bench. Exit codes are a
// stable contract for scripting: 0 success, 1 usage error, 2 data/format
// error, 3 numeric failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hap/datagen.hpp"
#include "hap/train.hpp"

namespace fs = std::filesystem;
using namespace hap;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a(uint64_t h, const char* data, size_t len) {
  for (size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string dataset_fingerprint(const std::string& dir) {
  if (!fs::is_directory(dir)) return "-";
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  uint64_t h = 1469598103934665603ULL;
  for (const fs::path& p : files) {
    std::string name = p.filename().string();
    h = fnv1a(h, name.data(), name.size());
    std::ifstream in(p, std::ios::binary);
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
      h = fnv1a(h, buf, static_cast<size_t>(in.gcount()));
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& data_dir,
                    const std::vector<std::string>& outputs,
                    const std::string& config_body) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path);
  out << "# hap " << kVersion << " manifest\n";
  out << "# command = " << command << "\n";
  if (!data_dir.empty())
    out << "# data = " << data_dir << " fingerprint "
        << dataset_fingerprint(data_dir) << "\n";
  for (const std::string& o : outputs) out << "# output = " << o << "\n";
  out << config_body;
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string kind;
  std::string out_dir = "data";
  uint64_t seed = 7;
  int size = 20;
  int pairs = 2500;
  int graphs = 60;
  int min_nodes = 5;
  int max_nodes = 8;
  int triplets = 5000;
  int nodes = 40;
  double p_min = 0.2, p_max = 0.5;
  double p0 = 0.2, p1 = 0.5;
};

int run_generate(const GenerateArgs& a) {
  Rng rng(a.seed);
  fs::create_directories(a.out_dir);
  std::ostringstream args;

  if (a.kind == "match") {
    if (a.pairs < 2 || a.pairs % 2 != 0)
      throw std::invalid_argument("--pairs must be a positive even count");
    MatchingData data = gen_matching_dataset(a.pairs / 2, a.size, a.p_min,
                                             a.p_max, rng);
    save_tu_dataset(a.out_dir, "match", data.dataset);
    save_pairs(a.out_dir + "/match_pairs.txt", data.pairs);
    args << "# args: size=" << a.size << " pairs=" << a.pairs
         << " p-min=" << fmt17(a.p_min) << " p-max=" << fmt17(a.p_max)
         << " seed=" << a.seed << "\n";
    std::cout << "wrote " << data.pairs.size() << " labeled pairs over "
              << data.dataset.graphs.size() << " graphs to " << a.out_dir << "\n";
  } else if (a.kind == "triplet") {
    TripletData data = gen_triplet_dataset(a.graphs, a.min_nodes, a.max_nodes,
                                           a.p_min, a.p_max, a.triplets, rng);
    save_tu_dataset(a.out_dir, "triplet", data.dataset);
    save_triplets(a.out_dir + "/triplet_triplets.txt", data.triplets);
    args << "# args: graphs=" << a.graphs << " min-nodes=" << a.min_nodes
         << " max-nodes=" << a.max_nodes << " triplets=" << a.triplets
         << " p-min=" << fmt17(a.p_min) << " p-max=" << fmt17(a.p_max)
         << " seed=" << a.seed << "\n";
    std::cout << "wrote " << data.triplets.size() << " triplets over "
              << data.dataset.graphs.size() << " graphs to " << a.out_dir << "\n";
  } else if (a.kind == "toy-classify") {
    GraphDataset ds = gen_toy_classify(a.graphs, a.nodes, a.p0, a.p1, rng);
    save_tu_dataset(a.out_dir, "toy", ds);
    args << "# args: graphs=" << a.graphs << " nodes=" << a.nodes
         << " p0=" << fmt17(a.p0) << " p1=" << fmt17(a.p1) << " seed=" << a.seed
         << "\n";
    std::cout << "wrote " << ds.graphs.size() << " labeled graphs to "
              << a.out_dir << "\n";
  } else {
    throw std::invalid_argument("unknown generate kind '" + a.kind + "'");
  }
  write_manifest(a.out_dir + "/manifest.txt", "generate " + a.kind, "",
                 {a.out_dir}, args.str());
  return 0;
}

// --- shared data loading ----------------------------------------------------

struct LoadedData {
  GraphDataset dataset;
  TaskData data;
  std::string name;
};

LoadedData load_task_data(const std::string& dir, std::string name, Task task) {
  LoadedData out;
  if (name.empty()) name = infer_dataset_name(dir);
  out.name = name;
  out.dataset = load_tu_dataset(dir, name);
  prepare_features(out.dataset);
  out.data.graphs = &out.dataset;
  if (task == Task::kMatch) {
    std::string path = dir + "/" + name + "_pairs.txt";
    if (!fs::exists(path))
      throw DataError("match task needs pair records; missing " + path);
    out.data.pairs = load_pairs(path, true);
  } else if (task == Task::kSimilarity) {
    std::string path = dir + "/" + name + "_triplets.txt";
    if (!fs::exists(path))
      throw DataError("similarity task needs triplet records; missing " + path);
    out.data.triplets = load_triplets(path);
  }
  return out;
}

std::vector<int> split_indices(const Checkpoint& ckpt, const TaskData& data,
                               const std::string& which) {
  int n = data.record_count(ckpt.config.task);
  Rng split_rng(mix_seed(ckpt.config.seed, 0x22));
  Split split = make_split(n, ckpt.config.split_ratios, split_rng);
  if (which == "train") return split.train;
  if (which == "val") return split.val;
  if (which == "test") return split.test;
  std::vector<int> all(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
  return all;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data_dir;
  std::string name;
  std::string out_dir = "run";
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
};

int run_train(const TrainArgs& a) {
  TrainConfig cfg;
  if (!a.config_file.empty()) cfg = parse_config_file(a.config_file);
  for (const auto& [key, value] : a.overrides) apply_config_entry(cfg, key, value);

  LoadedData loaded = load_task_data(a.data_dir, a.name, cfg.task);

  fs::create_directories(a.out_dir);
  std::string ckpt_path = a.out_dir + "/best.ckpt";
  std::string metrics_path = a.out_dir + "/metrics.csv";
  write_manifest(a.out_dir + "/manifest.txt", "train", a.data_dir,
                 {ckpt_path, metrics_path}, serialize_config(cfg));

  TrainResult result = train(cfg, loaded.data);
  save_checkpoint(ckpt_path, result.best);
  write_metrics_csv(metrics_path, result.log);

  EvalMetrics test = evaluate(result.best, loaded.data,
                              split_indices(result.best, loaded.data, "test"));
  std::cout << "best epoch " << result.best.epoch << ", val accuracy "
            << fmt17(result.best_val_metric) << "\n";
  std::cout << "test accuracy " << fmt17(test.accuracy) << " over " << test.count
            << " records\n";
  std::cout << "checkpoint " << ckpt_path << "\nmetrics " << metrics_path << "\n";
  return 0;
}

// --- eval / embed -------------------------------------------------------------

int run_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& name, const std::string& which,
             const std::string& out_file) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  LoadedData loaded = load_task_data(data_dir, name, ckpt.config.task);
  std::vector<int> idx = split_indices(ckpt, loaded.data, which);
  EvalMetrics m = evaluate(ckpt, loaded.data, idx);
  std::cout << task_name(ckpt.config.task) << " " << which << " accuracy "
            << fmt17(m.accuracy) << " over " << m.count << " records\n";
  if (!out_file.empty()) {
    std::vector<MetricRow> rows{{ckpt.epoch, which, "accuracy", m.accuracy}};
    write_metrics_csv(out_file, rows);
  }
  return 0;
}

int run_embed(const std::string& ckpt_path, const std::string& data_dir,
              const std::string& name, const std::string& out_file) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  LoadedData loaded = load_task_data(data_dir, name, Task::kClassify);
  HapModel model = rebuild_model(ckpt);

  std::vector<int> idx(loaded.dataset.graphs.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  auto rows = export_embeddings(model, loaded.dataset, idx);

  std::ofstream out(out_file);
  if (!out) throw DataError("cannot write " + out_file);
  out << "graph_id,label";
  for (size_t j = 0; j < rows[0].size(); ++j) out << ",v" << (j + 1);
  out << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const Graph& g = loaded.dataset.graphs[i];
    out << g.id << "," << (g.label ? *g.label : -1);
    for (double v : rows[i]) out << "," << fmt17(v);
    out << "\n";
  }
  std::cout << "wrote " << rows.size() << " embeddings to " << out_file << "\n";
  return 0;
}

// --- ged -----------------------------------------------------------------------

int run_ged(const std::string& f1, const std::string& f2,
            const EditCostModel& costs) {
  Graph g1 = load_graph_file(f1);
  Graph g2 = load_graph_file(f2);
  GedResult res = ged_exact_witness(g1, g2, costs);
  std::cout << "GED = " << fmt17(res.cost) << "\n";
  std::cout << "edit sequence (" << res.edits.size() << " operations):\n";
  for (const EditOp& op : res.edits) std::cout << "  " << op.describe() << "\n";
  return 0;
}

// --- bench -----------------------------------------------------------------------

int run_bench(const std::vector<int>& sizes, int reps, int clusters, int dim,
              const std::string& out_file) {
  if (sizes.empty()) throw std::invalid_argument("--sizes must not be empty");
  if (reps < 1) throw std::invalid_argument("--reps must be >= 1");
  std::ostringstream csv;
  csv << "n,median_seconds\n";
  std::vector<double> log_n, log_t;
  for (int n : sizes) {
    Rng rng(1234);
    Graph g = er_random_graph(n, 0.3, rng);
    Matrix H(n, dim);
    for (size_t k = 0; k < H.size(); ++k) H[k] = rng.uniform(-1.0, 1.0);
    // unrecorded constants: time the module's arithmetic alone
    DiffMatrix A_in = DiffMatrix::constant(g.adjacency);
    DiffMatrix H_in = DiffMatrix::constant(std::move(H));
    CoarseningLayer layer;
    layer.n_clusters = clusters;
    layer.tau = 0.1;
    layer.T = DiffMatrix::constant(glorot_uniform(dim, clusters, rng));
    layer.a_row = DiffMatrix::constant(glorot_uniform(1, clusters, rng));
    layer.a_col = DiffMatrix::constant(glorot_uniform(1, clusters, rng));

    std::vector<double> times;
    times.reserve(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) {
      Rng noise(static_cast<uint64_t>(r));
      auto t0 = std::chrono::steady_clock::now();
      CoarsenOutput out = coarsen_forward(layer, H_in, A_in, noise, false);
      (void)out;
      auto t1 = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];
    csv << n << "," << fmt17(median) << "\n";
    log_n.push_back(std::log(static_cast<double>(n)));
    log_t.push_back(std::log(median));
  }
  std::cout << csv.str();
  if (sizes.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < log_n.size(); ++i) {
      mx += log_n[i];
      my += log_t[i];
    }
    mx /= static_cast<double>(log_n.size());
    my /= static_cast<double>(log_n.size());
    double num = 0, den = 0;
    for (size_t i = 0; i < log_n.size(); ++i) {
      num += (log_n[i] - mx) * (log_t[i] - my);
      den += (log_n[i] - mx) * (log_n[i] - mx);
    }
    std::cout << "log-log slope estimate: " << fmt17(num / den) << "\n";
  }
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw DataError("cannot write " + out_file);
    out << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical graph pooling toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // generate
  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("kind", gen.kind, "match | triplet | toy-classify")
      ->required();
  generate->add_option("--out", gen.out_dir, "output directory");
  generate->add_option("--seed", gen.seed, "generator seed");
  generate->add_option("--size", gen.size, "base graph node count (match)");
  generate->add_option("--pairs", gen.pairs, "total labeled pairs (match)");
  generate->add_option("--graphs", gen.graphs, "graph count (triplet/toy-classify)");
  generate->add_option("--min-nodes", gen.min_nodes, "min nodes (triplet)");
  generate->add_option("--max-nodes", gen.max_nodes, "max nodes (triplet)");
  generate->add_option("--triplets", gen.triplets, "triplet count");
  generate->add_option("--nodes", gen.nodes, "nodes per graph (toy-classify)");
  generate->add_option("--p-min", gen.p_min, "edge probability lower bound");
  generate->add_option("--p-max", gen.p_max, "edge probability upper bound");
  generate->add_option("--p0", gen.p0, "class-0 edge probability (toy-classify)");
  generate->add_option("--p1", gen.p1, "class-1 edge probability (toy-classify)");

  // train
  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", tr.data_dir, "dataset directory")->required();
  train_cmd->add_option("--name", tr.name, "dataset name (inferred by default)");
  train_cmd->add_option("--out", tr.out_dir, "run output directory");
  train_cmd->add_option("--config", tr.config_file, "key = value config file");
  auto push_override = [&tr](const std::string& key) {
    return [&tr, key](const std::string& value) {
      tr.overrides.emplace_back(key, value);
    };
  };
  train_cmd->add_option_function<std::string>("--task", push_override("task"),
                                              "classify | match | similarity");
  train_cmd->add_option_function<std::string>("--lr", push_override("lr"),
                                              "learning rate");
  train_cmd->add_option_function<std::string>("--epochs", push_override("epochs"),
                                              "max epochs");
  train_cmd->add_option_function<std::string>("--batch", push_override("batch_size"),
                                              "batch size");
  train_cmd->add_option_function<std::string>("--seed", push_override("seed"),
                                              "training seed");
  train_cmd->add_option_function<std::string>("--embed", push_override("embed"),
                                              "gcn | gat");
  train_cmd->add_option_function<std::string>(
      "--activation", push_override("activation"), "relu | sigmoid");
  train_cmd->add_option_function<std::string>(
      "--layers", push_override("layers_per_block"), "embedding layers per block");
  train_cmd->add_option_function<std::string>(
      "--coarsen", push_override("coarsen_modules"), "coarsening module count");
  train_cmd->add_option_function<std::string>(
      "--clusters", push_override("cluster_counts"), "per-module cluster counts");
  train_cmd->add_option_function<std::string>(
      "--cluster-ratio", push_override("cluster_ratio"), "ratio-based cluster counts");
  train_cmd->add_option_function<std::string>("--tau", push_override("tau"),
                                              "soft-sampling temperature");
  train_cmd->add_option_function<std::string>("--scale", push_override("scale"),
                                              "similarity decay scale");
  train_cmd->add_option_function<std::string>("--split", push_override("split"),
                                              "train/val/test ratios, e.g. 8:1:1");
  train_cmd->add_option_function<std::string>(
      "--column-mode", push_override("column_mode"),
      "affinity-summary | pad-truncate");
  train_cmd->add_option_function<std::string>("--pool", push_override("pool"),
                                              "hap | sum | mean | mean-att");
  train_cmd->add_flag_callback(
      "--paper-literal-losses",
      [&tr]() { tr.overrides.emplace_back("paper_literal_losses", "true"); },
      "use the printed pair/triplet objectives");
  train_cmd->add_option_function<std::string>(
      "--embed-dim", push_override("embed_dim"), "embedding width (0 = task default)");
  train_cmd->add_option_function<std::string>("--patience", push_override("patience"),
                                              "early-stopping patience");
  train_cmd->add_option_function<std::string>("--threads", push_override("threads"),
                                              "worker threads per batch");

  // eval
  std::string ev_ckpt, ev_data, ev_name, ev_split = "test", ev_out;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", ev_data, "dataset directory")->required();
  eval_cmd->add_option("--name", ev_name, "dataset name");
  eval_cmd->add_option("--split", ev_split, "train | val | test | all");
  eval_cmd->add_option("--out", ev_out, "write the metric as CSV");

  // embed
  std::string em_ckpt, em_data, em_name, em_out = "embeddings.csv";
  CLI::App* embed_cmd = app.add_subcommand("embed", "export graph embeddings");
  embed_cmd->add_option("--checkpoint", em_ckpt, "checkpoint file")->required();
  embed_cmd->add_option("--data", em_data, "dataset directory")->required();
  embed_cmd->add_option("--name", em_name, "dataset name");
  embed_cmd->add_option("--out", em_out, "output CSV path");

  // ged
  std::string ged_f1, ged_f2;
  EditCostModel costs;
  CLI::App* ged_cmd = app.add_subcommand("ged", "exact graph edit distance");
  ged_cmd->add_option("--g1", ged_f1, "first graph file")->required();
  ged_cmd->add_option("--g2", ged_f2, "second graph file")->required();
  ged_cmd->add_option("--cost-node-insert", costs.node_insert, "node insertion cost");
  ged_cmd->add_option("--cost-node-delete", costs.node_delete, "node deletion cost");
  ged_cmd->add_option("--cost-node-relabel", costs.node_relabel, "node relabel cost");
  ged_cmd->add_option("--cost-edge-insert", costs.edge_insert, "edge insertion cost");
  ged_cmd->add_option("--cost-edge-delete", costs.edge_delete, "edge deletion cost");

  // bench
  std::vector<int> bench_sizes;
  int bench_reps = 20, bench_clusters = 16, bench_dim = 32;
  std::string bench_out;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "time the coarsening module across sizes");
  bench_cmd->add_option("--sizes", bench_sizes, "node counts to time")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--reps", bench_reps, "repetitions per size");
  bench_cmd->add_option("--clusters", bench_clusters, "target cluster count");
  bench_cmd->add_option("--dim", bench_dim, "feature width");
  bench_cmd->add_option("--out", bench_out, "also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev_ckpt, ev_data, ev_name, ev_split, ev_out);
    if (*embed_cmd) return run_embed(em_ckpt, em_data, em_name, em_out);
    if (*ged_cmd) return run_ged(ged_f1, ged_f2, costs);
    if (*bench_cmd)
      return run_bench(bench_sizes, bench_reps, bench_clusters, bench_dim, bench_out);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
