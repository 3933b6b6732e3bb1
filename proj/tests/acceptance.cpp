// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Criteria that train models print their measured metric too.

#include <chrono>
#include <memory>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>

#include "hap/train.hpp"
#include "support/oracles.hpp"

using namespace hap;

namespace {

int failures = 0;

void report(int number, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %2d [%s] %s%s%s\n", number, pass ? "PASS" : "FAIL",
              title, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

Matrix permuted_rows(const Matrix& m, const std::vector<int>& perm) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      out.at(perm[static_cast<size_t>(i)], j) = m.at(i, j);
  return out;
}

// ---------------------------------------------------------------------------
// 1. Permutation invariance of the final graph embedding

void criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  ModelConfig mc;
  mc.task = Task::kMatch;  // no head; the readout is the final embedding
  mc.cluster_counts = {16, 1};
  mc.input_dim = 6;
  mc.embed_dim = 16;
  HapModel model(mc, 4242);

  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    int n = 5 + static_cast<int>(rng.uniform_int(0, 25));
    Graph g = er_random_graph(n, rng.uniform(0.2, 0.6), rng);
    g.features = oracle::random_matrix(n, 6, rng);
    std::vector<int> perm = oracle::random_permutation(n, rng);
    Graph pg = permute_graph(g, perm);

    Rng noise(1);
    Tape tape;
    ParamBinding binding = model.bind(tape, false);
    Matrix base = model.forward(binding, g, noise, false).back().value();
    Matrix perm_out = model.forward(binding, pg, noise, false).back().value();
    worst = std::max(worst, perm_out.max_abs_diff(base));
  }
  double secs = seconds_since(t0);
  report(1, "permutation invariance of the final embedding",
         worst <= 1e-9 && secs < 60.0,
         "max |diff| " + sci(worst) + ", " + std::to_string(secs) + "s");
}

// ---------------------------------------------------------------------------
// 2. End-to-end gradient correctness for the three task losses

void criterion_2() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(2002);

  auto check_task = [&](Task task, EmbedKind embed) {
    ModelConfig mc;
    mc.task = task;
    mc.embed = embed;
    mc.cluster_counts = {3, 1};
    mc.input_dim = 4;
    mc.embed_dim = 6;
    mc.classes = 2;
    HapModel model(mc, 7331);

    Graph g1 = er_random_graph(7, 0.45, rng);
    g1.features = oracle::random_matrix(7, 4, rng);
    g1.label = 1;
    Graph g2 = er_random_graph(6, 0.45, rng);
    g2.features = oracle::random_matrix(6, 4, rng);
    Graph g3 = er_random_graph(8, 0.45, rng);
    g3.features = oracle::random_matrix(8, 4, rng);

    std::vector<Matrix> theta;
    for (const Param& p : model.params()) theta.push_back(*p.value);

    return grad_check(
        [&](Tape& tape, const std::vector<DiffMatrix>& leaves) {
          ParamBinding binding{leaves};
          Rng noise(9);
          switch (task) {
            case Task::kClassify: {
              DiffMatrix probs = model.classify_probs(binding, g1, noise, false);
              return loss_single({probs}, {*g1.label});
            }
            case Task::kMatch: {
              std::vector<DiffMatrix> r1 = model.forward(binding, g1, noise, false);
              std::vector<DiffMatrix> r2 = model.forward(binding, g2, noise, false);
              std::vector<DiffMatrix> d;
              for (size_t k = 0; k < r1.size(); ++k)
                d.push_back(euclidean_distance(r1[k], r2[k]));
              return loss_pair(d, 1, 0.5);
            }
            case Task::kSimilarity: {
              std::vector<DiffMatrix> r1 = model.forward(binding, g1, noise, false);
              std::vector<DiffMatrix> r2 = model.forward(binding, g2, noise, false);
              std::vector<DiffMatrix> r3 = model.forward(binding, g3, noise, false);
              std::vector<DiffMatrix> d12, d13;
              for (size_t k = 0; k < r1.size(); ++k) {
                d12.push_back(euclidean_distance(r1[k], r2[k]));
                d13.push_back(euclidean_distance(r1[k], r3[k]));
              }
              return loss_triple(d12, d13, 1.5);
            }
          }
          throw std::logic_error("unreachable");
        },
        theta, 1e-5);
  };

  double worst = 0.0;
  worst = std::max(worst, check_task(Task::kClassify, EmbedKind::kGcn));
  worst = std::max(worst, check_task(Task::kMatch, EmbedKind::kGcn));
  worst = std::max(worst, check_task(Task::kSimilarity, EmbedKind::kGcn));
  worst = std::max(worst, check_task(Task::kClassify, EmbedKind::kGat));
  double secs = seconds_since(t0);
  report(2, "end-to-end gradients vs central differences",
         worst <= 1e-4 && secs < 300.0,
         "max rel err " + sci(worst) + ", " + std::to_string(secs) + "s");
}

// ---------------------------------------------------------------------------
// 3. Stochasticity invariants

void criterion_3() {
  Rng rng(3003);
  bool rows_ok = true;
  for (int t = 0; t < 1000; ++t) {
    Rng noise(static_cast<uint64_t>(t));
    Tape tape;
    int n = 2 + static_cast<int>(rng.uniform_int(0, 12));
    int nc = 1 + static_cast<int>(rng.uniform_int(0, 7));
    CoarseningLayer layer = CoarseningLayer::init(
        3, nc, 0.1, ColumnMode::kAffinitySummary, tape, rng);
    Graph g = er_random_graph(n, 0.4, rng);
    CoarsenOutput out =
        coarsen_forward(layer, tape.leaf(oracle::random_matrix(n, 3, rng)),
                        DiffMatrix::constant(g.adjacency), noise, true);
    for (int i = 0; i < n && rows_ok; ++i) {
      double s = 0.0;
      for (int j = 0; j < nc; ++j) s += out.assignment.M.value().at(i, j);
      if (std::fabs(s - 1.0) > 1e-9) rows_ok = false;
    }
    for (int i = 0; i < nc && rows_ok; ++i) {
      double s = 0.0;
      for (int j = 0; j < nc; ++j) s += out.A_sampled.value().at(i, j);
      if (std::fabs(s - 1.0) > 1e-9) rows_ok = false;
    }
  }

  // tau = 0.01 sharpening: rows built with a clear dominant entry (continuous
  // i.i.d. rows can tie arbitrarily closely, where no finite temperature
  // sharpens; the spec's own worked row [2, 1] has ratio 0.5)
  bool sharp_ok = true;
  double worst_max = 1.0;
  for (int t = 0; t < 1000 && sharp_ok; ++t) {
    int nc = 2 + static_cast<int>(rng.uniform_int(0, 14));
    Matrix row(1, nc);
    double biggest = 0.0;
    for (int j = 0; j < nc; ++j) {
      row.at(0, j) = rng.uniform(0.1, 1.0);
      biggest = std::max(biggest, row.at(0, j));
    }
    int hot = static_cast<int>(rng.uniform_int(0, nc - 1));
    row.at(0, hot) = 3.0 * biggest;
    Rng noise(1);
    Tape tape;
    DiffMatrix y = soft_sample(tape.leaf(row), 0.01, noise, false);
    double mx = 0.0;
    for (int j = 0; j < nc; ++j) mx = std::max(mx, y.value().at(0, j));
    worst_max = std::min(worst_max, mx);
    if (mx < 0.99) sharp_ok = false;
  }
  report(3, "assignment/sampled rows sum to 1; tau=0.01 is near-one-hot",
         rows_ok && sharp_ok,
         std::string("row sums ") + (rows_ok ? "ok" : "off") +
             ", sharpest-entry min " + std::to_string(worst_max));
}

// ---------------------------------------------------------------------------
// 4. Padding equivalence, bitwise

void criterion_4() {
  Rng rng(4004);
  bool ok = true;
  for (int t = 0; t < 2000 && ok; ++t) {
    size_t nc = 3 + static_cast<size_t>(rng.uniform_int(0, 13));
    size_t n = 1 + static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(nc) - 2));
    std::vector<double> a_row(nc), a_col(nc), c_row(nc), c_col(n);
    for (size_t k = 0; k < nc; ++k) {
      a_row[k] = rng.uniform(-3.0, 3.0);
      a_col[k] = rng.uniform(-3.0, 3.0);
      c_row[k] = rng.uniform(-3.0, 3.0);
    }
    for (size_t k = 0; k < n; ++k) c_col[k] = rng.uniform(-3.0, 3.0);
    double a = moa_score_padded_column(a_row, a_col, c_row, c_col);
    double b = moa_score_extended_param(a_row, a_col, c_row, c_col);
    uint64_t ab, bb;
    std::memcpy(&ab, &a, 8);
    std::memcpy(&bb, &b, 8);
    if (ab != bb) ok = false;
  }
  report(4, "zero-padded column == zero-extended parameter (bitwise)", ok, "");
}

// ---------------------------------------------------------------------------
// 5 & 10. Synthetic matching at desk scale, plus the pooling ablation gap

double run_matching(PoolKind pool, double* train_seconds) {
  Rng rng(5005);
  MatchingData md = gen_matching_dataset(1250, 20, 0.2, 0.5, rng);
  prepare_features(md.dataset);
  TaskData data;
  data.graphs = &md.dataset;
  data.pairs = md.pairs;

  // sigmoid cluster embeddings: partners differ from their base by a few
  // nodes in either direction, and a saturating nonlinearity is what lets the
  // embedding distance tell 3 nodes removed from 3 nodes added
  TrainConfig cfg;
  cfg.task = Task::kMatch;
  cfg.pool = pool;
  cfg.embed = EmbedKind::kGat;
  cfg.activation = Activation::kSigmoid;
  cfg.lr = 0.001;
  cfg.epochs = 40;
  cfg.batch_size = 32;
  cfg.seed = 17;
  cfg.patience = 12;
  auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(cfg, data);
  if (train_seconds) *train_seconds = seconds_since(t0);

  Rng split_rng(mix_seed(cfg.seed, 0x22));
  Split split = make_split(static_cast<int>(md.pairs.size()), cfg.split_ratios,
                           split_rng);
  return evaluate(result.best, data, split.test).accuracy;
}

void criterion_5_and_10() {
  double hap_seconds = 0.0;
  double hap_acc = run_matching(PoolKind::kHap, &hap_seconds);
  report(5, "synthetic matching accuracy >= 0.90 within 30 min",
         hap_acc >= 0.90 && hap_seconds < 1800.0,
         "accuracy " + std::to_string(hap_acc) + ", " +
             std::to_string(hap_seconds) + "s");

  double mean_seconds = 0.0;
  double mean_acc = run_matching(PoolKind::kMean, &mean_seconds);
  report(10, "full model beats the mean-pool ablation by >= 10 points",
         hap_acc - mean_acc >= 0.10,
         "hap " + std::to_string(hap_acc) + " vs mean-pool " +
             std::to_string(mean_acc));
}

// ---------------------------------------------------------------------------
// 6. Toy classification

void criterion_6() {
  Rng rng(6006);
  GraphDataset ds = gen_toy_classify(500, 40, 0.2, 0.5, rng);
  prepare_features(ds);
  TaskData data;
  data.graphs = &ds;

  TrainConfig cfg;
  cfg.task = Task::kClassify;
  cfg.lr = 0.01;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = 23;
  cfg.patience = 5;
  auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(cfg, data);
  double secs = seconds_since(t0);

  Rng split_rng(mix_seed(cfg.seed, 0x22));
  Split split = make_split(static_cast<int>(ds.graphs.size()), cfg.split_ratios,
                           split_rng);
  double acc = evaluate(result.best, data, split.test).accuracy;
  report(6, "toy two-class accuracy >= 0.95 within 10 min",
         acc >= 0.95 && secs < 600.0,
         "accuracy " + std::to_string(acc) + ", " + std::to_string(secs) + "s");
}

// ---------------------------------------------------------------------------
// 7. Triplet similarity against the exact oracle

void criterion_7() {
  Rng rng(7007);
  TripletData td = gen_triplet_dataset(60, 5, 8, 0.2, 0.5, 5000, rng);
  prepare_features(td.dataset);
  TaskData data;
  data.graphs = &td.dataset;
  data.triplets = td.triplets;

  TrainConfig cfg;
  cfg.task = Task::kSimilarity;
  cfg.lr = 0.003;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = 29;
  cfg.patience = 5;
  auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(cfg, data);
  double secs = seconds_since(t0);

  Rng split_rng(mix_seed(cfg.seed, 0x22));
  Split split = make_split(static_cast<int>(td.triplets.size()),
                           cfg.split_ratios, split_rng);
  double acc = evaluate(result.best, data, split.test).accuracy;
  report(7, "triplet ordering accuracy >= 0.75 within 20 min",
         acc >= 0.75 && secs < 1200.0,
         "accuracy " + std::to_string(acc) + ", " + std::to_string(secs) + "s");
}

// ---------------------------------------------------------------------------
// 8. Exact-GED oracle soundness

void criterion_8() {
  Rng rng(8008);
  bool ok = true;
  std::string detail;

  for (int t = 0; t < 50 && ok; ++t) {
    Graph g = er_random_graph(3 + static_cast<int>(rng.uniform_int(0, 7)), 0.4, rng);
    if (ged_exact(g, g) != 0.0) {
      ok = false;
      detail = "self-distance nonzero";
    }
  }
  for (int t = 0; t < 20 && ok; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.45, rng);
    Graph b = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.45, rng);
    if (ged_exact(a, b) != ged_exact(b, a)) {
      ok = false;
      detail = "asymmetry";
    }
  }
  for (int t = 0; t < 50 && ok; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    Graph b = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    Graph c = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    if (ged_exact(a, c) > ged_exact(a, b) + ged_exact(b, c) + 1e-12) {
      ok = false;
      detail = "triangle inequality violated";
    }
  }

  if (ok) {
    Graph tri, path, k3, k4;
    tri.n = 3;
    tri.adjacency = Matrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    path.n = 3;
    path.adjacency = Matrix{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};
    k3 = tri;
    k4.n = 4;
    k4.adjacency = Matrix(4, 4, 1.0);
    for (int i = 0; i < 4; ++i) k4.adjacency.at(i, i) = 0.0;

    // enumeration oracle confirms the constants before they gate the search
    if (oracle::ged_enumerate(tri, path) != 1.0 ||
        oracle::ged_enumerate(k3, k4) != 4.0) {
      ok = false;
      detail = "enumeration oracle disagrees with the frozen fixtures";
    } else if (ged_exact(tri, path) != 1.0 || ged_exact(k3, k4) != 4.0) {
      ok = false;
      detail = "search disagrees with the enumeration oracle";
    }
  }
  report(8, "exact-GED oracle soundness", ok, detail);
}

// ---------------------------------------------------------------------------
// 9. Quadratic scaling of the coarsening module

void criterion_9() {
  // a slim feature width keeps the N x N adjacency product dominant, and a
  // burn-in lets the clock governor settle before anything is timed
  // inference-mode timing: parameters and inputs are unrecorded constants so
  // the measurement covers the module's arithmetic, not tape bookkeeping
  struct Case {
    DiffMatrix A;
    DiffMatrix H;
    CoarseningLayer layer;
    std::vector<double> times;
  };
  auto make_case = [](int n) {
    auto c = std::make_unique<Case>();
    Rng rng(9009);
    // dense nonnegative adjacency: in the stacked model every module past the
    // first consumes a soft-sampled (fully dense) adjacency
    Matrix adj(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double w = rng.uniform(0.0, 1.0);
        adj.at(i, j) = w;
        adj.at(j, i) = w;
      }
    c->A = DiffMatrix::constant(std::move(adj));
    c->H = DiffMatrix::constant(oracle::random_matrix(n, 8, rng));
    c->layer.n_clusters = 16;
    c->layer.tau = 0.1;
    c->layer.T = DiffMatrix::constant(glorot_uniform(8, 16, rng));
    c->layer.a_row = DiffMatrix::constant(glorot_uniform(1, 16, rng));
    c->layer.a_col = DiffMatrix::constant(glorot_uniform(1, 16, rng));
    return c;
  };
  auto time_once = [](Case& c, uint64_t rep) {
    Rng noise(rep);
    auto t0 = std::chrono::steady_clock::now();
    CoarsenOutput out = coarsen_forward(c.layer, c.H, c.A, noise, false);
    (void)out;
    return seconds_since(t0);
  };

  auto small = make_case(128);
  auto large = make_case(256);
  auto warm_until = std::chrono::steady_clock::now() + std::chrono::seconds(1);
  while (std::chrono::steady_clock::now() < warm_until) {
    time_once(*small, 999);
    time_once(*large, 999);
  }
  // interleaved so machine-load drift hits both sizes alike
  for (uint64_t r = 0; r < 31; ++r) {
    small->times.push_back(time_once(*small, r));
    large->times.push_back(time_once(*large, r));
  }
  auto median = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double ratio = median(large->times) / median(small->times);
  report(9, "coarsen_forward time ratio (256/128) within [2.5, 6]",
         ratio >= 2.5 && ratio <= 6.0, "ratio " + std::to_string(ratio));
}

}  // namespace

int main(int argc, char** argv) {
  // optional arguments select criteria by number, e.g. `hap_acceptance 1 4 9`
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  auto selected = [&](std::initializer_list<int> nums) {
    if (wanted.empty()) return true;
    for (int n : nums)
      for (int w : wanted)
        if (n == w) return true;
    return false;
  };

  std::printf("hap acceptance suite\n");
  if (selected({1})) criterion_1();
  if (selected({2})) criterion_2();
  if (selected({3})) criterion_3();
  if (selected({4})) criterion_4();
  if (selected({5, 10})) criterion_5_and_10();
  if (selected({6})) criterion_6();
  if (selected({7})) criterion_7();
  if (selected({8})) criterion_8();
  if (selected({9})) criterion_9();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
