#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace hap::oracle {

namespace {

double complete_mapping_cost(const Graph& g1, const Graph& g2,
                             const std::vector<int>& assign,
                             const EditCostModel& c, bool use_labels) {
  double cost = 0.0;
  std::vector<int> preimage(static_cast<size_t>(g2.n), -1);
  for (int i = 0; i < g1.n; ++i) {
    int u = assign[static_cast<size_t>(i)];
    if (u < 0) {
      cost += c.node_delete;
    } else {
      preimage[static_cast<size_t>(u)] = i;
      if (use_labels && g1.node_labels[static_cast<size_t>(i)] !=
                            g2.node_labels[static_cast<size_t>(u)])
        cost += c.node_relabel;
    }
  }
  for (int u = 0; u < g2.n; ++u)
    if (preimage[static_cast<size_t>(u)] < 0) cost += c.node_insert;

  for (int i = 0; i < g1.n; ++i)
    for (int j = i + 1; j < g1.n; ++j) {
      if (!g1.has_edge(i, j)) continue;
      int u = assign[static_cast<size_t>(i)], v = assign[static_cast<size_t>(j)];
      if (u < 0 || v < 0 || !g2.has_edge(u, v)) cost += c.edge_delete;
    }
  for (int u = 0; u < g2.n; ++u)
    for (int v = u + 1; v < g2.n; ++v) {
      if (!g2.has_edge(u, v)) continue;
      int i = preimage[static_cast<size_t>(u)], j = preimage[static_cast<size_t>(v)];
      if (i < 0 || j < 0 || !g1.has_edge(i, j)) cost += c.edge_insert;
    }
  return cost;
}

}  // namespace

double ged_enumerate(const Graph& g1, const Graph& g2,
                     const EditCostModel& costs) {
  bool use_labels = !g1.node_labels.empty() && !g2.node_labels.empty();
  std::vector<int> assign(static_cast<size_t>(g1.n), -1);
  std::vector<char> used(static_cast<size_t>(g2.n), 0);
  double best = HUGE_VAL;

  std::function<void(int)> rec = [&](int i) {
    if (i == g1.n) {
      best = std::min(best, complete_mapping_cost(g1, g2, assign, costs, use_labels));
      return;
    }
    assign[static_cast<size_t>(i)] = -1;
    rec(i + 1);
    for (int u = 0; u < g2.n; ++u) {
      if (used[static_cast<size_t>(u)]) continue;
      used[static_cast<size_t>(u)] = 1;
      assign[static_cast<size_t>(i)] = u;
      rec(i + 1);
      assign[static_cast<size_t>(i)] = -1;
      used[static_cast<size_t>(u)] = 0;
    }
  };
  rec(0);
  return best;
}

bool isomorphic_exhaustive(const Graph& g1, const Graph& g2) {
  if (g1.n != g2.n || g1.edge_count() != g2.edge_count()) return false;
  bool labels = !g1.node_labels.empty() || !g2.node_labels.empty();
  if (labels && (g1.node_labels.empty() || g2.node_labels.empty())) return false;

  std::vector<int> perm(static_cast<size_t>(g1.n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < g1.n && ok; ++i) {
      if (labels && g1.node_labels[static_cast<size_t>(i)] !=
                        g2.node_labels[static_cast<size_t>(perm[static_cast<size_t>(i)])]) {
        ok = false;
        break;
      }
      for (int j = 0; j < g1.n; ++j)
        if (g1.has_edge(i, j) !=
            g2.has_edge(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)])) {
          ok = false;
          break;
        }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

Matrix eval_gcn_plain(const Matrix& A, const Matrix& H, const Matrix& W) {
  int n = A.rows();
  std::vector<double> dinv(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double d = 1.0;  // self-loop
    for (int j = 0; j < n; ++j) d += A.at(i, j);
    dinv[static_cast<size_t>(i)] = 1.0 / std::sqrt(d);
  }
  Matrix agg(n, H.cols());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = A.at(i, j) + (i == j ? 1.0 : 0.0);
      if (a == 0.0) continue;
      double w = dinv[static_cast<size_t>(i)] * a * dinv[static_cast<size_t>(j)];
      for (int f = 0; f < H.cols(); ++f) agg.at(i, f) += w * H.at(j, f);
    }
  Matrix out(n, W.cols());
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < H.cols(); ++k)
      for (int f = 0; f < W.cols(); ++f)
        out.at(i, f) += agg.at(i, k) * W.at(k, f);
  for (size_t t = 0; t < out.size(); ++t)
    if (out[t] < 0.0) out[t] = 0.0;
  return out;
}

double roc_auc(const std::vector<std::pair<double, int>>& scores) {
  std::vector<std::pair<double, int>> sorted = scores;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  size_t n = sorted.size();
  std::vector<double> rank(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && sorted[j + 1].first == sorted[i].first) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) rank[k] = avg;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  size_t n_pos = 0, n_neg = 0;
  for (size_t k = 0; k < n; ++k) {
    if (sorted[k].second == 1) {
      pos_rank_sum += rank[k];
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) return 0.5;
  return (pos_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

Matrix random_matrix(int rows, int cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (size_t k = 0; k < m.size(); ++k) m[k] = rng.uniform(lo, hi);
  return m;
}

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  return perm;
}

}  // namespace hap::oracle
