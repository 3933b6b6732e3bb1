#include "hap/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hap {

namespace {

void check_cap(const Graph& g, const char* which) {
  if (g.n > kGedNodeCap)
    throw DataError(std::string("ged_exact: ") + which + " has " +
                    std::to_string(g.n) + " nodes, above the exact-oracle cap of " +
                    std::to_string(kGedNodeCap));
}

struct GedSearch {
  const Graph& g1;
  const Graph& g2;
  EditCostModel costs;
  bool use_labels;

  std::vector<int> assign;       // g1 node -> g2 node or -1
  std::vector<char> used;        // g2 node taken as an image
  std::vector<int> e1_suffix;    // g1 edges with an endpoint >= i
  int e2_total = 0;
  int e2_decided = 0;            // g2 edges with both endpoints already images
  double best = HUGE_VAL;
  std::vector<int> best_assign;

  GedSearch(const Graph& a, const Graph& b, const EditCostModel& c)
      : g1(a), g2(b), costs(c) {
    use_labels = !g1.node_labels.empty() && !g2.node_labels.empty();
    assign.assign(static_cast<size_t>(g1.n), -2);
    used.assign(static_cast<size_t>(g2.n), 0);
    e1_suffix.assign(static_cast<size_t>(g1.n) + 1, 0);
    for (int b2 = g1.n - 1; b2 >= 0; --b2) {
      int cnt = 0;
      for (int a2 = 0; a2 < b2; ++a2)
        if (g1.has_edge(a2, b2)) ++cnt;
      e1_suffix[static_cast<size_t>(b2)] =
          e1_suffix[static_cast<size_t>(b2) + 1] + cnt;
    }
    e2_total = g2.edge_count();
  }

  double lower_bound(int i, int used_count) const {
    int r1 = g1.n - i;
    int unused = g2.n - used_count;
    double lb = 0.0;
    if (r1 > unused) lb += (r1 - unused) * costs.node_delete;
    if (unused > r1) lb += (unused - r1) * costs.node_insert;
    int e1r = e1_suffix[static_cast<size_t>(i)];
    int e2r = e2_total - e2_decided;
    if (e1r > e2r) lb += (e1r - e2r) * costs.edge_delete;
    if (e2r > e1r) lb += (e2r - e1r) * costs.edge_insert;
    return lb;
  }

  double map_delta(int i, int u) const {
    double d = 0.0;
    if (use_labels &&
        g1.node_labels[static_cast<size_t>(i)] != g2.node_labels[static_cast<size_t>(u)])
      d += costs.node_relabel;
    for (int j = 0; j < i; ++j) {
      bool e1 = g1.has_edge(i, j);
      int v = assign[static_cast<size_t>(j)];
      if (v < 0) {
        if (e1) d += costs.edge_delete;
      } else {
        bool e2 = g2.has_edge(u, v);
        if (e1 && !e2) d += costs.edge_delete;
        if (!e1 && e2) d += costs.edge_insert;
      }
    }
    return d;
  }

  double delete_delta(int i) const {
    double d = costs.node_delete;
    for (int j = 0; j < i; ++j)
      if (g1.has_edge(i, j)) d += costs.edge_delete;
    return d;
  }

  int image_edges(int u) const {
    int cnt = 0;
    for (int w = 0; w < g2.n; ++w)
      if (used[static_cast<size_t>(w)] && g2.has_edge(u, w)) ++cnt;
    return cnt;
  }

  void dfs(int i, int used_count, double cost) {
    if (cost + lower_bound(i, used_count) >= best) return;
    if (i == g1.n) {
      double total = cost + (g2.n - used_count) * costs.node_insert +
                     (e2_total - e2_decided) * costs.edge_insert;
      if (total < best) {
        best = total;
        best_assign = assign;
      }
      return;
    }
    // candidates ordered by incremental cost so cheap branches are explored
    // first and the bound bites early
    std::vector<std::pair<double, int>> cands;
    cands.reserve(static_cast<size_t>(g2.n) + 1);
    for (int u = 0; u < g2.n; ++u)
      if (!used[static_cast<size_t>(u)]) cands.emplace_back(map_delta(i, u), u);
    cands.emplace_back(delete_delta(i), -1);
    std::stable_sort(cands.begin(), cands.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    for (const auto& [delta, u] : cands) {
      if (u >= 0) {
        int de = image_edges(u);
        assign[static_cast<size_t>(i)] = u;
        used[static_cast<size_t>(u)] = 1;
        e2_decided += de;
        dfs(i + 1, used_count + 1, cost + delta);
        e2_decided -= de;
        used[static_cast<size_t>(u)] = 0;
      } else {
        assign[static_cast<size_t>(i)] = -1;
        dfs(i + 1, used_count, cost + delta);
      }
      assign[static_cast<size_t>(i)] = -2;
    }
  }
};

std::vector<EditOp> edits_from_mapping(const Graph& g1, const Graph& g2,
                                       const std::vector<int>& assign,
                                       bool use_labels) {
  std::vector<EditOp> edits;
  std::vector<int> image(static_cast<size_t>(g2.n), -1);
  for (int i = 0; i < g1.n; ++i)
    if (assign[static_cast<size_t>(i)] >= 0)
      image[static_cast<size_t>(assign[static_cast<size_t>(i)])] = i;

  for (int i = 0; i < g1.n; ++i) {
    int u = assign[static_cast<size_t>(i)];
    if (u < 0)
      edits.push_back({EditOp::kNodeDelete, i, -1});
    else if (use_labels &&
             g1.node_labels[static_cast<size_t>(i)] !=
                 g2.node_labels[static_cast<size_t>(u)])
      edits.push_back({EditOp::kNodeRelabel, i, u});
  }
  for (int u = 0; u < g2.n; ++u)
    if (image[static_cast<size_t>(u)] < 0)
      edits.push_back({EditOp::kNodeInsert, u, -1});

  for (int i = 0; i < g1.n; ++i)
    for (int j = i + 1; j < g1.n; ++j) {
      if (!g1.has_edge(i, j)) continue;
      int u = assign[static_cast<size_t>(i)], v = assign[static_cast<size_t>(j)];
      if (u < 0 || v < 0 || !g2.has_edge(u, v))
        edits.push_back({EditOp::kEdgeDelete, i, j});
    }
  for (int u = 0; u < g2.n; ++u)
    for (int v = u + 1; v < g2.n; ++v) {
      if (!g2.has_edge(u, v)) continue;
      int i = image[static_cast<size_t>(u)], j = image[static_cast<size_t>(v)];
      if (i < 0 || j < 0 || !g1.has_edge(i, j))
        edits.push_back({EditOp::kEdgeInsert, u, v});
    }
  return edits;
}

// Deletes the given nodes, then keeps the largest connected component.
Graph largest_component_after_deletion(const Graph& g,
                                       const std::vector<int>& victims) {
  std::vector<char> gone(static_cast<size_t>(g.n), 0);
  for (int v : victims) gone[static_cast<size_t>(v)] = 1;
  std::vector<int> comp(static_cast<size_t>(g.n), -1);
  int n_comp = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.n; ++s) {
    if (gone[static_cast<size_t>(s)] || comp[static_cast<size_t>(s)] >= 0) continue;
    stack.push_back(s);
    comp[static_cast<size_t>(s)] = n_comp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < g.n; ++w)
        if (!gone[static_cast<size_t>(w)] && g.has_edge(v, w) &&
            comp[static_cast<size_t>(w)] < 0) {
          comp[static_cast<size_t>(w)] = n_comp;
          stack.push_back(w);
        }
    }
    ++n_comp;
  }
  std::vector<int> comp_size(static_cast<size_t>(n_comp), 0);
  for (int v = 0; v < g.n; ++v)
    if (comp[static_cast<size_t>(v)] >= 0)
      ++comp_size[static_cast<size_t>(comp[static_cast<size_t>(v)])];
  int keep = 0;
  for (int c = 1; c < n_comp; ++c)
    if (comp_size[static_cast<size_t>(c)] > comp_size[static_cast<size_t>(keep)])
      keep = c;

  std::vector<int> old_ids;
  for (int v = 0; v < g.n; ++v)
    if (comp[static_cast<size_t>(v)] == keep) old_ids.push_back(v);
  Graph out;
  out.n = static_cast<int>(old_ids.size());
  out.adjacency = Matrix(out.n, out.n);
  out.features = Matrix(out.n, 1, 1.0);
  for (int a = 0; a < out.n; ++a)
    for (int b = 0; b < out.n; ++b)
      out.adjacency.at(a, b) =
          g.adjacency.at(old_ids[static_cast<size_t>(a)], old_ids[static_cast<size_t>(b)]);
  return out;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string EditOp::describe() const {
  switch (kind) {
    case kNodeDelete:
      return "delete node " + std::to_string(u + 1);
    case kNodeInsert:
      return "insert node " + std::to_string(u + 1) + "'";
    case kNodeRelabel:
      return "relabel node " + std::to_string(u + 1) + " -> " +
             std::to_string(v + 1) + "'";
    case kEdgeDelete:
      return "delete edge (" + std::to_string(u + 1) + ", " +
             std::to_string(v + 1) + ")";
    case kEdgeInsert:
      return "insert edge (" + std::to_string(u + 1) + "', " +
             std::to_string(v + 1) + "')";
  }
  return "?";
}

GedResult ged_exact_witness(const Graph& g1, const Graph& g2,
                            const EditCostModel& costs) {
  check_cap(g1, "first graph");
  check_cap(g2, "second graph");
  GedSearch search(g1, g2, costs);
  search.dfs(0, 0, 0.0);
  GedResult res;
  res.cost = search.best;
  res.mapping = search.best_assign;
  res.edits = edits_from_mapping(g1, g2, search.best_assign, search.use_labels);
  return res;
}

double ged_exact(const Graph& g1, const Graph& g2, const EditCostModel& costs) {
  check_cap(g1, "first graph");
  check_cap(g2, "second graph");
  GedSearch search(g1, g2, costs);
  search.dfs(0, 0, 0.0);
  return search.best;
}

Matrix make_pair_ground_truth(const GraphDataset& ds,
                              const EditCostModel& costs) {
  int n = static_cast<int>(ds.graphs.size());
  Matrix table(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double d = ged_exact(ds.graphs[static_cast<size_t>(i)],
                           ds.graphs[static_cast<size_t>(j)], costs);
      table.at(i, j) = d;
      table.at(j, i) = d;
    }
  return table;
}

std::vector<TripletRecord> make_triplets(const GraphDataset& ds,
                                         const Matrix& ged_table, int count,
                                         Rng& rng) {
  int n = static_cast<int>(ds.graphs.size());
  if (n < 3)
    throw std::invalid_argument("make_triplets: need at least 3 graphs, have " +
                                std::to_string(n));
  std::vector<TripletRecord> out;
  out.reserve(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) {
    TripletRecord rec;
    rec.g1 = static_cast<int>(rng.uniform_int(0, n - 1));
    rec.g2 = static_cast<int>(rng.uniform_int(0, n - 1));
    do {
      rec.g3 = static_cast<int>(rng.uniform_int(0, n - 1));
    } while (rec.g3 == rec.g2);
    rec.r = ged_table.at(rec.g1, rec.g2) - ged_table.at(rec.g1, rec.g3);
    out.push_back(rec);
  }
  return out;
}

MatchingData gen_matching_dataset(int n_base, int base_size, double p_min,
                                  double p_max, Rng& rng) {
  if (base_size < 5)
    throw std::invalid_argument("gen_matching_dataset: base size must be >= 5");
  MatchingData out;
  for (int b = 0; b < n_base; ++b) {
    double p = rng.uniform(p_min, p_max);
    Graph base = er_random_graph(base_size, p, rng);

    int k = static_cast<int>(rng.uniform_int(1, 3));
    std::vector<int> idx(static_cast<size_t>(base_size));
    for (int i = 0; i < base_size; ++i) idx[static_cast<size_t>(i)] = i;
    rng.shuffle(idx);
    idx.resize(static_cast<size_t>(k));
    Graph positive = largest_component_after_deletion(base, idx);

    int extra = static_cast<int>(rng.uniform_int(3, 7));
    Graph negative;
    negative.n = base_size + extra;
    negative.adjacency = Matrix(negative.n, negative.n);
    negative.features = Matrix(negative.n, 1, 1.0);
    for (int i = 0; i < base_size; ++i)
      for (int j = 0; j < base_size; ++j)
        negative.adjacency.at(i, j) = base.adjacency.at(i, j);
    for (int v = base_size; v < negative.n; ++v)
      for (int w = 0; w < v; ++w)
        if (rng.bernoulli(p)) {
          negative.adjacency.at(v, w) = 1.0;
          negative.adjacency.at(w, v) = 1.0;
        }

    int base_id = static_cast<int>(out.dataset.graphs.size());
    base.id = base_id;
    positive.id = base_id + 1;
    negative.id = base_id + 2;
    out.dataset.graphs.push_back(std::move(base));
    out.dataset.graphs.push_back(std::move(positive));
    out.dataset.graphs.push_back(std::move(negative));
    out.pairs.push_back({base_id, base_id + 1, 1, std::nullopt});
    out.pairs.push_back({base_id, base_id + 2, 0, std::nullopt});
  }
  out.dataset.num_classes = 1;
  return out;
}

GraphDataset gen_toy_classify(int n_graphs, int nodes, double p0, double p1,
                              Rng& rng) {
  GraphDataset ds;
  ds.num_classes = 2;
  for (int i = 0; i < n_graphs; ++i) {
    int cls = i < n_graphs / 2 ? 0 : 1;
    Graph g = er_random_graph(nodes, cls == 0 ? p0 : p1, rng);
    g.label = cls;
    ds.graphs.push_back(std::move(g));
  }
  std::vector<int> order(static_cast<size_t>(n_graphs));
  for (int i = 0; i < n_graphs; ++i) order[static_cast<size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<Graph> shuffled;
  shuffled.reserve(static_cast<size_t>(n_graphs));
  for (int i = 0; i < n_graphs; ++i) {
    Graph g = std::move(ds.graphs[static_cast<size_t>(order[static_cast<size_t>(i)])]);
    g.id = i;
    shuffled.push_back(std::move(g));
  }
  ds.graphs = std::move(shuffled);
  return ds;
}

TripletData gen_triplet_dataset(int n_graphs, int min_nodes, int max_nodes,
                                double p_min, double p_max, int n_triplets,
                                Rng& rng, const EditCostModel& costs) {
  if (max_nodes > kGedNodeCap)
    throw std::invalid_argument(
        "gen_triplet_dataset: max nodes above the exact-oracle cap of " +
        std::to_string(kGedNodeCap));
  TripletData out;
  for (int i = 0; i < n_graphs; ++i) {
    int n = static_cast<int>(rng.uniform_int(min_nodes, max_nodes));
    double p = rng.uniform(p_min, p_max);
    Graph g = er_random_graph(n, p, rng);
    g.id = i;
    out.dataset.graphs.push_back(std::move(g));
  }
  out.dataset.num_classes = 1;
  out.ged_table = make_pair_ground_truth(out.dataset, costs);
  out.triplets = make_triplets(out.dataset, out.ged_table, n_triplets, rng);
  return out;
}

void save_pairs(const std::string& path, const std::vector<PairRecord>& pairs) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  for (const PairRecord& p : pairs) {
    f << p.g1 << "\t" << p.g2 << "\t";
    if (p.label)
      f << *p.label;
    else if (p.ged)
      f << format_value(*p.ged);
    else
      throw DataError("save_pairs: record carries neither label nor ged");
    f << "\n";
  }
}

std::vector<PairRecord> load_pairs(const std::string& path, bool as_label) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::vector<PairRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    PairRecord rec;
    double value;
    if (!(ss >> rec.g1 >> rec.g2 >> value))
      throw DataError(path + ": line " + std::to_string(lineno) +
                      ": expected 'g1 g2 value'");
    if (as_label)
      rec.label = static_cast<int>(value);
    else
      rec.ged = value;
    out.push_back(rec);
  }
  return out;
}

void save_triplets(const std::string& path,
                   const std::vector<TripletRecord>& triplets) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  for (const TripletRecord& t : triplets)
    f << t.g1 << "\t" << t.g2 << "\t" << t.g3 << "\t" << format_value(t.r)
      << "\n";
}

std::vector<TripletRecord> load_triplets(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::vector<TripletRecord> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    TripletRecord rec;
    if (!(ss >> rec.g1 >> rec.g2 >> rec.g3 >> rec.r))
      throw DataError(path + ": line " + std::to_string(lineno) +
                      ": expected 'g1 g2 g3 r'");
    out.push_back(rec);
  }
  return out;
}

Graph load_graph_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  int n = 0;
  if (!(f >> n) || n < 1)
    throw DataError(path + ": first line must be the node count");
  Graph g;
  g.n = n;
  g.adjacency = Matrix(n, n);
  g.features = Matrix(n, 1, 1.0);
  int u, v;
  while (f >> u >> v) {
    if (u < 1 || u > n || v < 1 || v > n)
      throw DataError(path + ": edge (" + std::to_string(u) + ", " +
                      std::to_string(v) + ") out of range for " +
                      std::to_string(n) + " nodes");
    g.adjacency.at(u - 1, v - 1) = 1.0;
    g.adjacency.at(v - 1, u - 1) = 1.0;
  }
  return g;
}

}  // namespace hap
