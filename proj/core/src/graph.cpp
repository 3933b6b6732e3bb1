#include "hap/graph.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace hap {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  // tolerate a trailing newline producing one empty record
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

long parse_int(const std::string& s, const std::string& where, size_t lineno) {
  try {
    size_t pos = 0;
    long v = std::stol(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": line " + std::to_string(lineno) +
                    ": cannot parse integer from '" + trim(s) + "'");
  }
}

}  // namespace

Graph degree_onehot(const Graph& g, int max_degree) {
  Graph out = g;
  out.features = Matrix(g.n, max_degree + 1);
  for (int v = 0; v < g.n; ++v) {
    int d = std::min(g.degree(v), max_degree);
    out.features.at(v, d) = 1.0;
  }
  return out;
}

void apply_degree_onehot(GraphDataset& ds) {
  int md = ds.max_degree();
  for (Graph& g : ds.graphs) g = degree_onehot(g, md);
  ds.feature_dim = md + 1;
}

GraphDataset load_tu_dataset(const std::string& dir, const std::string& name) {
  const std::string base = dir + "/" + name;
  const std::string a_path = base + "_A.txt";
  const std::string ind_path = base + "_graph_indicator.txt";
  const std::string glab_path = base + "_graph_labels.txt";
  const std::string nlab_path = base + "_node_labels.txt";

  for (const std::string& p : {a_path, ind_path, glab_path})
    if (!fs::exists(p)) throw DataError("missing mandatory dataset file " + p);

  // node -> graph, both 1-based in the files
  std::vector<std::string> ind_lines = read_lines(ind_path);
  int total_nodes = static_cast<int>(ind_lines.size());
  std::vector<int> node_graph(total_nodes);
  int num_graphs = 0;
  for (int v = 0; v < total_nodes; ++v) {
    long gid = parse_int(ind_lines[static_cast<size_t>(v)], ind_path,
                         static_cast<size_t>(v) + 1);
    if (gid < 1)
      throw DataError(ind_path + ": line " + std::to_string(v + 1) +
                      ": graph id must be >= 1");
    node_graph[v] = static_cast<int>(gid) - 1;
    num_graphs = std::max(num_graphs, static_cast<int>(gid));
  }

  std::vector<int> graph_size(num_graphs, 0);
  std::vector<int> node_local(total_nodes);
  for (int v = 0; v < total_nodes; ++v)
    node_local[v] = graph_size[static_cast<size_t>(node_graph[v])]++;

  GraphDataset ds;
  ds.graphs.resize(static_cast<size_t>(num_graphs));
  for (int gi = 0; gi < num_graphs; ++gi) {
    Graph& g = ds.graphs[static_cast<size_t>(gi)];
    g.n = graph_size[static_cast<size_t>(gi)];
    g.id = gi;
    if (g.n < 1)
      throw DataError(ind_path + ": graph " + std::to_string(gi + 1) +
                      " has no nodes");
    g.adjacency = Matrix(g.n, g.n);
  }

  std::vector<std::string> edge_lines = read_lines(a_path);
  for (size_t li = 0; li < edge_lines.size(); ++li) {
    std::string line = trim(edge_lines[li]);
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(a_path + ": line " + std::to_string(li + 1) +
                      ": expected 'u, v'");
    long u = parse_int(line.substr(0, comma), a_path, li + 1);
    long v = parse_int(line.substr(comma + 1), a_path, li + 1);
    if (u < 1 || u > total_nodes || v < 1 || v > total_nodes)
      throw DataError(a_path + ": line " + std::to_string(li + 1) +
                      ": node id out of range");
    int un = static_cast<int>(u) - 1, vn = static_cast<int>(v) - 1;
    if (node_graph[un] != node_graph[vn])
      throw DataError(a_path + ": line " + std::to_string(li + 1) +
                      ": edge joins nodes of different graphs");
    Graph& g = ds.graphs[static_cast<size_t>(node_graph[un])];
    g.adjacency.at(node_local[un], node_local[vn]) = 1.0;
    g.adjacency.at(node_local[vn], node_local[un]) = 1.0;
  }

  std::vector<std::string> glab_lines = read_lines(glab_path);
  if (static_cast<int>(glab_lines.size()) != num_graphs)
    throw DataError(glab_path + ": expected " + std::to_string(num_graphs) +
                    " labels, found " + std::to_string(glab_lines.size()));
  std::vector<long> raw_labels(static_cast<size_t>(num_graphs));
  std::map<long, int> label_map;
  for (int gi = 0; gi < num_graphs; ++gi) {
    raw_labels[static_cast<size_t>(gi)] =
        parse_int(glab_lines[static_cast<size_t>(gi)], glab_path,
                  static_cast<size_t>(gi) + 1);
    label_map[raw_labels[static_cast<size_t>(gi)]] = 0;
  }
  int next = 0;
  for (auto& [raw, mapped] : label_map) mapped = next++;
  for (int gi = 0; gi < num_graphs; ++gi)
    ds.graphs[static_cast<size_t>(gi)].label =
        label_map[raw_labels[static_cast<size_t>(gi)]];
  ds.num_classes = next;

  if (fs::exists(nlab_path)) {
    std::vector<std::string> nlab_lines = read_lines(nlab_path);
    if (static_cast<int>(nlab_lines.size()) != total_nodes)
      throw DataError(nlab_path + ": expected " + std::to_string(total_nodes) +
                      " labels, found " + std::to_string(nlab_lines.size()));
    std::map<long, int> nl_map;
    std::vector<long> raw(static_cast<size_t>(total_nodes));
    for (int v = 0; v < total_nodes; ++v) {
      raw[static_cast<size_t>(v)] = parse_int(
          nlab_lines[static_cast<size_t>(v)], nlab_path, static_cast<size_t>(v) + 1);
      nl_map[raw[static_cast<size_t>(v)]] = 0;
    }
    int nn = 0;
    for (auto& [r, m] : nl_map) m = nn++;
    for (Graph& g : ds.graphs) {
      g.node_labels.assign(static_cast<size_t>(g.n), 0);
      g.features = Matrix(g.n, nn);
    }
    for (int v = 0; v < total_nodes; ++v) {
      Graph& g = ds.graphs[static_cast<size_t>(node_graph[v])];
      int lab = nl_map[raw[static_cast<size_t>(v)]];
      g.node_labels[static_cast<size_t>(node_local[v])] = lab;
      g.features.at(node_local[v], lab) = 1.0;
    }
    ds.feature_dim = nn;
  } else {
    apply_degree_onehot(ds);
  }
  return ds;
}

void save_tu_dataset(const std::string& dir, const std::string& name,
                     const GraphDataset& ds) {
  fs::create_directories(dir);
  const std::string base = dir + "/" + name;
  std::ofstream a(base + "_A.txt");
  std::ofstream ind(base + "_graph_indicator.txt");
  std::ofstream glab(base + "_graph_labels.txt");
  if (!a || !ind || !glab) throw DataError("cannot write dataset to " + dir);

  bool labeled_nodes = false;
  for (const Graph& g : ds.graphs)
    if (!g.node_labels.empty()) labeled_nodes = true;

  std::ofstream nlab;
  if (labeled_nodes) {
    nlab.open(base + "_node_labels.txt");
    if (!nlab) throw DataError("cannot write dataset to " + dir);
  }

  int offset = 0;
  for (size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const Graph& g = ds.graphs[gi];
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        if (i != j && g.adjacency.at(i, j) != 0.0)
          a << (offset + i + 1) << ", " << (offset + j + 1) << "\n";
    for (int i = 0; i < g.n; ++i) {
      ind << (gi + 1) << "\n";
      if (labeled_nodes)
        nlab << (g.node_labels.empty() ? 0 : g.node_labels[static_cast<size_t>(i)])
             << "\n";
    }
    glab << (g.label ? *g.label : 0) << "\n";
    offset += g.n;
  }
}

std::string infer_dataset_name(const std::string& dir) {
  std::vector<std::string> hits;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string fn = entry.path().filename().string();
    const std::string suffix = "_A.txt";
    if (fn.size() > suffix.size() &&
        fn.compare(fn.size() - suffix.size(), suffix.size(), suffix) == 0)
      hits.push_back(fn.substr(0, fn.size() - suffix.size()));
  }
  if (hits.size() != 1)
    throw DataError("expected exactly one *_A.txt in " + dir + ", found " +
                    std::to_string(hits.size()));
  return hits[0];
}

Graph er_random_graph(int n, double p, Rng& rng) {
  if (n < 1) throw std::invalid_argument("er_random_graph: n must be >= 1");
  Graph g;
  g.n = n;
  g.adjacency = Matrix(n, n);
  g.features = Matrix(n, 1, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) {
        g.adjacency.at(i, j) = 1.0;
        g.adjacency.at(j, i) = 1.0;
      }
  return g;
}

Graph permute_graph(const Graph& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.n)
    throw std::invalid_argument("permute_graph: permutation size " +
                                std::to_string(perm.size()) + " != n " +
                                std::to_string(g.n));
  std::vector<char> seen(static_cast<size_t>(g.n), 0);
  for (int p : perm) {
    if (p < 0 || p >= g.n || seen[static_cast<size_t>(p)])
      throw std::invalid_argument("permute_graph: not a bijection");
    seen[static_cast<size_t>(p)] = 1;
  }
  Graph out = g;
  out.adjacency = Matrix(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      out.adjacency.at(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]) =
          g.adjacency.at(i, j);
  if (g.features.rows() == g.n) {
    out.features = Matrix(g.n, g.features.cols());
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.features.cols(); ++j)
        out.features.at(perm[static_cast<size_t>(i)], j) = g.features.at(i, j);
  }
  if (!g.node_labels.empty()) {
    out.node_labels.assign(static_cast<size_t>(g.n), 0);
    for (int i = 0; i < g.n; ++i)
      out.node_labels[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
          g.node_labels[static_cast<size_t>(i)];
  }
  return out;
}

Split make_split(int count, const double ratios[3], Rng& rng) {
  double total = ratios[0] + ratios[1] + ratios[2];
  if (total <= 0.0) throw std::invalid_argument("make_split: ratios must be positive");
  std::vector<int> idx(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) idx[static_cast<size_t>(i)] = i;
  rng.shuffle(idx);
  int n_train = static_cast<int>(count * ratios[0] / total);
  int n_val = static_cast<int>(count * ratios[1] / total);
  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  s.test.assign(idx.begin() + n_train + n_val, idx.end());
  return s;
}

}  // namespace hap
