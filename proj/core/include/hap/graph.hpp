#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hap/matrix.hpp"
#include "hap/rng.hpp"

namespace hap {

// Undirected graph with dense nonnegative symmetric adjacency. Loaders
// produce 0/1 entries; coarsened graphs are weighted, so the model permits
// arbitrary nonnegative weights.
struct Graph {
  int n = 0;
  Matrix adjacency;  // n x n, symmetric, zero diagonal unless self-loops added
  Matrix features;   // n x F
  std::optional<int> label;
  std::vector<int> node_labels;  // empty when the dataset has none
  int id = 0;

  int degree(int v) const {
    int d = 0;
    for (int j = 0; j < n; ++j)
      if (adjacency.at(v, j) != 0.0) ++d;
    return d;
  }
  int edge_count() const {
    int e = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (adjacency.at(i, j) != 0.0) ++e;
    return e;
  }
  bool has_edge(int u, int v) const { return adjacency.at(u, v) != 0.0; }
};

struct Split {
  std::vector<int> train, val, test;
};

struct GraphDataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_dim = 0;
  Split split;

  int max_degree() const {
    int m = 0;
    for (const Graph& g : graphs)
      for (int v = 0; v < g.n; ++v) m = std::max(m, g.degree(v));
    return m;
  }
};

// Replaces features with a one-hot encoding of node degree. Row i gets a
// single 1 at position degree(i); degrees above max_degree clamp to the last
// bucket. Callers pass the dataset-wide maximum so widths agree.
Graph degree_onehot(const Graph& g, int max_degree);

// Applies degree_onehot across a dataset (using its own max degree) and sets
// feature_dim. Used when no node labels are available.
void apply_degree_onehot(GraphDataset& ds);

// Loads the multi-file text format: NAME_A.txt (comma-separated 1-based edge
// pairs), NAME_graph_indicator.txt, NAME_graph_labels.txt, optional
// NAME_node_labels.txt. Node labels are one-hot encoded when present,
// otherwise degree one-hot is applied. Class labels are remapped to 0..C-1.
GraphDataset load_tu_dataset(const std::string& dir, const std::string& name);

// Writes a dataset back in the same text format (adjacency, graph labels,
// node labels when present). Inverse of load_tu_dataset up to features.
void save_tu_dataset(const std::string& dir, const std::string& name,
                     const GraphDataset& ds);

// Finds the single NAME such that dir/NAME_A.txt exists.
std::string infer_dataset_name(const std::string& dir);

// Erdos-Renyi: each unordered pair is an edge independently with probability
// p. Deterministic for a fixed generator state.
Graph er_random_graph(int n, double p, Rng& rng);

// adjacency -> P A P^T, features -> P X, label unchanged. perm[i] is the new
// index of node i.
Graph permute_graph(const Graph& g, const std::vector<int>& perm);

// Random 8:1:1-style split (proportions configurable); indices disjoint.
Split make_split(int count, const double ratios[3], Rng& rng);

}  // namespace hap
