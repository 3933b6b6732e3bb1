#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hap/graph.hpp"

namespace hap {

// Largest graph the exact oracle accepts; exact GED is intractable much past
// this size.
inline constexpr int kGedNodeCap = 10;

struct EditCostModel {
  double node_insert = 1.0;
  double node_delete = 1.0;
  double node_relabel = 1.0;
  double edge_insert = 1.0;
  double edge_delete = 1.0;
};

struct EditOp {
  enum Kind { kNodeDelete, kNodeInsert, kNodeRelabel, kEdgeDelete, kEdgeInsert };
  Kind kind;
  int u = -1;
  int v = -1;  // second endpoint for edge ops
  std::string describe() const;
};

struct GedResult {
  double cost = 0.0;
  std::vector<int> mapping;  // g1 node -> g2 node, -1 when deleted
  std::vector<EditOp> edits;
};

// Exact minimum edit cost over all node mappings, via branch-and-bound over
// injective partial mappings with an admissible lower bound. Node relabel
// cost applies only when both graphs carry node labels.
double ged_exact(const Graph& g1, const Graph& g2,
                 const EditCostModel& costs = {});

// Same search, also reporting one witnessing edit sequence.
GedResult ged_exact_witness(const Graph& g1, const Graph& g2,
                            const EditCostModel& costs = {});

// Symmetric all-pairs table g_ij = ged_exact(G_i, G_j), zero diagonal.
Matrix make_pair_ground_truth(const GraphDataset& ds,
                              const EditCostModel& costs = {});

struct PairRecord {
  int g1 = 0;
  int g2 = 0;
  std::optional<int> label;   // matching task
  std::optional<double> ged;  // similarity ground truth
};

struct TripletRecord {
  int g1 = 0;
  int g2 = 0;
  int g3 = 0;
  double r = 0.0;  // g(1,2) - g(1,3); positive means G1 is closer to G3
};

// Uniformly sampled triplets with exact relative-GED labels.
std::vector<TripletRecord> make_triplets(const GraphDataset& ds,
                                         const Matrix& ged_table, int count,
                                         Rng& rng);

// Synthetic matching data: per base ER graph, one positive partner (largest
// connected subgraph after deleting 1-3 nodes) and one negative partner (3-7
// extra nodes wired in at the same edge probability).
struct MatchingData {
  GraphDataset dataset;
  std::vector<PairRecord> pairs;
};
MatchingData gen_matching_dataset(int n_base, int base_size, double p_min,
                                  double p_max, Rng& rng);

// Two-class ER dataset separable by edge probability.
GraphDataset gen_toy_classify(int n_graphs, int nodes, double p0, double p1,
                              Rng& rng);

struct TripletData {
  GraphDataset dataset;
  std::vector<TripletRecord> triplets;
  Matrix ged_table;
};
TripletData gen_triplet_dataset(int n_graphs, int min_nodes, int max_nodes,
                                double p_min, double p_max, int n_triplets,
                                Rng& rng, const EditCostModel& costs = {});

// Sidecar files: one record per line, tab-separated.
void save_pairs(const std::string& path, const std::vector<PairRecord>& pairs);
std::vector<PairRecord> load_pairs(const std::string& path, bool as_label);
void save_triplets(const std::string& path,
                   const std::vector<TripletRecord>& triplets);
std::vector<TripletRecord> load_triplets(const std::string& path);

// Single-graph text file for ad hoc queries: first line the node count,
// following lines one 1-based edge pair each.
Graph load_graph_file(const std::string& path);

}  // namespace hap
