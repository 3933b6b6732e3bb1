#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "hap/datagen.hpp"
#include "support/oracles.hpp"

using namespace hap;
namespace fs = std::filesystem;

namespace {

Graph triangle() {
  Graph g;
  g.n = 3;
  g.adjacency = Matrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  return g;
}

Graph path3() {
  Graph g;
  g.n = 3;
  g.adjacency = Matrix{{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};
  return g;
}

Graph complete(int n) {
  Graph g;
  g.n = n;
  g.adjacency = Matrix(n, n, 1.0);
  for (int i = 0; i < n; ++i) g.adjacency.at(i, i) = 0.0;
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("datagen");

TEST_CASE("ged of a graph with itself is zero") {
  Rng rng(139);
  for (int t = 0; t < 10; ++t) {
    Graph g = er_random_graph(3 + static_cast<int>(rng.uniform_int(0, 5)), 0.4, rng);
    CHECK(ged_exact(g, g) == 0.0);
  }
}

TEST_CASE("derived fixtures confirmed by the enumeration oracle first") {
  // the enumeration oracle freezes the constants, then the search must agree
  double tri_path = oracle::ged_enumerate(triangle(), path3());
  REQUIRE(tri_path == 1.0);  // one edge deletion
  CHECK(ged_exact(triangle(), path3()) == 1.0);

  double k3_k4 = oracle::ged_enumerate(complete(3), complete(4));
  REQUIRE(k3_k4 == 4.0);  // one node plus three edges inserted
  CHECK(ged_exact(complete(3), complete(4)) == 4.0);
}

TEST_CASE("search agrees with enumeration on random small pairs") {
  Rng rng(149);
  for (int t = 0; t < 25; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 3)), 0.5, rng);
    Graph b = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 3)), 0.5, rng);
    CHECK(ged_exact(a, b) == oracle::ged_enumerate(a, b));
  }
}

TEST_CASE("ged respects node labels when both graphs carry them") {
  Graph a = triangle(), b = triangle();
  a.node_labels = {0, 0, 0};
  b.node_labels = {0, 0, 1};
  CHECK(ged_exact(a, b) == 1.0);  // one relabel
  CHECK(ged_exact(a, b) == oracle::ged_enumerate(a, b));
}

TEST_CASE("ged is symmetric and permutation invariant") {
  Rng rng(151);
  for (int t = 0; t < 20; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.45, rng);
    Graph b = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.45, rng);
    CHECK(ged_exact(a, b) == ged_exact(b, a));
    Graph pa = permute_graph(a, oracle::random_permutation(a.n, rng));
    CHECK(ged_exact(pa, b) == ged_exact(a, b));
  }
}

TEST_CASE("ged satisfies the triangle inequality on random triples") {
  Rng rng(157);
  for (int t = 0; t < 25; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    Graph b = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    Graph c = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 4)), 0.4, rng);
    double ab = ged_exact(a, b), bc = ged_exact(b, c), ac = ged_exact(a, c);
    CHECK(ac <= ab + bc + 1e-12);
  }
}

TEST_CASE("zero distance implies an isomorphism on small graphs") {
  Rng rng(163);
  int zero_hits = 0;
  for (int t = 0; t < 60; ++t) {
    Graph a = er_random_graph(2 + static_cast<int>(rng.uniform_int(0, 3)), 0.5, rng);
    Graph b = er_random_graph(a.n, 0.5, rng);
    if (ged_exact(a, b) == 0.0) {
      CHECK(oracle::isomorphic_exhaustive(a, b));
      ++zero_hits;
    }
    Graph pa = permute_graph(a, oracle::random_permutation(a.n, rng));
    CHECK(ged_exact(a, pa) == 0.0);
    CHECK(oracle::isomorphic_exhaustive(a, pa));
  }
  (void)zero_hits;
}

TEST_CASE("the oracle refuses graphs above the node cap") {
  Rng rng(167);
  Graph big = er_random_graph(11, 0.3, rng);
  Graph small = er_random_graph(4, 0.3, rng);
  CHECK_THROWS_WITH_AS(ged_exact(big, small), doctest::Contains("cap of 10"),
                       DataError);
}

TEST_CASE("witness edit sequence has cost-many operations under unit costs") {
  GedResult res = ged_exact_witness(complete(3), complete(4));
  CHECK(res.cost == 4.0);
  CHECK(res.edits.size() == 4);
  int node_inserts = 0, edge_inserts = 0;
  for (const EditOp& e : res.edits) {
    if (e.kind == EditOp::kNodeInsert) ++node_inserts;
    if (e.kind == EditOp::kEdgeInsert) ++edge_inserts;
  }
  CHECK(node_inserts == 1);
  CHECK(edge_inserts == 3);
}

TEST_CASE("pair ground-truth table is symmetric with a zero diagonal") {
  Rng rng(173);
  GraphDataset ds;
  for (int i = 0; i < 5; ++i) {
    Graph g = er_random_graph(4 + static_cast<int>(rng.uniform_int(0, 2)), 0.4, rng);
    g.id = i;
    ds.graphs.push_back(std::move(g));
  }
  // duplicate graph: its row must equal the original's
  Graph dup = ds.graphs[2];
  dup.id = 5;
  ds.graphs.push_back(std::move(dup));

  Matrix table = make_pair_ground_truth(ds);
  for (int i = 0; i < 6; ++i) {
    CHECK(table.at(i, i) == 0.0);
    for (int j = 0; j < 6; ++j) CHECK(table.at(i, j) == table.at(j, i));
  }
  for (int j = 0; j < 6; ++j) CHECK(table.at(2, j) == table.at(5, j));

  GraphDataset lone;
  lone.graphs.push_back(er_random_graph(3, 0.5, rng));
  Matrix single = make_pair_ground_truth(lone);
  CHECK(single.at(0, 0) == 0.0);
}

TEST_CASE("triplet construction") {
  Rng rng(179);
  GraphDataset ds;
  for (int i = 0; i < 6; ++i) {
    Graph g = er_random_graph(4, 0.5, rng);
    g.id = i;
    ds.graphs.push_back(std::move(g));
  }
  Matrix table = make_pair_ground_truth(ds);
  Rng t_rng(7);
  std::vector<TripletRecord> triplets = make_triplets(ds, table, 1000, t_rng);
  CHECK(triplets.size() == 1000);
  for (const TripletRecord& t : triplets) {
    CHECK(t.g2 != t.g3);
    CHECK(t.r == table.at(t.g1, t.g2) - table.at(t.g1, t.g3));
  }
  Rng t_rng2(7);
  std::vector<TripletRecord> again = make_triplets(ds, table, 1000, t_rng2);
  for (size_t i = 0; i < triplets.size(); ++i) {
    CHECK(again[i].g1 == triplets[i].g1);
    CHECK(again[i].g2 == triplets[i].g2);
    CHECK(again[i].g3 == triplets[i].g3);
  }

  GraphDataset tiny;
  tiny.graphs.push_back(er_random_graph(3, 0.5, rng));
  tiny.graphs.push_back(er_random_graph(3, 0.5, rng));
  Matrix small_table(2, 2);
  CHECK_THROWS_AS(make_triplets(tiny, small_table, 10, rng),
                  std::invalid_argument);
}

TEST_CASE("matching dataset respects the size protocol") {
  Rng rng(181);
  MatchingData data = gen_matching_dataset(40, 20, 0.2, 0.5, rng);
  CHECK(data.pairs.size() == 80);
  CHECK(data.dataset.graphs.size() == 120);
  int positives = 0;
  for (const PairRecord& p : data.pairs) {
    const Graph& base = data.dataset.graphs[static_cast<size_t>(p.g1)];
    const Graph& partner = data.dataset.graphs[static_cast<size_t>(p.g2)];
    REQUIRE(p.label.has_value());
    if (*p.label == 1) {
      ++positives;
      // at most 3 nodes removed before the component restriction
      CHECK(partner.n <= base.n - 1);
      CHECK(partner.n >= 1);
    } else {
      CHECK(partner.n >= base.n + 3);
      CHECK(partner.n <= base.n + 7);
    }
  }
  CHECK(positives * 2 == static_cast<int>(data.pairs.size()));
}

TEST_CASE("matching generation is reproducible") {
  Rng a(17), b(17);
  MatchingData d1 = gen_matching_dataset(5, 12, 0.2, 0.5, a);
  MatchingData d2 = gen_matching_dataset(5, 12, 0.2, 0.5, b);
  REQUIRE(d1.dataset.graphs.size() == d2.dataset.graphs.size());
  for (size_t i = 0; i < d1.dataset.graphs.size(); ++i)
    CHECK(d1.dataset.graphs[i].adjacency.max_abs_diff(
              d2.dataset.graphs[i].adjacency) == 0.0);
}

TEST_CASE("toy classification dataset is balanced and seeded") {
  Rng rng(19);
  GraphDataset ds = gen_toy_classify(50, 12, 0.2, 0.5, rng);
  CHECK(ds.graphs.size() == 50);
  int ones = 0;
  for (const Graph& g : ds.graphs) ones += *g.label;
  CHECK(ones == 25);
}

TEST_CASE("sidecar files round-trip") {
  fs::path dir = fs::temp_directory_path() / "hap_test_sidecar";
  fs::create_directories(dir);

  std::vector<PairRecord> pairs{{0, 1, 1, std::nullopt}, {0, 2, 0, std::nullopt}};
  save_pairs((dir / "p.txt").string(), pairs);
  std::vector<PairRecord> rp = load_pairs((dir / "p.txt").string(), true);
  REQUIRE(rp.size() == 2);
  CHECK(rp[0].g2 == 1);
  CHECK(*rp[0].label == 1);
  CHECK(*rp[1].label == 0);

  std::vector<TripletRecord> triplets{{0, 1, 2, -1.5}, {3, 4, 5, 2.0}};
  save_triplets((dir / "t.txt").string(), triplets);
  std::vector<TripletRecord> rt = load_triplets((dir / "t.txt").string());
  REQUIRE(rt.size() == 2);
  CHECK(rt[0].r == -1.5);
  CHECK(rt[1].g3 == 5);
}

TEST_SUITE_END();
