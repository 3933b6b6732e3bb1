#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "hap/graph.hpp"

#ifndef HAP_CLI_PATH
#define HAP_CLI_PATH "hap"
#endif

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, std::string* output = nullptr) {
  std::string cmd = std::string(HAP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[4096];
  while (fgets(buf, sizeof(buf), pipe)) text += buf;
  int rc = pclose(pipe);
  if (output) *output = text;
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("hap_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return std::string((std::istreambuf_iterator<char>(f)), {});
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("generate, train, eval, embed round-trip") {
  fs::path data = fresh_dir("data");
  int rc = run_cli("generate toy-classify --graphs 24 --nodes 10 --out " +
                   data.string() + " --seed 3");
  REQUIRE(rc == 0);
  CHECK(fs::exists(data / "toy_A.txt"));
  CHECK(fs::exists(data / "manifest.txt"));
  hap::GraphDataset ds = hap::load_tu_dataset(data.string(), "toy");
  CHECK(ds.graphs.size() == 24);

  fs::path run = fresh_dir("run");
  rc = run_cli("train --task classify --data " + data.string() + " --out " +
               run.string() +
               " --epochs 2 --embed-dim 8 --clusters 4,1 --patience 5 --seed 5");
  REQUIRE(rc == 0);
  CHECK(fs::exists(run / "best.ckpt"));
  CHECK(fs::exists(run / "manifest.txt"));
  std::string metrics = slurp(run / "metrics.csv");
  CHECK(metrics.rfind("epoch,split,metric,value", 0) == 0);

  std::string eval1, eval2;
  rc = run_cli("eval --checkpoint " + (run / "best.ckpt").string() + " --data " +
               data.string(), &eval1);
  REQUIRE(rc == 0);
  CHECK(eval1.find("accuracy") != std::string::npos);
  run_cli("eval --checkpoint " + (run / "best.ckpt").string() + " --data " +
          data.string(), &eval2);
  CHECK(eval1 == eval2);

  fs::path emb1 = run / "e1.csv";
  fs::path emb2 = run / "e2.csv";
  rc = run_cli("embed --checkpoint " + (run / "best.ckpt").string() + " --data " +
               data.string() + " --out " + emb1.string());
  REQUIRE(rc == 0);
  run_cli("embed --checkpoint " + (run / "best.ckpt").string() + " --data " +
          data.string() + " --out " + emb2.string());
  std::string e1 = slurp(emb1), e2 = slurp(emb2);
  CHECK(e1 == e2);
  int lines = 0;
  for (char c : e1)
    if (c == '\n') ++lines;
  CHECK(lines == 25);  // header + one row per graph

  // the manifest doubles as a config file and reproduces the run
  fs::path run2 = fresh_dir("run2");
  rc = run_cli("train --data " + data.string() + " --out " + run2.string() +
               " --config " + (run / "manifest.txt").string());
  REQUIRE(rc == 0);
  CHECK(slurp(run2 / "metrics.csv") == metrics);
}

TEST_CASE("generation is byte-identical across runs with one seed") {
  fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  REQUIRE(run_cli("generate match --size 12 --pairs 20 --seed 11 --out " +
                  a.string()) == 0);
  REQUIRE(run_cli("generate match --size 12 --pairs 20 --seed 11 --out " +
                  b.string()) == 0);
  for (const char* f : {"match_A.txt", "match_graph_indicator.txt",
                        "match_graph_labels.txt", "match_pairs.txt"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(!slurp(a / f).empty());
  }
}

TEST_CASE("ged subcommand prints the exact distance and a witness") {
  fs::path dir = fresh_dir("ged");
  {
    std::ofstream tri(dir / "triangle.txt");
    tri << "3\n1 2\n2 3\n1 3\n";
    std::ofstream path(dir / "path.txt");
    path << "3\n1 2\n2 3\n";
  }
  std::string out1, out2;
  int rc = run_cli("ged --g1 " + (dir / "triangle.txt").string() + " --g2 " +
                   (dir / "path.txt").string(), &out1);
  REQUIRE(rc == 0);
  CHECK(out1.find("GED = 1") != std::string::npos);
  CHECK(out1.find("edit sequence") != std::string::npos);

  rc = run_cli("ged --g1 " + (dir / "path.txt").string() + " --g2 " +
               (dir / "triangle.txt").string(), &out2);
  REQUIRE(rc == 0);
  CHECK(out2.find("GED = 1") != std::string::npos);

  std::string same;
  rc = run_cli("ged --g1 " + (dir / "triangle.txt").string() + " --g2 " +
               (dir / "triangle.txt").string(), &same);
  REQUIRE(rc == 0);
  CHECK(same.find("GED = 0") != std::string::npos);
}

TEST_CASE("ged refuses graphs above the cap with exit code 2") {
  fs::path dir = fresh_dir("ged_cap");
  {
    std::ofstream big(dir / "big.txt");
    big << "11\n1 2\n";
    std::ofstream small(dir / "small.txt");
    small << "3\n1 2\n";
  }
  std::string out;
  int rc = run_cli("ged --g1 " + (dir / "big.txt").string() + " --g2 " +
                   (dir / "small.txt").string(), &out);
  CHECK(rc == 2);
  CHECK(out.find("cap") != std::string::npos);
}

TEST_CASE("bench reports one row per size") {
  std::string out;
  int rc = run_cli("bench --sizes 24 --reps 3 --dim 8 --clusters 4", &out);
  REQUIRE(rc == 0);
  CHECK(out.find("n,median_seconds") != std::string::npos);
  CHECK(out.find("24,") != std::string::npos);

  rc = run_cli("bench --sizes 16,32 --reps 3 --dim 8 --clusters 4", &out);
  REQUIRE(rc == 0);
  CHECK(out.find("slope") != std::string::npos);
}

TEST_CASE("exit codes: usage 1, data 2") {
  std::string out;
  CHECK(run_cli("train --no-such-flag", &out) == 1);
  CHECK(run_cli("eval --checkpoint missing.ckpt --data /nonexistent_hap", &out) == 2);
  CHECK(run_cli("generate match --pairs 3 --out /tmp/hap_cli_badpairs", &out) == 1);
}

TEST_SUITE_END();
