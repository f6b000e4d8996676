#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "taintfuzz/cli.hpp"

namespace fs = std::filesystem;
using taintfuzz::cli::run;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("taintfuzz_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}) == 2);
  CHECK(run({"fuzz"}) == 2);                          // missing --target
  CHECK(run({"fuzz", "--target", "nope"}) == 2);      // unknown target
  CHECK(run({"compare", "--a", "x"}) == 2);           // missing --b
  CHECK(run({"sample-influence"}) == 2);              // missing --target
}

TEST_CASE("subcommands re-run byte-identically") {
  TempDir tmp;
  struct Case {
    const char* name;
    std::vector<std::string> args;
  };
  const std::vector<Case> cases = {
      {"start",
       {"sample-start", "--seed-len", "120", "--iterations", "400",
        "--rng-seed", "5"}},
      {"influence",
       {"sample-influence", "--target", "sparse_hot", "--iterations", "500",
        "--k", "5", "--rng-seed", "6"}},
      {"stackd",
       {"stack-distance", "--seed-len", "150", "--stacks", "1", "--stacks",
        "4", "--iterations", "200", "--rng-seed", "7"}},
      {"spliced",
       {"splice-distance", "--gen-corpus", "4", "--iterations", "300",
        "--rng-seed", "8"}},
      {"fuzz",
       {"fuzz", "--target", "sparse_hot", "--max-execs", "4000",
        "--mutants-per-seed", "128", "--rng-seed", "9"}},
      {"targets", {"targets"}},
  };
  for (const auto& c : cases) {
    const fs::path out1 = tmp.path / (std::string(c.name) + "_1.csv");
    const fs::path out2 = tmp.path / (std::string(c.name) + "_2.csv");
    auto args1 = c.args;
    args1.push_back("--out");
    args1.push_back(out1.string());
    auto args2 = c.args;
    args2.push_back("--out");
    args2.push_back(out2.string());
    REQUIRE(run(args1) == 0);
    REQUIRE(run(args2) == 0);
    INFO(c.name);
    CHECK(slurp(out1) == slurp(out2));
  }
}

TEST_CASE("fuzz writes corpus files and a taint dump") {
  TempDir tmp;
  const fs::path corpus_dir = tmp.path / "corpus";
  const fs::path taint_csv = tmp.path / "taint.csv";
  const fs::path stats_csv = tmp.path / "stats.csv";
  REQUIRE(run({"fuzz", "--target", "sparse_hot", "--max-execs", "4000",
               "--mutants-per-seed", "128", "--rng-seed", "3", "--out",
               stats_csv.string(), "--corpus-out", corpus_dir.string(),
               "--taint-out", taint_csv.string()}) == 0);
  size_t corpus_files = 0;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    CHECK(entry.path().filename().string().rfind("id_", 0) == 0);
    CHECK(entry.path().filename().string().find("_exec_") != std::string::npos);
    corpus_files += 1;
  }
  CHECK(corpus_files >= 1);
  const std::string taint = slurp(taint_csv);
  CHECK(taint.rfind("# seed_id=", 0) == 0);
  CHECK(taint.find("index,count\n") != std::string::npos);
}

TEST_CASE("compare consumes stats CSVs and applies the 0.05 threshold") {
  TempDir tmp;
  const fs::path dir_a = tmp.path / "a";
  const fs::path dir_b = tmp.path / "b";
  fs::create_directories(dir_a);
  fs::create_directories(dir_b);
  // hand-written stats files with a clear separation in the metric
  for (int i = 0; i < 9; ++i) {
    std::ofstream fa(dir_a / ("run" + std::to_string(i) + ".csv"));
    fa << "execution,edges_covered,corpus_size,accepted_samples\n"
       << "# final target=sparse_hot mode=ztaint executions=1000 "
          "edges_covered=5 corpus_size=2 accepted_samples=10 "
          "executions_to_full_coverage="
       << 100 + i << " full_coverage_reached=1\n";
    std::ofstream fb(dir_b / ("run" + std::to_string(i) + ".csv"));
    fb << "execution,edges_covered,corpus_size,accepted_samples\n"
       << "# final target=sparse_hot mode=vanilla executions=1000 "
          "edges_covered=5 corpus_size=2 accepted_samples=0 "
          "executions_to_full_coverage="
       << 900 + i << " full_coverage_reached=1\n";
  }
  const fs::path out = tmp.path / "cmp.csv";
  REQUIRE(run({"compare", "--a", dir_a.string(), "--b", dir_b.string(),
               "--metric", "executions_to_full_coverage", "--alternative",
               "less", "--out", out.string()}) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("target,U,p,significant\n", 0) == 0);
  CHECK(text.find("sparse_hot,0.000000,") != std::string::npos);
  CHECK(text.find(",true\n") != std::string::npos);

  // flipped orientation is not significant under "less"
  const fs::path out2 = tmp.path / "cmp2.csv";
  REQUIRE(run({"compare", "--a", dir_b.string(), "--b", dir_a.string(),
               "--metric", "executions_to_full_coverage", "--alternative",
               "less", "--out", out2.string()}) == 0);
  CHECK(slurp(out2).find(",false\n") != std::string::npos);
}

TEST_CASE("infeasible experiments exit with code 3") {
  // a generated corpus of one seed cannot splice
  CHECK(run({"splice-distance", "--gen-corpus", "1", "--iterations", "50"}) == 3);
}
