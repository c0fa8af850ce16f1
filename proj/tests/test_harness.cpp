#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "treelab/decision_tree.hpp"
#include "treelab/errors.hpp"
#include "treelab/harness.hpp"
#include "treelab/influence.hpp"
#include "treelab/learners.hpp"
#include "treelab/oracle.hpp"
#include "treelab/truth_table.hpp"

using namespace treelab;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::string drop_wall_column(const std::string& row) {
  return row.substr(0, row.rfind(','));
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

ExperimentCell quick_cell(int n, int s) {
  ExperimentCell cell;
  cell.target.family = TargetSpec::Family::RandomTree;
  cell.target.s = s;
  cell.target.n = n;
  cell.algo = "topk";
  cell.cfg.s = s;
  cell.cfg.eps = 0.1;
  cell.cfg.depth = 4;
  cell.cfg.schedule = GreedSchedule::constant(2);
  cell.exact_oracle = true;
  return cell;
}

}  // namespace

TEST_CASE("random tree generator hits the requested leaf count") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    int s = 1 + static_cast<int>(seed % 32);
    DecisionTree t = gen_random_tree(s, 8, seed);
    CHECK(t.size() == s);
    t.validate(8);
  }
  CHECK(gen_random_tree(1, 4, 9).size() == 1);
  CHECK(gen_random_tree(16, 4, 9).size() == 16);  // full tree is reachable
  CHECK_THROWS_AS(gen_random_tree(17, 4, 9), std::invalid_argument);
  CHECK_THROWS_AS(gen_random_tree(0, 4, 9), std::invalid_argument);
}

TEST_CASE("random tree generation is a pure function of the seed") {
  DecisionTree a = gen_random_tree(12, 10, 424242);
  DecisionTree b = gen_random_tree(12, 10, 424242);
  DecisionTree c = gen_random_tree(12, 10, 424243);
  CHECK(a.same_structure(b));
  CHECK(!a.same_structure(c));  // one seed apart should differ somewhere
}

TEST_CASE("junta generator builds a full tree over k hidden variables") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DecisionTree t = gen_junta(4, 64, seed);
    CHECK(t.size() == 16);
    CHECK(t.depth() == 4);
    CHECK(t.variables().size() == 4);
    t.validate(64);
  }
  // Variables outside the tree carry no influence.
  DecisionTree t = gen_junta(3, 10, 77);
  TruthTable f = tree_to_table(t, 10);
  InfluenceVector iv = exact_influence(f);
  std::vector<int> support = t.variables();
  for (int v = 0; v < 10; ++v) {
    bool in_support = std::find(support.begin(), support.end(), v) != support.end();
    if (!in_support) CHECK(iv.scores[v] == 0.0);
  }
  CHECK_THROWS_AS(gen_junta(5, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_junta(13, 64, 1), std::invalid_argument);
}

TEST_CASE("monotone generator output is always monotone") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    int n = 2 + static_cast<int>(seed % 9);
    CHECK(is_monotone(gen_monotone(n, seed)));
  }
  CHECK_THROWS_AS(gen_monotone(17, 1), std::invalid_argument);
}

TEST_CASE("one-variable monotone functions avoid the decreasing dictator") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TruthTable f = gen_monotone(1, seed);
    bool decreasing = f.bit(0) && !f.bit(1);
    CHECK(!decreasing);
  }
}

TEST_CASE("error measurement against tables is the exact distance") {
  DecisionTree h = parse_tree("(x0 0 1)");
  TruthTable target = tree_to_table(parse_tree("(x1 0 1)"), 2);
  CHECK(measure_error(h, target) == doctest::Approx(0.5));
  CHECK(measure_error(parse_tree("(x1 0 1)"), target) == 0.0);
}

TEST_CASE("error measurement through an oracle is exact when a table fits") {
  DecisionTree target = gen_random_tree(16, 14, 31);
  OracleConfig cfg;
  Oracle o(target, 14, cfg);
  DecisionTree h = gen_random_tree(8, 14, 32);
  CHECK(measure_error(h, o, 0.05, 999) == doctest::Approx(tree_distance(h, target)));
  // Counters are untouched by measurement.
  CHECK(o.counts() == std::pair<std::uint64_t, std::uint64_t>{0, 0});
}

TEST_CASE("error measurement samples when the dimension is too wide") {
  DecisionTree target = gen_junta(3, 30, 51);
  OracleConfig cfg;
  Oracle o(target, 30, cfg);

  CHECK(measure_error(target, o, 0.2, 7) == 0.0);

  DecisionTree constant = DecisionTree::leaf(false);
  double sampled = measure_error(constant, o, 0.2, 7);
  double exact = tree_distance(constant, target);
  CHECK(std::abs(sampled - exact) <= 0.05);
}

TEST_CASE("sampling plan for error measurement is pinned") {
  CHECK(error_sample_count(0.2) == 1060);
  CHECK(error_sample_count(0.05) == 16955);
}

TEST_CASE("family names match the CSV vocabulary") {
  CHECK(std::string(family_name(TargetSpec::Family::RandomTree)) == "tree");
  CHECK(std::string(family_name(TargetSpec::Family::Junta)) == "junta");
  CHECK(std::string(family_name(TargetSpec::Family::MonotoneRandom)) == "monotone");
  CHECK(std::string(family_name(TargetSpec::Family::Explicit)) == "explicit");
}

TEST_CASE("csv header pins the column order") {
  CHECK(std::string(csv_header()) ==
        "family,s_target,n,k_junta,noise,algo,k1,k2,phase_split,lookahead,depth_cap,"
        "eps,delta,mode,seed,trial,err,hyp_size,hyp_depth,mq_count,ex_count,"
        "subproblems,wall_ms");
}

TEST_CASE("experiment rows are complete and self describing") {
  TempFile tmp("tmp_rows.csv");
  ExperimentOptions opt;
  opt.trials = 3;
  opt.master_seed = 2024;
  run_experiment({quick_cell(6, 4)}, opt, tmp.path);

  std::vector<std::string> lines = read_lines(tmp.path);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == csv_header());
  for (int row = 1; row <= 3; ++row) {
    std::vector<std::string> f = split_csv(lines[row]);
    REQUIRE(f.size() == 23);
    CHECK(f[0] == "tree");
    CHECK(f[1] == "4");   // target size
    CHECK(f[2] == "6");   // dimension
    CHECK(f[5] == "topk");
    CHECK(f[13] == "mq");
    CHECK(f[15] == std::to_string(row - 1));  // trial index
    double err = std::stod(f[16]);
    CHECK(err >= 0.0);
    CHECK(err <= 1.0);
    CHECK(std::stoi(f[17]) <= 4);   // hyp_size within budget
    CHECK(std::stoll(f[21]) >= 1);  // subproblems
    CHECK(std::stod(f[22]) >= 0.0);
  }
  // Per-trial seeds must all differ.
  CHECK(split_csv(lines[1])[14] != split_csv(lines[2])[14]);
  CHECK(split_csv(lines[2])[14] != split_csv(lines[3])[14]);
}

TEST_CASE("reruns with one master seed agree except for wall time") {
  TempFile a("tmp_rerun_a.csv");
  TempFile b("tmp_rerun_b.csv");
  ExperimentOptions opt;
  opt.trials = 2;
  opt.master_seed = 99;
  std::vector<ExperimentCell> cells{quick_cell(6, 4), quick_cell(7, 8)};
  run_experiment(cells, opt, a.path);
  run_experiment(cells, opt, b.path);

  std::vector<std::string> la = read_lines(a.path);
  std::vector<std::string> lb = read_lines(b.path);
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i)
    CHECK(drop_wall_column(la[i]) == drop_wall_column(lb[i]));
}

TEST_CASE("a pinned target seed repeats the target across trials") {
  TempFile tmp("tmp_pinned.csv");
  ExperimentCell cell = quick_cell(8, 8);
  cell.target.seed = 1234;  // one fixed draw for every trial
  ExperimentOptions opt;
  opt.trials = 3;
  opt.master_seed = 5;
  run_experiment({cell}, opt, tmp.path);

  std::vector<std::string> lines = read_lines(tmp.path);
  REQUIRE(lines.size() == 4);
  std::vector<std::string> first = split_csv(lines[1]);
  for (int row = 2; row <= 3; ++row) {
    std::vector<std::string> f = split_csv(lines[row]);
    CHECK(f[16] == first[16]);  // same err
    CHECK(f[17] == first[17]);  // same hypothesis size
    CHECK(f[21] == first[21]);  // same search effort
  }
}

TEST_CASE("resuming appends the skipped cells deterministically") {
  TempFile tmp("tmp_resume.csv");
  std::vector<ExperimentCell> cells{quick_cell(6, 4), quick_cell(7, 8)};
  ExperimentOptions opt;
  opt.trials = 2;
  opt.master_seed = 321;
  run_experiment(cells, opt, tmp.path);
  std::vector<std::string> before = read_lines(tmp.path);
  REQUIRE(before.size() == 5);

  ExperimentOptions resume = opt;
  resume.resume_from_cell = 1;
  run_experiment(cells, resume, tmp.path);
  std::vector<std::string> after = read_lines(tmp.path);
  REQUIRE(after.size() == 7);
  // The original content is untouched and the reappended cell-1 rows match
  // the first run, wall time aside.
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);
  CHECK(drop_wall_column(after[5]) == drop_wall_column(before[3]));
  CHECK(drop_wall_column(after[6]) == drop_wall_column(before[4]));
}

TEST_CASE("matrix files load cell by cell and skip broken entries") {
  TempFile tmp("tmp_matrix.json");
  {
    std::ofstream out(tmp.path);
    out << R"([
      {"target": {"family": "tree", "s": 8, "n": 10},
       "algo": "topk",
       "config": {"s": 8, "eps": 0.1, "delta": 0.1, "schedule": "constant", "k": 2,
                  "mode": "mq", "exact": true}},
      {"target": {"family": "not_a_family", "n": 4}, "algo": "topk", "config": {"s": 1}}
    ])";
  }
  std::vector<ExperimentCell> cells = load_matrix_json(tmp.path);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].target.s == 8);
  CHECK(cells[0].target.n == 10);
  CHECK(cells[0].cfg.schedule.k1 == 2);
  CHECK(cells[0].exact_oracle);

  CHECK_THROWS(load_matrix_json("tmp_no_such_matrix.json"));

  TempFile garbage("tmp_garbage.json");
  {
    std::ofstream out(garbage.path);
    out << "this is not json";
  }
  CHECK_THROWS(load_matrix_json(garbage.path));
}

TEST_CASE("trees and tables round trip through target files") {
  TempFile treef("tmp_tree.txt");
  DecisionTree t = parse_tree("(x2 (x0 0 1) (x1 1 0))");
  save_tree(t, 6, treef.path);
  LoadedTarget lt = load_target(treef.path);
  CHECK(lt.n == 6);
  REQUIRE(lt.tree.has_value());
  CHECK(lt.tree->same_structure(t));

  TempFile tablef("tmp_table.txt");
  TruthTable f = tree_to_table(t, 4);
  save_table(f, tablef.path);
  LoadedTarget ltab = load_target(tablef.path);
  CHECK(ltab.n == 4);
  REQUIRE(ltab.table.has_value());
  CHECK(*ltab.table == f);
}

TEST_CASE("bare tree files infer their dimension") {
  TempFile tmp("tmp_bare.txt");
  {
    std::ofstream out(tmp.path);
    out << "(x5 0 (x1 1 0))";
  }
  LoadedTarget lt = load_target(tmp.path);
  CHECK(lt.n == 6);  // one past the largest queried variable
  REQUIRE(lt.tree.has_value());
  CHECK(lt.tree->size() == 3);
}

TEST_CASE("loading a missing target fails loudly") {
  CHECK_THROWS(load_target("tmp_absent_target.txt"));
}
