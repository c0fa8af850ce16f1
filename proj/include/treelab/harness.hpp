#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treelab/decision_tree.hpp"
#include "treelab/learners.hpp"
#include "treelab/oracle.hpp"
#include "treelab/truth_table.hpp"

namespace treelab {

// Grows a tree to exactly s leaves by repeatedly splitting a uniformly chosen
// splittable leaf (one whose path has an unused variable left) on a uniformly
// chosen unused variable, with random bits on the fresh leaves.  Throws when
// s exceeds 2^n.
DecisionTree gen_random_tree(int s, int n, std::uint64_t seed);

// Full depth-k tree over k uniformly chosen distinct variables with random
// leaf bits: a k-junta of size 2^k.  Requires k <= min(n, 12).
DecisionTree gen_junta(int k, int n, std::uint64_t seed);

// Random table pushed to its upward closure (f(x) = OR of the draw over all
// y coordinatewise below x), guaranteed monotone.  Requires n <= 16.
TruthTable gen_monotone(int n, std::uint64_t seed);

// Exact disagreement fraction between the hypothesis and a target table.
double measure_error(const DecisionTree& h, const TruthTable& target);

// Disagreement against whatever the oracle labels.  Exact whenever the
// oracle's dimension permits a table; otherwise Hoeffding-sized fresh
// sampling for accuracy eps/4 at confidence 0.99, drawn from `seed`,
// independent of any training stream.
double measure_error(const DecisionTree& h, const Oracle& o, double eps, std::uint64_t seed);

// Samples the sampled path of measure_error draws: ceil(ln(2/0.01) / (2 (eps/4)^2)).
std::int64_t error_sample_count(double eps);

struct TargetSpec {
  enum class Family { RandomTree, Junta, MonotoneRandom, Explicit };
  Family family = Family::RandomTree;
  int s = 1;              // random trees: leaf count
  int k = 0;              // juntas: arity
  int n = 1;
  double noise = 0.0;     // fraction of corrupted inputs
  std::uint64_t seed = 0; // nonzero pins the target draw across trials
  std::string file;       // explicit targets: path to a tree or table file
};

const char* family_name(TargetSpec::Family family);

struct ExperimentCell {
  TargetSpec target;
  std::string algo = "topk";  // greedy | topk | adaptive | dp
  LearnerConfig cfg;
  // Serve the learner from the materialized table instead of sampling; only
  // valid when the dimension fits a table.
  bool exact_oracle = false;
};

struct ExperimentOptions {
  int trials = 1;
  std::uint64_t master_seed = 0;
  // Skip cells below this index and append to the CSV instead of truncating,
  // so an interrupted sweep can pick up where it stopped.
  int resume_from_cell = 0;
};

// One CSV row per (cell, trial), flushed as produced, in (cell, trial) order.
// Every per-trial seed derives from (master seed, cell index, trial), so a
// rerun is byte-identical apart from wall-clock fields.  A cell that fails to
// build or learn is reported on stderr and contributes no rows; other cells
// proceed.
void run_experiment(const std::vector<ExperimentCell>& cells, const ExperimentOptions& opt,
                    const std::string& out_path);

// Matrix file: JSON array of cells, e.g.
//   [{"target": {"family": "tree", "s": 16, "n": 16, "noise": 0.0},
//     "algo": "topk",
//     "config": {"s": 16, "eps": 0.05, "delta": 0.1, "schedule": "polylog",
//                "c": 2.0, "mode": "mq", "exact": true}}]
// Malformed entries are reported on stderr and skipped.
std::vector<ExperimentCell> load_matrix_json(const std::string& path);

const char* csv_header();

// Target/hypothesis files: tables use the "n=.../hex=..." text format; trees
// are stored as "n=<int>" followed by the tree text on the next line.  A bare
// tree line (no header) is accepted, inferring n from the largest variable.
struct LoadedTarget {
  int n = 0;
  std::optional<DecisionTree> tree;
  std::optional<TruthTable> table;
};

LoadedTarget load_target(const std::string& path);
void save_tree(const DecisionTree& t, int n, const std::string& path);
void save_table(const TruthTable& f, const std::string& path);

}  // namespace treelab
