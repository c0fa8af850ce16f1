#pragma once

#include <cstdint>
#include <vector>

#include "treelab/decision_tree.hpp"
#include "treelab/influence.hpp"
#include "treelab/oracle.hpp"
#include "treelab/truth_table.hpp"

namespace treelab {

// How many candidate variables the search keeps at each level of the tree.
struct GreedSchedule {
  enum class Kind { Constant, Polylog, TwoPhase };

  static GreedSchedule constant(int k);
  // k(t) = ceil((log2 s)^c) at every level, never below 1.
  static GreedSchedule polylog(double c);
  // k1 for levels before t_star, k2 from t_star on.
  static GreedSchedule two_phase(int k1, int k2, int t_star);

  int k_at(int level, int s) const;

  Kind kind = Kind::Constant;
  int k1 = 1;
  int k2 = 1;
  int t_star = 0;
  double c = 2.0;
};

// Default switch level for two-phase schedules: roughly
// log2(s) / log2(log2(s)) levels of wide search before narrowing.
int default_phase_split(int s);

struct LearnerConfig {
  int s = 1;             // leaf budget of the output hypothesis
  double eps = 0.1;      // target error
  double delta = 0.1;    // failure probability, split across all estimates
  int depth = -1;        // depth cap; -1 selects ceil(log2(s / eps))
  GreedSchedule schedule = GreedSchedule::constant(1);
  int lookahead = 0;     // 0 = rank candidates by influence alone
  AccessMode mode = AccessMode::MqEx;  // must match the oracle's mode
  std::uint64_t seed = 0;
  int dp_topk = 0;       // restriction DP: 0 = branch on all variables,
                         // else keep the top-k by exact influence per level

  void validate() const;
  int resolved_depth() const;
};

struct SearchStats {
  // Distinct restrictions the search did work on below the depth cap (the
  // root counts for a depth-0 run).  This is the quantity bounded by the
  // product of 2*k(t) over levels.
  std::int64_t subproblems_explored = 0;
  // Split searches performed at each level; index is the level.
  std::vector<std::int64_t> expansions_per_level;
  std::int64_t memo_hits = 0;
  std::uint64_t mq_used = 0;
  std::uint64_t ex_used = 0;
  double wall_ms = 0.0;
  int pre_prune_size = 0;
  int pre_prune_depth = 0;
};

// Product of 2*k(t) over levels t < depth, as a double (may overflow to inf).
double schedule_expansion_bound(const GreedSchedule& schedule, int s, int depth);

struct LearnResult {
  DecisionTree tree;
  SearchStats stats;
};

// Splits on the single most influential variable at every node.  Identical to
// learn_topk under a constant-1 schedule, including the random streams.
LearnResult learn_greedy(const Oracle& o, const LearnerConfig& cfg);

// Brute-force search over the top-k(t) influential variables per level with
// memoization over canonical restrictions; the split keeping the lowest
// average child error wins.
LearnResult learn_topk(const Oracle& o, const LearnerConfig& cfg);

// learn_topk with a mandatory two-phase schedule; exists as a named entry
// point so experiment sweeps can vary the phase split.
LearnResult learn_adaptive(const Oracle& o, const LearnerConfig& cfg);

// Exact dynamic program over all restrictions of at most depth variables.
// Returns the lowest-error depth-bounded tree for the table, pruned to the
// configured leaf budget.  Requires n <= 16 and depth <= 6; throws
// ResourceLimit when the subproblem space would exceed the cap.
LearnResult learn_restriction_dp(const TruthTable& target, const LearnerConfig& cfg,
                                 std::int64_t subproblem_cap = 10'000'000);

// Best pruning of t with at most s leaves, measured exactly against ref.
// Budgets at or above the leaf count return the tree unchanged; otherwise a
// bottom-up DP over (node, leaf budget) picks, per node, either the majority
// leaf of its cell or the best budget split across children (ties keep the
// split).  Original leaf labels are never rewritten.
DecisionTree prune_to_size(const DecisionTree& t, const TruthTable& ref, int s);

// Same DP with cell biases estimated through the oracle.
DecisionTree prune_to_size(const DecisionTree& t, const Oracle& o,
                           const EstimationBudget& node_budget, int s, Rng& rng);

// Majority label for pi's subcube: 1 iff the estimated bias exceeds 1/2
// (exact-table oracles use the exact bias).  A bias of exactly 1/2 labels 0.
bool label_leaf(const Oracle& o, const Restriction& pi, const EstimationBudget& b, Rng& rng);

}  // namespace treelab
