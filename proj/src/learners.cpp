#include "treelab/learners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treelab/errors.hpp"
#include "treelab/restriction.hpp"
#include "treelab/rng.hpp"

namespace treelab {

namespace {

// ceil that forgives the usual log2/pow representation error on exact values.
double ceil_snug(double v) { return std::ceil(v - 1e-9); }

}  // namespace

GreedSchedule GreedSchedule::constant(int k) {
  if (k < 1) throw std::invalid_argument("candidate count must be >= 1");
  GreedSchedule g;
  g.kind = Kind::Constant;
  g.k1 = g.k2 = k;
  return g;
}

GreedSchedule GreedSchedule::polylog(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("polylog exponent must be positive");
  GreedSchedule g;
  g.kind = Kind::Polylog;
  g.c = c;
  return g;
}

GreedSchedule GreedSchedule::two_phase(int k1, int k2, int t_star) {
  if (k1 < 1 || k2 < 1) throw std::invalid_argument("candidate counts must be >= 1");
  if (t_star < 0) throw std::invalid_argument("phase split must be >= 0");
  GreedSchedule g;
  g.kind = Kind::TwoPhase;
  g.k1 = k1;
  g.k2 = k2;
  g.t_star = t_star;
  return g;
}

int GreedSchedule::k_at(int level, int s) const {
  switch (kind) {
    case Kind::Constant:
      return k1;
    case Kind::Polylog: {
      const double l = std::log2(static_cast<double>(std::max(1, s)));
      const double k = ceil_snug(std::pow(l, c));
      return std::max(1, static_cast<int>(k));
    }
    case Kind::TwoPhase:
      return level < t_star ? k1 : k2;
  }
  return 1;
}

int default_phase_split(int s) {
  if (s < 4) return 1;
  const double l = std::log2(static_cast<double>(s));
  return static_cast<int>(ceil_snug(l / std::log2(l)));
}

void LearnerConfig::validate() const {
  if (s < 1) throw std::invalid_argument("size budget must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  if (depth < -1) throw std::invalid_argument("depth must be >= 0, or -1 for the default");
  if (lookahead < 0 || lookahead > 4) throw std::invalid_argument("lookahead must lie in [0,4]");
  if (dp_topk < 0) throw std::invalid_argument("dp_topk must be >= 0");
  if (schedule.k1 < 1 || schedule.k2 < 1 || schedule.t_star < 0 || !(schedule.c > 0.0))
    throw std::invalid_argument("malformed schedule");
}

int LearnerConfig::resolved_depth() const {
  if (depth >= 0) return depth;
  const double d = ceil_snug(std::log2(static_cast<double>(s) / eps));
  return std::max(1, static_cast<int>(d));
}

double schedule_expansion_bound(const GreedSchedule& schedule, int s, int depth) {
  double bound = 1.0;
  for (int t = 0; t < depth; ++t) bound *= 2.0 * schedule.k_at(t, s);
  return bound;
}

namespace {

int free_rank_of(const Restriction& pi, int var) {
  int rank = var;
  for (const auto& a : pi.assignments()) {
    if (a.var >= var) break;
    --rank;
  }
  return rank;
}

// The per-call failure budget splits cfg.delta across every estimate the run
// can make: one bias or influence estimate per free variable and leaf, over
// at most prod_t 2*k(t) subproblems.  The split is computed in log space so
// huge schedules degrade the budget instead of underflowing it.
EstimationBudget engine_budget(int n, const LearnerConfig& cfg) {
  const int d = cfg.resolved_depth();
  double ln_calls = std::log(2.0 * (n + 1));
  for (int t = 0; t < d; ++t) ln_calls += std::log(2.0 * cfg.schedule.k_at(t, cfg.s));
  ln_calls = std::min(ln_calls, 600.0);
  const double delta_call = std::max(cfg.delta * std::exp(-ln_calls), 1e-300);
  return EstimationBudget(cfg.eps / 4.0, delta_call);
}

struct ScoredVar {
  int var;
  double score;
};

struct EngineResult {
  DecisionTree tree;
  double err = 0.0;
  int leaves = 1;
};

// Memoized best-first construction shared by the greedy, top-k, and adaptive
// entry points.  Subproblems are keyed by canonical restriction, so the same
// subcube reached along different split orders is solved once; every
// subproblem derives its random stream from (seed, restriction hash), which
// keeps results independent of visiting order.
class SearchEngine {
 public:
  SearchEngine(const Oracle& o, const LearnerConfig& cfg)
      : o_(o),
        cfg_(cfg),
        n_(o.n()),
        depth_(cfg.resolved_depth()),
        exact_(o.exact_table() != nullptr && cfg.mode == AccessMode::MqEx),
        floor_(cfg.eps / (4.0 * std::max(1, cfg.resolved_depth()))),
        est_(engine_budget(o.n(), cfg)) {
    stats_.expansions_per_level.assign(std::max(1, depth_), 0);
  }

  LearnResult run() {
    const auto t_start = std::chrono::steady_clock::now();
    const auto [mq0, ex0] = o_.counts();

    EngineResult r;
    if (exact_) {
      TruthTable root_cell = *o_.exact_table();
      r = solve(Restriction{}, &root_cell);
    } else {
      r = solve(Restriction{}, nullptr);
    }

    stats_.pre_prune_size = r.tree.size();
    stats_.pre_prune_depth = r.tree.depth();

    DecisionTree out = r.tree;
    if (out.size() > cfg_.s) {
      if (exact_) {
        out = prune_to_size(out, *o_.exact_table(), cfg_.s);
      } else {
        Rng prune_rng = make_rng(cfg_.seed, 0x70B5ULL);
        out = prune_to_size(out, o_, est_, cfg_.s, prune_rng);
      }
    }

    const auto [mq1, ex1] = o_.counts();
    stats_.mq_used = mq1 - mq0;
    stats_.ex_used = ex1 - ex0;
    stats_.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return {std::move(out), std::move(stats_)};
  }

 private:
  // cell is the restricted table under pi when the oracle is exact, else null.
  EngineResult solve(const Restriction& pi, const TruthTable* cell) {
    if (auto it = memo_.find(pi); it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second;
    }

    const int t = pi.size();
    EngineResult out;
    if (t >= depth_) {
      if (depth_ == 0) ++stats_.subproblems_explored;
      out = make_leaf(pi, cell);
    } else {
      ++stats_.subproblems_explored;
      const std::vector<ScoredVar> cands = shortlist(pi, cell);
      if (cands.empty()) {
        out = make_leaf(pi, cell);
      } else {
        ++stats_.expansions_per_level[t];
        bool have = false;
        int best_var = -1;
        double best_err = 0.0;
        int best_leaves = 0;
        DecisionTree best_lo, best_hi;
        for (const auto& cand : cands) {
          const int v = cand.var;
          EngineResult lo, hi;
          if (cell != nullptr) {
            const int rank = free_rank_of(pi, v);
            TruthTable cell0 = cofactor(*cell, rank, false);
            lo = solve(pi.extended(v, false), &cell0);
            TruthTable cell1 = cofactor(*cell, rank, true);
            hi = solve(pi.extended(v, true), &cell1);
          } else {
            lo = solve(pi.extended(v, false), nullptr);
            hi = solve(pi.extended(v, true), nullptr);
          }
          // Children cover equal halves of the subcube, so the subtree error
          // is exactly the average of the child errors.
          const double err = 0.5 * (lo.err + hi.err);
          const int leaves = lo.leaves + hi.leaves;
          // Ties on error go to the smaller tree, then to the earlier (more
          // influential) candidate; deep searches tie at zero error often, and
          // a compact winner keeps the final pruning step nearly lossless.
          if (!have || err < best_err ||
              (err == best_err && leaves < best_leaves)) {
            have = true;
            best_var = v;
            best_err = err;
            best_leaves = leaves;
            best_lo = lo.tree;
            best_hi = hi.tree;
          }
        }
        out = {DecisionTree::internal(best_var, best_lo, best_hi), best_err,
               best_leaves};
      }
    }

    memo_.emplace(pi, out);
    return out;
  }

  EngineResult make_leaf(const Restriction& pi, const TruthTable* cell) {
    double bias;
    if (cell != nullptr) {
      bias = cell->bias();
    } else {
      Rng rng = make_rng(cfg_.seed, mix64(pi.hash(), 0xB1A5ULL));
      bias = estimate_bias(o_, pi, est_, rng);
    }
    return {DecisionTree::leaf(bias > 0.5), std::min(bias, 1.0 - bias), 1};
  }

  // Influence-ranked candidates above the floor, at most k(t) of them; with
  // lookahead on, the influence ranking only picks the pool and the joint
  // cell scores decide the final shortlist.
  std::vector<ScoredVar> shortlist(const Restriction& pi, const TruthTable* cell) {
    const int t = pi.size();
    const int k = cfg_.schedule.k_at(t, cfg_.s);

    std::vector<ScoredVar> scored;
    if (cell != nullptr) {
      const InfluenceVector iv = exact_influence(*cell);
      const std::vector<int> free = pi.free_vars(n_);
      scored.reserve(free.size());
      for (std::size_t i = 0; i < iv.scores.size(); ++i)
        scored.push_back({free[i], iv.scores[i]});
    } else {
      Rng rng = make_rng(cfg_.seed, pi.hash());
      for (int v : pi.free_vars(n_)) {
        const double score = cfg_.mode == AccessMode::ExOnly
                                 ? estimate_influence_monotone(o_, pi, v, est_, rng)
                                 : estimate_influence(o_, pi, v, est_, rng);
        scored.push_back({v, score});
      }
    }

    std::erase_if(scored, [&](const ScoredVar& sv) { return sv.score <= floor_; });
    std::sort(scored.begin(), scored.end(), [](const ScoredVar& a, const ScoredVar& b) {
      return a.score > b.score || (a.score == b.score && a.var < b.var);
    });

    if (cfg_.lookahead > 0 && !scored.empty()) return lookahead_shortlist(pi, scored, k);
    if (static_cast<int>(scored.size()) > k) scored.resize(k);
    return scored;
  }

  std::vector<ScoredVar> lookahead_shortlist(const Restriction& pi,
                                             const std::vector<ScoredVar>& ranked, int k) {
    const int ell = cfg_.lookahead;
    const int pool_size =
        std::min(static_cast<int>(ranked.size()), std::max(2 * k, ell));
    Rng rng = make_rng(cfg_.seed, mix64(pi.hash(), 0x10CAULL));

    std::vector<ScoredVar> rescored;
    rescored.reserve(pool_size);
    for (int i = 0; i < pool_size; ++i) {
      // Score each candidate jointly with the strongest other pool members:
      // the best error any depth-ell tree over that variable set can reach.
      std::vector<int> vars{ranked[i].var};
      for (int j = 0; j < pool_size && static_cast<int>(vars.size()) < ell; ++j)
        if (j != i) vars.push_back(ranked[j].var);
      std::sort(vars.begin(), vars.end());
      rescored.push_back({ranked[i].var, lookahead_score(o_, pi, vars, ell, est_, rng)});
    }
    std::sort(rescored.begin(), rescored.end(), [](const ScoredVar& a, const ScoredVar& b) {
      return a.score < b.score || (a.score == b.score && a.var < b.var);
    });
    if (static_cast<int>(rescored.size()) > k) rescored.resize(k);
    return rescored;
  }

  const Oracle& o_;
  const LearnerConfig& cfg_;
  int n_;
  int depth_;
  bool exact_;
  double floor_;
  EstimationBudget est_;
  std::unordered_map<Restriction, EngineResult, RestrictionHash> memo_;
  SearchStats stats_;
};

LearnResult run_engine(const Oracle& o, const LearnerConfig& cfg) {
  cfg.validate();
  if (cfg.mode != o.mode())
    throw std::invalid_argument("learner access mode must match the oracle's");
  return SearchEngine(o, cfg).run();
}

}  // namespace

LearnResult learn_greedy(const Oracle& o, const LearnerConfig& cfg) {
  LearnerConfig c = cfg;
  c.schedule = GreedSchedule::constant(1);
  return run_engine(o, c);
}

LearnResult learn_topk(const Oracle& o, const LearnerConfig& cfg) {
  return run_engine(o, cfg);
}

LearnResult learn_adaptive(const Oracle& o, const LearnerConfig& cfg) {
  if (cfg.schedule.kind != GreedSchedule::Kind::TwoPhase)
    throw std::invalid_argument("adaptive learner needs a two-phase schedule");
  return run_engine(o, cfg);
}

namespace {

// Bottom-up pruning table for one node: err[b] = fewest mismatches any
// pruning of this subtree with at most b leaves can make inside its cell.
struct PruneInfo {
  const DecisionTree::Node* node = nullptr;
  bool majority = false;
  std::vector<std::uint64_t> err;
  std::vector<char> take_split;
  std::vector<int> lo_budget;
  std::unique_ptr<PruneInfo> lo, hi;
};

std::unique_ptr<PruneInfo> prune_dp(const DecisionTree::NodePtr& node, const TruthTable& cell,
                                    int s, std::vector<char>& fixed) {
  auto info = std::make_unique<PruneInfo>();
  info->node = node.get();
  const std::uint64_t size = cell.size();
  const std::uint64_t on = cell.ones();
  info->err.assign(s + 1, 0);
  info->take_split.assign(s + 1, 0);
  info->lo_budget.assign(s + 1, 0);
  info->majority = 2 * on > size;

  if (node->is_leaf()) {
    const std::uint64_t own = node->bit ? size - on : on;
    for (int b = 1; b <= s; ++b) info->err[b] = own;
    return info;
  }

  int rank = 0;
  for (int i = 0; i < node->var; ++i) rank += fixed[i] ? 0 : 1;
  TruthTable cell0 = cofactor(cell, rank, false);
  TruthTable cell1 = cofactor(cell, rank, true);
  fixed[node->var] = 1;
  info->lo = prune_dp(node->lo, cell0, s, fixed);
  info->hi = prune_dp(node->hi, cell1, s, fixed);
  fixed[node->var] = 0;

  const std::uint64_t collapse = std::min(on, size - on);
  info->err[1] = collapse;
  for (int b = 2; b <= s; ++b) {
    std::uint64_t best = ~0ULL;
    int best_b0 = 0;
    for (int b0 = 1; b0 < b; ++b0) {
      const std::uint64_t e = info->lo->err[b0] + info->hi->err[b - b0];
      if (e < best) {
        best = e;
        best_b0 = b0;
      }
    }
    if (best <= collapse) {
      info->err[b] = best;
      info->take_split[b] = 1;
      info->lo_budget[b] = best_b0;
    } else {
      info->err[b] = collapse;
    }
  }
  return info;
}

DecisionTree prune_rebuild(const PruneInfo& info, int b) {
  if (info.node->is_leaf()) return DecisionTree::leaf(info.node->bit);
  if (!info.take_split[b]) return DecisionTree::leaf(info.majority);
  const int b0 = info.lo_budget[b];
  return DecisionTree::internal(info.node->var, prune_rebuild(*info.lo, b0),
                                prune_rebuild(*info.hi, b - b0));
}

// Estimated flavor of the same DP; costs are probability mass instead of
// mismatch counts, with one bias estimate per node of the tree.
struct PruneInfoEst {
  const DecisionTree::Node* node = nullptr;
  bool majority = false;
  std::vector<double> err;
  std::vector<char> take_split;
  std::vector<int> lo_budget;
  std::unique_ptr<PruneInfoEst> lo, hi;
};

std::unique_ptr<PruneInfoEst> prune_dp_est(const DecisionTree::NodePtr& node,
                                           const Restriction& pi, const Oracle& o,
                                           const EstimationBudget& budget, int s, Rng& rng) {
  auto info = std::make_unique<PruneInfoEst>();
  info->node = node.get();
  const double bias = estimate_bias(o, pi, budget, rng);
  const double measure = std::ldexp(1.0, -pi.size());
  info->err.assign(s + 1, 0.0);
  info->take_split.assign(s + 1, 0);
  info->lo_budget.assign(s + 1, 0);
  info->majority = bias > 0.5;

  if (node->is_leaf()) {
    const double own = measure * (node->bit ? 1.0 - bias : bias);
    for (int b = 1; b <= s; ++b) info->err[b] = own;
    return info;
  }

  info->lo = prune_dp_est(node->lo, pi.extended(node->var, false), o, budget, s, rng);
  info->hi = prune_dp_est(node->hi, pi.extended(node->var, true), o, budget, s, rng);

  const double collapse = measure * std::min(bias, 1.0 - bias);
  info->err[1] = collapse;
  for (int b = 2; b <= s; ++b) {
    double best = std::numeric_limits<double>::infinity();
    int best_b0 = 0;
    for (int b0 = 1; b0 < b; ++b0) {
      const double e = info->lo->err[b0] + info->hi->err[b - b0];
      if (e < best) {
        best = e;
        best_b0 = b0;
      }
    }
    if (best <= collapse) {
      info->err[b] = best;
      info->take_split[b] = 1;
      info->lo_budget[b] = best_b0;
    } else {
      info->err[b] = collapse;
    }
  }
  return info;
}

DecisionTree prune_rebuild_est(const PruneInfoEst& info, int b) {
  if (info.node->is_leaf()) return DecisionTree::leaf(info.node->bit);
  if (!info.take_split[b]) return DecisionTree::leaf(info.majority);
  const int b0 = info.lo_budget[b];
  return DecisionTree::internal(info.node->var, prune_rebuild_est(*info.lo, b0),
                                prune_rebuild_est(*info.hi, b - b0));
}

}  // namespace

DecisionTree prune_to_size(const DecisionTree& t, const TruthTable& ref, int s) {
  if (s < 1) throw std::invalid_argument("leaf budget must be >= 1");
  t.validate(ref.n());
  if (t.size() <= s) return t;
  std::vector<char> fixed(ref.n(), 0);
  const auto info = prune_dp(t.root(), ref, s, fixed);
  return prune_rebuild(*info, s);
}

DecisionTree prune_to_size(const DecisionTree& t, const Oracle& o,
                           const EstimationBudget& node_budget, int s, Rng& rng) {
  if (s < 1) throw std::invalid_argument("leaf budget must be >= 1");
  t.validate(o.n());
  if (t.size() <= s) return t;
  const auto info = prune_dp_est(t.root(), Restriction{}, o, node_budget, s, rng);
  return prune_rebuild_est(*info, s);
}

bool label_leaf(const Oracle& o, const Restriction& pi, const EstimationBudget& b, Rng& rng) {
  return estimate_bias(o, pi, b, rng) > 0.5;
}

namespace {

struct DpEntry {
  std::uint64_t mismatches = 0;
  int split_var = -1;  // -1 means the cell stays a leaf
  bool label = false;
};

class RestrictionDp {
 public:
  RestrictionDp(const TruthTable& target, const LearnerConfig& cfg, int depth,
                std::int64_t cap)
      : target_(target), cfg_(cfg), n_(target.n()), depth_(depth), cap_(cap) {
    stats_.expansions_per_level.assign(std::max(1, depth_), 0);
  }

  LearnResult run() {
    const auto t_start = std::chrono::steady_clock::now();
    solve(Restriction{}, target_);

    DecisionTree tree = rebuild(Restriction{});
    stats_.pre_prune_size = tree.size();
    stats_.pre_prune_depth = tree.depth();
    if (tree.size() > cfg_.s) tree = prune_to_size(tree, target_, cfg_.s);

    stats_.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
    return {std::move(tree), std::move(stats_)};
  }

 private:
  std::uint64_t solve(const Restriction& pi, const TruthTable& cell) {
    const int t = pi.size();
    const std::uint64_t size = cell.size();
    const std::uint64_t on = cell.ones();

    DpEntry entry;
    entry.mismatches = std::min(on, size - on);
    entry.label = 2 * on > size;
    if (t < depth_ || (depth_ == 0 && t == 0)) ++stats_.subproblems_explored;

    // A pure cell is already a perfect leaf; splitting it cannot win a tie.
    if (t < depth_ && entry.mismatches > 0) {
      const std::vector<int> free = pi.free_vars(n_);
      std::vector<int> ranks(free.size());
      for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<int>(i);
      if (cfg_.dp_topk > 0) ranks = filtered_ranks(cell);

      if (!free.empty()) ++stats_.expansions_per_level[t];
      for (int rank : ranks) {
        const int v = free[rank];
        const std::uint64_t total = solve_child(pi, cell, rank, v, false) +
                                    solve_child(pi, cell, rank, v, true);
        if (total < entry.mismatches) {
          entry.mismatches = total;
          entry.split_var = v;
        }
      }
    }

    memo_.emplace(pi, entry);
    if (static_cast<std::int64_t>(memo_.size()) > cap_)
      throw ResourceLimit("restriction DP exceeded its subproblem cap");
    return entry.mismatches;
  }

  std::uint64_t solve_child(const Restriction& pi, const TruthTable& cell, int rank, int var,
                            bool value) {
    const Restriction child = pi.extended(var, value);
    if (auto it = memo_.find(child); it != memo_.end()) {
      ++stats_.memo_hits;
      return it->second.mismatches;
    }
    return solve(child, cofactor(cell, rank, value));
  }

  // Local ranks of the top dp_topk variables by influence on this cell;
  // zero-influence variables are useless splits and are dropped.
  std::vector<int> filtered_ranks(const TruthTable& cell) const {
    const InfluenceVector iv = exact_influence(cell);
    std::vector<int> ranks;
    ranks.reserve(iv.scores.size());
    for (std::size_t i = 0; i < iv.scores.size(); ++i)
      if (iv.scores[i] > 0.0) ranks.push_back(static_cast<int>(i));
    std::sort(ranks.begin(), ranks.end(), [&](int a, int b) {
      return iv.scores[a] > iv.scores[b] || (iv.scores[a] == iv.scores[b] && a < b);
    });
    if (static_cast<int>(ranks.size()) > cfg_.dp_topk) ranks.resize(cfg_.dp_topk);
    std::sort(ranks.begin(), ranks.end());
    return ranks;
  }

  DecisionTree rebuild(const Restriction& pi) const {
    const DpEntry& entry = memo_.at(pi);
    if (entry.split_var < 0) return DecisionTree::leaf(entry.label);
    return DecisionTree::internal(entry.split_var, rebuild(pi.extended(entry.split_var, false)),
                                  rebuild(pi.extended(entry.split_var, true)));
  }

  const TruthTable& target_;
  const LearnerConfig& cfg_;
  int n_;
  int depth_;
  std::int64_t cap_;
  std::unordered_map<Restriction, DpEntry, RestrictionHash> memo_;
  SearchStats stats_;
};

}  // namespace

LearnResult learn_restriction_dp(const TruthTable& target, const LearnerConfig& cfg,
                                 std::int64_t subproblem_cap) {
  cfg.validate();
  if (subproblem_cap < 1) throw std::invalid_argument("subproblem cap must be >= 1");
  if (target.n() > 16)
    throw std::invalid_argument("restriction DP handles at most 16 variables");
  const int requested = cfg.resolved_depth();
  if (requested > 6) throw std::invalid_argument("restriction DP depth cap is 6");
  const int depth = std::min(requested, target.n());

  if (cfg.dp_topk == 0) {
    // The unfiltered program touches every restriction of <= depth variables:
    // sum over t of C(n,t) * 2^t.  Refuse upfront when that cannot fit.
    double space = 0.0;
    double choose = 1.0;
    for (int t = 0; t <= depth; ++t) {
      space += choose * std::ldexp(1.0, t);
      choose = choose * (target.n() - t) / (t + 1);
    }
    if (space > static_cast<double>(subproblem_cap))
      throw ResourceLimit("restriction DP subproblem space exceeds the cap");
  }

  return RestrictionDp(target, cfg, depth, subproblem_cap).run();
}

}  // namespace treelab
