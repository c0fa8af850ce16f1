#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treelab/oracle.hpp"
#include "treelab/restriction.hpp"
#include "treelab/rng.hpp"
#include "treelab/truth_table.hpp"

namespace treelab {

// Two-sided Hoeffding sampling plan: samples() draws of a [0,1] quantity put
// the empirical mean within tau of the truth except with probability delta.
struct EstimationBudget {
  double tau;
  double delta;

  EstimationBudget(double tau, double delta);

  std::int64_t samples() const;

  // If this many initial samples agree unanimously, the run may stop early:
  // a mean farther than tau from the unanimous value would have broken the
  // streak except with probability below delta.
  std::int64_t unanimous_cutoff() const;
};

enum class Provenance { Exact, Estimated };

// Influence scores for the free variables of a restricted function, in
// original variable numbering.
struct InfluenceVector {
  std::vector<int> vars;       // ascending original indices
  std::vector<double> scores;  // aligned with vars, each in [0,1]
  Provenance provenance = Provenance::Exact;
  double tau = 0.0;
  double delta = 0.0;
};

// Pr_x[f(x) != f(x xor e_i)] for every variable of f, computed by word-level
// table folding.
InfluenceVector exact_influence(const TruthTable& f);

// Influence of original variable `var` within the subcube pi fixes.
double exact_restricted_influence(const TruthTable& f, const Restriction& pi, int var);

// Pr[f = 1] within the subcube.
double exact_restricted_bias(const TruthTable& f, const Restriction& pi);

// Mean of samples() indicators f(x) != f(x xor e_var) with x uniform on pi's
// subcube, via membership queries.  Throws AccessViolation on an
// examples-only oracle (use the monotone estimator there).
double estimate_influence(const Oracle& o, const Restriction& pi, int var,
                          const EstimationBudget& b, Rng& rng);

// Degree-1 correlation estimate from conditioned examples: the mean of
// (2f(x)-1)(2x_var-1), clamped to [0,1].  Equals the influence when the
// target is monotone.  The +/-1 samples double the additive error, so the
// result lands within 2*tau of the truth at confidence 1-delta.
double estimate_influence_monotone(const Oracle& o, const Restriction& pi, int var,
                                   const EstimationBudget& b, Rng& rng);

// Scores for every free variable.  Dispatches on the oracle: exact tables
// are folded directly; otherwise membership queries drive the standard
// estimator and examples-only oracles fall back to the monotone one.
InfluenceVector influence_profile(const Oracle& o, const Restriction& pi,
                                  const EstimationBudget& b, Rng& rng);

// At most k free variables with the highest scores, strongest first.
// Variables scoring at or below b.tau are dropped entirely; score ties break
// toward the smaller variable index.
std::vector<int> top_k_influential(const Oracle& o, const Restriction& pi, int k,
                                   const EstimationBudget& b, Rng& rng);

// Pr[f = 1] on pi's subcube: exact from tables, else sampled through mq or
// conditioned examples depending on the oracle's mode.
double estimate_bias(const Oracle& o, const Restriction& pi, const EstimationBudget& b,
                     Rng& rng);

// Minimum error achievable on pi's subcube by a depth-ell tree that may only
// query `vars`: every cell of the vars-cube is labeled with its majority
// bias and the per-cell errors are averaged.  Requires |vars| <= ell <= 4.
double lookahead_score(const Oracle& o, const Restriction& pi, std::span<const int> vars,
                       int ell, const EstimationBudget& b, Rng& rng);

}  // namespace treelab
