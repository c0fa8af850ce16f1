#include "treelab/influence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treelab/errors.hpp"

namespace treelab {

EstimationBudget::EstimationBudget(double tau_, double delta_) : tau(tau_), delta(delta_) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("budget tau must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("budget delta must lie in (0,1)");
}

std::int64_t EstimationBudget::samples() const {
  return static_cast<std::int64_t>(std::ceil(std::log(2.0 / delta) / (2.0 * tau * tau)));
}

std::int64_t EstimationBudget::unanimous_cutoff() const {
  return static_cast<std::int64_t>(std::ceil(std::log(2.0 / delta) / tau));
}

namespace {

// Number of x with f(x) != f(x xor e_v), folded 64 positions at a time.
std::uint64_t influence_count(const TruthTable& f, int v) {
  const auto& w = f.words();
  std::uint64_t count = 0;
  if (v >= 6) {
    std::size_t step = std::size_t{1} << (v - 6);
    for (std::size_t j = 0; j < w.size(); ++j)
      count += std::popcount(w[j] ^ w[j ^ step]);  // both endpoints visited
  } else {
    static constexpr std::uint64_t kNeg[6] = {
        0x5555555555555555ULL, 0x3333333333333333ULL, 0x0f0f0f0f0f0f0f0fULL,
        0x00ff00ff00ff00ffULL, 0x0000ffff0000ffffULL, 0x00000000ffffffffULL,
    };
    int s = 1 << v;
    for (auto word : w) count += 2 * std::popcount((word ^ (word >> s)) & kNeg[v]);
  }
  return count;
}

int free_rank(const Restriction& pi, int var) {
  int rank = var;
  for (const auto& a : pi.assignments()) {
    if (a.var == var) throw std::invalid_argument("variable x" + std::to_string(var) +
                                                  " is fixed by the restriction");
    if (a.var < var) --rank;
  }
  return rank;
}

std::int64_t conditioned_attempts(const Restriction& pi) {
  int shift = std::min(pi.size(), 40);
  return std::int64_t{64} << shift;
}

// Runs `total` indicator samples with a unanimous-streak early exit.
template <typename Draw>
double indicator_mean(std::int64_t total, std::int64_t cutoff, Draw&& draw) {
  std::int64_t ones = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    if (draw()) ++ones;
    if (i + 1 == cutoff && (ones == 0 || ones == i + 1))
      return ones == 0 ? 0.0 : 1.0;
  }
  return static_cast<double>(ones) / static_cast<double>(total);
}

}  // namespace

InfluenceVector exact_influence(const TruthTable& f) {
  InfluenceVector out;
  out.provenance = Provenance::Exact;
  out.vars.resize(f.n());
  std::iota(out.vars.begin(), out.vars.end(), 0);
  out.scores.resize(f.n());
  double scale = 1.0 / static_cast<double>(f.size());
  for (int v = 0; v < f.n(); ++v)
    out.scores[v] = static_cast<double>(influence_count(f, v)) * scale;
  return out;
}

double exact_restricted_influence(const TruthTable& f, const Restriction& pi, int var) {
  int rank = free_rank(pi, var);
  TruthTable sub = restrict_table(f, pi);
  return static_cast<double>(influence_count(sub, rank)) / static_cast<double>(sub.size());
}

double exact_restricted_bias(const TruthTable& f, const Restriction& pi) {
  TruthTable sub = restrict_table(f, pi);
  return static_cast<double>(sub.ones()) / static_cast<double>(sub.size());
}

double estimate_influence(const Oracle& o, const Restriction& pi, int var,
                          const EstimationBudget& b, Rng& rng) {
  if (o.mode() == AccessMode::ExOnly)
    throw AccessViolation(
        "influence estimation needs membership queries; "
        "use estimate_influence_monotone with conditioned examples");
  if (pi.fixes(var))
    throw std::invalid_argument("variable x" + std::to_string(var) +
                                " is fixed by the restriction");
  return indicator_mean(b.samples(), b.unanimous_cutoff(), [&] {
    Input x = Input::random(o.n(), rng);
    pi.apply(x);
    bool y0 = o.mq(x);
    x.flip_bit(var);
    return y0 != o.mq(x);
  });
}

double estimate_influence_monotone(const Oracle& o, const Restriction& pi, int var,
                                   const EstimationBudget& b, Rng& rng) {
  if (pi.fixes(var))
    throw std::invalid_argument("variable x" + std::to_string(var) +
                                " is fixed by the restriction");
  (void)rng;  // draws come from the oracle's example stream
  std::int64_t attempts = conditioned_attempts(pi);
  // agreement = Pr[f(x) = x_var]; the correlation is 2*agreement - 1.
  double agreement = indicator_mean(b.samples(), b.unanimous_cutoff(), [&] {
    auto [x, label] = o.ex_conditioned(pi, attempts);
    return label == x.bit(var);
  });
  return std::clamp(2.0 * agreement - 1.0, 0.0, 1.0);
}

InfluenceVector influence_profile(const Oracle& o, const Restriction& pi,
                                  const EstimationBudget& b, Rng& rng) {
  InfluenceVector out;
  out.vars = pi.free_vars(o.n());
  out.scores.reserve(out.vars.size());
  if (const TruthTable* table = o.exact_table()) {
    out.provenance = Provenance::Exact;
    TruthTable sub = restrict_table(*table, pi);
    double scale = 1.0 / static_cast<double>(sub.size());
    for (std::size_t r = 0; r < out.vars.size(); ++r)
      out.scores.push_back(static_cast<double>(influence_count(sub, static_cast<int>(r))) *
                           scale);
    return out;
  }
  out.provenance = Provenance::Estimated;
  out.tau = b.tau;
  out.delta = b.delta;
  bool mq_mode = o.mode() == AccessMode::MqEx;
  for (int v : out.vars)
    out.scores.push_back(mq_mode ? estimate_influence(o, pi, v, b, rng)
                                 : estimate_influence_monotone(o, pi, v, b, rng));
  return out;
}

std::vector<int> top_k_influential(const Oracle& o, const Restriction& pi, int k,
                                   const EstimationBudget& b, Rng& rng) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  InfluenceVector profile = influence_profile(o, pi, b, rng);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < profile.vars.size(); ++i)
    if (profile.scores[i] > b.tau) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    if (profile.scores[a] != profile.scores[c]) return profile.scores[a] > profile.scores[c];
    return profile.vars[a] < profile.vars[c];
  });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  std::vector<int> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(profile.vars[i]);
  return out;
}

double estimate_bias(const Oracle& o, const Restriction& pi, const EstimationBudget& b,
                     Rng& rng) {
  if (const TruthTable* table = o.exact_table()) return exact_restricted_bias(*table, pi);
  if (o.mode() == AccessMode::MqEx) {
    return indicator_mean(b.samples(), b.unanimous_cutoff(), [&] {
      Input x = Input::random(o.n(), rng);
      pi.apply(x);
      return o.mq(x);
    });
  }
  std::int64_t attempts = conditioned_attempts(pi);
  return indicator_mean(b.samples(), b.unanimous_cutoff(),
                        [&] { return o.ex_conditioned(pi, attempts).second; });
}

double lookahead_score(const Oracle& o, const Restriction& pi, std::span<const int> vars,
                       int ell, const EstimationBudget& b, Rng& rng) {
  if (ell < 0 || ell > 4)
    throw std::invalid_argument("lookahead depth must lie in [0, 4], got " +
                                std::to_string(ell));
  if (static_cast<int>(vars.size()) > ell)
    throw std::invalid_argument("lookahead over " + std::to_string(vars.size()) +
                                " variables exceeds depth " + std::to_string(ell));
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (pi.fixes(vars[i]))
      throw std::invalid_argument("lookahead variable x" + std::to_string(vars[i]) +
                                  " is fixed by the restriction");
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      if (vars[i] == vars[j])
        throw std::invalid_argument("duplicate lookahead variable x" +
                                    std::to_string(vars[i]));
  }
  std::uint64_t cells = 1ULL << vars.size();
  double total = 0.0;
  for (std::uint64_t cell = 0; cell < cells; ++cell) {
    Restriction extended = pi;
    for (std::size_t i = 0; i < vars.size(); ++i)
      extended = extended.extended(vars[i], (cell >> i) & 1);
    double bias = estimate_bias(o, extended, b, rng);
    total += std::min(bias, 1.0 - bias);
  }
  return total / static_cast<double>(cells);
}

}  // namespace treelab
