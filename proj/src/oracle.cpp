#include "treelab/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "treelab/errors.hpp"

namespace treelab {

namespace {

void check_config(const OracleConfig& cfg, int n) {
  if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate < 0.5))
    throw std::invalid_argument("noise rate must lie in [0, 0.5)");
  if (cfg.exact && n > TruthTable::kMaxVars)
    throw std::invalid_argument("exact oracle mode needs a table; dimension " +
                                std::to_string(n) + " exceeds 24");
}

}  // namespace

Oracle::Oracle(TruthTable target, OracleConfig cfg)
    : n_(target.n()), cfg_(cfg), clean_table_(std::move(target)), ex_rng_(make_rng(cfg.seed, 1)) {
  check_config(cfg_, n_);
  init();
}

Oracle::Oracle(DecisionTree target, int n, OracleConfig cfg)
    : n_(n), cfg_(cfg), tree_(std::move(target)), ex_rng_(make_rng(cfg.seed, 1)) {
  if (n < 1 || n > Input::kMaxVars)
    throw std::invalid_argument("oracle dimension must lie in [1, 256]");
  tree_->validate(n);
  check_config(cfg_, n_);
  init();
}

void Oracle::init() {
  if (cfg_.noise_rate > 0.0) {
    if (n_ <= TruthTable::kMaxVars) {
      // Draw exactly round(eta * 2^n) distinct points with Floyd's algorithm.
      std::uint64_t domain = 1ULL << n_;
      std::uint64_t count =
          static_cast<std::uint64_t>(std::llround(cfg_.noise_rate * static_cast<double>(domain)));
      Rng rng = make_rng(cfg_.seed, 2);
      std::unordered_set<std::uint64_t> chosen;
      chosen.reserve(count * 2);
      for (std::uint64_t i = domain - count; i < domain; ++i) {
        std::uint64_t j = rand_below(rng, i + 1);
        if (!chosen.insert(j).second) chosen.insert(i);
      }
      TruthTable flips(n_);
      for (std::uint64_t x : chosen) flips.set_bit(x, true);
      flip_set_ = std::move(flips);
    } else {
      hash_threshold_ = static_cast<std::uint64_t>(
          cfg_.noise_rate * 18446744073709551616.0 /* 2^64 */);
    }
  }
  // Exact mode always answers from the table.  Small dimensions are also
  // materialized up front so membership queries cost one bit lookup.
  if (cfg_.exact || n_ <= 20) materialized_table();
}

bool Oracle::clean_label(const Input& x) const {
  return clean_table_ ? clean_table_->eval(x) : tree_->eval(x);
}

bool Oracle::flipped(const Input& x) const {
  if (cfg_.noise_rate <= 0.0) return false;
  if (flip_set_) return flip_set_->bit(x.index());
  return mix64(cfg_.seed, x.hash()) < hash_threshold_;
}

bool Oracle::eval_label(const Input& x) const {
  if (x.n() != n_)
    throw StructuralError("oracle expects " + std::to_string(n_) + "-variable inputs, got " +
                          std::to_string(x.n()));
  if (const TruthTable* t = effective_ptr_.load(std::memory_order_acquire))
    return t->bit(x.index());
  return clean_label(x) ^ flipped(x);
}

bool Oracle::mq(const Input& x) const {
  if (cfg_.mode == AccessMode::ExOnly)
    throw AccessViolation("membership query against an examples-only oracle");
  bool label = eval_label(x);
  mq_count_.fetch_add(1, std::memory_order_relaxed);
  return label;
}

std::pair<Input, bool> Oracle::ex() const {
  Input x(n_);
  {
    std::lock_guard<std::mutex> lock(ex_mutex_);
    x = Input::random(n_, ex_rng_);
  }
  ex_count_.fetch_add(1, std::memory_order_relaxed);
  return {x, eval_label(x)};
}

std::pair<Input, bool> Oracle::ex_conditioned(const Restriction& pi,
                                              std::int64_t max_attempts) const {
  if (pi.max_var() >= n_)
    throw std::invalid_argument("restriction fixes x" + std::to_string(pi.max_var()) +
                                " outside the oracle's " + std::to_string(n_) + " variables");
  for (std::int64_t attempt = 0; attempt < max_attempts; ++attempt) {
    auto [x, label] = ex();
    if (pi.consistent(x)) return {x, label};
  }
  throw SamplingExhausted("no example consistent with {" + pi.to_string() + "} in " +
                          std::to_string(max_attempts) + " attempts");
}

std::pair<std::uint64_t, std::uint64_t> Oracle::counts() const {
  return {mq_count_.load(std::memory_order_relaxed), ex_count_.load(std::memory_order_relaxed)};
}

const TruthTable* Oracle::exact_table() const {
  if (!cfg_.exact) return nullptr;
  return &materialized_table();
}

const TruthTable& Oracle::materialized_table() const {
  if (!can_materialize())
    throw std::invalid_argument("cannot materialize a table over " + std::to_string(n_) +
                                " variables");
  std::call_once(materialize_once_, [this] {
    TruthTable t = clean_table_ ? *clean_table_ : tree_to_table(*tree_, n_);
    if (flip_set_) {
      std::vector<std::uint64_t> words = t.words();
      for (std::size_t i = 0; i < words.size(); ++i) words[i] ^= flip_set_->words()[i];
      t = TruthTable(n_, std::move(words));
    }
    effective_table_ = std::move(t);
    effective_ptr_.store(&*effective_table_, std::memory_order_release);
  });
  return *effective_table_;
}

}  // namespace treelab
