#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "treelab/bitvec.hpp"
#include "treelab/decision_tree.hpp"
#include "treelab/restriction.hpp"
#include "treelab/truth_table.hpp"

namespace treelab {

enum class AccessMode { MqEx, ExOnly };

struct OracleConfig {
  AccessMode mode = AccessMode::MqEx;
  // Fraction of inputs whose label is flipped; must lie in [0, 0.5).
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  // When set, estimators answer influence and bias queries from the
  // materialized (noise-included) table instead of sampling.  Requires the
  // ambient dimension to fit a truth table.
  bool exact = false;
};

// Query access to a fixed target function.  Thread safe: counters are atomic
// and the example stream is lock protected, so concurrent workers may share
// one oracle.  The same input always receives the same label; with a nonzero
// noise rate the flipped set is a pure function of (target, noise_rate, seed).
//
// For dimensions up to 24 the corruption is an exactly |round(eta * 2^n)|
// sized set drawn without replacement from the seed.  Past that, each input
// flips independently when a seeded hash of the point falls below eta, which
// matches the rate in expectation only.
class Oracle {
 public:
  Oracle(TruthTable target, OracleConfig cfg = {});
  Oracle(DecisionTree target, int n, OracleConfig cfg = {});

  int n() const { return n_; }
  AccessMode mode() const { return cfg_.mode; }
  double noise_rate() const { return cfg_.noise_rate; }
  std::uint64_t seed() const { return cfg_.seed; }
  bool exact_mode() const { return cfg_.exact; }

  // Membership query.  Counted; throws AccessViolation on an examples-only
  // oracle.
  bool mq(const Input& x) const;

  // One labeled example with x uniform over the cube.  Counted.
  std::pair<Input, bool> ex() const;

  // Rejection-samples ex() until the draw lands inside pi's subcube.  Every
  // attempt is a counted example draw; callers should budget at least
  // 64 * 2^|pi| attempts.  Throws SamplingExhausted past max_attempts.
  std::pair<Input, bool> ex_conditioned(const Restriction& pi, std::int64_t max_attempts) const;

  // (membership queries answered, examples served) so far.
  std::pair<std::uint64_t, std::uint64_t> counts() const;

  // Label of x through the same noise process as mq, but uncounted and exempt
  // from the access mode.  Exists so error measurement never perturbs query
  // accounting; learners must not call it.
  bool eval_label(const Input& x) const;

  // Noise-included table of the target when exact_mode() is on, else null.
  const TruthTable* exact_table() const;

  bool can_materialize() const { return n_ <= TruthTable::kMaxVars; }

  // Noise-included table of the target; materialized on first use and cached.
  // Throws std::invalid_argument when the dimension exceeds 24.
  const TruthTable& materialized_table() const;

 private:
  void init();
  bool clean_label(const Input& x) const;
  bool flipped(const Input& x) const;

  int n_;
  OracleConfig cfg_;
  std::optional<TruthTable> clean_table_;
  std::optional<DecisionTree> tree_;
  std::optional<TruthTable> flip_set_;  // n <= 24 with noise: membership bitmap
  std::uint64_t hash_threshold_ = 0;    // large n: flip when hash(x) < threshold

  mutable std::once_flag materialize_once_;
  mutable std::optional<TruthTable> effective_table_;
  mutable std::atomic<const TruthTable*> effective_ptr_{nullptr};

  mutable std::mutex ex_mutex_;
  mutable Rng ex_rng_;
  mutable std::atomic<std::uint64_t> mq_count_{0};
  mutable std::atomic<std::uint64_t> ex_count_{0};
};

}  // namespace treelab
