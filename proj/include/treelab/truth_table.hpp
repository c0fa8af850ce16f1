#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treelab/bitvec.hpp"
#include "treelab/restriction.hpp"
#include "treelab/rng.hpp"

namespace treelab {

// Exact truth table of a Boolean function on up to 24 variables, packed one
// bit per input.  Bit x of the table is f(x) where variable i is bit i of the
// index x (variable 0 is the least significant bit).  Unused high bits of the
// last word are kept zero.
class TruthTable {
 public:
  static constexpr int kMaxVars = 24;

  // All-zero function.
  explicit TruthTable(int n);

  // From packed words (least significant bit of words[0] is f(0)).
  TruthTable(int n, std::vector<std::uint64_t> words);

  static TruthTable random(int n, Rng& rng);

  template <typename F>
  static TruthTable from_function(int n, F&& f) {
    TruthTable t(n);
    for (std::uint64_t x = 0; x < t.size(); ++x)
      if (f(x)) t.set_bit(x, true);
    return t;
  }

  int n() const { return n_; }
  std::uint64_t size() const { return 1ULL << n_; }

  bool bit(std::uint64_t x) const { return (words_[x >> 6] >> (x & 63)) & 1; }
  void set_bit(std::uint64_t x, bool v);

  bool eval(const Input& x) const;

  std::uint64_t ones() const;
  double bias() const { return static_cast<double>(ones()) / static_cast<double>(size()); }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const TruthTable&) const = default;

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

// Number of inputs where f and g disagree; dimensions must match.
std::uint64_t hamming(const TruthTable& f, const TruthTable& g);

// Pr_x[f(x) != g(x)] under the uniform distribution.
double distance(const TruthTable& f, const TruthTable& g);

// Table of f with the variables of pi fixed.  The surviving variables are
// renumbered 0..n-|pi|-1 in increasing order of their original index.
// Throws std::invalid_argument if pi touches a variable outside [0, n).
TruthTable restrict_table(const TruthTable& f, const Restriction& pi);

// Single-variable restriction, word-level.  Equivalent to
// restrict_table(f, {var=value}) but cheap enough to call inside search loops.
TruthTable cofactor(const TruthTable& f, int var, bool value);

// True when flipping any variable from 0 to 1 never flips f from 1 to 0.
bool is_monotone(const TruthTable& f);

// Two-line text form: "n=<int>" then "hex=<2^n bits as lowercase hex>", where
// the last hex digit holds f(0)..f(3) (index 0 is the least significant bit
// of the whole hex number).  Always ceil(2^n / 4) digits, zero padded.
std::string to_table_text(const TruthTable& f);
TruthTable parse_table_text(std::string_view text);

}  // namespace treelab
