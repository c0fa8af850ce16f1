#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "treelab/bitvec.hpp"

namespace treelab {

struct Assignment {
  int var;
  bool value;
  bool operator==(const Assignment&) const = default;
};

// A partial assignment ("subcube").  Stored sorted by variable index, so two
// restrictions fixing the same variables to the same values compare equal and
// hash equally regardless of the order they were built in.
class Restriction {
 public:
  Restriction() = default;

  // Canonicalizes; throws std::invalid_argument on a duplicated variable or a
  // negative index.
  explicit Restriction(std::vector<Assignment> assignments);

  // Parses "x3=1,x7=0" (whitespace around tokens tolerated; empty string is
  // the empty restriction).  Throws ParseError with the failing offset.
  static Restriction parse(std::string_view text);

  int size() const { return static_cast<int>(fixed_.size()); }
  bool empty() const { return fixed_.empty(); }
  const std::vector<Assignment>& assignments() const { return fixed_; }

  bool fixes(int var) const;
  // Value assigned to var; var must be fixed.
  bool value_of(int var) const;

  // Copy of this restriction with one more variable fixed.
  Restriction extended(int var, bool value) const;

  // Variables in [0, n) not fixed here, ascending.
  std::vector<int> free_vars(int n) const;

  // Scatters an index over the free variables (bit j of free_bits goes to the
  // j-th free variable) and fills fixed positions; yields a full point of
  // {0,1}^n as a table index.  Requires n <= 64.
  std::uint64_t embed(std::uint64_t free_bits, int n) const;

  // Overwrites the fixed coordinates of x in place.
  void apply(Input& x) const;

  bool consistent(const Input& x) const;

  int max_var() const { return fixed_.empty() ? -1 : fixed_.back().var; }

  // "x3=1,x7=0"; empty restriction renders as "".
  std::string to_string() const;

  std::uint64_t hash() const;

  bool operator==(const Restriction&) const = default;

 private:
  std::vector<Assignment> fixed_;
};

struct RestrictionHash {
  std::size_t operator()(const Restriction& r) const { return r.hash(); }
};

}  // namespace treelab
