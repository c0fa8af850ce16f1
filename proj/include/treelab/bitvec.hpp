#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "treelab/errors.hpp"
#include "treelab/rng.hpp"

namespace treelab {

// One point of the Boolean cube {0,1}^n.  Variable i is bit i; inputs up to
// 256 variables fit inline so sampling never allocates.
class Input {
 public:
  static constexpr int kMaxVars = 256;

  explicit Input(int n) : n_(static_cast<std::int16_t>(n)) {
    if (n < 0 || n > kMaxVars)
      throw StructuralError("input dimension must be in [0, 256], got " + std::to_string(n));
  }

  // Interprets the low n bits of index as the point (n <= 64).
  static Input from_index(int n, std::uint64_t index) {
    Input x(n);
    if (n > 64) throw StructuralError("from_index supports at most 64 variables");
    x.w_[0] = (n == 64) ? index : (index & ((n == 0) ? 0ULL : ((1ULL << n) - 1)));
    return x;
  }

  static Input random(int n, Rng& rng) {
    Input x(n);
    for (int i = 0; i * 64 < n; ++i) x.w_[i] = rng();
    x.mask_top();
    return x;
  }

  int n() const { return n_; }

  bool bit(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

  void set_bit(int i, bool v) {
    std::uint64_t m = 1ULL << (i & 63);
    if (v)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }

  void flip_bit(int i) { w_[i >> 6] ^= 1ULL << (i & 63); }

  // Table index for n <= 64 dimensions.
  std::uint64_t index() const { return w_[0]; }

  std::uint64_t hash() const {
    std::uint64_t h = 0x2545f4914f6cdd1dULL ^ static_cast<std::uint64_t>(n_);
    for (int i = 0; i * 64 < n_; ++i) h = mix64(h, w_[i]);
    return h;
  }

  bool operator==(const Input& other) const = default;

 private:
  void mask_top() {
    int rem = n_ & 63;
    if (rem != 0) w_[n_ >> 6] &= (1ULL << rem) - 1;
    for (int i = (n_ + 63) / 64; i < 4; ++i) w_[i] = 0;
  }

  std::array<std::uint64_t, 4> w_{};
  std::int16_t n_;
};

}  // namespace treelab
