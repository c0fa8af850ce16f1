#include "treelab/truth_table.hpp"

#include <bit>
#include <cctype>
#include <stdexcept>

#include "treelab/errors.hpp"

namespace treelab {

namespace {

std::size_t word_count(int n) { return (n >= 6) ? (std::size_t{1} << (n - 6)) : 1; }

std::uint64_t length_mask(int n) {
  if (n >= 6) return ~0ULL;
  return (1ULL << (1 << n)) - 1;
}

// Keeps the groups of `group` bits whose group index has the given parity,
// packing them toward the low end.  Group size must be at most 32.
std::uint64_t compact_groups(std::uint64_t w, int group, int parity) {
  std::uint64_t gmask = (1ULL << group) - 1;
  std::uint64_t out = 0;
  int out_pos = 0;
  for (int pos = parity * group; pos < 64; pos += 2 * group, out_pos += group)
    out |= ((w >> pos) & gmask) << out_pos;
  return out;
}

}  // namespace

TruthTable::TruthTable(int n) : n_(n) {
  if (n < 0 || n > kMaxVars)
    throw std::invalid_argument("truth table dimension must be in [0, 24], got " +
                                std::to_string(n));
  words_.assign(word_count(n), 0);
}

TruthTable::TruthTable(int n, std::vector<std::uint64_t> words) : TruthTable(n) {
  if (words.size() != words_.size())
    throw std::invalid_argument("truth table word count mismatch");
  words_ = std::move(words);
  words_.back() &= length_mask(n_);
}

TruthTable TruthTable::random(int n, Rng& rng) {
  TruthTable t(n);
  for (auto& w : t.words_) w = rng();
  t.words_.back() &= length_mask(n);
  return t;
}

void TruthTable::set_bit(std::uint64_t x, bool v) {
  std::uint64_t m = 1ULL << (x & 63);
  if (v)
    words_[x >> 6] |= m;
  else
    words_[x >> 6] &= ~m;
}

bool TruthTable::eval(const Input& x) const {
  if (x.n() != n_)
    throw StructuralError("input has " + std::to_string(x.n()) + " variables, table has " +
                          std::to_string(n_));
  return bit(x.index());
}

std::uint64_t TruthTable::ones() const {
  std::uint64_t total = 0;
  for (auto w : words_) total += std::popcount(w);
  return total;
}

std::uint64_t hamming(const TruthTable& f, const TruthTable& g) {
  if (f.n() != g.n()) throw std::invalid_argument("dimension mismatch in hamming");
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < f.words().size(); ++i)
    total += std::popcount(f.words()[i] ^ g.words()[i]);
  return total;
}

double distance(const TruthTable& f, const TruthTable& g) {
  return static_cast<double>(hamming(f, g)) / static_cast<double>(f.size());
}

TruthTable cofactor(const TruthTable& f, int var, bool value) {
  int n = f.n();
  if (var < 0 || var >= n) throw std::invalid_argument("cofactor variable out of range");
  const auto& in = f.words();
  std::vector<std::uint64_t> ow(word_count(n - 1), 0);
  if (var >= 6) {
    std::size_t o = 0;
    for (std::size_t j = 0; j < in.size(); ++j)
      if ((((j >> (var - 6)) & 1) != 0) == value) ow[o++] = in[j];
  } else if (n >= 7) {
    int g = 1 << var;
    for (std::size_t i = 0; i * 2 < in.size(); ++i) {
      std::uint64_t lo = compact_groups(in[2 * i], g, value ? 1 : 0);
      std::uint64_t hi = compact_groups(in[2 * i + 1], g, value ? 1 : 0);
      ow[i] = lo | (hi << 32);
    }
  } else {
    ow[0] = compact_groups(in[0], 1 << var, value ? 1 : 0) & length_mask(n - 1);
  }
  return TruthTable(n - 1, std::move(ow));
}

TruthTable restrict_table(const TruthTable& f, const Restriction& pi) {
  if (pi.max_var() >= f.n())
    throw std::invalid_argument("restriction fixes x" + std::to_string(pi.max_var()) +
                                " outside a " + std::to_string(f.n()) + "-variable table");
  TruthTable out = f;
  const auto& fixed = pi.assignments();
  // Fixing from the highest variable down leaves lower coordinates untouched.
  for (auto it = fixed.rbegin(); it != fixed.rend(); ++it)
    out = cofactor(out, it->var, it->value);
  return out;
}

bool is_monotone(const TruthTable& f) {
  int n = f.n();
  const auto& w = f.words();
  for (int v = 0; v < n; ++v) {
    if (v >= 6) {
      std::size_t step = std::size_t{1} << (v - 6);
      for (std::size_t j = 0; j < w.size(); ++j) {
        if ((j >> (v - 6)) & 1) continue;
        if (w[j] & ~w[j + step]) return false;  // f=1 at x_v=0 but f=0 at x_v=1
      }
    } else {
      int s = 1 << v;
      std::uint64_t neg = ~0ULL;
      switch (v) {
        case 0: neg = 0x5555555555555555ULL; break;
        case 1: neg = 0x3333333333333333ULL; break;
        case 2: neg = 0x0f0f0f0f0f0f0f0fULL; break;
        case 3: neg = 0x00ff00ff00ff00ffULL; break;
        case 4: neg = 0x0000ffff0000ffffULL; break;
        case 5: neg = 0x00000000ffffffffULL; break;
      }
      for (std::size_t j = 0; j < w.size(); ++j)
        if (w[j] & ~(w[j] >> s) & neg) return false;
    }
  }
  return true;
}

std::string to_table_text(const TruthTable& f) {
  if (f.n() < 1) throw std::invalid_argument("cannot serialize a 0-variable table");
  std::uint64_t digits = (f.size() + 3) / 4;
  std::string hex(digits, '0');
  static const char* kHex = "0123456789abcdef";
  for (std::uint64_t d = 0; d < digits; ++d) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      std::uint64_t x = d * 4 + b;
      if (x < f.size() && f.bit(x)) v |= 1 << b;
    }
    hex[digits - 1 - d] = kHex[v];  // digit 0 is the last character
  }
  return "n=" + std::to_string(f.n()) + "\nhex=" + hex + "\n";
}

TruthTable parse_table_text(std::string_view text) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  if (text.substr(i, 2) != "n=") throw ParseError("expected 'n='", i);
  i += 2;
  long n = 0;
  std::size_t digits_start = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    n = n * 10 + (text[i] - '0');
    if (n > TruthTable::kMaxVars) throw ParseError("dimension exceeds 24", i);
    ++i;
  }
  if (i == digits_start) throw ParseError("expected integer after 'n='", i);
  if (n < 1) throw ParseError("dimension must be at least 1", digits_start);
  skip_ws();
  if (text.substr(i, 4) != "hex=") throw ParseError("expected 'hex='", i);
  i += 4;
  std::uint64_t size = 1ULL << n;
  std::uint64_t digits = (size + 3) / 4;
  if (text.size() - i < digits) throw ParseError("hex payload too short", text.size());
  TruthTable out(static_cast<int>(n));
  for (std::uint64_t d = 0; d < digits; ++d, ++i) {
    char c = text[i];
    int v;
    if (c >= '0' && c <= '9')
      v = c - '0';
    else if (c >= 'a' && c <= 'f')
      v = c - 'a' + 10;
    else
      throw ParseError("invalid hex digit", i);
    std::uint64_t base = (digits - 1 - d) * 4;
    for (int b = 0; b < 4; ++b)
      if ((v >> b) & 1) {
        if (base + b >= size) throw ParseError("hex payload sets bits beyond 2^n", i);
        out.set_bit(base + b, true);
      }
  }
  skip_ws();
  if (i != text.size()) throw ParseError("trailing characters after hex payload", i);
  return out;
}

}  // namespace treelab
