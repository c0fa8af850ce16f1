#include "treelab/restriction.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "treelab/errors.hpp"

namespace treelab {

Restriction::Restriction(std::vector<Assignment> assignments) : fixed_(std::move(assignments)) {
  std::sort(fixed_.begin(), fixed_.end(),
            [](const Assignment& a, const Assignment& b) { return a.var < b.var; });
  for (std::size_t i = 0; i < fixed_.size(); ++i) {
    if (fixed_[i].var < 0)
      throw std::invalid_argument("restriction fixes a negative variable index");
    if (i > 0 && fixed_[i].var == fixed_[i - 1].var)
      throw std::invalid_argument("restriction fixes x" + std::to_string(fixed_[i].var) +
                                  " twice");
  }
}

Restriction Restriction::parse(std::string_view text) {
  std::vector<Assignment> out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip_ws();
  while (i < text.size()) {
    if (text[i] != 'x') throw ParseError("expected 'x<index>=<bit>'", i);
    ++i;
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
      throw ParseError("expected variable index after 'x'", i);
    long var = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      var = var * 10 + (text[i] - '0');
      if (var > Input::kMaxVars) throw ParseError("variable index too large", i);
      ++i;
    }
    skip_ws();
    if (i >= text.size() || text[i] != '=') throw ParseError("expected '='", i);
    ++i;
    skip_ws();
    if (i >= text.size() || (text[i] != '0' && text[i] != '1'))
      throw ParseError("expected bit value 0 or 1", i);
    out.push_back({static_cast<int>(var), text[i] == '1'});
    ++i;
    skip_ws();
    if (i < text.size()) {
      if (text[i] != ',') throw ParseError("expected ',' between assignments", i);
      ++i;
      skip_ws();
      if (i >= text.size()) throw ParseError("trailing ',' in restriction", i);
    }
  }
  try {
    return Restriction(std::move(out));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), text.size());
  }
}

bool Restriction::fixes(int var) const {
  auto it = std::lower_bound(fixed_.begin(), fixed_.end(), var,
                             [](const Assignment& a, int v) { return a.var < v; });
  return it != fixed_.end() && it->var == var;
}

bool Restriction::value_of(int var) const {
  auto it = std::lower_bound(fixed_.begin(), fixed_.end(), var,
                             [](const Assignment& a, int v) { return a.var < v; });
  if (it == fixed_.end() || it->var != var)
    throw std::invalid_argument("restriction does not fix x" + std::to_string(var));
  return it->value;
}

Restriction Restriction::extended(int var, bool value) const {
  Restriction out;
  out.fixed_.reserve(fixed_.size() + 1);
  auto it = fixed_.begin();
  while (it != fixed_.end() && it->var < var) out.fixed_.push_back(*it++);
  if (it != fixed_.end() && it->var == var)
    throw std::invalid_argument("restriction already fixes x" + std::to_string(var));
  out.fixed_.push_back({var, value});
  while (it != fixed_.end()) out.fixed_.push_back(*it++);
  return out;
}

std::vector<int> Restriction::free_vars(int n) const {
  std::vector<int> out;
  out.reserve(n - size());
  std::size_t j = 0;
  for (int v = 0; v < n; ++v) {
    if (j < fixed_.size() && fixed_[j].var == v) {
      ++j;
      continue;
    }
    out.push_back(v);
  }
  return out;
}

std::uint64_t Restriction::embed(std::uint64_t free_bits, int n) const {
  std::uint64_t x = 0;
  std::size_t j = 0;
  int out_pos = 0;
  for (int v = 0; v < n; ++v) {
    if (j < fixed_.size() && fixed_[j].var == v) {
      if (fixed_[j].value) x |= 1ULL << v;
      ++j;
    } else {
      if ((free_bits >> out_pos) & 1) x |= 1ULL << v;
      ++out_pos;
    }
  }
  return x;
}

void Restriction::apply(Input& x) const {
  for (const auto& a : fixed_) x.set_bit(a.var, a.value);
}

bool Restriction::consistent(const Input& x) const {
  for (const auto& a : fixed_)
    if (x.bit(a.var) != a.value) return false;
  return true;
}

std::string Restriction::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < fixed_.size(); ++i) {
    if (i) out += ',';
    out += 'x';
    out += std::to_string(fixed_[i].var);
    out += '=';
    out += fixed_[i].value ? '1' : '0';
  }
  return out;
}

std::uint64_t Restriction::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& a : fixed_) {
    h = mix64(h, static_cast<std::uint64_t>(a.var) * 2 + (a.value ? 1 : 0));
  }
  return h;
}

}  // namespace treelab
