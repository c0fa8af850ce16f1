#include "treelab/decision_tree.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "treelab/errors.hpp"

namespace treelab {

DecisionTree DecisionTree::leaf(bool bit) {
  auto node = std::make_shared<Node>();
  node->bit = bit;
  return DecisionTree(std::move(node));
}

DecisionTree DecisionTree::internal(int var, const DecisionTree& when0,
                                    const DecisionTree& when1) {
  if (var < 0 || var >= Input::kMaxVars)
    throw StructuralError("internal node variable index out of range: " + std::to_string(var));
  auto node = std::make_shared<Node>();
  node->var = var;
  node->lo = when0.root();
  node->hi = when1.root();
  return DecisionTree(std::move(node));
}

DecisionTree DecisionTree::from_node(NodePtr root) {
  if (!root) throw StructuralError("null decision tree root");
  return DecisionTree(std::move(root));
}

namespace {

int count_leaves(const DecisionTree::Node* node) {
  if (node->is_leaf()) return 1;
  return count_leaves(node->lo.get()) + count_leaves(node->hi.get());
}

int max_depth(const DecisionTree::Node* node) {
  if (node->is_leaf()) return 0;
  return 1 + std::max(max_depth(node->lo.get()), max_depth(node->hi.get()));
}

void validate_walk(const DecisionTree::Node* node, int n, std::vector<bool>& on_path) {
  if (node->is_leaf()) return;
  if (node->var >= n)
    throw StructuralError("tree queries x" + std::to_string(node->var) + " but only " +
                          std::to_string(n) + " variables exist");
  if (on_path[node->var])
    throw StructuralError("tree queries x" + std::to_string(node->var) + " twice on one path");
  on_path[node->var] = true;
  validate_walk(node->lo.get(), n, on_path);
  validate_walk(node->hi.get(), n, on_path);
  on_path[node->var] = false;
}

void collect_vars(const DecisionTree::Node* node, std::vector<int>& out) {
  if (node->is_leaf()) return;
  out.push_back(node->var);
  collect_vars(node->lo.get(), out);
  collect_vars(node->hi.get(), out);
}

}  // namespace

int DecisionTree::size() const { return count_leaves(root_.get()); }

int DecisionTree::depth() const { return max_depth(root_.get()); }

bool DecisionTree::eval(const Input& x) const {
  const Node* node = root_.get();
  while (!node->is_leaf()) {
    if (node->var >= x.n())
      throw StructuralError("tree queries x" + std::to_string(node->var) +
                            " but the input has " + std::to_string(x.n()) + " variables");
    node = x.bit(node->var) ? node->hi.get() : node->lo.get();
  }
  return node->bit;
}

bool DecisionTree::eval_index(std::uint64_t x, int n) const {
  const Node* node = root_.get();
  while (!node->is_leaf()) {
    if (node->var >= n)
      throw StructuralError("tree queries x" + std::to_string(node->var) + " but only " +
                            std::to_string(n) + " variables exist");
    node = ((x >> node->var) & 1) ? node->hi.get() : node->lo.get();
  }
  return node->bit;
}

void DecisionTree::validate(int n) const {
  std::vector<bool> on_path(std::max(n, 1), false);
  validate_walk(root_.get(), n, on_path);
}

std::vector<int> DecisionTree::variables() const {
  std::vector<int> out;
  collect_vars(root_.get(), out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool DecisionTree::same_structure(const DecisionTree& other) const {
  struct Cmp {
    static bool eq(const Node* a, const Node* b) {
      if (a->is_leaf() != b->is_leaf()) return false;
      if (a->is_leaf()) return a->bit == b->bit;
      return a->var == b->var && eq(a->lo.get(), b->lo.get()) && eq(a->hi.get(), b->hi.get());
    }
  };
  return Cmp::eq(root_.get(), other.root().get());
}

namespace {

void serialize_walk(const DecisionTree::Node* node, std::string& out) {
  if (node->is_leaf()) {
    out += node->bit ? '1' : '0';
    return;
  }
  out += "(x";
  out += std::to_string(node->var);
  out += ' ';
  serialize_walk(node->lo.get(), out);
  out += ' ';
  serialize_walk(node->hi.get(), out);
  out += ')';
}

struct TreeParser {
  std::string_view text;
  std::size_t i = 0;

  void skip_ws() {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  }

  void expect(char c) {
    if (i >= text.size() || text[i] != c)
      throw ParseError(std::string("expected '") + c + "'", i);
    ++i;
  }

  DecisionTree::NodePtr parse_node() {
    if (i >= text.size()) throw ParseError("unexpected end of tree text", i);
    char c = text[i];
    if (c == '0' || c == '1') {
      ++i;
      auto node = std::make_shared<DecisionTree::Node>();
      node->bit = (c == '1');
      return node;
    }
    if (c != '(') throw ParseError("expected leaf bit or '('", i);
    ++i;
    expect('x');
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
      throw ParseError("expected variable index after 'x'", i);
    long var = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      var = var * 10 + (text[i] - '0');
      if (var >= Input::kMaxVars) throw ParseError("variable index too large", i);
      ++i;
    }
    expect(' ');
    auto lo = parse_node();
    expect(' ');
    auto hi = parse_node();
    expect(')');
    auto node = std::make_shared<DecisionTree::Node>();
    node->var = static_cast<int>(var);
    node->lo = std::move(lo);
    node->hi = std::move(hi);
    return node;
  }
};

}  // namespace

std::string serialize_tree(const DecisionTree& t) {
  std::string out;
  serialize_walk(t.root().get(), out);
  return out;
}

DecisionTree parse_tree(std::string_view text) {
  TreeParser p{text};
  p.skip_ws();
  auto root = p.parse_node();
  p.skip_ws();
  if (p.i != text.size()) throw ParseError("trailing characters after tree", p.i);
  return DecisionTree::from_node(std::move(root));
}

TruthTable tree_to_table(const DecisionTree& t, int n) {
  t.validate(n);
  TruthTable out(n);
  for (std::uint64_t x = 0; x < out.size(); ++x)
    if (t.eval_index(x, n)) out.set_bit(x, true);
  return out;
}

namespace {

const DecisionTree::Node* descend(const DecisionTree::Node* node,
                                  const std::array<signed char, Input::kMaxVars>& fixed) {
  while (!node->is_leaf() && fixed[node->var] >= 0)
    node = fixed[node->var] ? node->hi.get() : node->lo.get();
  return node;
}

double distance_walk(const DecisionTree::Node* a, const DecisionTree::Node* b,
                     std::array<signed char, Input::kMaxVars>& fixed) {
  a = descend(a, fixed);
  b = descend(b, fixed);
  if (a->is_leaf() && b->is_leaf()) return (a->bit != b->bit) ? 1.0 : 0.0;
  int v = a->is_leaf() ? b->var : a->var;
  fixed[v] = 0;
  double d0 = distance_walk(a, b, fixed);
  fixed[v] = 1;
  double d1 = distance_walk(a, b, fixed);
  fixed[v] = -1;
  return 0.5 * (d0 + d1);
}

}  // namespace

double tree_distance(const DecisionTree& a, const DecisionTree& b) {
  std::array<signed char, Input::kMaxVars> fixed;
  fixed.fill(-1);
  return distance_walk(a.root().get(), b.root().get(), fixed);
}

}  // namespace treelab
