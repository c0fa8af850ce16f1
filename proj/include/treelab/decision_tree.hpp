#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "treelab/bitvec.hpp"
#include "treelab/truth_table.hpp"

namespace treelab {

// Immutable binary decision tree.  Internal nodes query one variable; the
// `lo` child handles inputs with that variable equal to 0.  Subtrees are
// reference counted, so copies and shared substructure are cheap and safe to
// read from multiple threads.
class DecisionTree {
 public:
  struct Node {
    int var = -1;  // -1 marks a leaf
    bool bit = false;
    std::shared_ptr<const Node> lo, hi;
    bool is_leaf() const { return var < 0; }
  };
  using NodePtr = std::shared_ptr<const Node>;

  // Default-constructed tree is the constant-0 leaf.
  DecisionTree() : DecisionTree(leaf(false)) {}

  static DecisionTree leaf(bool bit);
  static DecisionTree internal(int var, const DecisionTree& when0, const DecisionTree& when1);
  static DecisionTree from_node(NodePtr root);

  const NodePtr& root() const { return root_; }

  // Number of leaves.
  int size() const;
  // Length in edges of the longest root-to-leaf path; 0 for a bare leaf.
  int depth() const;

  bool eval(const Input& x) const;
  // Evaluates at a table index (variable i is bit i); n bounds the legal
  // variable indices.
  bool eval_index(std::uint64_t x, int n) const;

  // Throws StructuralError if any variable is outside [0, n) or repeats
  // along a root-to-leaf path.
  void validate(int n) const;

  // Sorted distinct variables queried anywhere in the tree.
  std::vector<int> variables() const;

  bool same_structure(const DecisionTree& other) const;

 private:
  explicit DecisionTree(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

// Canonical text form.  A leaf prints as "0" or "1"; an internal node prints
// as "(x<idx> <when0> <when1>)" with single spaces and no trailing newline.
std::string serialize_tree(const DecisionTree& t);

// Inverse of serialize_tree; tolerates surrounding whitespace and throws
// ParseError with the byte offset on malformed input.
DecisionTree parse_tree(std::string_view text);

// Exact table of the function the tree computes on {0,1}^n.
TruthTable tree_to_table(const DecisionTree& t, int n);

// Pr_x[a(x) != b(x)] under the uniform distribution, computed exactly by
// walking the product of the two trees.  Works for any ambient dimension
// because only queried variables matter.
double tree_distance(const DecisionTree& a, const DecisionTree& b);

}  // namespace treelab
