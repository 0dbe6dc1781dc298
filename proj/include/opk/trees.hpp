#pragma once

#include <climits>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "opk/symseq.hpp"

namespace opk {

/// Rooted tree whose leaves are labelled 0..n-1. Node 0 is the root.
///
/// In canonical form the children of every node are sorted by least leaf
/// label, nodes are stored in preorder, and the tensor factors of a basis
/// element are read as: nodes in preorder, then leaves by label.
struct Tree {
  struct Node {
    std::size_t gen = 0;
    std::vector<int> kids;  // >= 0: node index, < 0: leaf code -(label + 1)
    auto operator<=>(const Node&) const = default;
  };
  std::vector<Node> nodes;
  std::vector<std::size_t> leaf_gen;  // carrier generator per leaf label; empty for labelled leaves
  int leaves = 0;
  auto operator<=>(const Tree&) const = default;
};

inline int leaf_code(int label) { return -(label + 1); }
inline int leaf_label(int code) { return -code - 1; }

using TreeTerm = std::pair<Tree, Scalar>;

/// Shape and decoration rules for a family of trees.
struct TreeGrammar {
  SymmetricSequence root;        // decorations of the root
  SymmetricSequence vert;        // decorations of the other nodes (empty: none)
  int vert_shift = 1;            // degree added by each non-root node
  int min_vert_arity = 2;
  bool two_level = false;        // non-root nodes sit under the root and carry only leaves
  std::optional<ChainComplex> carrier;  // leaf decorations; absent for labelled leaves
  std::vector<int> carrier_weights;     // default 1 per generator
  int max_weight = INT_MAX;             // bound on the total leaf weight
  int max_degree = INT_MAX;             // generators above this degree are dropped
  int max_arity = 3;                    // number of leaves
};

/// Canonicalization and enumeration for a TreeGrammar.
class TreeSpace {
 public:
  TreeSpace() = default;
  explicit TreeSpace(TreeGrammar g);

  const TreeGrammar& grammar() const noexcept { return g_; }
  const FieldSpec& field() const noexcept { return g_.root.field(); }
  bool quotient_mode() const noexcept { return g_.carrier.has_value(); }

  int node_degree(const Tree& t, std::size_t k) const;
  int leaf_degree(const Tree& t, int label) const;
  int degree(const Tree& t) const;
  int weight(const Tree& t) const;
  int carrier_weight(std::size_t gen) const;
  /// Node arity (number of children).
  static int arity(const Tree& t, std::size_t k) { return static_cast<int>(t.nodes[k].kids.size()); }

  /// Brings a raw tree into canonical form. `factors` lists the tensor
  /// factors of the raw element in order (node indices >= 0, leaf codes < 0);
  /// node kids are in decoration input order and leaf labels are 0..n-1.
  void canonicalize(const Tree& raw, const std::vector<int>& factors, const Scalar& coeff,
                    std::vector<TreeTerm>& out) const;
  /// Canonical factor order of a canonical tree.
  std::vector<int> factors(const Tree& t) const;
  /// Relabel: leaf a becomes leaf sigma[a] (its decoration moves with it).
  void relabel(const Tree& t, const Perm& sigma, const Scalar& coeff, std::vector<TreeTerm>& out) const;

  /// Canonical decorated trees with n labelled leaves (leaf_gen empty), in a
  /// deterministic order: fewer nodes first, then lexicographic.
  const std::vector<Tree>& shapes(int n) const;

  /// Subtree leaf minimum per node.
  static std::vector<int> min_leaves(const Tree& t);
  /// Leaf labels under node k in increasing order.
  static std::vector<int> leaf_set(const Tree& t, std::size_t k);
  /// Nodes of the subtree at k, in preorder.
  static std::vector<std::size_t> subtree_nodes(const Tree& t, std::size_t k);
  static std::vector<int> parents(const Tree& t);
  std::string to_string(const Tree& t) const;

  const SparseMatrix& decoration_action(bool root, int arity, const Perm& p) const;
  const SymmetricSequence& seq_for(std::size_t node) const { return node == 0 ? g_.root : g_.vert; }

 private:
  TreeGrammar g_;
  mutable std::map<std::tuple<bool, int, Perm>, SparseMatrix> action_cache_;
  mutable std::map<int, std::vector<Tree>> shapes_cache_;
};

/// Local structure maps used by tree differentials.
struct TreeOps {
  /// Non-root ∘_i non-root: decoration of (a ∘_i b) (operad partial composition).
  std::function<SparseVec(int m, int i, int n, std::size_t a, std::size_t b)> vert_compose;
  /// Root ∘_i non-root (right module action).
  std::function<SparseVec(int m, int i, int n, std::size_t a, std::size_t b)> root_act;
  /// Non-root node with only leaves, applied to the leaf decorations.
  std::function<SparseVec(int l, std::size_t op, const std::vector<std::size_t>& args)> leaf_act;
};

/// Differential of a canonical basis tree: decoration differentials, edge
/// contractions (vert_compose), root contractions (root_act) and leaf
/// contractions (leaf_act), each with its Koszul sign.
void tree_differential(const TreeSpace& space, const TreeOps& ops, const Tree& t, std::vector<TreeTerm>& out);

/// Arity-wise equivariant complexes spanned by canonical trees with labelled leaves.
class SequenceTrees {
 public:
  SequenceTrees(TreeSpace space, TreeOps ops);

  const TreeSpace& space() const noexcept { return space_; }
  const std::vector<Tree>& basis(int n) const { return space_.shapes(n); }
  std::optional<std::size_t> index(const Tree& t) const;
  /// Equivariant complex in arity n (cached).
  const EquivariantComplex& component(int n) const;
  SymmetricSequence sequence() const;
  /// Collects terms into a vector over basis(n).
  SparseVec collect(int n, const std::vector<TreeTerm>& terms) const;

 private:
  TreeSpace space_;
  TreeOps ops_;
  mutable std::map<int, std::map<Tree, std::size_t>> index_;
  mutable std::map<int, EquivariantComplex> comps_;
  void build_index(int n) const;
};

/// Total complex ⊕_n (trees with n leaves ⊗ carrier^{⊗n})_{Σ_n}, the
/// coinvariants taken with an explicit splitting.
class QuotientTrees {
 public:
  QuotientTrees(TreeSpace space, TreeOps ops);

  const TreeSpace& space() const noexcept { return space_; }
  const ChainComplex& complex() const noexcept { return complex_; }
  std::size_t dim() const noexcept { return complex_.dim(); }

  /// Labelled terms -> coordinates in complex(). Terms outside the window are dropped.
  SparseVec project(const std::vector<TreeTerm>& terms) const;
  /// Section of a quotient generator as labelled terms.
  std::vector<TreeTerm> lift(std::size_t q) const;
  /// Leaf weight of a quotient generator.
  int weight(std::size_t q) const { return weights_[q]; }
  const std::vector<int>& weights() const noexcept { return weights_; }

 private:
  struct Block {
    std::vector<Tree> labelled;
    std::map<Tree, std::size_t> index;
    CoinvariantSplit split;
    std::vector<std::size_t> position;  // orbit -> position in complex()
  };
  TreeSpace space_;
  TreeOps ops_;
  std::map<int, Block> blocks_;
  std::vector<std::pair<int, std::size_t>> origin_;  // position -> (arity, orbit)
  std::vector<int> weights_;
  ChainComplex complex_;
};

/// Koszul sign of bringing a list of (target position, degree) into increasing order.
bool koszul_odd(std::vector<std::pair<int, int>> pos_and_degree);

}  // namespace opk
