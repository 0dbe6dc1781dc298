#pragma once

#include <string>
#include <vector>

#include "opk/chain.hpp"

namespace opk {

/// Permutation of {0..n-1} in one-line notation: p[a] is the image of a.
using Perm = std::vector<int>;

Perm identity_perm(int n);
/// (p * q)(a) = p(q(a)).
Perm compose_perm(const Perm& p, const Perm& q);
Perm inverse_perm(const Perm& p);
int perm_sign(const Perm& p);
/// All permutations of n letters in lexicographic order.
std::vector<Perm> all_perms(int n);
/// Position of p in all_perms(n).
std::size_t perm_rank(const Perm& p);
/// Product s_{w1} s_{w2} ... of adjacent transpositions (1-based indices).
Perm word_to_perm(const std::vector<int>& word, int n);
/// A word in adjacent transpositions whose product is p.
std::vector<int> perm_to_word(const Perm& p);

/// Chain complex with a Σ_n-action given on adjacent transpositions.
///
/// transposition(i) for 1 <= i <= n-1 is the square matrix of s_i on the
/// global generator list. The convention throughout is "relabelling": s_i
/// exchanges the roles of inputs i and i+1.
class EquivariantComplex {
 public:
  EquivariantComplex() = default;
  /// Unchecked; see validate_action.
  EquivariantComplex(ChainComplex complex, int arity, std::vector<SparseMatrix> transpositions);
  /// Trivial action.
  static EquivariantComplex trivial(ChainComplex complex, int arity);
  /// Validates and throws on violation.
  static EquivariantComplex validated(ChainComplex complex, int arity, std::vector<SparseMatrix> transpositions);

  const ChainComplex& complex() const noexcept { return complex_; }
  int arity() const noexcept { return arity_; }
  const SparseMatrix& transposition(int i) const { return trans_.at(static_cast<std::size_t>(i - 1)); }
  const std::vector<SparseMatrix>& transpositions() const noexcept { return trans_; }
  const FieldSpec& field() const noexcept { return complex_.field(); }
  std::size_t dim() const noexcept { return complex_.dim(); }

  /// Matrix of the permutation (expanded from adjacent transpositions).
  SparseMatrix action(const Perm& p) const;
  /// True when every s_i maps generators to ± generators.
  bool is_monomial() const;

 private:
  ChainComplex complex_;
  int arity_ = 0;
  std::vector<SparseMatrix> trans_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  void add(std::string v) { violations.push_back(std::move(v)); }
  void merge(const ValidationReport& other, const std::string& prefix = "");
};

/// Checks shapes, invertibility, commutation with d and the Coxeter relations.
ValidationReport validate_action(const EquivariantComplex& x);

/// Composite map along a word of adjacent transpositions (1-based).
ChainMap permutation_action(const EquivariantComplex& x, const std::vector<int>& word);

/// Induction product Σ_a × Σ_b ⊂ Σ_{a+b}: shuffle-indexed copies of X⊗Y.
///
/// A generator (S, x⊗y) is read with the tensor factors ordered by the least
/// label of their block, so permuting the blocks past one another inserts the
/// Koszul sign (-1)^{|x||y|}.
EquivariantComplex induce(const EquivariantComplex& x, const EquivariantComplex& y);

/// Quotient by the group action with a chosen splitting.
struct QuotientResult {
  ChainComplex complex;
  SparseMatrix projection;  // quotient x source
  SparseMatrix section;     // source x quotient, projection * section = 1
};

/// Σ_n-coinvariants: image of the averaging idempotent. Throws
/// NonSemisimpleContext if n! is not invertible.
QuotientResult coinvariants(const EquivariantComplex& x);
/// Σ_n-invariants (fixed points), with a retraction onto them.
QuotientResult invariants(const EquivariantComplex& x);

/// Splitting data for the coinvariants of a finite-dimensional space with a
/// Σ_n-action given by transposition matrices. Monomial actions use orbit
/// enumeration; general ones the averaging idempotent.
struct CoinvariantSplit {
  std::size_t rank = 0;
  SparseMatrix projection;  // rank x dim
  SparseMatrix section;     // dim x rank
  std::vector<std::size_t> representatives;  // a source index per quotient basis vector
};
CoinvariantSplit coinvariant_split(std::size_t dim, int arity, const std::vector<SparseMatrix>& transpositions,
                                   const FieldSpec& f);

/// Coinvariants/invariants for an arbitrary finite group given by the full
/// list of its element matrices.
QuotientResult group_coinvariants(const ChainComplex& c, const std::vector<SparseMatrix>& elements);
QuotientResult group_invariants(const ChainComplex& c, const std::vector<SparseMatrix>& elements);

/// Throws NonSemisimpleContext when n! is not a unit of the field.
void require_semisimple(const FieldSpec& f, int n, const std::string& context);

}  // namespace opk
