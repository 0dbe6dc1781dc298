#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "opk/equivariant.hpp"
#include "opk/symseq.hpp"

namespace opk {

/// Finite groupoid stored through an explicit composition table.
struct FiniteGroupoid {
  std::vector<std::string> objects;
  std::vector<std::string> names;  // per morphism
  std::vector<std::size_t> src, tgt;
  std::vector<std::size_t> identity;  // per object
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> comp;  // (g, f) -> g ∘ f when tgt f = src g

  std::size_t num_objects() const { return objects.size(); }
  std::size_t num_morphisms() const { return names.size(); }
  std::size_t compose(std::size_t g, std::size_t f) const;
  std::size_t inverse(std::size_t f) const;
  std::vector<std::size_t> hom(std::size_t a, std::size_t b) const;
};

using GroupoidPtr = std::shared_ptr<const FiniteGroupoid>;

/// Checks totality, associativity, units and invertibility of the table.
ValidationReport validate_groupoid(const FiniteGroupoid& g);

/// Finite sets {0..n-1}, n = from..k, and bijections; morphism n -> n is a Perm.
FiniteGroupoid fin_bij(int k, int from = 0);
/// Perm carried by a morphism of fin_bij.
Perm fin_perm(const FiniteGroupoid& g, std::size_t m);
FiniteGroupoid opposite(const FiniteGroupoid& g);
/// Objects (a, b) at a * |B| + b, morphisms (f, g) at f * |Mor B| + g.
FiniteGroupoid product(const FiniteGroupoid& a, const FiniteGroupoid& b);

/// Connected components, each listed with its first object as base point.
std::vector<std::vector<std::size_t>> components(const FiniteGroupoid& g);

/// Functor to chain complexes: action[m] maps values[src m] to values[tgt m].
struct GroupoidFunctor {
  GroupoidPtr source;
  std::vector<ChainComplex> values;
  std::vector<SparseMatrix> action;
};
ValidationReport validate_functor(const GroupoidFunctor& f);

struct GroupoidMap {
  GroupoidPtr source;
  GroupoidPtr target;
  std::vector<std::size_t> obj;
  std::vector<std::size_t> mor;
};
ValidationReport validate_groupoid_map(const GroupoidMap& j);
/// fin_bij(k) -> fin_bij(l) for k <= l.
GroupoidMap fin_inclusion(GroupoidPtr small, GroupoidPtr large);
GroupoidMap identity_groupoid_map(GroupoidPtr g);

/// TwAr(G): objects are morphisms φ : a -> b, a morphism φ -> φ' is a pair
/// (u : a' -> a, v : b -> b') with φ' = v φ u. proj maps into product(opposite(G), G).
struct TwistedArrow {
  FiniteGroupoid groupoid;
  std::vector<std::size_t> proj_obj;
  std::vector<std::size_t> proj_mor;
};
TwistedArrow twisted_arrow(const FiniteGroupoid& g, bool with_table = true);

/// Colimit as the direct sum over components of coinvariants at the base
/// point; to_colimit[o] transports values[o] to the base and projects.
struct Colimit {
  ChainComplex complex;
  std::vector<std::vector<std::size_t>> components;
  std::vector<SparseMatrix> to_colimit;  // per object
  std::vector<SparseMatrix> sections;    // per component, colimit -> value at the base
};
Colimit colimit(const GroupoidFunctor& f);
/// Limit as the direct sum over components of invariants at the base point.
ChainComplex limit(const GroupoidFunctor& f);

/// Coend and end of a functor on product(opposite(G), G), over TwAr(G).
ChainComplex coend(const FiniteGroupoid& g, const GroupoidFunctor& f);
ChainComplex end(const FiniteGroupoid& g, const GroupoidFunctor& f);

/// (a, b) |-> X(a) ⊗ Z(b) on product(opposite(G), G); X is made
/// contravariant through inverses.
GroupoidFunctor tensor_functor(const GroupoidFunctor& x, const GroupoidFunctor& z);
/// X ⊗_G Z as the coend of tensor_functor.
ChainComplex tensor_over(const GroupoidFunctor& x, const GroupoidFunctor& z);

/// n |-> S(n) on fin_bij(k) (zero outside the support).
GroupoidFunctor sequence_functor(const SymmetricSequence& s, GroupoidPtr fin);
/// n |-> T^{⊗n} with the Koszul-signed permutation action.
GroupoidFunctor tensor_powers(const ChainComplex& t, GroupoidPtr fin);

/// Pointwise left Kan extension: j_! Y(c) is the colimit over the comma groupoid j/c.
GroupoidFunctor left_kan(const GroupoidMap& j, const GroupoidFunctor& y);
GroupoidFunctor pullback(const GroupoidMap& j, const GroupoidFunctor& x);

struct DimComparison {
  std::map<int, std::size_t> lhs;
  std::map<int, std::size_t> rhs;
  bool ok = false;
};
/// X ⊗_C j_! Y against j^* X ⊗_{C'} Y.
DimComparison kan_tensor_check(const GroupoidMap& j, const GroupoidFunctor& x, const GroupoidFunctor& y);
/// Coend over fin_bij(k) of S ⊗ T^{⊗(-)} against the plethysm of S and T.
DimComparison coend_vs_plethysm(const SymmetricSequence& s, const ChainComplex& t, int k);

}  // namespace opk
