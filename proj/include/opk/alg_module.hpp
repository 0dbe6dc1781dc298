#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opk/bar_cobar.hpp"
#include "opk/chain.hpp"
#include "opk/operad.hpp"
#include "opk/trees.hpp"

namespace opk {

/// Structure maps of an algebra: key [op, a_1, ..., a_n] with op a basis
/// element of O(n) and a_j carrier generators; missing keys act by zero.
using ActionTable = std::map<std::vector<std::size_t>, SparseVec>;

/// Algebra over an operad. Carrier generators carry a weight >= 1 and the
/// action adds weights; products above the weight cap are zero.
struct Algebra {
  std::string name;
  OperadPtr operad;
  ChainComplex carrier;
  std::vector<int> weights;
  std::map<int, ActionTable> actions;  // by arity

  const FieldSpec& field() const { return carrier.field(); }
  SparseVec act(std::size_t op, const std::vector<std::size_t>& args) const;
  int max_weight() const;
};

/// Coalgebra over a cooperad P, stored through its dual algebra over P^∨ on
/// the dual carrier. `carrier` is the predual of `dual.carrier`.
struct Coalgebra {
  std::string name;
  Cooperad cooperad;
  ChainComplex carrier;
  std::vector<int> weights;
  Algebra dual;
};

ValidationReport validate_algebra(const Algebra& a);
ValidationReport validate_coalgebra(const Coalgebra& c);

/// Generator weights of v default to 1.
Algebra free_algebra(OperadPtr o, const ChainComplex& v, const Caps& caps, std::vector<int> weights = {});
/// Augmentation M ∘_O (O ∘ V) -> M ∘ V: a tree without vertices maps to the
/// module action of its root on the leaf decorations, all other trees to 0.
/// Both sides are exact in weights <= K and degrees <= max_degree.
ChainMap free_collapse_map(const RightModule& m, const ChainComplex& v, std::vector<int> weights, int K,
                           int max_degree);
/// Carrier v; the unit acts as the identity, everything else by zero.
Algebra trivial_algebra(OperadPtr o, const ChainComplex& v, std::vector<int> weights = {});
/// Restriction along f : O' -> O.
Algebra restrict_algebra(const OperadMap& f, const Algebra& a);
/// Induction along f : O' -> O, computed as O ∘_{O'} A.
Algebra induce_algebra(const OperadMap& f, const Algebra& a, const Caps& caps);

/// Normalized two-sided bar complex M ∘_O A as a tree complex: root decorated
/// by M, vertices by the augmentation ideal of O (degree +1 each), leaves by
/// the carrier of A. Exact in weights <= K and degrees <= D.
struct RelativeTensor {
  std::shared_ptr<const QuotientTrees> trees;
  const ChainComplex& complex() const { return trees->complex(); }
  const std::vector<int>& weights() const { return trees->weights(); }
};

/// Throws NotCertifiablyConvergent unless O is concentrated in degrees >= 0
/// and the carrier homology of A in degrees >= 1, or `explicit_cap` is set.
RelativeTensor relative_tensor(const RightModule& m, const Algebra& a, const Caps& caps, bool explicit_cap = false);
/// M ∘_O f for a degree-0 map f of O-algebras, applied leafwise.
ChainMap relative_tensor_map(const RightModule& m, const Algebra& a, const Algebra& b, const ChainMap& f,
                             const Caps& caps);
RelativeTensor cotangent_complex(const Algebra& a, const Caps& caps, bool explicit_cap = false);

/// Bar_O A over Bar(O): trees with a trivial root, coaction by cutting below the root.
Coalgebra bar_algebra(const Algebra& a, const Caps& caps, bool explicit_cap = false);
/// Bar construction on a right O-module: a right comodule over Bar(O).
RightComodule bar_module(const RightModule& m, const Caps& caps);
/// Cobar_P C as an algebra over Cobar(P), computed as the dual of Bar_{P^∨} C^∨.
Algebra cobar_coalgebra(const Coalgebra& c, const Caps& caps);
Coalgebra cofree_coalgebra(const Cooperad& p, const ChainComplex& v, const Caps& caps, std::vector<int> weights = {});
Coalgebra trivial_coalgebra(const Cooperad& p, const ChainComplex& v, std::vector<int> weights = {});

/// ρ_k A for k = 1..kmax (index k-1) with the maps ρ_k A -> ρ_{k-1} A (index k-2).
struct RhoTower {
  std::vector<Algebra> levels;
  std::vector<ChainMap> maps;
};
RhoTower rho_tower(const Algebra& a, int kmax, const Caps& caps, bool explicit_cap = false);
Algebra rho(const Algebra& a, int k, const Caps& caps, bool explicit_cap = false);

/// τ^{≤k} C for a coalgebra C over Bar(O) built with the same caps.
Coalgebra tau(OperadPtr o, const Coalgebra& c, int k, const Caps& caps);

/// The k-th layer coinvariants(O(k) ⊗ L^{⊗k}), L the cotangent complex,
/// compared with the cone of ρ_k A -> ρ_{k-1} A.
struct LayerReport {
  ChainComplex layer;
  std::vector<int> layer_weights;
  HomologyReport layer_homology;  // through D
  HomologyReport cone_homology;   // through D + 1
  bool ok = false;
};
LayerReport fiber_layer(const Algebra& a, int k, const Caps& caps);

/// Least degree with nonzero homology (empty when acyclic).
struct Connectivity {
  std::optional<int> least;
  bool zero_connected = false;  // least >= 1 or acyclic
};
Connectivity connectivity(const ChainComplex& c);

}  // namespace opk
