#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opk/alg_module.hpp"

namespace opk {

/// ∫_M A = M ∘_O A.
ChainComplex fact_homology(const RightModule& m, const Algebra& a, const Caps& caps, bool explicit_cap = false);

/// ∫^W C = W □_P C, the conormalized cobar total complex, computed as the
/// linear dual of W^∨ ∘_{P^∨} C^∨. Certified when P vanishes below degree 1 in
/// arities >= 2 and C is 0-connected; the result is exact in weights <= K.
ChainComplex fact_cohomology(const RightComodule& w, const Cooperad& p, const Coalgebra& c, const Caps& caps,
                             bool explicit_cap = false);

/// ∫_M (O ∘ V) -> M ∘ V, exact in weights <= K and every degree.
ChainMap free_collapse(const RightModule& m, const ChainComplex& v, const Caps& caps);
/// W ∘ V -> ∫^W (cofree on V), the dual of the free collapse for W^∨ and V^∨.
ChainMap cofree_collapse(const RightComodule& w, const Cooperad& p, const ChainComplex& v, const Caps& caps);

/// l^* M for l : O' -> O.
RightModule restrict_module(const OperadMap& l, const RightModule& m);
/// A symmetric sequence as a right module over triv, or a right comodule over its dual.
RightModule triv_module(const SymmetricSequence& s, OperadPtr triv);
RightComodule triv_comodule(const SymmetricSequence& s, const Cooperad& triv);

struct DimCheck {
  HomologyReport lhs;
  HomologyReport rhs;
  bool ok = false;
};
/// ∫_M l_! A against ∫_{l^* M} A, homology through D.
DimCheck base_change_check(const OperadMap& l, const RightModule& m, const Algebra& a, const Caps& caps);

enum class Verdict { equivalent_within_caps, mismatch, not_certified };
std::string to_string(Verdict v);

struct TowerRow {
  int k = 0;
  HomologyReport lhs;  // H(∫_M ρ_k A)
  HomologyReport rhs;  // H(∫^{Bar M} τ^{≤k} Bar A)
  bool ok = false;
};

struct LayerRow {
  int k = 0;
  HomologyReport fiber;     // H(cone(∫_M ρ_k A -> ∫_M ρ_{k-1} A)) shifted down by one
  HomologyReport tensor;    // ∫_{ε_! M} D_k over triv
  HomologyReport cotensor;  // ∫^{ε_! M} D_k over triv
  bool exact = false;       // tensor and cotensor have the same chain groups and homology
  bool ok = false;
};

struct KoszulReport {
  std::string operad, module, algebra;
  Caps caps;
  HomologyReport lhs_homology;  // H(∫_M A)
  HomologyReport rhs_homology;  // H(∫^{Bar M} Bar A)
  std::vector<TowerRow> tower_tables;
  std::vector<LayerRow> layer_tables;
  Verdict verdict = Verdict::not_certified;
  /// First failing (k, degree); k = 0 marks the limit comparison.
  std::optional<std::pair<int, int>> mismatch_at;
  std::string reason;
};

/// Tower, layer and limit comparison for the Koszul duality arrow
/// ∫_M A -> ∫^{Bar M} Bar A. A failed connectivity certificate yields
/// not_certified with the reason recorded.
KoszulReport koszul_compare(const RightModule& m, const Algebra& a, const Caps& caps);

}  // namespace opk
