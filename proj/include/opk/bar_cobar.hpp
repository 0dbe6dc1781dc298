#pragma once

#include <memory>
#include <string>
#include <vector>

#include "opk/operad.hpp"
#include "opk/trees.hpp"

namespace opk {

/// Where a bar or cobar object came from.
struct Provenance {
  std::string construction;
  std::string source;
  Caps caps;
};

/// Bar(O): trees with a trivial unary root and vertices decorated by the
/// augmentation ideal of O, each vertex adding one to the degree.
struct BarCooperad {
  Cooperad cooperad;
  OperadPtr source;
  std::shared_ptr<const SequenceTrees> trees;
  Provenance provenance;
  /// Number of decorated vertices of basis element g in arity n.
  int weight(int n, std::size_t g) const;
};

/// Partial cocompositions of a tree sequence by cutting: Δ_{(m,i,n)} sends a
/// tree with m+n-1 leaves to the sum over subtrees spanning leaves
/// i..i+n-1 of (upper part) ⊗ (lower part). `lower` holds the bar trees of
/// the cut-off part; `upper` may carry any root decoration.
SlotMaps tree_cuts(const SequenceTrees& upper, const SequenceTrees& lower, int max_arity);

/// Tree ops composing vertex decorations with the given operad.
TreeOps vertex_ops(OperadPtr o);
/// Grammar of bar trees on O in arities <= max_arity.
TreeGrammar bar_grammar(const Operad& o, int max_arity);

BarCooperad bar_operad(OperadPtr o, const Caps& caps);

/// Cobar(P) as the linear dual of Bar(P^∨). Requires every component to be
/// finite-dimensional.
struct CobarOperad {
  Operad operad;
  std::shared_ptr<const BarCooperad> dual_bar;  // Bar(P^∨)
  Provenance provenance;
};
CobarOperad cobar_cooperad(const Cooperad& p, const Caps& caps);

/// Cooperad map Bar(f) : Bar(O) -> Bar(O') applying f to every vertex.
CooperadMap bar_map(const OperadMap& f, const BarCooperad& source, const BarCooperad& target);
CooperadMap compose_cooperad_maps(const CooperadMap& g, const CooperadMap& f, const FieldSpec& field);

/// Counit Cobar(Bar(O)) -> O: a cobar tree whose vertices are all single
/// corollas maps to the composite along the tree; everything else maps to 0.
struct CounitResult {
  OperadPtr cobar_bar;
  OperadMap map;
};
CounitResult counit_map(OperadPtr o, const Caps& caps);

/// Bar(O_{≤k}) for k = 1..kmax with the maps Bar(O) -> Bar(O_{≤k}) and
/// Bar(O_{≤k}) -> Bar(O_{≤k-1}).
struct BarTower {
  std::shared_ptr<const BarCooperad> full;
  std::vector<OperadPtr> truncations;                   // index k-1
  std::vector<std::shared_ptr<const BarCooperad>> bars;  // index k-1
  std::vector<CooperadMap> from_full;                    // Bar(r_k)
  std::vector<CooperadMap> steps;                        // index k-2: level k -> level k-1
};
BarTower bar_tower(OperadPtr o, int kmax, const Caps& caps);

/// Checks the counit, coassociativity and compatibility of a cooperad map.
ValidationReport validate_cooperad_map(const CooperadMap& f, const Cooperad& source, const Cooperad& target);

}  // namespace opk
