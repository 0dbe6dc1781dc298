#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>

#include "opk/symseq.hpp"

namespace opk {

/// Key (m, i, n) of a partial composition O(m) ⊗ O(n) -> O(m+n-1) at slot i.
using SlotKey = std::tuple<int, int, int>;

/// Matrices of partial (co)compositions. For a composition the column of
/// (a, b) is a * dim(O(n)) + b; for a cocomposition the rows are indexed the
/// same way.
using SlotMaps = std::map<SlotKey, SparseMatrix>;

/// Operad stored through partial compositions a ∘_i b (b plugged into input i
/// of a; inputs of b become i..i+n-1).
struct Operad {
  std::string name;
  SymmetricSequence seq;
  std::size_t unit = 0;  // generator of arity 1
  SlotMaps comp;         // missing key = zero map

  const FieldSpec& field() const { return seq.field(); }
  /// a ∘_i b on basis elements.
  SparseVec compose(int m, int i, int n, std::size_t a, std::size_t b) const;
  bool is_reduced() const;
  bool is_nonunital() const { return !seq.has(0); }
};

/// Cooperad stored through partial cocompositions P(m+n-1) -> P(m) ⊗ P(n).
struct Cooperad {
  std::string name;
  SymmetricSequence seq;
  std::size_t counit = 0;
  SlotMaps decomp;

  const FieldSpec& field() const { return seq.field(); }
};

using OperadPtr = std::shared_ptr<const Operad>;

/// Arity-wise chain maps commuting with units, compositions and actions.
struct OperadMap {
  OperadPtr source;
  OperadPtr target;
  std::map<int, SparseMatrix> components;  // rows: target(n), cols: source(n)

  SparseVec apply(int n, std::size_t g) const;
};

struct CooperadMap {
  std::map<int, SparseMatrix> components;
};

/// Right module M(m) ⊗ O(n) -> M(m+n-1).
struct RightModule {
  std::string name;
  OperadPtr operad;
  SymmetricSequence seq;
  SlotMaps act;

  const FieldSpec& field() const { return seq.field(); }
};

/// Right comodule M(m+n-1) -> M(m) ⊗ P(n).
struct RightComodule {
  std::string name;
  SymmetricSequence seq;
  SlotMaps coact;
};

struct OperadReport {
  ValidationReport report;
  bool reduced = false;
  bool nonunital = false;
  bool connected = false;  // every component concentrated in degrees >= 0
};

OperadReport validate_operad(const Operad& o);
OperadReport validate_cooperad(const Cooperad& p);
ValidationReport validate_operad_map(const OperadMap& f);
ValidationReport validate_module(const RightModule& m);

/// "triv", "com" or "ass" in arities <= max_arity.
Operad builtin_operad(const std::string& name, int max_arity, const FieldSpec& field = FieldSpec::rationals());
bool is_builtin_operad(const std::string& name);

/// O_{≤k}: arities above k and composites landing there are zero.
Operad truncate_operad(const Operad& o, int k);
/// Projection O -> O_{≤k}, between the given operads.
OperadMap truncation_map(OperadPtr o, OperadPtr truncated);
OperadMap identity_map(OperadPtr o);
OperadMap compose_maps(const OperadMap& g, const OperadMap& f);
/// Unit inclusion triv -> O.
OperadMap unit_map(OperadPtr triv, OperadPtr o);

SymmetricSequence augmentation_ideal(const Operad& o);
Operad suspend(const Operad& o);

Cooperad dualize(const Operad& o);
Operad dualize(const Cooperad& p);
RightModule dualize(const RightComodule& w, OperadPtr dual_operad);
RightComodule dualize(const RightModule& m);
/// Linear dual of an equivariant complex: degrees negated, s_i transposed.
EquivariantComplex dualize(const EquivariantComplex& x);
ChainComplex dualize(const ChainComplex& c);
/// Dual of a chain map f : X -> Y as a map Y^∨ -> X^∨.
SparseMatrix dual_map(const SparseMatrix& f, const ChainComplex& source, const ChainComplex& target);
SymmetricSequence dualize(const SymmetricSequence& s);
/// Position of each generator's dual basis element in dualize(c): degrees
/// descending, original order within a degree.
std::vector<std::size_t> dual_index(const ChainComplex& c);

/// O as a right module over itself.
RightModule self_module(OperadPtr o);
/// triv as a right O-module through the augmentation.
RightModule trivial_module(OperadPtr o);
/// Target operad as a right module over the source through f.
RightModule module_along(const OperadMap& f);

/// Permutation σ ∘_i τ acting on the slots of a ∘_i b.
Perm block_perm(const Perm& sigma, int i, const Perm& tau);

}  // namespace opk
