#pragma once

#include <map>
#include <string>

#include "opk/equivariant.hpp"

namespace opk {

/// Computation window. Every operation that could produce an infinite object
/// takes caps and is exact within them.
struct Caps {
  int max_arity = 3;   // K: arity cap, also the weight cap for carriers
  int max_degree = 6;  // D: homology is reported through this degree
  int min_degree = 0;
};

void validate_caps(const Caps& caps);

/// Finitely supported family of equivariant complexes indexed by arity.
class SymmetricSequence {
 public:
  SymmetricSequence() = default;
  explicit SymmetricSequence(FieldSpec field) : field_(std::move(field)) {}

  const FieldSpec& field() const noexcept { return field_; }
  /// Sets component n; zero components are dropped.
  void set(int n, EquivariantComplex x);
  /// Component n, or the zero complex with trivial action.
  const EquivariantComplex& at(int n) const;
  bool has(int n) const { return comps_.count(n) != 0; }
  std::size_t dim(int n) const { return has(n) ? comps_.at(n).dim() : 0; }
  int degree(int n, std::size_t g) const { return comps_.at(n).complex().degree(g); }
  const std::map<int, EquivariantComplex>& components() const noexcept { return comps_; }
  /// Largest arity with a nonzero component, or -1.
  int max_arity() const { return comps_.empty() ? -1 : comps_.rbegin()->first; }

  ValidationReport validate() const;

 private:
  FieldSpec field_;
  std::map<int, EquivariantComplex> comps_;
  mutable std::map<int, EquivariantComplex> zeros_;
};

/// Sequence with one degree-0 generator in arity 1.
SymmetricSequence unit_sequence(const FieldSpec& field);

/// Drops components above arity k.
SymmetricSequence restrict(const SymmetricSequence& s, int k);
/// Zero extension of a sequence supported in arities <= k.
SymmetricSequence extend_by_zero(const SymmetricSequence& s, int k);

/// Composition product, computed in arities <= caps.max_arity.
SymmetricSequence compose(const SymmetricSequence& s, const SymmetricSequence& t, const Caps& caps);

/// S ∘ V = ⊕_p (S(p) ⊗ V^{⊗p})_{Σ_p} for p <= caps.max_arity, in degrees
/// <= caps.max_degree. Throws NotCertifiablyConvergent when the dropped
/// weights could reach the degree window.
ChainComplex plethysm(const SymmetricSequence& s, const ChainComplex& v, const Caps& caps);
/// Throws NotCertifiablyConvergent when arities above the cap can reach the degree window.
void check_plethysm_convergence(const SymmetricSequence& s, const ChainComplex& v, const Caps& caps);

/// Graded dimension table of a sequence: arity -> degree -> dim.
std::map<int, std::map<int, std::size_t>> graded_dims(const SymmetricSequence& s);

}  // namespace opk
