#include "opk/symseq.hpp"

#include <climits>

#include "opk/error.hpp"
#include "opk/trees.hpp"

namespace opk {

void validate_caps(const Caps& caps) {
  if (caps.max_arity < 1) throw Error(ErrorCode::InvalidInput, "max_arity must be at least 1");
  if (caps.max_degree < caps.min_degree) throw Error(ErrorCode::InvalidInput, "max_degree below min_degree");
}

void SymmetricSequence::set(int n, EquivariantComplex x) {
  if (n < 0) throw Error(ErrorCode::InvalidInput, "negative arity");
  if (x.arity() != n) throw Error(ErrorCode::InvalidInput, "component arity mismatch at " + std::to_string(n));
  if (!(x.field() == field_)) throw Error(ErrorCode::FieldMismatch, "component field differs from sequence field");
  if (x.dim() == 0) {
    comps_.erase(n);
    return;
  }
  comps_.insert_or_assign(n, std::move(x));
}

const EquivariantComplex& SymmetricSequence::at(int n) const {
  auto it = comps_.find(n);
  if (it != comps_.end()) return it->second;
  auto z = zeros_.find(n);
  if (z != zeros_.end()) return z->second;
  return zeros_.emplace(n, EquivariantComplex::trivial(ChainComplex(field_), n)).first->second;
}

ValidationReport SymmetricSequence::validate() const {
  ValidationReport r;
  for (const auto& [n, x] : comps_) {
    if (!(x.field() == field_)) r.add("arity " + std::to_string(n) + ": field mismatch");
    if (x.arity() != n) r.add("arity " + std::to_string(n) + ": component has arity " + std::to_string(x.arity()));
    r.merge(validate_action(x), "arity " + std::to_string(n) + ": ");
  }
  return r;
}

SymmetricSequence unit_sequence(const FieldSpec& field) {
  SymmetricSequence s(field);
  SparseMatrix d(1, 1);
  s.set(1, EquivariantComplex::trivial(ChainComplex(field, {{"id", 0}}, d), 1));
  return s;
}

SymmetricSequence restrict(const SymmetricSequence& s, int k) {
  SymmetricSequence r(s.field());
  for (const auto& [n, x] : s.components())
    if (n <= k) r.set(n, x);
  return r;
}

SymmetricSequence extend_by_zero(const SymmetricSequence& s, int k) {
  if (s.max_arity() > k)
    throw Error(ErrorCode::InvalidInput, "sequence is supported above arity " + std::to_string(k));
  return s;
}

SymmetricSequence compose(const SymmetricSequence& s, const SymmetricSequence& t, const Caps& caps) {
  validate_caps(caps);
  if (!(s.field() == t.field())) throw Error(ErrorCode::FieldMismatch, "compose: fields differ");
  if (t.has(0)) throw Error(ErrorCode::NotFinitelySupported, "compose: inner sequence has an arity-0 component");
  require_semisimple(s.field(), caps.max_arity, "composition product");
  TreeGrammar g;
  g.root = s;
  g.vert = t;
  g.vert_shift = 0;
  g.min_vert_arity = 1;
  g.two_level = true;
  g.max_arity = caps.max_arity;
  SequenceTrees trees(TreeSpace(std::move(g)), TreeOps{});
  return trees.sequence();
}

void check_plethysm_convergence(const SymmetricSequence& s, const ChainComplex& v, const Caps& caps) {
  const int K = caps.max_arity;
  if (s.max_arity() > K && v.dim() > 0) {
    // lowest degree reachable by a dropped summand
    int min_v = INT_MAX;
    for (const auto& gen : v.generators()) min_v = std::min(min_v, gen.degree);
    if (min_v <= 0)
      throw Error(ErrorCode::NotCertifiablyConvergent,
                  "plethysm: carrier has generators in degree <= 0 and the sequence exceeds the arity cap");
    for (const auto& [p, x] : s.components()) {
      if (p <= K) continue;
      for (const auto& gen : x.complex().generators())
        if (gen.degree + p * min_v <= caps.max_degree)
          throw Error(ErrorCode::NotCertifiablyConvergent, "plethysm: arity " + std::to_string(p) +
                                                               " above the cap reaches the degree window");
    }
  }
}

ChainComplex plethysm(const SymmetricSequence& s, const ChainComplex& v, const Caps& caps) {
  validate_caps(caps);
  if (!(s.field() == v.field())) throw Error(ErrorCode::FieldMismatch, "plethysm: fields differ");
  check_plethysm_convergence(s, v, caps);
  const int K = caps.max_arity;
  TreeGrammar g;
  g.root = restrict(s, K);
  g.vert = SymmetricSequence(s.field());
  g.carrier = v;
  g.max_weight = K;
  g.max_degree = caps.max_degree;
  g.max_arity = K;
  QuotientTrees q(TreeSpace(std::move(g)), TreeOps{});
  return q.complex();
}

std::map<int, std::map<int, std::size_t>> graded_dims(const SymmetricSequence& s) {
  std::map<int, std::map<int, std::size_t>> out;
  for (const auto& [n, x] : s.components())
    for (const auto& gen : x.complex().generators()) ++out[n][gen.degree];
  return out;
}

}  // namespace opk
