#include "opk/fact_hom.hpp"

#include <climits>

#include "opk/error.hpp"

namespace opk {

namespace {

Caps open_window(const Caps& caps) {
  Caps c = caps;
  c.max_degree = INT_MAX;
  return c;
}

/// Reason A or O fails the relative-tensor certificate, if any.
std::optional<std::string> algebra_obstruction(const Algebra& a) {
  for (const auto& [n, x] : a.operad->seq.components())
    for (const auto& g : x.complex().generators())
      if (g.degree < 0) return "operad has a generator in negative degree (arity " + std::to_string(n) + ")";
  const auto c = connectivity(a.carrier);
  if (!c.zero_connected) return "algebra is not 0-connected (homology in degree " + std::to_string(*c.least) + ")";
  return std::nullopt;
}

std::optional<std::string> coalgebra_obstruction(const Cooperad& p, const Coalgebra& c) {
  for (const auto& [n, x] : p.seq.components()) {
    if (n < 2) continue;
    for (const auto& g : x.complex().generators())
      if (g.degree < 1) return "cooperad has a generator below degree 1 in arity " + std::to_string(n);
  }
  const auto conn = connectivity(c.carrier);
  if (!conn.zero_connected)
    return "coalgebra is not 0-connected (homology in degree " + std::to_string(*conn.least) + ")";
  return std::nullopt;
}

/// Homology of a complex shifted down by one degree.
HomologyReport shifted_down(const HomologyReport& h, int through) {
  HomologyReport out;
  for (const auto& [d, x] : h.dims)
    if (d - 1 <= through) out.dims[d - 1] = x;
  out.exact_through = through;
  return out;
}

std::map<int, std::size_t> chain_dims_through(const ChainComplex& c, int through) {
  std::map<int, std::size_t> out;
  for (const auto& g : c.generators())
    if (g.degree <= through) ++out[g.degree];
  return out;
}

/// Least degree where the two reports differ.
std::optional<int> first_difference(const HomologyReport& a, const HomologyReport& b) {
  std::optional<int> out;
  auto note = [&](int d) {
    if (!out || d < *out) out = d;
  };
  for (const auto& [d, x] : a.dims)
    if (b.dim(d) != x) note(d);
  for (const auto& [d, x] : b.dims)
    if (a.dim(d) != x) note(d);
  return out;
}

}  // namespace

ChainComplex fact_homology(const RightModule& m, const Algebra& a, const Caps& caps, bool explicit_cap) {
  return relative_tensor(m, a, caps, explicit_cap).complex();
}

ChainComplex fact_cohomology(const RightComodule& w, const Cooperad& p, const Coalgebra& c, const Caps& caps,
                             bool explicit_cap) {
  validate_caps(caps);
  if (!explicit_cap)
    if (auto why = coalgebra_obstruction(p, c)) throw Error(ErrorCode::NotCertifiablyConvergent, "fact_cohomology: " + *why);
  if (graded_dims(p.seq) != graded_dims(c.cooperad.seq))
    throw Error(ErrorCode::InvalidInput, "fact_cohomology: coalgebra lives over a different cooperad");
  const auto wd = dualize(w, c.dual.operad);
  // the dual side is bounded by weight alone
  return dualize(relative_tensor(wd, c.dual, open_window(caps), true).complex());
}

ChainMap free_collapse(const RightModule& m, const ChainComplex& v, const Caps& caps) {
  validate_caps(caps);
  check_plethysm_convergence(m.operad->seq, v, caps);
  // the weight cap alone bounds both sides, so the comparison is exact in every degree
  return free_collapse_map(m, v, {}, caps.max_arity, INT_MAX);
}

ChainMap cofree_collapse(const RightComodule& w, const Cooperad& p, const ChainComplex& v, const Caps& caps) {
  validate_caps(caps);
  auto pd = std::make_shared<const Operad>(dualize(p));
  const auto wd = dualize(w, pd);
  const auto vd = dualize(v);
  const auto dual = free_collapse_map(wd, vd, {}, caps.max_arity, INT_MAX);
  const auto src = dualize(dual.target());
  const auto tgt = dualize(dual.source());
  return ChainMap(src, tgt, dual_map(dual.matrix(), dual.source(), dual.target()));
}

RightModule restrict_module(const OperadMap& l, const RightModule& m) {
  if (m.operad.get() != l.target.get() && graded_dims(m.operad->seq) != graded_dims(l.target->seq))
    throw Error(ErrorCode::InvalidInput, "restrict_module: module is not over the target operad");
  RightModule out{m.name, l.source, m.seq, {}};
  const auto& f = m.field();
  for (const auto& [key, mat] : m.act) {
    const auto [mm, i, n] = key;
    auto it = l.components.find(n);
    if (it == l.components.end()) continue;
    const std::size_t dn = m.operad->seq.dim(n), dn2 = l.source->seq.dim(n);
    SparseMatrix a(mat.rows(), m.seq.dim(mm) * dn2);
    for (std::size_t x = 0; x < m.seq.dim(mm); ++x)
      for (std::size_t b = 0; b < dn2; ++b) {
        VecBuilder vb;
        for (const auto& [c, y] : it->second.col(b)) vb.add(mat.col(x * dn + c), y);
        a.set_col(x * dn2 + b, vb.finish(f));
      }
    if (!a.is_zero()) out.act.emplace(key, std::move(a));
  }
  return out;
}

RightModule triv_module(const SymmetricSequence& s, OperadPtr triv) {
  RightModule m{"seq", triv, s, {}};
  for (const auto& [n, x] : s.components())
    for (int i = 1; i <= n; ++i) m.act.emplace(SlotKey{n, i, 1}, SparseMatrix::identity(x.dim()));
  return m;
}

RightComodule triv_comodule(const SymmetricSequence& s, const Cooperad& triv) {
  if (triv.seq.dim(1) != 1) throw Error(ErrorCode::InvalidInput, "triv_comodule: cooperad is not triv");
  RightComodule w{"seq", s, {}};
  for (const auto& [n, x] : s.components())
    for (int i = 1; i <= n; ++i) w.coact.emplace(SlotKey{n, i, 1}, SparseMatrix::identity(x.dim()));
  return w;
}

DimCheck base_change_check(const OperadMap& l, const RightModule& m, const Algebra& a, const Caps& caps) {
  const int D = caps.max_degree;
  DimCheck r;
  r.lhs = homology_through(fact_homology(m, induce_algebra(l, a, caps), caps), D);
  r.rhs = homology_through(fact_homology(restrict_module(l, m), a, caps), D);
  r.ok = same_dims(r.lhs, r.rhs);
  return r;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::equivalent_within_caps:
      return "equivalent_within_caps";
    case Verdict::mismatch:
      return "mismatch";
    case Verdict::not_certified:
      return "not_certified";
  }
  return "unknown";
}

KoszulReport koszul_compare(const RightModule& m, const Algebra& a, const Caps& caps) {
  validate_caps(caps);
  KoszulReport r;
  r.operad = a.operad->name;
  r.module = m.name;
  r.algebra = a.name;
  r.caps = caps;
  if (auto why = algebra_obstruction(a)) {
    r.verdict = Verdict::not_certified;
    r.reason = *why;
    return r;
  }
  const int K = caps.max_arity, D = caps.max_degree;
  const auto& f = a.field();

  auto fail = [&](int k, int d) {
    if (!r.mismatch_at) r.mismatch_at = std::make_pair(k, d);
  };

  const auto bar_a = bar_algebra(a, caps);
  const auto bar_m = bar_module(m, caps);
  const auto& bar_o = bar_a.cooperad;
  if (auto why = coalgebra_obstruction(bar_o, bar_a)) {
    r.verdict = Verdict::not_certified;
    r.reason = *why;
    return r;
  }

  // tower comparison
  const auto tower = rho_tower(a, K, caps);
  for (int k = 1; k <= K; ++k) {
    TowerRow row;
    row.k = k;
    row.lhs = homology_through(fact_homology(m, tower.levels[static_cast<std::size_t>(k - 1)], caps), D);
    row.rhs = homology_through(fact_cohomology(bar_m, bar_o, tau(a.operad, bar_a, k, caps), caps), D);
    const auto diff = first_difference(row.lhs, row.rhs);
    row.ok = !diff;
    if (diff) fail(k, *diff);
    r.tower_tables.push_back(std::move(row));
  }

  // layers over triv
  auto triv = std::make_shared<const Operad>(builtin_operad("triv", K, f));
  const auto triv_co = dualize(*triv);
  const auto eps_m = bar_m.seq;
  for (int k = 2; k <= K; ++k) {
    LayerRow row;
    row.k = k;
    const auto& hi = tower.levels[static_cast<std::size_t>(k - 1)];
    const auto& lo = tower.levels[static_cast<std::size_t>(k - 2)];
    const auto step = relative_tensor_map(m, hi, lo, tower.maps[static_cast<std::size_t>(k - 2)], caps);
    row.fiber = shifted_down(homology_through(cone(step), D + 1), D);
    const auto layer = fiber_layer(a, k, caps);
    const auto tensor =
        fact_homology(triv_module(eps_m, triv), trivial_algebra(triv, layer.layer, layer.layer_weights), caps);
    const auto cotensor = fact_cohomology(triv_comodule(eps_m, triv_co), triv_co,
                                          trivial_coalgebra(triv_co, layer.layer, layer.layer_weights), caps);
    row.tensor = homology_through(tensor, D);
    row.cotensor = homology_through(cotensor, D);
    row.exact = chain_dims_through(tensor, D + 1) == chain_dims_through(cotensor, D + 1) &&
                same_dims(row.tensor, row.cotensor);
    const auto diff = first_difference(row.fiber, row.tensor);
    row.ok = row.exact && !diff;
    if (!row.exact) fail(k, first_difference(row.tensor, row.cotensor).value_or(D + 1));
    if (diff) fail(k, *diff);
    r.layer_tables.push_back(std::move(row));
  }

  // limit comparison
  r.lhs_homology = homology_through(fact_homology(m, a, caps), D);
  r.rhs_homology = homology_through(fact_cohomology(bar_m, bar_o, bar_a, caps), D);
  if (auto diff = first_difference(r.lhs_homology, r.rhs_homology)) fail(0, *diff);

  r.verdict = r.mismatch_at ? Verdict::mismatch : Verdict::equivalent_within_caps;
  return r;
}

}  // namespace opk
