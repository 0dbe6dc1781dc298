#include "opk/operad.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>

#include "opk/error.hpp"

namespace opk {

namespace {

bool odd(int d) { return d % 2 != 0; }

std::string key_str(int m, int i, int n) {
  return "(" + std::to_string(m) + "," + std::to_string(i) + "," + std::to_string(n) + ")";
}

const SparseVec& slot_col(const SlotMaps& maps, const SymmetricSequence& right, int m, int i, int n,
                          std::size_t a, std::size_t b) {
  static const SparseVec empty;
  auto it = maps.find({m, i, n});
  if (it == maps.end()) return empty;
  return it->second.col(a * right.dim(n) + b);
}

using CompFn = std::function<SparseVec(int, int, int, std::size_t, std::size_t)>;

SparseVec bilinear(const CompFn& fn, int m, int i, int n, const SparseVec& x, const SparseVec& y,
                   const FieldSpec& f) {
  VecBuilder vb;
  for (const auto& [a, u] : x)
    for (const auto& [b, v] : y) vb.add(fn(m, i, n, a, b), u * v);
  return vb.finish(f);
}

// Checks a partial-composition structure L(m) ⊗ R(n) -> L(m+n-1), with R an
// operad through rc and unit `unit`.
struct StructureCheck {
  const SymmetricSequence& left;
  const SymmetricSequence& right;
  const SlotMaps* maps;
  CompFn lc;
  CompFn rc;
  std::size_t unit;
  bool left_unit;
  ValidationReport report;
  std::set<std::string> seen;
  std::map<std::pair<int, Perm>, SparseMatrix> actions;

  void fail(const std::string& what) {
    if (seen.insert(what).second) report.add(what);
  }
  const SparseMatrix& act(int n, const Perm& p) {
    auto key = std::make_pair(n, p);
    auto it = actions.find(key);
    if (it != actions.end()) return it->second;
    return actions.emplace(key, left.at(n).action(p)).first->second;
  }
  std::vector<int> arities(const SymmetricSequence& s) const {
    std::vector<int> out;
    for (const auto& [n, x] : s.components()) out.push_back(n);
    return out;
  }

  void run() {
    const auto& f = left.field();
    const int top = left.max_arity();
    if (maps) {
      for (const auto& [key, mat] : *maps) {
        auto [m, i, n] = key;
        if (i < 1 || i > m) fail("slot out of range " + key_str(m, i, n));
        if (mat.rows() != left.dim(m + n - 1) || mat.cols() != left.dim(m) * right.dim(n))
          fail("composition " + key_str(m, i, n) + " has the wrong shape");
      }
    }
    for (int m : arities(left)) {
      for (int n : arities(right)) {
        if (m + n - 1 > top || m + n - 1 < 0) continue;
        for (int i = 1; i <= m; ++i) check_pair(m, i, n, f);
      }
    }
    if (right.dim(1) == 0) fail("no unit in arity 1");
    for (int m : arities(left))
      for (std::size_t a = 0; a < left.dim(m); ++a)
        for (int i = 1; i <= m; ++i)
          if (lc(m, i, 1, a, unit) != SparseVec::unit(a)) fail("right unit law fails in arity " + std::to_string(m));
    if (left_unit)
      for (int n : arities(right))
        for (std::size_t b = 0; b < right.dim(n); ++b)
          if (rc(1, 1, n, unit, b) != SparseVec::unit(b)) fail("left unit law fails in arity " + std::to_string(n));
    for (int m : arities(left))
      for (int n : arities(right))
        for (int p : arities(right)) {
          if (m + n + p - 2 > top || m + n + p - 2 < 0 || m + n - 1 < 0) continue;
          check_assoc(m, n, p, f);
        }
  }

  void check_pair(int m, int i, int n, const FieldSpec& f) {
    const auto& L = left.at(m).complex();
    const auto& R = right.at(n).complex();
    const auto& T = left.at(m + n - 1).complex();
    const std::string k = key_str(m, i, n);
    for (std::size_t a = 0; a < L.dim(); ++a) {
      for (std::size_t b = 0; b < R.dim(); ++b) {
        SparseVec ab = lc(m, i, n, a, b);
        for (const auto& [r, v] : ab)
          if (T.degree(r) != L.degree(a) + R.degree(b)) fail("composition " + k + " does not preserve degree");
        // differential
        SparseVec lhs = T.differential().apply(ab, f);
        VecBuilder rhs;
        rhs.add(bilinear(lc, m, i, n, L.differential().col(a), SparseVec::unit(b), f));
        rhs.add(bilinear(lc, m, i, n, SparseVec::unit(a), R.differential().col(b), f), odd(L.degree(a)) ? -1 : 1);
        if (lhs != rhs.finish(f)) fail("composition " + k + " does not commute with d");
        // equivariance on adjacent transpositions
        for (int s = 1; s < m; ++s) {
          Perm sig = word_to_perm({s}, m);
          SparseVec sa = left.at(m).transposition(s).col(a);
          int i2 = sig[static_cast<std::size_t>(i - 1)] + 1;
          SparseVec l2 = bilinear(lc, m, i2, n, sa, SparseVec::unit(b), f);
          SparseVec r2 = act(m + n - 1, block_perm(sig, i, identity_perm(n))).apply(ab, f);
          if (l2 != r2) fail("composition " + k + " is not equivariant in the outer inputs");
        }
        for (int s = 1; s < n; ++s) {
          Perm tau = word_to_perm({s}, n);
          SparseVec tb = right.at(n).transposition(s).col(b);
          SparseVec l2 = bilinear(lc, m, i, n, SparseVec::unit(a), tb, f);
          SparseVec r2 = act(m + n - 1, block_perm(identity_perm(m), i, tau)).apply(ab, f);
          if (l2 != r2) fail("composition " + k + " is not equivariant in the inner inputs");
        }
      }
    }
  }

  void check_assoc(int m, int n, int p, const FieldSpec& f) {
    const auto& L = left.at(m).complex();
    const auto& B = right.at(n).complex();
    const auto& C = right.at(p).complex();
    for (std::size_t a = 0; a < L.dim(); ++a)
      for (std::size_t b = 0; b < B.dim(); ++b)
        for (std::size_t c = 0; c < C.dim(); ++c)
          for (int i = 1; i <= m; ++i) {
            SparseVec ab = lc(m, i, n, a, b);
            for (int j = 1; j <= n; ++j) {
              SparseVec lhs = bilinear(lc, m + n - 1, i + j - 1, p, ab, SparseVec::unit(c), f);
              SparseVec rhs = bilinear(lc, m, i, n + p - 1, SparseVec::unit(a), rc(n, j, p, b, c), f);
              if (lhs != rhs)
                fail("sequential associativity fails at " + key_str(m, i, n) + " then slot " + std::to_string(j) +
                     " arity " + std::to_string(p));
            }
            for (int j = i + 1; j <= m; ++j) {
              SparseVec lhs = bilinear(lc, m + n - 1, j + n - 1, p, ab, SparseVec::unit(c), f);
              SparseVec ac = lc(m, j, p, a, c);
              SparseVec rhs = bilinear(lc, m + p - 1, i, n, ac, SparseVec::unit(b), f);
              if (odd(B.degree(b)) && odd(C.degree(c))) rhs.scale(-1, f);
              if (lhs != rhs)
                fail("parallel associativity fails at slots " + std::to_string(i) + "," + std::to_string(j) +
                     " arities " + std::to_string(m) + "," + std::to_string(n) + "," + std::to_string(p));
            }
          }
  }
};

bool connected(const SymmetricSequence& s) {
  for (const auto& [n, x] : s.components())
    for (const auto& g : x.complex().generators())
      if (g.degree < 0) return false;
  return true;
}

}  // namespace

Perm block_perm(const Perm& sigma, int i, const Perm& tau) {
  const int m = static_cast<int>(sigma.size()), n = static_cast<int>(tau.size());
  const int c0 = i - 1;
  const int t0 = sigma[static_cast<std::size_t>(c0)];
  auto place = [&](int c) { return c < t0 ? c : c + n - 1; };
  Perm out(static_cast<std::size_t>(m + n - 1));
  for (int a = 0; a < m + n - 1; ++a) {
    if (a >= c0 && a < c0 + n) {
      out[static_cast<std::size_t>(a)] = t0 + tau[static_cast<std::size_t>(a - c0)];
    } else {
      int c = a < c0 ? a : a - n + 1;
      out[static_cast<std::size_t>(a)] = place(sigma[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

SparseVec Operad::compose(int m, int i, int n, std::size_t a, std::size_t b) const {
  return slot_col(comp, seq, m, i, n, a, b);
}

bool Operad::is_reduced() const {
  if (seq.dim(1) != 1) return false;
  return unit == 0 && seq.degree(1, 0) == 0;
}

SparseVec OperadMap::apply(int n, std::size_t g) const {
  auto it = components.find(n);
  if (it == components.end()) return {};
  return it->second.col(g);
}

OperadReport validate_operad(const Operad& o) {
  OperadReport r;
  r.report = o.seq.validate();
  if (!r.report.ok()) return r;
  if (o.seq.dim(1) <= o.unit) {
    r.report.add("unit generator missing in arity 1");
    return r;
  }
  if (o.seq.degree(1, o.unit) != 0) r.report.add("unit is not in degree 0");
  if (!o.seq.at(1).complex().differential().col(o.unit).empty()) r.report.add("unit is not a cycle");
  CompFn fn = [&o](int m, int i, int n, std::size_t a, std::size_t b) { return o.compose(m, i, n, a, b); };
  StructureCheck check{o.seq, o.seq, &o.comp, fn, fn, o.unit, true, {}, {}, {}};
  check.run();
  r.report.merge(check.report);
  r.reduced = o.is_reduced();
  r.nonunital = o.is_nonunital();
  r.connected = connected(o.seq);
  return r;
}

ValidationReport validate_module(const RightModule& m) {
  ValidationReport r = m.seq.validate();
  if (!m.operad) {
    r.add("module has no operad");
    return r;
  }
  if (!(m.seq.field() == m.operad->field())) r.add("module and operad fields differ");
  if (!r.ok()) return r;
  const Operad& o = *m.operad;
  CompFn lc = [&m](int a1, int i, int n, std::size_t a, std::size_t b) {
    return slot_col(m.act, m.operad->seq, a1, i, n, a, b);
  };
  CompFn rc = [&o](int a1, int i, int n, std::size_t a, std::size_t b) { return o.compose(a1, i, n, a, b); };
  StructureCheck check{m.seq, o.seq, &m.act, lc, rc, o.unit, false, {}, {}, {}};
  check.run();
  r.merge(check.report);
  return r;
}

ValidationReport validate_operad_map(const OperadMap& fm) {
  ValidationReport r;
  if (!fm.source || !fm.target) {
    r.add("operad map without source or target");
    return r;
  }
  const auto& s = *fm.source;
  const auto& t = *fm.target;
  const auto& f = s.field();
  for (const auto& [n, x] : s.seq.components()) {
    auto it = fm.components.find(n);
    SparseMatrix mat = it == fm.components.end() ? SparseMatrix(t.seq.dim(n), x.dim()) : it->second;
    const std::string an = "arity " + std::to_string(n) + ": ";
    if (mat.rows() != t.seq.dim(n) || mat.cols() != x.dim()) {
      r.add(an + "component has the wrong shape");
      continue;
    }
    const auto& y = t.seq.at(n);
    for (std::size_t g = 0; g < x.dim(); ++g)
      for (const auto& [row, v] : mat.col(g))
        if (y.complex().degree(row) != x.complex().degree(g)) r.add(an + "component does not preserve degree");
    if (!(multiply(y.complex().differential(), mat, f) == multiply(mat, x.complex().differential(), f)))
      r.add(an + "component does not commute with d");
    for (int i = 1; i < n; ++i)
      if (!(multiply(y.transposition(i), mat, f) == multiply(mat, x.transposition(i), f)))
        r.add(an + "component is not equivariant");
  }
  if (s.seq.dim(1) > s.unit && fm.apply(1, s.unit) != SparseVec::unit(t.unit)) r.add("unit is not preserved");
  for (const auto& [key, mat] : s.comp) {
    auto [m, i, n] = key;
    const std::size_t dn = s.seq.dim(n);
    bool bad = false;
    for (std::size_t a = 0; a < s.seq.dim(m) && !bad; ++a)
      for (std::size_t b = 0; b < dn && !bad; ++b) {
        SparseVec lhs;
        {
          VecBuilder vb;
          for (const auto& [c, v] : mat.col(a * dn + b)) vb.add(fm.apply(m + n - 1, c), v);
          lhs = vb.finish(f);
        }
        CompFn tc = [&t](int m1, int i1, int n1, std::size_t a1, std::size_t b1) {
          return t.compose(m1, i1, n1, a1, b1);
        };
        SparseVec rhs = bilinear(tc, m, i, n, fm.apply(m, a), fm.apply(n, b), f);
        if (lhs != rhs) {
          r.add("compositions are not preserved at " + key_str(m, i, n));
          bad = true;
        }
      }
  }
  return r;
}

}  // namespace opk

namespace opk {

namespace {

using SlotFn = std::function<SparseVec(int m, int i, int n, std::size_t a, std::size_t b)>;

// Fills every slot map L(m) ⊗ R(n) -> T(m+n-1) with target arity <= top.
SlotMaps build_slots(const SymmetricSequence& left, const SymmetricSequence& right, const SymmetricSequence& target,
                     const SlotFn& fn) {
  SlotMaps out;
  const int top = target.max_arity();
  for (const auto& [m, x] : left.components())
    for (const auto& [n, y] : right.components()) {
      if (m + n - 1 > top || m + n - 1 < 0 || !target.has(m + n - 1)) continue;
      for (int i = 1; i <= m; ++i) {
        SparseMatrix mat(target.dim(m + n - 1), x.dim() * y.dim());
        for (std::size_t a = 0; a < x.dim(); ++a)
          for (std::size_t b = 0; b < y.dim(); ++b) mat.set_col(a * y.dim() + b, fn(m, i, n, a, b));
        if (!mat.is_zero()) out.emplace(SlotKey{m, i, n}, std::move(mat));
      }
    }
  return out;
}

ChainComplex zero_d(const FieldSpec& f, std::vector<Generator> gens) {
  const std::size_t n = gens.size();
  return ChainComplex(f, std::move(gens), SparseMatrix(n, n));
}

EquivariantComplex regular_rep(int n, const FieldSpec& f) {
  auto perms = all_perms(n);
  std::vector<Generator> gens;
  for (const auto& p : perms) {
    std::string id = "x";
    for (int a : p) id += std::to_string(a + 1);
    gens.push_back({id, 0});
  }
  std::vector<SparseMatrix> trans;
  for (int i = 1; i < n; ++i) {
    Perm s = word_to_perm({i}, n);
    SparseMatrix t(perms.size(), perms.size());
    for (std::size_t k = 0; k < perms.size(); ++k) t.set_col(k, SparseVec::unit(perm_rank(compose_perm(s, perms[k]))));
    trans.push_back(std::move(t));
  }
  return EquivariantComplex(zero_d(f, std::move(gens)), n, std::move(trans));
}

// Word of a ∘_i b for monomials given as one-line permutations.
Perm substitute(const Perm& p, int i, const Perm& q) {
  const int n = static_cast<int>(q.size());
  Perm out;
  for (int a : p) {
    if (a < i - 1) out.push_back(a);
    else if (a == i - 1)
      for (int c : q) out.push_back(c + i - 1);
    else out.push_back(a + n - 1);
  }
  return out;
}

}  // namespace

bool is_builtin_operad(const std::string& name) { return name == "triv" || name == "com" || name == "ass"; }

Operad builtin_operad(const std::string& name, int max_arity, const FieldSpec& field) {
  if (max_arity < 1) throw Error(ErrorCode::InvalidInput, "max_arity must be at least 1");
  Operad o;
  o.name = name;
  o.seq = SymmetricSequence(field);
  if (name == "triv") {
    o.seq = unit_sequence(field);
  } else if (name == "com") {
    for (int n = 1; n <= max_arity; ++n)
      o.seq.set(n, EquivariantComplex::trivial(zero_d(field, {{"mu" + std::to_string(n), 0}}), n));
  } else if (name == "ass") {
    for (int n = 1; n <= max_arity; ++n) o.seq.set(n, regular_rep(n, field));
  } else {
    throw Error(ErrorCode::UnknownName, "unknown operad '" + name + "'");
  }
  if (name == "ass") {
    std::map<int, std::vector<Perm>> perms;
    for (int n = 1; n <= max_arity; ++n) perms[n] = all_perms(n);
    o.comp = build_slots(o.seq, o.seq, o.seq, [&](int m, int i, int n, std::size_t a, std::size_t b) {
      return SparseVec::unit(perm_rank(substitute(perms[m][a], i, perms[n][b])));
    });
  } else {
    o.comp = build_slots(o.seq, o.seq, o.seq, [](int, int, int, std::size_t, std::size_t) { return SparseVec::unit(0); });
  }
  return o;
}

Operad truncate_operad(const Operad& o, int k) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "truncation level must be at least 1");
  Operad t;
  t.name = o.name + "_le" + std::to_string(k);
  t.seq = restrict(o.seq, k);
  t.unit = o.unit;
  for (const auto& [key, mat] : o.comp) {
    auto [m, i, n] = key;
    if (m <= k && n <= k && m + n - 1 <= k) t.comp.emplace(key, mat);
  }
  return t;
}

OperadMap truncation_map(OperadPtr o, OperadPtr truncated) {
  OperadMap f{o, truncated, {}};
  for (const auto& [n, x] : o->seq.components()) {
    if (truncated->seq.has(n)) {
      if (truncated->seq.dim(n) != x.dim()) throw Error(ErrorCode::InvalidInput, "truncation changes arity " + std::to_string(n));
      f.components.emplace(n, SparseMatrix::identity(x.dim()));
    } else {
      f.components.emplace(n, SparseMatrix(0, x.dim()));
    }
  }
  return f;
}

OperadMap identity_map(OperadPtr o) {
  OperadMap f{o, o, {}};
  for (const auto& [n, x] : o->seq.components()) f.components.emplace(n, SparseMatrix::identity(x.dim()));
  return f;
}

OperadMap compose_maps(const OperadMap& g, const OperadMap& f) {
  if (!f.target || !g.source || graded_dims(f.target->seq) != graded_dims(g.source->seq))
    throw Error(ErrorCode::InvalidInput, "operad maps are not composable");
  OperadMap h{f.source, g.target, {}};
  const auto& fld = f.source->field();
  for (const auto& [n, x] : f.source->seq.components()) {
    auto fi = f.components.find(n);
    auto gi = g.components.find(n);
    if (fi == f.components.end() || gi == g.components.end()) {
      h.components.emplace(n, SparseMatrix(g.target->seq.dim(n), x.dim()));
      continue;
    }
    h.components.emplace(n, multiply(gi->second, fi->second, fld));
  }
  return h;
}

OperadMap unit_map(OperadPtr triv, OperadPtr o) {
  OperadMap f{triv, o, {}};
  SparseMatrix m(o->seq.dim(1), 1);
  m.set_col(0, SparseVec::unit(o->unit));
  f.components.emplace(1, std::move(m));
  return f;
}

SymmetricSequence augmentation_ideal(const Operad& o) {
  if (!o.is_reduced()) throw Error(ErrorCode::InvalidInput, "augmentation ideal needs a reduced operad");
  SymmetricSequence s(o.field());
  for (const auto& [n, x] : o.seq.components())
    if (n != 1) s.set(n, x);
  return s;
}

}  // namespace opk

namespace opk {

Operad suspend(const Operad& o) {
  const auto& f = o.field();
  Operad s;
  s.name = "susp_" + o.name;
  s.unit = o.unit;
  s.seq = SymmetricSequence(f);
  for (const auto& [n, x] : o.seq.components()) {
    std::vector<Generator> gens = x.complex().generators();
    for (auto& g : gens) g.degree += n - 1;
    std::vector<SparseMatrix> trans;
    for (const auto& t : x.transpositions()) trans.push_back(scale(t, -1, f));
    s.seq.set(n, EquivariantComplex(ChainComplex(f, std::move(gens), x.complex().differential()), n, std::move(trans)));
  }
  for (const auto& [key, mat] : o.comp) {
    auto [m, i, n] = key;
    const std::size_t dn = o.seq.dim(n);
    SparseMatrix r(mat.rows(), mat.cols());
    for (std::size_t a = 0; a < o.seq.dim(m); ++a)
      for (std::size_t b = 0; b < dn; ++b) {
        SparseVec v = mat.col(a * dn + b);
        if (odd((i - 1) * (n - 1) + (m - 1) * o.seq.degree(n, b))) v.scale(-1, f);
        r.set_col(a * dn + b, std::move(v));
      }
    s.comp.emplace(key, std::move(r));
  }
  return s;
}

std::vector<std::size_t> dual_index(const ChainComplex& c) {
  std::vector<std::size_t> order(c.dim());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.degree(a) > c.degree(b); });
  std::vector<std::size_t> idx(c.dim());
  for (std::size_t q = 0; q < order.size(); ++q) idx[order[q]] = q;
  return idx;
}

namespace {

// Transpose of m : X -> Y written on dual bases, Y^∨ -> X^∨.
SparseMatrix dual_transpose(const SparseMatrix& m, const std::vector<std::size_t>& ix, const std::vector<std::size_t>& iy,
                            const FieldSpec& f) {
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trip;
  for (std::size_t k = 0; k < m.cols(); ++k)
    for (const auto& [j, v] : m.col(k)) trip.emplace_back(ix[k], iy[j], v);
  return SparseMatrix::from_triplets(m.cols(), m.rows(), trip, f);
}

// Slot maps L(m) ⊗ R(n) <-> T(m+n-1) transposed onto dual bases with the
// sign (-1)^{|a||b|}. `compose` says whether the input is a composition
// (columns = pairs) or a cocomposition (rows = pairs).
SlotMaps dual_slots(const SlotMaps& maps, const SymmetricSequence& left, const SymmetricSequence& right,
                    const SymmetricSequence& target, bool compose) {
  const auto& f = left.field();
  SlotMaps out;
  for (const auto& [key, mat] : maps) {
    auto [m, i, n] = key;
    const auto& L = left.at(m).complex();
    const auto& R = right.at(n).complex();
    const auto& T = target.at(m + n - 1).complex();
    auto il = dual_index(L), ir = dual_index(R), it = dual_index(T);
    const std::size_t dn = R.dim();
    std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trip;
    for (std::size_t col = 0; col < mat.cols(); ++col)
      for (const auto& [row, v] : mat.col(col)) {
        std::size_t pair = compose ? col : row;
        std::size_t c = compose ? row : col;
        std::size_t a = pair / dn, b = pair % dn;
        Scalar s = odd(L.degree(a)) && odd(R.degree(b)) ? Scalar(-v) : v;
        std::size_t dp = il[a] * dn + ir[b];
        if (compose) trip.emplace_back(dp, it[c], s);
        else trip.emplace_back(it[c], dp, s);
      }
    out.emplace(key, SparseMatrix::from_triplets(mat.cols(), mat.rows(), trip, f));
  }
  return out;
}

}  // namespace

ChainComplex dualize(const ChainComplex& c) {
  const auto& f = c.field();
  auto idx = dual_index(c);
  std::vector<Generator> gens(c.dim());
  for (std::size_t k = 0; k < c.dim(); ++k) gens[idx[k]] = {c.generator(k).id + "*", -c.degree(k)};
  SparseMatrix dt = c.differential().transpose();
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> trip;
  for (std::size_t j = 0; j < c.dim(); ++j)
    for (const auto& [k, v] : dt.col(j)) trip.emplace_back(idx[k], idx[j], odd(c.degree(j)) ? v : Scalar(-v));
  return ChainComplex(f, std::move(gens), SparseMatrix::from_triplets(c.dim(), c.dim(), trip, f));
}

SparseMatrix dual_map(const SparseMatrix& m, const ChainComplex& source, const ChainComplex& target) {
  return dual_transpose(m, dual_index(source), dual_index(target), source.field());
}

EquivariantComplex dualize(const EquivariantComplex& x) {
  auto idx = dual_index(x.complex());
  std::vector<SparseMatrix> trans;
  for (const auto& t : x.transpositions()) trans.push_back(dual_transpose(t, idx, idx, x.field()));
  return EquivariantComplex(dualize(x.complex()), x.arity(), std::move(trans));
}

SymmetricSequence dualize(const SymmetricSequence& s) {
  SymmetricSequence out(s.field());
  for (const auto& [n, x] : s.components()) out.set(n, dualize(x));
  return out;
}

Cooperad dualize(const Operad& o) {
  Cooperad p;
  p.name = o.name + "_dual";
  p.seq = dualize(o.seq);
  p.counit = dual_index(o.seq.at(1).complex()).at(o.unit);
  p.decomp = dual_slots(o.comp, o.seq, o.seq, o.seq, true);
  return p;
}

Operad dualize(const Cooperad& p) {
  Operad o;
  o.name = p.name + "_dual";
  o.seq = dualize(p.seq);
  o.unit = dual_index(p.seq.at(1).complex()).at(p.counit);
  o.comp = dual_slots(p.decomp, p.seq, p.seq, p.seq, false);
  return o;
}

RightComodule dualize(const RightModule& m) {
  RightComodule w;
  w.name = m.name + "_dual";
  w.seq = dualize(m.seq);
  w.coact = dual_slots(m.act, m.seq, m.operad->seq, m.seq, true);
  return w;
}

RightModule dualize(const RightComodule& w, OperadPtr dual_operad) {
  RightModule m;
  m.name = w.name + "_dual";
  m.operad = dual_operad;
  m.seq = dualize(w.seq);
  // the comodule's cooperad is the dual of dual_operad; degrees there are negated
  m.act = dual_slots(w.coact, w.seq, dualize(dual_operad->seq), w.seq, false);
  return m;
}

OperadReport validate_cooperad(const Cooperad& p) {
  Operad o = dualize(p);
  OperadReport r = validate_operad(o);
  r.reduced = p.seq.dim(1) == 1 && p.seq.degree(1, p.counit) == 0;
  r.nonunital = !p.seq.has(0);
  r.connected = connected(p.seq);
  return r;
}

RightModule self_module(OperadPtr o) { return RightModule{o->name, o, o->seq, o->comp}; }

RightModule trivial_module(OperadPtr o) {
  if (!o->is_reduced()) throw Error(ErrorCode::InvalidInput, "trivial module needs a reduced operad");
  RightModule m{"triv", o, unit_sequence(o->field()), {}};
  SparseMatrix a(1, 1);
  a.set_col(0, SparseVec::unit(0));
  m.act.emplace(SlotKey{1, 1, 1}, std::move(a));
  return m;
}

RightModule module_along(const OperadMap& f) {
  const Operad& t = *f.target;
  RightModule m{t.name, f.source, t.seq, {}};
  const auto& fld = t.field();
  m.act = build_slots(t.seq, f.source->seq, t.seq, [&](int a1, int i, int n, std::size_t a, std::size_t b) {
    VecBuilder vb;
    for (const auto& [c, v] : f.apply(n, b)) vb.add(t.compose(a1, i, n, a, c), v);
    return vb.finish(fld);
  });
  return m;
}

}  // namespace opk
