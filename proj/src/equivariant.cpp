#include "opk/equivariant.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>

#include "opk/error.hpp"

namespace opk {

Perm identity_perm(int n) {
  Perm p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Perm compose_perm(const Perm& p, const Perm& q) {
  Perm r(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) r[a] = p[static_cast<std::size_t>(q[a])];
  return r;
}

Perm inverse_perm(const Perm& p) {
  Perm r(p.size());
  for (std::size_t a = 0; a < p.size(); ++a) r[static_cast<std::size_t>(p[a])] = static_cast<int>(a);
  return r;
}

int perm_sign(const Perm& p) {
  int inv = 0;
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b)
      if (p[a] > p[b]) ++inv;
  return inv % 2 == 0 ? 1 : -1;
}

std::vector<Perm> all_perms(int n) {
  std::vector<Perm> out;
  Perm p = identity_perm(n);
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::size_t perm_rank(const Perm& p) {
  // Lehmer code
  std::size_t r = 0;
  const std::size_t n = p.size();
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t smaller = 0;
    for (std::size_t b = a + 1; b < n; ++b)
      if (p[b] < p[a]) ++smaller;
    std::size_t f = 1;
    for (std::size_t k = 2; k + a < n; ++k) f *= k;
    r += smaller * f;
  }
  return r;
}

Perm word_to_perm(const std::vector<int>& word, int n) {
  Perm p = identity_perm(n);
  for (int i : word) {
    if (i < 1 || i >= n) throw Error(ErrorCode::IndexOutOfRange, "transposition index " + std::to_string(i) + " out of range for arity " + std::to_string(n));
    Perm s = identity_perm(n);
    std::swap(s[static_cast<std::size_t>(i - 1)], s[static_cast<std::size_t>(i)]);
    p = compose_perm(p, s);
  }
  return p;
}

std::vector<int> perm_to_word(const Perm& p) {
  // Bubble sort the one-line array; swapping positions k,k+1 is right
  // multiplication by s_{k+1}. If p s_{j1} ... s_{jr} = id then p = s_{jr} ... s_{j1}.
  Perm a = p;
  std::vector<int> swaps;
  const std::size_t n = a.size();
  for (std::size_t pass = 0; pass < n; ++pass)
    for (std::size_t k = 0; k + 1 < n; ++k)
      if (a[k] > a[k + 1]) {
        std::swap(a[k], a[k + 1]);
        swaps.push_back(static_cast<int>(k + 1));
      }
  std::reverse(swaps.begin(), swaps.end());
  return swaps;
}

void ValidationReport::merge(const ValidationReport& other, const std::string& prefix) {
  for (const auto& v : other.violations) violations.push_back(prefix + v);
}

EquivariantComplex::EquivariantComplex(ChainComplex complex, int arity, std::vector<SparseMatrix> transpositions)
    : complex_(std::move(complex)), arity_(arity), trans_(std::move(transpositions)) {
  if (arity < 0) throw Error(ErrorCode::InvalidInput, "negative arity");
  if (static_cast<int>(trans_.size()) != std::max(0, arity - 1))
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(std::max(0, arity - 1)) + " transpositions for arity " + std::to_string(arity));
}

EquivariantComplex EquivariantComplex::trivial(ChainComplex complex, int arity) {
  std::vector<SparseMatrix> t(static_cast<std::size_t>(std::max(0, arity - 1)), SparseMatrix::identity(complex.dim()));
  return EquivariantComplex(std::move(complex), arity, std::move(t));
}

EquivariantComplex EquivariantComplex::validated(ChainComplex complex, int arity, std::vector<SparseMatrix> transpositions) {
  EquivariantComplex x(std::move(complex), arity, std::move(transpositions));
  auto rep = validate_action(x);
  if (!rep.ok()) throw Error(ErrorCode::InvalidInput, "invalid symmetric-group action: " + rep.violations.front());
  return x;
}

SparseMatrix EquivariantComplex::action(const Perm& p) const {
  SparseMatrix m = SparseMatrix::identity(dim());
  for (int i : perm_to_word(p)) m = multiply(m, transposition(i), field());
  return m;
}

bool EquivariantComplex::is_monomial() const {
  for (const auto& t : trans_)
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const auto& col = t.col(c);
      if (col.size() != 1) return false;
      const auto& x = col.front().second;
      if (x != 1 && x != -1 && field().normalize(x * x) != 1) return false;
    }
  return true;
}

ValidationReport validate_action(const EquivariantComplex& x) {
  ValidationReport rep;
  const auto& f = x.field();
  const std::size_t n = x.dim();
  const int k = x.arity();
  const SparseMatrix id = SparseMatrix::identity(n);
  for (int i = 1; i < k; ++i) {
    const auto& s = x.transposition(i);
    if (s.rows() != n || s.cols() != n) {
      rep.add("s_" + std::to_string(i) + " has wrong shape");
      return rep;
    }
  }
  for (int i = 1; i < k; ++i) {
    const auto& s = x.transposition(i);
    std::string si = "s_" + std::to_string(i);
    if (!(multiply(s, s, f) == id)) rep.add(si + "^2 != id");
    for (std::size_t c = 0; c < n; ++c)
      for (const auto& [r, v] : s.col(c))
        if (x.complex().degree(r) != x.complex().degree(c)) rep.add(si + " does not preserve degree");
    const auto& d = x.complex().differential();
    if (!(multiply(d, s, f) == multiply(s, d, f))) rep.add(si + " does not commute with the differential");
    if (i + 1 < k) {
      const auto& t = x.transposition(i + 1);
      if (!(multiply(multiply(s, t, f), s, f) == multiply(multiply(t, s, f), t, f)))
        rep.add("braid relation fails for s_" + std::to_string(i) + ", s_" + std::to_string(i + 1));
    }
    for (int j = i + 2; j < k; ++j) {
      const auto& t = x.transposition(j);
      if (!(multiply(s, t, f) == multiply(t, s, f)))
        rep.add("s_" + std::to_string(i) + " and s_" + std::to_string(j) + " do not commute");
    }
  }
  return rep;
}

ChainMap permutation_action(const EquivariantComplex& x, const std::vector<int>& word) {
  SparseMatrix m = SparseMatrix::identity(x.dim());
  for (int i : word) {
    if (i < 1 || i >= x.arity())
      throw Error(ErrorCode::IndexOutOfRange, "s_" + std::to_string(i) + " out of range for arity " + std::to_string(x.arity()));
    m = multiply(m, x.transposition(i), x.field());
  }
  return ChainMap(x.complex(), x.complex(), std::move(m));
}

namespace {

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  std::fill(mask.begin(), mask.begin() + k, true);
  do {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)]) s.push_back(i);
    out.push_back(s);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return out;
}

// Sort raw generators by degree and remap columns of raw matrices.
struct Reindexed {
  std::vector<Generator> gens;
  std::vector<std::size_t> pos;  // raw -> sorted
};

Reindexed sort_by_degree(std::vector<Generator> raw) {
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a].degree < raw[b].degree; });
  Reindexed r;
  r.pos.resize(raw.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    r.pos[order[k]] = k;
    r.gens.push_back(raw[order[k]]);
  }
  return r;
}

}  // namespace

EquivariantComplex induce(const EquivariantComplex& x, const EquivariantComplex& y) {
  if (!(x.field() == y.field())) throw Error(ErrorCode::FieldMismatch, "induction over different fields");
  const auto& f = x.field();
  const int a = x.arity(), b = y.arity(), n = a + b;
  const auto shuffles = subsets(n, a);
  std::map<std::vector<int>, std::size_t> shuffle_index;
  for (std::size_t s = 0; s < shuffles.size(); ++s) shuffle_index[shuffles[s]] = s;
  const std::size_t nx = x.dim(), ny = y.dim(), block = nx * ny;
  auto raw_index = [&](std::size_t s, std::size_t i, std::size_t j) { return s * block + i * ny + j; };

  std::vector<Generator> raw;
  for (std::size_t s = 0; s < shuffles.size(); ++s) {
    std::string label = "{";
    for (std::size_t t = 0; t < shuffles[s].size(); ++t) label += (t ? "," : "") + std::to_string(shuffles[s][t] + 1);
    label += "}";
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        raw.push_back({label + ":(" + x.complex().generator(i).id + ")⊗(" + y.complex().generator(j).id + ")",
                       x.complex().degree(i) + y.complex().degree(j)});
  }
  auto re = sort_by_degree(raw);
  const std::size_t total = raw.size();

  SparseMatrix d(total, total);
  for (std::size_t s = 0; s < shuffles.size(); ++s)
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        VecBuilder vb;
        for (const auto& [r, v] : x.complex().differential().col(i)) vb.add(re.pos[raw_index(s, r, j)], v);
        Scalar sg = (x.complex().degree(i) % 2 == 0) ? 1 : -1;
        for (const auto& [r, v] : y.complex().differential().col(j)) vb.add(re.pos[raw_index(s, i, r)], sg * v);
        d.set_col(re.pos[raw_index(s, i, j)], vb.finish(f));
      }

  std::vector<SparseMatrix> trans;
  for (int k = 1; k < n; ++k) {
    const int p = k - 1;
    SparseMatrix t(total, total);
    for (std::size_t s = 0; s < shuffles.size(); ++s) {
      const auto& S = shuffles[s];
      bool in_p = std::binary_search(S.begin(), S.end(), p);
      bool in_q = std::binary_search(S.begin(), S.end(), p + 1);
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
          VecBuilder vb;
          if (in_p && in_q) {
            int r = static_cast<int>(std::lower_bound(S.begin(), S.end(), p) - S.begin());
            for (const auto& [ri, v] : x.transposition(r + 1).col(i)) vb.add(re.pos[raw_index(s, ri, j)], v);
          } else if (!in_p && !in_q) {
            int r = 0;
            for (int q = 0; q < p; ++q)
              if (!std::binary_search(S.begin(), S.end(), q)) ++r;
            for (const auto& [rj, v] : y.transposition(r + 1).col(j)) vb.add(re.pos[raw_index(s, i, rj)], v);
          } else {
            std::vector<int> S2 = S;
            for (auto& v : S2) {
              if (v == p) v = p + 1;
              else if (v == p + 1) v = p;
            }
            std::sort(S2.begin(), S2.end());
            vb.add(re.pos[raw_index(shuffle_index[S2], i, j)], 1);
          }
          t.set_col(re.pos[raw_index(s, i, j)], vb.finish(f));
        }
    }
    trans.push_back(std::move(t));
  }

  // Read (S, x⊗y) as y⊗x when min S > min T: conjugate the whole structure by
  // the diagonal sign (-1)^{|x||y|} on those generators.
  std::vector<bool> flip(total, false);
  if (a > 0 && b > 0)
    for (std::size_t s = 0; s < shuffles.size(); ++s) {
      const auto& S = shuffles[s];
      int min_t = 0;
      while (std::binary_search(S.begin(), S.end(), min_t)) ++min_t;
      if (S.front() < min_t) continue;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
          if (x.complex().degree(i) % 2 != 0 && y.complex().degree(j) % 2 != 0) flip[re.pos[raw_index(s, i, j)]] = true;
    }
  auto conjugate = [&](const SparseMatrix& m) {
    SparseMatrix out(m.rows(), m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      SparseVec v;
      for (const auto& [r, val] : m.col(c)) v.push_back(r, flip[r] != flip[c] ? f.neg(val) : val);
      out.set_col(c, std::move(v));
    }
    return out;
  };
  for (auto& t : trans) t = conjugate(t);
  return EquivariantComplex(ChainComplex(f, re.gens, conjugate(d)), n, std::move(trans));
}

void require_semisimple(const FieldSpec& f, int n, const std::string& context) {
  if (!f.factorial_invertible(n))
    throw Error(ErrorCode::NonSemisimpleContext,
                context + ": " + std::to_string(n) + "! is not invertible in " + f.name());
}

namespace {

// All group element matrices generated from the transpositions (BFS in the
// Cayley graph of Σ_n).
std::vector<SparseMatrix> all_elements(std::size_t dim, int n, const std::vector<SparseMatrix>& trans, const FieldSpec& f) {
  std::map<Perm, SparseMatrix> seen;
  std::deque<Perm> queue;
  seen.emplace(identity_perm(n), SparseMatrix::identity(dim));
  queue.push_back(identity_perm(n));
  while (!queue.empty()) {
    Perm p = queue.front();
    queue.pop_front();
    for (int i = 1; i < n; ++i) {
      Perm s = identity_perm(n);
      std::swap(s[static_cast<std::size_t>(i - 1)], s[static_cast<std::size_t>(i)]);
      Perm q = compose_perm(s, p);
      if (seen.count(q)) continue;
      seen.emplace(q, multiply(trans[static_cast<std::size_t>(i - 1)], seen.at(p), f));
      queue.push_back(q);
    }
  }
  std::vector<SparseMatrix> out;
  for (auto& [p, m] : seen) out.push_back(std::move(m));
  return out;
}

CoinvariantSplit split_from_idempotent(const SparseMatrix& e, const FieldSpec& f) {
  RowEchelon re = rref(e, f);
  CoinvariantSplit s;
  s.rank = re.pivot_cols.size();
  s.projection = SparseMatrix(s.rank, e.cols());
  // rows -> columns of the projection matrix
  std::vector<std::vector<std::pair<std::size_t, Scalar>>> cols(e.cols());
  for (std::size_t r = 0; r < re.rows.size(); ++r)
    for (const auto& [c, v] : re.rows[r]) cols[c].emplace_back(r, v);
  for (std::size_t c = 0; c < e.cols(); ++c) {
    SparseVec v;
    for (auto& [r, x] : cols[c]) v.push_back(r, x);
    s.projection.set_col(c, std::move(v));
  }
  s.section = e.select_cols(re.pivot_cols);
  s.representatives = re.pivot_cols;
  return s;
}

}  // namespace

CoinvariantSplit coinvariant_split(std::size_t dim, int arity, const std::vector<SparseMatrix>& trans, const FieldSpec& f) {
  bool monomial = true;
  for (const auto& t : trans)
    for (std::size_t c = 0; c < t.cols() && monomial; ++c) {
      const auto& col = t.col(c);
      if (col.size() != 1 || (col.front().second != 1 && f.normalize(col.front().second + 1) != 0)) monomial = false;
    }
  if (monomial) {
    // orbit enumeration with sign tracking
    std::vector<int> orbit(dim, -1);
    std::vector<int> sign(dim, 0);
    std::vector<bool> killed;
    std::vector<std::size_t> reps;
    for (std::size_t start = 0; start < dim; ++start) {
      if (orbit[start] >= 0) continue;
      int id = static_cast<int>(reps.size());
      reps.push_back(start);
      killed.push_back(false);
      orbit[start] = id;
      sign[start] = 1;
      std::deque<std::size_t> q{start};
      while (!q.empty()) {
        std::size_t t = q.front();
        q.pop_front();
        for (const auto& tr : trans) {
          const auto& [u, eps] = tr.col(t).front();
          int su = (eps == 1 ? 1 : -1) * sign[t];
          if (orbit[u] < 0) {
            orbit[u] = id;
            sign[u] = su;
            q.push_back(u);
          } else if (sign[u] != su) {
            killed[static_cast<std::size_t>(id)] = true;
          }
        }
      }
    }
    std::vector<int> qidx(reps.size(), -1);
    CoinvariantSplit s;
    for (std::size_t o = 0; o < reps.size(); ++o)
      if (!killed[o]) {
        qidx[o] = static_cast<int>(s.rank++);
        s.representatives.push_back(reps[o]);
      }
    s.projection = SparseMatrix(s.rank, dim);
    s.section = SparseMatrix(dim, s.rank);
    for (std::size_t t = 0; t < dim; ++t) {
      int o = qidx[static_cast<std::size_t>(orbit[t])];
      if (o >= 0) s.projection.set_col(t, SparseVec::unit(static_cast<std::size_t>(o), f.normalize(sign[t])));
    }
    for (std::size_t o = 0; o < s.rank; ++o) s.section.set_col(o, SparseVec::unit(s.representatives[o]));
    return s;
  }
  require_semisimple(f, arity, "coinvariants");
  auto elems = all_elements(dim, arity, trans, f);
  SparseMatrix e(dim, dim);
  for (const auto& g : elems) e = add(e, g, f);
  e = scale(e, f.inv(Scalar(static_cast<long>(elems.size()))), f);
  return split_from_idempotent(e, f);
}

namespace {

QuotientResult quotient_complex(const ChainComplex& c, SparseMatrix proj, SparseMatrix sect,
                                const std::vector<std::size_t>& reps, const std::string& tag) {
  const auto& f = c.field();
  std::vector<Generator> gens;
  for (auto r : reps) gens.push_back({tag + "[" + c.generator(r).id + "]", c.degree(r)});
  SparseMatrix d = multiply(multiply(proj, c.differential(), f), sect, f);
  QuotientResult q;
  q.complex = ChainComplex(f, std::move(gens), std::move(d));
  q.projection = std::move(proj);
  q.section = std::move(sect);
  return q;
}

}  // namespace

QuotientResult coinvariants(const EquivariantComplex& x) {
  require_semisimple(x.field(), x.arity(), "coinvariants");
  auto s = coinvariant_split(x.dim(), x.arity(), x.transpositions(), x.field());
  return quotient_complex(x.complex(), std::move(s.projection), std::move(s.section), s.representatives, "");
}

namespace {

QuotientResult fixed_points(const ChainComplex& c, const std::vector<SparseMatrix>& gens_minus_one) {
  const auto& f = c.field();
  const std::size_t n = c.dim();
  // stack (g - 1) vertically
  SparseMatrix stacked(n * std::max<std::size_t>(1, gens_minus_one.size()), n);
  if (!gens_minus_one.empty()) {
    for (std::size_t col = 0; col < n; ++col) {
      SparseVec v;
      for (std::size_t k = 0; k < gens_minus_one.size(); ++k)
        for (const auto& [r, x] : gens_minus_one[k].col(col)) v.push_back(k * n + r, x);
      stacked.set_col(col, std::move(v));
    }
  }
  auto basis = gens_minus_one.empty() ? std::vector<SparseVec>{} : nullspace(stacked, f);
  if (gens_minus_one.empty())
    for (std::size_t i = 0; i < n; ++i) basis.push_back(SparseVec::unit(i));
  // Each nullspace vector has a distinguished free coordinate equal to 1 and
  // zero at the other free coordinates: that coordinate is a retraction.
  std::vector<std::size_t> free_coord;
  RowEchelon re = gens_minus_one.empty() ? RowEchelon{} : rref(stacked, f);
  std::vector<bool> piv(n, false);
  for (auto p : re.pivot_cols) piv[p] = true;
  for (std::size_t j = 0; j < n; ++j)
    if (!piv[j]) free_coord.push_back(j);
  SparseMatrix sect(n, basis.size());
  SparseMatrix proj(basis.size(), n);
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    sect.set_col(k, basis[k]);
    proj.set_col(free_coord[k], SparseVec::unit(k));
    // representative: a generator in the support with the right degree
    reps.push_back(free_coord[k]);
  }
  return quotient_complex(c, std::move(proj), std::move(sect), reps, "inv");
}

}  // namespace

QuotientResult invariants(const EquivariantComplex& x) {
  require_semisimple(x.field(), x.arity(), "invariants");
  std::vector<SparseMatrix> gm1;
  SparseMatrix id = SparseMatrix::identity(x.dim());
  for (const auto& t : x.transpositions()) gm1.push_back(add(t, scale(id, -1, x.field()), x.field()));
  return fixed_points(x.complex(), gm1);
}

QuotientResult group_coinvariants(const ChainComplex& c, const std::vector<SparseMatrix>& elements) {
  const auto& f = c.field();
  if (elements.empty()) throw Error(ErrorCode::InvalidInput, "empty group");
  Scalar order(static_cast<long>(elements.size()));
  if (f.normalize(order) == 0)
    throw Error(ErrorCode::NonSemisimpleContext, "group order " + std::to_string(elements.size()) + " not invertible in " + f.name());
  SparseMatrix e(c.dim(), c.dim());
  for (const auto& g : elements) e = add(e, g, f);
  e = scale(e, f.inv(order), f);
  auto s = split_from_idempotent(e, f);
  return quotient_complex(c, std::move(s.projection), std::move(s.section), s.representatives, "");
}

QuotientResult group_invariants(const ChainComplex& c, const std::vector<SparseMatrix>& elements) {
  const auto& f = c.field();
  Scalar order(static_cast<long>(elements.size()));
  if (f.normalize(order) == 0)
    throw Error(ErrorCode::NonSemisimpleContext, "group order " + std::to_string(elements.size()) + " not invertible in " + f.name());
  std::vector<SparseMatrix> gm1;
  SparseMatrix id = SparseMatrix::identity(c.dim());
  for (const auto& g : elements) gm1.push_back(add(g, scale(id, -1, f), f));
  return fixed_points(c, gm1);
}

}  // namespace opk
