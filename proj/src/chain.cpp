#include "opk/chain.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "opk/error.hpp"

namespace opk {

ChainComplex::ChainComplex(FieldSpec field, std::vector<Generator> gens, SparseMatrix d) : field_(std::move(field)) {
  const std::size_t n = gens.size();
  if (d.rows() != n || d.cols() != n)
    throw Error(ErrorCode::InvalidInput, "differential must be square on the generator list");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gens[a].degree < gens[b].degree; });
  bool sorted = std::is_sorted(order.begin(), order.end());
  if (!sorted) {
    std::vector<std::size_t> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[order[i]] = i;
    SparseMatrix p(n, n);
    for (std::size_t c = 0; c < n; ++c) {
      VecBuilder b;
      for (const auto& [r, x] : d.col(order[c])) b.add(inv[r], x);
      p.set_col(c, b.finish(field_));
    }
    d = std::move(p);
    std::vector<Generator> g2;
    g2.reserve(n);
    for (auto i : order) g2.push_back(std::move(gens[i]));
    gens = std::move(g2);
  }
  for (std::size_t c = 0; c < n; ++c)
    for (const auto& [r, x] : d.col(c))
      if (gens[r].degree != gens[c].degree - 1)
        throw Error(ErrorCode::InvalidInput, "differential entry from '" + gens[c].id + "' (degree " +
                                                 std::to_string(gens[c].degree) + ") to '" + gens[r].id +
                                                 "' does not lower degree by one");
  gens_ = std::move(gens);
  d_ = std::move(d);
  if (!multiply(d_, d_, field_).is_zero()) throw Error(ErrorCode::InvalidInput, "differential does not square to zero");
}

ChainComplex ChainComplex::from_degrees(FieldSpec field, const std::map<int, std::vector<std::string>>& gens,
                                        const std::map<int, SparseMatrix>& differentials) {
  std::vector<Generator> all;
  std::map<int, std::size_t> offset;
  for (const auto& [deg, ids] : gens) {
    offset[deg] = all.size();
    for (const auto& id : ids) all.push_back({id, deg});
  }
  SparseMatrix d(all.size(), all.size());
  for (const auto& [deg, m] : differentials) {
    auto src = gens.find(deg);
    auto dst = gens.find(deg - 1);
    std::size_t ns = src == gens.end() ? 0 : src->second.size();
    std::size_t nt = dst == gens.end() ? 0 : dst->second.size();
    if (m.cols() != ns || m.rows() != nt)
      throw Error(ErrorCode::InvalidInput, "differential in degree " + std::to_string(deg) + " has wrong shape");
    for (std::size_t c = 0; c < ns; ++c) {
      SparseVec v;
      for (const auto& [r, x] : m.col(c)) v.push_back(offset[deg - 1] + r, x);
      d.set_col(offset[deg] + c, std::move(v));
    }
  }
  return ChainComplex(std::move(field), std::move(all), std::move(d));
}

std::vector<std::size_t> ChainComplex::indices_in_degree(int d) const {
  auto lo = std::lower_bound(gens_.begin(), gens_.end(), d, [](const Generator& g, int k) { return g.degree < k; });
  auto hi = std::upper_bound(gens_.begin(), gens_.end(), d, [](int k, const Generator& g) { return k < g.degree; });
  std::vector<std::size_t> out;
  for (auto it = lo; it != hi; ++it) out.push_back(static_cast<std::size_t>(it - gens_.begin()));
  return out;
}

std::size_t ChainComplex::dim_in_degree(int d) const { return indices_in_degree(d).size(); }

std::vector<int> ChainComplex::degrees() const {
  std::vector<int> out;
  for (const auto& g : gens_)
    if (out.empty() || out.back() != g.degree) out.push_back(g.degree);
  return out;
}

std::optional<std::size_t> ChainComplex::find(const std::string& id) const {
  for (std::size_t i = 0; i < gens_.size(); ++i)
    if (gens_[i].id == id) return i;
  return std::nullopt;
}

SparseMatrix ChainComplex::differential_block(int d) const {
  return d_.select(indices_in_degree(d - 1), indices_in_degree(d));
}

ChainMap::ChainMap(ChainComplex source, ChainComplex target, SparseMatrix matrix)
    : source_(std::move(source)), target_(std::move(target)), m_(std::move(matrix)) {
  if (!(source_.field() == target_.field())) throw Error(ErrorCode::FieldMismatch, "chain map between different fields");
  if (m_.rows() != target_.dim() || m_.cols() != source_.dim())
    throw Error(ErrorCode::InvalidInput, "chain map matrix has wrong shape");
  for (std::size_t c = 0; c < m_.cols(); ++c)
    for (const auto& [r, x] : m_.col(c))
      if (target_.degree(r) != source_.degree(c))
        throw Error(ErrorCode::InvalidInput, "chain map does not preserve degree");
  const auto& f = source_.field();
  if (!(multiply(target_.differential(), m_, f) == multiply(m_, source_.differential(), f)))
    throw Error(ErrorCode::InvalidInput, "map does not commute with differentials");
}

ChainMap ChainMap::identity(const ChainComplex& c) { return ChainMap(c, c, SparseMatrix::identity(c.dim())); }

ChainMap ChainMap::zero(const ChainComplex& s, const ChainComplex& t) {
  return ChainMap(s, t, SparseMatrix::zero(t.dim(), s.dim()));
}

SparseMatrix ChainMap::component(int d) const {
  return m_.select(target_.indices_in_degree(d), source_.indices_in_degree(d));
}

ChainMap compose(const ChainMap& g, const ChainMap& f) {
  if (f.target().dim() != g.source().dim()) throw Error(ErrorCode::InvalidInput, "chain maps not composable");
  return ChainMap(f.source(), g.target(), multiply(g.matrix(), f.matrix(), f.source().field()));
}

std::string HomologyReport::to_string() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [d, n] : dims) {
    if (!first) os << ", ";
    os << d << ": " << n;
    first = false;
  }
  os << "}";
  return os.str();
}

HomologyReport homology(const ChainComplex& c, bool with_witnesses) {
  HomologyReport rep;
  const auto& f = c.field();
  std::map<int, std::size_t> ranks;  // rank of d_d
  for (int d : c.degrees()) ranks[d] = rank_of_columns(c.differential(), c.indices_in_degree(d), f);
  for (int d : c.degrees()) {
    std::size_t n = c.dim_in_degree(d);
    std::size_t r_out = ranks[d];
    std::size_t r_in = ranks.count(d + 1) ? ranks[d + 1] : 0;
    std::size_t h = n - r_out - r_in;
    if (h > 0) rep.dims[d] = h;
  }
  if (!rep.dims.empty()) rep.certification.connectivity = rep.dims.begin()->first;
  if (with_witnesses) {
    std::map<int, std::vector<SparseVec>> w;
    for (const auto& [d, h] : rep.dims) {
      auto idx = c.indices_in_degree(d);
      Echelon span(f);
      for (auto j : c.indices_in_degree(d + 1)) span.insert(c.differential().col(j));
      // kernel of d_d inside the degree-d block
      SparseMatrix block = c.differential().select_cols(idx);
      for (const auto& k : nullspace(block, f)) {
        SparseVec g;
        for (const auto& [i, x] : k) g.push_back(idx[i], x);
        if (span.insert(g)) w[d].push_back(g);
      }
    }
    rep.basis_witnesses = std::move(w);
  }
  return rep;
}

HomologyReport homology_through(const ChainComplex& c, int max_degree) {
  HomologyReport full = homology(c);
  HomologyReport rep;
  for (const auto& [d, n] : full.dims)
    if (d <= max_degree) rep.dims[d] = n;
  if (!rep.dims.empty()) rep.certification.connectivity = rep.dims.begin()->first;
  rep.exact_through = max_degree;
  return rep;
}

bool same_dims(const HomologyReport& a, const HomologyReport& b) { return a.dims == b.dims; }

long euler_characteristic(const ChainComplex& c) {
  long chi = 0;
  for (const auto& g : c.generators()) chi += (g.degree % 2 == 0) ? 1 : -1;
  return chi;
}

long euler_characteristic(const HomologyReport& h) {
  long chi = 0;
  for (const auto& [d, n] : h.dims) chi += (d % 2 == 0 ? 1L : -1L) * static_cast<long>(n);
  return chi;
}

TensorProduct tensor(const ChainComplex& c, const ChainComplex& d) {
  if (!(c.field() == d.field())) throw Error(ErrorCode::FieldMismatch, "tensor of complexes over different fields");
  const auto& f = c.field();
  const std::size_t nc = c.dim(), nd = d.dim();
  std::vector<std::size_t> pairs(nc * nd);
  std::iota(pairs.begin(), pairs.end(), 0);
  std::stable_sort(pairs.begin(), pairs.end(), [&](std::size_t a, std::size_t b) {
    return c.degree(a / nd) + d.degree(a % nd) < c.degree(b / nd) + d.degree(b % nd);
  });
  TensorProduct out;
  out.pair_index.assign(nc * nd, 0);
  for (std::size_t k = 0; k < pairs.size(); ++k) out.pair_index[pairs[k]] = k;
  std::vector<Generator> gens;
  gens.reserve(pairs.size());
  for (auto p : pairs) {
    const auto& x = c.generator(p / nd);
    const auto& y = d.generator(p % nd);
    gens.push_back({"(" + x.id + ")⊗(" + y.id + ")", x.degree + y.degree});
  }
  SparseMatrix m(pairs.size(), pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    std::size_t i = pairs[k] / nd, j = pairs[k] % nd;
    VecBuilder b;
    for (const auto& [r, x] : c.differential().col(i)) b.add(out.pair_index[r * nd + j], x);
    Scalar s = (c.degree(i) % 2 == 0) ? 1 : -1;
    for (const auto& [r, x] : d.differential().col(j)) b.add(out.pair_index[i * nd + r], s * x);
    m.set_col(k, b.finish(f));
  }
  out.complex = ChainComplex(f, std::move(gens), std::move(m));
  return out;
}

ChainMap swap_map(const ChainComplex& c, const ChainComplex& d) {
  auto cd = tensor(c, d);
  auto dc = tensor(d, c);
  const std::size_t nc = c.dim(), nd = d.dim();
  SparseMatrix m(dc.complex.dim(), cd.complex.dim());
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < nd; ++j) {
      bool odd = (c.degree(i) % 2 != 0) && (d.degree(j) % 2 != 0);
      m.set_col(cd.pair_index[i * nd + j], SparseVec::unit(dc.pair_index[j * nc + i], odd ? -1 : 1));
    }
  return ChainMap(cd.complex, dc.complex, std::move(m));
}

ChainMap tensor(const ChainMap& f, const ChainMap& g) {
  auto s = tensor(f.source(), g.source());
  auto t = tensor(f.target(), g.target());
  const auto& fld = f.source().field();
  const std::size_t ns2 = g.source().dim(), nt2 = g.target().dim();
  SparseMatrix m(t.complex.dim(), s.complex.dim());
  for (std::size_t i = 0; i < f.source().dim(); ++i)
    for (std::size_t j = 0; j < ns2; ++j) {
      VecBuilder b;
      for (const auto& [ri, x] : f.matrix().col(i))
        for (const auto& [rj, y] : g.matrix().col(j)) b.add(t.pair_index[ri * nt2 + rj], x * y);
      m.set_col(s.pair_index[i * ns2 + j], b.finish(fld));
    }
  return ChainMap(s.complex, t.complex, std::move(m));
}

ChainComplex shift(const ChainComplex& c, int k) {
  std::vector<Generator> gens = c.generators();
  for (auto& g : gens) g.degree += k;
  SparseMatrix d = (k % 2 == 0) ? c.differential() : scale(c.differential(), -1, c.field());
  return ChainComplex(c.field(), std::move(gens), std::move(d));
}

ChainComplex cone(const ChainMap& f) {
  const auto& x = f.source();
  const auto& y = f.target();
  const auto& fld = x.field();
  const std::size_t nx = x.dim(), ny = y.dim();
  std::vector<Generator> gens;
  for (const auto& g : x.generators()) gens.push_back({"src." + g.id, g.degree + 1});
  for (const auto& g : y.generators()) gens.push_back({"tgt." + g.id, g.degree});
  SparseMatrix d(nx + ny, nx + ny);
  for (std::size_t i = 0; i < nx; ++i) {
    VecBuilder b;
    for (const auto& [r, v] : x.differential().col(i)) b.add(r, -v);
    for (const auto& [r, v] : f.matrix().col(i)) b.add(nx + r, v);
    d.set_col(i, b.finish(fld));
  }
  for (std::size_t j = 0; j < ny; ++j) {
    SparseVec v;
    for (const auto& [r, s] : y.differential().col(j)) v.push_back(nx + r, s);
    d.set_col(nx + j, std::move(v));
  }
  return ChainComplex(fld, std::move(gens), std::move(d));
}

bool is_quasi_iso(const ChainMap& f) { return homology(cone(f)).is_zero(); }

ChainComplex truncate_above(const ChainComplex& c, int max_degree) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < c.dim(); ++i)
    if (c.degree(i) <= max_degree) keep.push_back(i);
  std::vector<Generator> gens;
  for (auto i : keep) gens.push_back(c.generator(i));
  return ChainComplex(c.field(), std::move(gens), c.differential().select(keep, keep));
}

ChainComplex direct_sum(const ChainComplex& a, const ChainComplex& b) {
  if (!(a.field() == b.field())) throw Error(ErrorCode::FieldMismatch, "direct sum over different fields");
  std::vector<Generator> gens = a.generators();
  for (const auto& g : b.generators()) gens.push_back(g);
  return ChainComplex(a.field(), std::move(gens), direct_sum(a.differential(), b.differential()));
}

bool identical_up_to_ids(const ChainComplex& a, const ChainComplex& b) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.degree(i) != b.degree(i)) return false;
  return a.differential() == b.differential();
}

}  // namespace opk
