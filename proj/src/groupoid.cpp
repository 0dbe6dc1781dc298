#include "opk/groupoid.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <numeric>
#include <tuple>

#include "opk/error.hpp"

namespace opk {

namespace {

bool odd(long x) { return (x & 1) != 0; }

std::string perm_text(const Perm& p) {
  std::string s = "[";
  for (std::size_t a = 0; a < p.size(); ++a) s += (a ? "," : "") + std::to_string(p[a]);
  return s + "]";
}

/// Direct sum with known block offsets: generators are ordered by degree with
/// summand order kept inside a degree, matching the stable sort.
struct Sum {
  ChainComplex complex;
  std::vector<std::vector<std::size_t>> index;  // index[k][i] = position of generator i of summand k
};

Sum direct_sum_of(const std::vector<ChainComplex>& parts, const FieldSpec& f) {
  struct Item {
    int degree;
    std::size_t part, local;
  };
  std::vector<Item> items;
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (std::size_t i = 0; i < parts[k].dim(); ++i) items.push_back({parts[k].degree(i), k, i});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.degree < b.degree; });
  Sum s;
  s.index.resize(parts.size());
  for (std::size_t k = 0; k < parts.size(); ++k) s.index[k].resize(parts[k].dim());
  std::vector<Generator> gens;
  for (std::size_t n = 0; n < items.size(); ++n) {
    const auto& it = items[n];
    s.index[it.part][it.local] = n;
    gens.push_back({"c" + std::to_string(it.part) + ":" + parts[it.part].generator(it.local).id, it.degree});
  }
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (const auto& [r, c, x] : parts[k].differential().triplets()) t.emplace_back(s.index[k][r], s.index[k][c], x);
  s.complex = ChainComplex(f, std::move(gens), SparseMatrix::from_triplets(items.size(), items.size(), t, f));
  return s;
}

/// Matrix of a ⊗ b on tensor(c, d), both maps of degree 0.
SparseMatrix tensor_matrix(const TensorProduct& tp, const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f) {
  const std::size_t n = tp.complex.dim(), db = b.cols();
  SparseMatrix m(n, n);
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < db; ++j) {
      VecBuilder v;
      for (const auto& [r, x] : a.col(i))
        for (const auto& [s, y] : b.col(j)) v.add(tp.pair_index[r * db + s], x * y);
      m.set_col(tp.pair_index[i * db + j], v.finish(f));
    }
  return m;
}

/// Embedding of summand rows: rows of m placed at positions idx inside a space of size n.
SparseMatrix place_rows(const SparseMatrix& m, const std::vector<std::size_t>& idx, std::size_t n, const FieldSpec& f) {
  SparseMatrix out(n, m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    VecBuilder v;
    for (const auto& [r, x] : m.col(c)) v.add(idx[r], x);
    out.set_col(c, v.finish(f));
  }
  return out;
}

/// Columns of m placed at positions idx inside a space of size n.
SparseMatrix place_cols(const SparseMatrix& m, const std::vector<std::size_t>& idx, std::size_t n) {
  SparseMatrix out(m.rows(), n);
  for (std::size_t c = 0; c < m.cols(); ++c) out.set_col(idx[c], m.col(c));
  return out;
}

std::map<int, std::size_t> homology_dims(const ChainComplex& c) { return homology(c).dims; }

std::map<int, std::size_t> chain_dims(const ChainComplex& c) {
  std::map<int, std::size_t> out;
  for (const auto& g : c.generators()) ++out[g.degree];
  return out;
}

/// Path from the base point to every object of a component: transport[o] : base -> o.
std::vector<std::size_t> spanning_transports(const FiniteGroupoid& g, const std::vector<std::size_t>& comp) {
  std::vector<std::size_t> out(g.num_objects(), SIZE_MAX);
  out[comp.front()] = g.identity[comp.front()];
  std::vector<std::size_t> queue{comp.front()};
  std::vector<std::vector<std::size_t>> outgoing(g.num_objects());
  for (std::size_t m = 0; m < g.num_morphisms(); ++m) outgoing[g.src[m]].push_back(m);
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const std::size_t a = queue[q];
    for (std::size_t m : outgoing[a])
      if (out[g.tgt[m]] == SIZE_MAX) {
        out[g.tgt[m]] = g.compose(m, out[a]);
        queue.push_back(g.tgt[m]);
      }
  }
  return out;
}

}  // namespace

std::size_t FiniteGroupoid::compose(std::size_t g, std::size_t f) const {
  if (tgt.at(f) != src.at(g)) throw Error(ErrorCode::InvalidInput, "groupoid: morphisms not composable");
  auto it = comp.find({g, f});
  if (it == comp.end()) throw Error(ErrorCode::InvalidInput, "groupoid: composition table incomplete");
  return it->second;
}

std::size_t FiniteGroupoid::inverse(std::size_t f) const {
  for (std::size_t g : hom(tgt.at(f), src.at(f)))
    if (compose(g, f) == identity[src[f]]) return g;
  throw Error(ErrorCode::InvalidInput, "groupoid: morphism " + names.at(f) + " has no inverse");
}

std::vector<std::size_t> FiniteGroupoid::hom(std::size_t a, std::size_t b) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < num_morphisms(); ++m)
    if (src[m] == a && tgt[m] == b) out.push_back(m);
  return out;
}

ValidationReport validate_groupoid(const FiniteGroupoid& g) {
  ValidationReport r;
  const std::size_t no = g.num_objects(), nm = g.num_morphisms();
  if (g.identity.size() != no) r.add("identity list has wrong length");
  if (g.src.size() != nm || g.tgt.size() != nm) r.add("source/target lists have wrong length");
  if (!r.ok()) return r;
  for (std::size_t m = 0; m < nm; ++m)
    if (g.src[m] >= no || g.tgt[m] >= no) r.add("morphism " + g.names[m] + " has an unknown endpoint");
  for (std::size_t a = 0; a < no; ++a)
    if (g.identity[a] >= nm || g.src[g.identity[a]] != a || g.tgt[g.identity[a]] != a)
      r.add("identity of " + g.objects[a] + " is not an endomorphism");
  if (!r.ok()) return r;
  for (std::size_t f = 0; f < nm; ++f)
    for (std::size_t h = 0; h < nm; ++h) {
      if (g.tgt[f] != g.src[h]) continue;
      auto it = g.comp.find({h, f});
      if (it == g.comp.end() || it->second >= nm) {
        r.add("composite " + g.names[h] + "∘" + g.names[f] + " missing");
        continue;
      }
      if (g.src[it->second] != g.src[f] || g.tgt[it->second] != g.tgt[h])
        r.add("composite " + g.names[h] + "∘" + g.names[f] + " has wrong endpoints");
    }
  if (!r.ok()) return r;
  for (std::size_t f = 0; f < nm; ++f) {
    if (g.compose(g.identity[g.tgt[f]], f) != f || g.compose(f, g.identity[g.src[f]]) != f)
      r.add("identity is not a unit for " + g.names[f]);
    bool inv = false;
    for (std::size_t h : g.hom(g.tgt[f], g.src[f]))
      if (g.compose(h, f) == g.identity[g.src[f]] && g.compose(f, h) == g.identity[g.tgt[f]]) inv = true;
    if (!inv) r.add("morphism " + g.names[f] + " is not invertible");
  }
  for (const auto& [fg, gf] : g.comp) {
    const auto [h, f] = fg;
    for (std::size_t k = 0; k < nm; ++k) {
      if (g.src[k] != g.tgt[h]) continue;
      if (g.compose(k, gf) != g.compose(g.compose(k, h), f))
        r.add("composition not associative at " + g.names[k] + "," + g.names[h] + "," + g.names[f]);
    }
  }
  return r;
}

FiniteGroupoid fin_bij(int k, int from) {
  if (k < from || from < 0) throw Error(ErrorCode::InvalidInput, "fin_bij: need 0 <= from <= k");
  FiniteGroupoid g;
  std::vector<std::size_t> offset;
  for (int n = from; n <= k; ++n) {
    const std::size_t obj = g.objects.size();
    g.objects.push_back(std::to_string(n));
    offset.push_back(g.names.size());
    g.identity.push_back(g.names.size());
    for (const auto& p : all_perms(n)) {
      g.names.push_back(std::to_string(n) + ":" + perm_text(p));
      g.src.push_back(obj);
      g.tgt.push_back(obj);
    }
  }
  for (int n = from; n <= k; ++n) {
    const auto perms = all_perms(n);
    const std::size_t off = offset[static_cast<std::size_t>(n - from)];
    for (std::size_t a = 0; a < perms.size(); ++a)
      for (std::size_t b = 0; b < perms.size(); ++b)
        g.comp[{off + a, off + b}] = off + perm_rank(compose_perm(perms[a], perms[b]));
  }
  return g;
}

namespace {
int fin_size(const FiniteGroupoid& g, std::size_t object) { return std::stoi(g.objects.at(object)); }
}  // namespace

Perm fin_perm(const FiniteGroupoid& g, std::size_t m) {
  const int n = fin_size(g, g.src.at(m));
  return all_perms(n).at(m - g.identity[g.src[m]]);
}

FiniteGroupoid opposite(const FiniteGroupoid& g) {
  FiniteGroupoid o = g;
  for (auto& n : o.names) n += "^op";
  std::swap(o.src, o.tgt);
  o.comp.clear();
  for (const auto& [hf, c] : g.comp) o.comp[{hf.second, hf.first}] = c;
  return o;
}

FiniteGroupoid product(const FiniteGroupoid& a, const FiniteGroupoid& b) {
  FiniteGroupoid p;
  const std::size_t nb = b.num_objects(), mb = b.num_morphisms();
  for (std::size_t x = 0; x < a.num_objects(); ++x)
    for (std::size_t y = 0; y < nb; ++y) {
      p.objects.push_back("(" + a.objects[x] + "," + b.objects[y] + ")");
      p.identity.push_back(a.identity[x] * mb + b.identity[y]);
    }
  for (std::size_t f = 0; f < a.num_morphisms(); ++f)
    for (std::size_t g = 0; g < mb; ++g) {
      p.names.push_back("(" + a.names[f] + "," + b.names[g] + ")");
      p.src.push_back(a.src[f] * nb + b.src[g]);
      p.tgt.push_back(a.tgt[f] * nb + b.tgt[g]);
    }
  for (const auto& [hf, c] : a.comp)
    for (const auto& [kg, d] : b.comp) p.comp[{hf.first * mb + kg.first, hf.second * mb + kg.second}] = c * mb + d;
  return p;
}

std::vector<std::vector<std::size_t>> components(const FiniteGroupoid& g) {
  std::vector<std::size_t> parent(g.num_objects());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t m = 0; m < g.num_morphisms(); ++m) parent[find(g.src[m])] = find(g.tgt[m]);
  std::map<std::size_t, std::size_t> slot;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t o = 0; o < g.num_objects(); ++o) {
    auto [it, fresh] = slot.emplace(find(o), out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(o);
  }
  return out;
}

ValidationReport validate_functor(const GroupoidFunctor& f) {
  ValidationReport r;
  if (!f.source) {
    r.add("functor has no source groupoid");
    return r;
  }
  const auto& g = *f.source;
  if (f.values.size() != g.num_objects()) r.add("values list has wrong length");
  if (f.action.size() != g.num_morphisms()) r.add("action list has wrong length");
  if (!r.ok()) return r;
  for (std::size_t m = 0; m < g.num_morphisms(); ++m) {
    const auto& s = f.values[g.src[m]];
    const auto& t = f.values[g.tgt[m]];
    const auto& a = f.action[m];
    if (a.rows() != t.dim() || a.cols() != s.dim()) {
      r.add("action of " + g.names[m] + " has wrong shape");
      continue;
    }
    try {
      ChainMap(s, t, a);
    } catch (const Error& e) {
      r.add("action of " + g.names[m] + " is not a chain map: " + e.what());
    }
  }
  if (!r.ok()) return r;
  for (std::size_t o = 0; o < g.num_objects(); ++o)
    if (!(f.action[g.identity[o]] == SparseMatrix::identity(f.values[o].dim())))
      r.add("identity of " + g.objects[o] + " does not act as the identity");
  for (const auto& [hf, c] : g.comp) {
    const auto& field = f.values[g.src[hf.second]].field();
    if (!(multiply(f.action[hf.first], f.action[hf.second], field) == f.action[c]))
      r.add("functoriality fails at " + g.names[hf.first] + "∘" + g.names[hf.second]);
  }
  return r;
}

ValidationReport validate_groupoid_map(const GroupoidMap& j) {
  ValidationReport r;
  if (!j.source || !j.target) {
    r.add("groupoid map is missing an endpoint");
    return r;
  }
  const auto& s = *j.source;
  const auto& t = *j.target;
  if (j.obj.size() != s.num_objects() || j.mor.size() != s.num_morphisms()) {
    r.add("groupoid map has wrong table sizes");
    return r;
  }
  for (std::size_t m = 0; m < s.num_morphisms(); ++m)
    if (j.mor[m] >= t.num_morphisms() || t.src[j.mor[m]] != j.obj[s.src[m]] || t.tgt[j.mor[m]] != j.obj[s.tgt[m]])
      r.add("morphism " + s.names[m] + " lands on the wrong endpoints");
  if (!r.ok()) return r;
  for (std::size_t o = 0; o < s.num_objects(); ++o)
    if (j.mor[s.identity[o]] != t.identity[j.obj[o]]) r.add("identity of " + s.objects[o] + " not preserved");
  for (const auto& [hf, c] : s.comp)
    if (t.compose(j.mor[hf.first], j.mor[hf.second]) != j.mor[c])
      r.add("composition not preserved at " + s.names[hf.first] + "∘" + s.names[hf.second]);
  return r;
}

GroupoidMap fin_inclusion(GroupoidPtr small, GroupoidPtr large) {
  GroupoidMap j{small, large, {}, {}};
  std::map<int, std::size_t> by_size;
  for (std::size_t o = 0; o < large->num_objects(); ++o) by_size[fin_size(*large, o)] = o;
  for (std::size_t o = 0; o < small->num_objects(); ++o) {
    auto it = by_size.find(fin_size(*small, o));
    if (it == by_size.end()) throw Error(ErrorCode::InvalidInput, "fin_inclusion: size missing from the target");
    j.obj.push_back(it->second);
  }
  for (std::size_t m = 0; m < small->num_morphisms(); ++m)
    j.mor.push_back(large->identity[j.obj[small->src[m]]] + perm_rank(fin_perm(*small, m)));
  return j;
}

GroupoidMap identity_groupoid_map(GroupoidPtr g) {
  GroupoidMap j{g, g, std::vector<std::size_t>(g->num_objects()), std::vector<std::size_t>(g->num_morphisms())};
  std::iota(j.obj.begin(), j.obj.end(), 0);
  std::iota(j.mor.begin(), j.mor.end(), 0);
  return j;
}

TwistedArrow twisted_arrow(const FiniteGroupoid& g, bool with_table) {
  TwistedArrow t;
  auto& tw = t.groupoid;
  const std::size_t nm = g.num_morphisms(), no = g.num_objects();
  for (std::size_t phi = 0; phi < nm; ++phi) {
    tw.objects.push_back(g.names[phi]);
    t.proj_obj.push_back(g.src[phi] * no + g.tgt[phi]);
  }
  // morphism (φ, u, v) : φ -> v φ u, with u : a' -> a and v : b -> b'
  std::vector<std::vector<std::size_t>> into(no), out_of(no);
  for (std::size_t m = 0; m < nm; ++m) {
    into[g.tgt[m]].push_back(m);
    out_of[g.src[m]].push_back(m);
  }
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> index;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> triples;
  for (std::size_t phi = 0; phi < nm; ++phi)
    for (std::size_t u : into[g.src[phi]])
      for (std::size_t v : out_of[g.tgt[phi]]) {
        const std::size_t target = g.compose(v, g.compose(phi, u));
        index[{phi, u, v}] = tw.names.size();
        triples.emplace_back(phi, u, v);
        tw.names.push_back("(" + g.names[u] + "," + g.names[v] + ")@" + g.names[phi]);
        tw.src.push_back(phi);
        tw.tgt.push_back(target);
        t.proj_mor.push_back(u * nm + v);  // u read in G^op, so it runs a -> a' there
      }
  for (std::size_t phi = 0; phi < nm; ++phi)
    tw.identity.push_back(index.at({phi, g.identity[g.src[phi]], g.identity[g.tgt[phi]]}));
  for (std::size_t m1 = 0; with_table && m1 < triples.size(); ++m1) {
    const auto& [phi, u1, v1] = triples[m1];
    const std::size_t mid = tw.tgt[m1];
    for (std::size_t u2 : into[g.src[mid]])
      for (std::size_t v2 : out_of[g.tgt[mid]])
        tw.comp[{index.at({mid, u2, v2}), m1}] = index.at({phi, g.compose(u1, u2), g.compose(v2, v1)});
  }
  return t;
}

Colimit colimit(const GroupoidFunctor& f) {
  const auto& g = *f.source;
  const FieldSpec field = f.values.empty() ? FieldSpec() : f.values.front().field();
  Colimit out;
  out.components = components(g);
  std::vector<QuotientResult> parts;
  std::vector<std::vector<std::size_t>> transports;
  for (const auto& comp : out.components) {
    const std::size_t base = comp.front();
    std::vector<SparseMatrix> elements;
    for (std::size_t m : g.hom(base, base)) elements.push_back(f.action[m]);
    parts.push_back(group_coinvariants(f.values[base], elements));
    transports.push_back(spanning_transports(g, comp));
  }
  std::vector<ChainComplex> complexes;
  for (const auto& p : parts) complexes.push_back(p.complex);
  auto sum = direct_sum_of(complexes, field);
  out.complex = sum.complex;
  out.to_colimit.resize(g.num_objects());
  for (std::size_t k = 0; k < out.components.size(); ++k) {
    const auto& comp = out.components[k];
    const auto proj = place_rows(parts[k].projection, sum.index[k], out.complex.dim(), field);
    for (std::size_t o : comp) {
      // values[o] -> values[base] along the inverse of the transport
      const auto back = f.action[g.inverse(transports[k][o])];
      out.to_colimit[o] = multiply(proj, back, field);
    }
    out.sections.push_back(place_cols(parts[k].section, sum.index[k], out.complex.dim()));
  }
  return out;
}

ChainComplex limit(const GroupoidFunctor& f) {
  const auto& g = *f.source;
  const FieldSpec field = f.values.empty() ? FieldSpec() : f.values.front().field();
  std::vector<ChainComplex> parts;
  for (const auto& comp : components(g)) {
    const std::size_t base = comp.front();
    std::vector<SparseMatrix> elements;
    for (std::size_t m : g.hom(base, base)) elements.push_back(f.action[m]);
    parts.push_back(group_invariants(f.values[base], elements).complex);
  }
  return direct_sum_of(parts, field).complex;
}

namespace {

/// Per TwAr component: the value at the base point and its stabilizer action.
template <class Quot>
ChainComplex over_twisted_arrow(const FiniteGroupoid& g, const GroupoidFunctor& f, Quot quot) {
  const auto t = twisted_arrow(g, false);
  if (!f.source || f.source->num_objects() != g.num_objects() * g.num_objects() ||
      f.source->num_morphisms() != g.num_morphisms() * g.num_morphisms())
    throw Error(ErrorCode::InvalidInput, "(co)end: functor is not defined on G^op × G");
  const FieldSpec field = f.values.empty() ? FieldSpec() : f.values.front().field();
  std::vector<ChainComplex> parts;
  for (const auto& comp : components(t.groupoid)) {
    const std::size_t base = comp.front();
    std::vector<SparseMatrix> elements;
    for (std::size_t m : t.groupoid.hom(base, base)) elements.push_back(f.action[t.proj_mor[m]]);
    parts.push_back(quot(f.values[t.proj_obj[base]], elements).complex);
  }
  return direct_sum_of(parts, field).complex;
}

}  // namespace

ChainComplex coend(const FiniteGroupoid& g, const GroupoidFunctor& f) {
  return over_twisted_arrow(g, f, group_coinvariants);
}

ChainComplex end(const FiniteGroupoid& g, const GroupoidFunctor& f) {
  return over_twisted_arrow(g, f, group_invariants);
}

GroupoidFunctor tensor_functor(const GroupoidFunctor& x, const GroupoidFunctor& z) {
  if (x.source.get() != z.source.get() &&
      (x.source->num_objects() != z.source->num_objects() || x.source->num_morphisms() != z.source->num_morphisms()))
    throw Error(ErrorCode::InvalidInput, "tensor_functor: functors live on different groupoids");
  const auto& g = *x.source;
  auto p = std::make_shared<const FiniteGroupoid>(product(opposite(g), g));
  const std::size_t no = g.num_objects(), nm = g.num_morphisms();
  GroupoidFunctor out{p, {}, {}};
  std::vector<TensorProduct> tps;
  for (std::size_t a = 0; a < no; ++a)
    for (std::size_t b = 0; b < no; ++b) {
      tps.push_back(tensor(x.values[a], z.values[b]));
      out.values.push_back(tps.back().complex);
    }
  std::vector<std::size_t> inv(nm);
  for (std::size_t m = 0; m < nm; ++m) inv[m] = g.inverse(m);
  for (std::size_t u = 0; u < nm; ++u)
    for (std::size_t v = 0; v < nm; ++v) {
      // u^op : tgt u -> src u acts on X through u^{-1}
      const auto& tp = tps[g.tgt[u] * no + g.src[v]];
      const std::size_t to = g.src[u] * no + g.tgt[v];
      const auto& field = tp.complex.field();
      if (g.src[u] == g.tgt[u] && g.src[v] == g.tgt[v]) {
        out.action.push_back(tensor_matrix(tp, x.action[inv[u]], z.action[v], field));
        continue;
      }
      // off-diagonal: source and target tensor layouts differ
      const auto& tt = tps[to];
      const auto& a = x.action[inv[u]];
      const auto& b = z.action[v];
      const std::size_t db = z.values[g.src[v]].dim(), dbt = z.values[g.tgt[v]].dim();
      SparseMatrix m(tt.complex.dim(), tp.complex.dim());
      for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = 0; j < db; ++j) {
          VecBuilder vb;
          for (const auto& [r, s1] : a.col(i))
            for (const auto& [s, s2] : b.col(j)) vb.add(tt.pair_index[r * dbt + s], s1 * s2);
          m.set_col(tp.pair_index[i * db + j], vb.finish(field));
        }
      out.action.push_back(std::move(m));
    }
  return out;
}

ChainComplex tensor_over(const GroupoidFunctor& x, const GroupoidFunctor& z) {
  return coend(*x.source, tensor_functor(x, z));
}

GroupoidFunctor sequence_functor(const SymmetricSequence& s, GroupoidPtr fin) {
  GroupoidFunctor out{fin, {}, {}};
  for (std::size_t o = 0; o < fin->num_objects(); ++o) out.values.push_back(s.at(fin_size(*fin, o)).complex());
  for (std::size_t m = 0; m < fin->num_morphisms(); ++m) {
    const auto& x = s.at(fin_size(*fin, fin->src[m]));
    out.action.push_back(x.dim() == 0 ? SparseMatrix(0, 0) : x.action(fin_perm(*fin, m)));
  }
  return out;
}

GroupoidFunctor tensor_powers(const ChainComplex& t, GroupoidPtr fin) {
  const auto& field = t.field();
  const std::size_t dt = t.dim();
  GroupoidFunctor out{fin, {}, {}};
  // position of each tuple (base dt digits, first factor most significant)
  std::vector<std::vector<std::size_t>> pos(fin->num_objects());
  for (std::size_t o = 0; o < fin->num_objects(); ++o) {
    const int n = fin_size(*fin, o);
    ChainComplex c(field, {{"1", 0}}, SparseMatrix(1, 1));
    std::vector<std::size_t> p{0};
    for (int k = 0; k < n; ++k) {
      auto tp = tensor(c, t);
      std::vector<std::size_t> q(p.size() * dt);
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < dt; ++j) q[i * dt + j] = tp.pair_index[p[i] * dt + j];
      c = tp.complex;
      p = std::move(q);
    }
    out.values.push_back(c);
    pos[o] = std::move(p);
  }
  for (std::size_t m = 0; m < fin->num_morphisms(); ++m) {
    const std::size_t o = fin->src[m];
    const Perm perm = fin_perm(*fin, m);
    const std::size_t n = perm.size(), total = pos[o].size();
    SparseMatrix a(total, total);
    std::vector<std::size_t> digits(n), moved(n);
    for (std::size_t code = 0; code < total; ++code) {
      std::size_t rest = code;
      for (std::size_t k = n; k-- > 0;) {
        digits[k] = rest % dt;
        rest /= dt;
      }
      // factor a moves to position perm[a]
      bool neg = false;
      for (std::size_t i = 0; i < n; ++i) {
        moved[static_cast<std::size_t>(perm[i])] = digits[i];
        for (std::size_t j = i + 1; j < n; ++j)
          if (perm[i] > perm[j] && odd(static_cast<long>(t.degree(digits[i])) * t.degree(digits[j]))) neg = !neg;
      }
      std::size_t image = 0;
      for (std::size_t k = 0; k < n; ++k) image = image * dt + moved[k];
      a.set_col(pos[o][code], SparseVec::unit(pos[o][image], sign_scalar(neg)));
    }
    out.action.push_back(std::move(a));
  }
  return out;
}

GroupoidFunctor pullback(const GroupoidMap& j, const GroupoidFunctor& x) {
  GroupoidFunctor out{j.source, {}, {}};
  for (std::size_t o = 0; o < j.source->num_objects(); ++o) out.values.push_back(x.values[j.obj[o]]);
  for (std::size_t m = 0; m < j.source->num_morphisms(); ++m) out.action.push_back(x.action[j.mor[m]]);
  return out;
}

namespace {

/// Comma groupoid j/c: objects (c', h : j c' -> c), morphisms w : c' -> c''
/// sending (c', h) to (c'', h ∘ j(w)^{-1}).
struct Comma {
  GroupoidPtr groupoid;
  std::vector<std::pair<std::size_t, std::size_t>> objs;  // (c', h)
  std::vector<std::size_t> mor;                           // underlying morphism of C'
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
};

Comma comma(const GroupoidMap& j, std::size_t c) {
  const auto& s = *j.source;
  const auto& t = *j.target;
  Comma out;
  FiniteGroupoid g;
  for (std::size_t cp = 0; cp < s.num_objects(); ++cp)
    for (std::size_t h : t.hom(j.obj[cp], c)) {
      out.lookup[{cp, h}] = out.objs.size();
      out.objs.emplace_back(cp, h);
      g.objects.push_back(s.objects[cp] + "|" + t.names[h]);
    }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> mindex;  // (object, w)
  for (std::size_t o = 0; o < out.objs.size(); ++o) {
    const auto [cp, h] = out.objs[o];
    for (std::size_t w = 0; w < s.num_morphisms(); ++w) {
      if (s.src[w] != cp) continue;
      const std::size_t h2 = t.compose(h, t.inverse(j.mor[w]));
      mindex[{o, w}] = g.names.size();
      g.names.push_back(s.names[w] + "@" + g.objects[o]);
      g.src.push_back(o);
      g.tgt.push_back(out.lookup.at({s.tgt[w], h2}));
      out.mor.push_back(w);
    }
  }
  for (std::size_t o = 0; o < out.objs.size(); ++o) g.identity.push_back(mindex.at({o, s.identity[out.objs[o].first]}));
  for (std::size_t m1 = 0; m1 < g.names.size(); ++m1)
    for (std::size_t w2 = 0; w2 < s.num_morphisms(); ++w2) {
      if (s.src[w2] != s.tgt[out.mor[m1]]) continue;
      g.comp[{mindex.at({g.tgt[m1], w2}), m1}] = mindex.at({g.src[m1], s.compose(w2, out.mor[m1])});
    }
  out.groupoid = std::make_shared<const FiniteGroupoid>(std::move(g));
  return out;
}

}  // namespace

GroupoidFunctor left_kan(const GroupoidMap& j, const GroupoidFunctor& y) {
  const auto& t = *j.target;
  std::vector<Comma> commas;
  std::vector<Colimit> cols;
  for (std::size_t c = 0; c < t.num_objects(); ++c) {
    commas.push_back(comma(j, c));
    GroupoidFunctor yc{commas.back().groupoid, {}, {}};
    for (const auto& [cp, h] : commas.back().objs) yc.values.push_back(y.values[cp]);
    for (std::size_t w : commas.back().mor) yc.action.push_back(y.action[w]);
    cols.push_back(colimit(yc));
  }
  GroupoidFunctor out{j.target, {}, {}};
  for (const auto& col : cols) out.values.push_back(col.complex);
  for (std::size_t g = 0; g < t.num_morphisms(); ++g) {
    const std::size_t c = t.src[g], c2 = t.tgt[g];
    const auto& field = out.values[c].field();
    SparseMatrix a(out.values[c2].dim(), out.values[c].dim());
    for (std::size_t k = 0; k < cols[c].components.size(); ++k) {
      const auto [cp, h] = commas[c].objs[cols[c].components[k].front()];
      const std::size_t image = commas[c2].lookup.at({cp, t.compose(g, h)});
      a = add(a, multiply(cols[c2].to_colimit[image], cols[c].sections[k], field), field);
    }
    out.action.push_back(std::move(a));
  }
  return out;
}

DimComparison kan_tensor_check(const GroupoidMap& j, const GroupoidFunctor& x, const GroupoidFunctor& y) {
  auto jr = validate_groupoid_map(j);
  if (!jr.ok()) throw Error(ErrorCode::InvalidInput, "kan_tensor_check: " + jr.violations.front());
  DimComparison r;
  const auto lhs = tensor_over(x, left_kan(j, y));
  const auto rhs = tensor_over(pullback(j, x), y);
  r.lhs = homology_dims(lhs);
  r.rhs = homology_dims(rhs);
  r.ok = r.lhs == r.rhs && chain_dims(lhs) == chain_dims(rhs);
  return r;
}

DimComparison coend_vs_plethysm(const SymmetricSequence& s, const ChainComplex& t, int k) {
  if (k < 0) throw Error(ErrorCode::InvalidInput, "coend_vs_plethysm: negative arity cap");
  if (!(s.field() == t.field())) throw Error(ErrorCode::FieldMismatch, "coend_vs_plethysm: fields differ");
  auto fin = std::make_shared<const FiniteGroupoid>(fin_bij(k));
  const auto lhs = tensor_over(sequence_functor(s, fin), tensor_powers(t, fin));
  // window wide enough that nothing is truncated
  int lo = 0, hi = 0, slo = 0, shi = 0;
  for (const auto& g : t.generators()) {
    lo = std::min(lo, g.degree);
    hi = std::max(hi, g.degree);
  }
  for (const auto& [n, x] : s.components())
    for (const auto& g : x.complex().generators()) {
      slo = std::min(slo, g.degree);
      shi = std::max(shi, g.degree);
    }
  Caps caps{std::max(k, 1), shi + k * hi + 1, slo + k * lo - 1};
  const auto rhs = plethysm(restrict(s, k), t, caps);
  DimComparison r;
  r.lhs = homology_dims(lhs);
  r.rhs = homology_dims(rhs);
  r.ok = r.lhs == r.rhs && chain_dims(lhs) == chain_dims(rhs);
  return r;
}

}  // namespace opk
