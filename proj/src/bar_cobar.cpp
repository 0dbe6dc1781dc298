#include "opk/bar_cobar.hpp"

#include <algorithm>
#include <numeric>

#include "opk/error.hpp"

namespace opk {

namespace {


void require_bar_input(const Operad& o) {
  if (!o.is_reduced()) throw Error(ErrorCode::InvalidInput, "bar construction needs a reduced operad: " + o.name);
  if (!o.is_nonunital()) throw Error(ErrorCode::InvalidInput, "bar construction needs a nonunital operad: " + o.name);
}

}  // namespace

int BarCooperad::weight(int n, std::size_t g) const {
  return static_cast<int>(trees->basis(n).at(g).nodes.size()) - 1;
}

TreeGrammar bar_grammar(const Operad& o, int max_arity) {
  TreeGrammar g;
  g.root = unit_sequence(o.field());
  g.vert = augmentation_ideal(o);
  g.vert_shift = 1;
  g.min_vert_arity = 2;
  g.max_arity = max_arity;
  return g;
}

TreeOps vertex_ops(OperadPtr o) {
  TreeOps ops;
  ops.vert_compose = [o](int m, int i, int n, std::size_t a, std::size_t b) { return o->compose(m, i, n, a, b); };
  return ops;
}

SlotMaps tree_cuts(const SequenceTrees& upper, const SequenceTrees& lower, int max_arity) {
  const auto& us = upper.space();
  const auto& f = us.field();
  std::map<SlotKey, std::vector<std::tuple<std::size_t, std::size_t, Scalar>>> trip;
  std::map<SlotKey, std::pair<std::size_t, std::size_t>> shape;

  auto emit = [&](int m, int i, int n, std::size_t col, const Tree& up, const Tree& low, bool neg) {
    auto a = upper.index(up);
    auto b = lower.index(low);
    if (!a || !b) throw Error(ErrorCode::InvalidInput, "cut outside the tree basis: " + us.to_string(up));
    const std::size_t dn = lower.basis(n).size();
    SlotKey key{m, i, n};
    trip[key].emplace_back(*a * dn + *b, col, neg ? Scalar(-1) : Scalar(1));
    shape[key] = {upper.basis(m).size() * dn, upper.basis(m + n - 1).size()};
  };

  for (int N = 0; N <= max_arity; ++N) {
    const auto& basis = upper.basis(N);
    for (std::size_t col = 0; col < basis.size(); ++col) {
      const Tree& t = basis[col];
      // leaf cuts
      for (int l = 0; l < N; ++l) {
        Tree low;
        low.leaves = 1;
        low.nodes.push_back({0, {leaf_code(0)}});
        emit(N, l + 1, 1, col, t, low, false);
      }
      // vertex cuts
      for (std::size_t v = 1; v < t.nodes.size(); ++v) {
        auto leaves = TreeSpace::leaf_set(t, v);
        const int n = static_cast<int>(leaves.size());
        if (leaves.back() - leaves.front() != n - 1) continue;
        const int first = leaves.front();
        const int m = N - n + 1;
        auto sub = TreeSpace::subtree_nodes(t, v);
        std::vector<bool> in_sub(t.nodes.size(), false);
        for (auto s : sub) in_sub[s] = true;

        std::vector<int> up_idx(t.nodes.size(), -1), low_idx(t.nodes.size(), -1);
        int nu = 0;
        for (std::size_t k = 0; k < t.nodes.size(); ++k)
          if (!in_sub[k]) up_idx[k] = nu++;
        for (std::size_t s = 0; s < sub.size(); ++s) low_idx[sub[s]] = static_cast<int>(s) + 1;

        Tree up;
        up.leaves = m;
        for (std::size_t k = 0; k < t.nodes.size(); ++k) {
          if (in_sub[k]) continue;
          Tree::Node nd{t.nodes[k].gen, {}};
          for (int c : t.nodes[k].kids) {
            if (c >= 0 && static_cast<std::size_t>(c) == v) nd.kids.push_back(leaf_code(first));
            else if (c >= 0) nd.kids.push_back(up_idx[static_cast<std::size_t>(c)]);
            else {
              int l = leaf_label(c);
              nd.kids.push_back(leaf_code(l < first ? l : l - n + 1));
            }
          }
          up.nodes.push_back(std::move(nd));
        }
        Tree low;
        low.leaves = n;
        low.nodes.push_back({0, {1}});
        for (auto s : sub) {
          Tree::Node nd{t.nodes[s].gen, {}};
          for (int c : t.nodes[s].kids)
            nd.kids.push_back(c >= 0 ? low_idx[static_cast<std::size_t>(c)] : leaf_code(leaf_label(c) - first));
          low.nodes.push_back(std::move(nd));
        }
        std::vector<std::pair<int, int>> pd;
        for (std::size_t k = 0; k < t.nodes.size(); ++k)
          pd.emplace_back(in_sub[k] ? nu + low_idx[k] : up_idx[k], us.node_degree(t, k));
        emit(m, first + 1, n, col, up, low, koszul_odd(pd));
      }
    }
  }
  SlotMaps out;
  for (auto& [key, tr] : trip) {
    auto [rows, cols] = shape[key];
    out.emplace(key, SparseMatrix::from_triplets(rows, cols, tr, f));
  }
  return out;
}

BarCooperad bar_operad(OperadPtr o, const Caps& caps) {
  validate_caps(caps);
  require_bar_input(*o);
  BarCooperad b;
  b.source = o;
  b.trees = std::make_shared<const SequenceTrees>(TreeSpace(bar_grammar(*o, caps.max_arity)), vertex_ops(o));
  b.cooperad.name = "Bar(" + o->name + ")";
  b.cooperad.seq = b.trees->sequence();
  b.cooperad.counit = 0;
  b.cooperad.decomp = tree_cuts(*b.trees, *b.trees, caps.max_arity);
  b.provenance = {"bar", o->name, caps};
  return b;
}

CobarOperad cobar_cooperad(const Cooperad& p, const Caps& caps) {
  auto dual = std::make_shared<const Operad>(dualize(p));
  CobarOperad c;
  c.dual_bar = std::make_shared<const BarCooperad>(bar_operad(dual, caps));
  c.operad = dualize(c.dual_bar->cooperad);
  c.operad.name = "Cobar(" + p.name + ")";
  c.provenance = {"cobar", p.name, caps};
  return c;
}

CooperadMap bar_map(const OperadMap& f, const BarCooperad& source, const BarCooperad& target) {
  const auto& fld = source.cooperad.field();
  CooperadMap out;
  for (const auto& [n, x] : source.cooperad.seq.components()) {
    const auto& basis = source.trees->basis(n);
    SparseMatrix m(target.cooperad.seq.dim(n), basis.size());
    for (std::size_t col = 0; col < basis.size(); ++col) {
      const Tree& t = basis[col];
      std::vector<SparseVec> images(t.nodes.size());
      bool zero = false;
      for (std::size_t k = 1; k < t.nodes.size(); ++k) {
        images[k] = f.apply(TreeSpace::arity(t, k), t.nodes[k].gen);
        if (images[k].empty()) zero = true;
      }
      if (zero) continue;
      std::vector<TreeTerm> terms;
      std::vector<std::size_t> pos(t.nodes.size(), 0);
      while (true) {
        Tree u = t;
        Scalar c = 1;
        for (std::size_t k = 1; k < t.nodes.size(); ++k) {
          const auto& [g, v] = images[k].entries()[pos[k]];
          u.nodes[k].gen = g;
          c *= v;
        }
        terms.emplace_back(std::move(u), c);
        std::size_t k = 1;
        while (k < t.nodes.size() && ++pos[k] == images[k].size()) pos[k++] = 0;
        if (k >= t.nodes.size()) break;
      }
      m.set_col(col, target.trees->collect(n, terms));
    }
    out.components.emplace(n, std::move(m));
  }
  (void)fld;
  return out;
}

CooperadMap compose_cooperad_maps(const CooperadMap& g, const CooperadMap& f, const FieldSpec& field) {
  CooperadMap h;
  for (const auto& [n, fm] : f.components) {
    auto it = g.components.find(n);
    if (it == g.components.end()) continue;
    h.components.emplace(n, multiply(it->second, fm, field));
  }
  return h;
}

ValidationReport validate_cooperad_map(const CooperadMap& f, const Cooperad& source, const Cooperad& target) {
  auto ds = std::make_shared<const Operad>(dualize(source));
  auto dt = std::make_shared<const Operad>(dualize(target));
  OperadMap dual{dt, ds, {}};
  for (const auto& [n, x] : source.seq.components()) {
    auto it = f.components.find(n);
    SparseMatrix m = it == f.components.end() ? SparseMatrix(target.seq.dim(n), x.dim()) : it->second;
    dual.components.emplace(n, dual_map(m, x.complex(), target.seq.at(n).complex()));
  }
  return validate_operad_map(dual);
}

BarTower bar_tower(OperadPtr o, int kmax, const Caps& caps) {
  if (kmax < 1) throw Error(ErrorCode::InvalidInput, "tower needs kmax >= 1");
  BarTower t;
  t.full = std::make_shared<const BarCooperad>(bar_operad(o, caps));
  for (int k = 1; k <= kmax; ++k) {
    auto ok = std::make_shared<const Operad>(truncate_operad(*o, k));
    t.truncations.push_back(ok);
    t.bars.push_back(std::make_shared<const BarCooperad>(bar_operad(ok, caps)));
    t.from_full.push_back(bar_map(truncation_map(o, ok), *t.full, *t.bars.back()));
    if (k >= 2) {
      auto prev = t.truncations[static_cast<std::size_t>(k - 2)];
      t.steps.push_back(bar_map(truncation_map(ok, prev), *t.bars.back(), *t.bars[static_cast<std::size_t>(k - 2)]));
    }
  }
  return t;
}

namespace {

// Composite along a tree whose vertices carry elements of O; returns the
// element with inputs in flattened kid order and records that order.
SparseVec composite_at(const Operad& o, const Tree& t, std::size_t v, const std::vector<SparseVec>& deco,
                       std::vector<int>& flat) {
  const auto& f = o.field();
  const auto& kids = t.nodes[v].kids;
  SparseVec cur = deco[v];
  int arity = static_cast<int>(kids.size());
  int offset = 0;
  for (int c : kids) {
    if (c < 0) {
      flat.push_back(leaf_label(c));
      ++offset;
      continue;
    }
    std::vector<int> sub_flat;
    SparseVec w = composite_at(o, t, static_cast<std::size_t>(c), deco, sub_flat);
    const int n = static_cast<int>(sub_flat.size());
    VecBuilder vb;
    for (const auto& [a, x] : cur)
      for (const auto& [b, y] : w) vb.add(o.compose(arity, offset + 1, n, a, b), x * y);
    cur = vb.finish(f);
    arity += n - 1;
    offset += n;
    flat.insert(flat.end(), sub_flat.begin(), sub_flat.end());
  }
  return cur;
}

}  // namespace

CounitResult counit_map(OperadPtr o, const Caps& caps) {
  auto bo = std::make_shared<const BarCooperad>(bar_operad(o, caps));
  auto cobar = cobar_cooperad(bo->cooperad, caps);
  const auto& outer = *cobar.dual_bar->trees;  // Bar(BO^∨)
  const auto& f = o->field();
  auto cb = std::make_shared<const Operad>(cobar.operad);
  CounitResult res{cb, OperadMap{cb, o, {}}};

  // BO^∨(k) generator -> BO(k) generator
  std::map<int, std::vector<std::size_t>> from_dual;
  for (const auto& [k, x] : bo->cooperad.seq.components()) {
    auto idx = dual_index(x.complex());
    std::vector<std::size_t> inv(idx.size());
    for (std::size_t g = 0; g < idx.size(); ++g) inv[idx[g]] = g;
    from_dual.emplace(k, std::move(inv));
  }
  for (const auto& [n, x] : cb->seq.components()) {
    const auto& basis = outer.basis(n);
    auto cidx = dual_index(cobar.dual_bar->cooperad.seq.at(n).complex());
    SparseMatrix m(o->seq.dim(n), basis.size());
    for (std::size_t col = 0; col < basis.size(); ++col) {
      const Tree& t = basis[col];
      std::vector<SparseVec> deco(t.nodes.size());
      bool corollas = true;
      for (std::size_t k = 1; k < t.nodes.size() && corollas; ++k) {
        const int ar = TreeSpace::arity(t, k);
        const Tree& inner = bo->trees->basis(ar).at(from_dual.at(ar).at(t.nodes[k].gen));
        if (inner.nodes.size() != 2) corollas = false;
        else deco[k] = SparseVec::unit(inner.nodes[1].gen);
      }
      if (!corollas) continue;
      SparseVec value;
      std::vector<int> flat;
      if (t.nodes[0].kids[0] < 0) {
        value = SparseVec::unit(o->unit);
        flat = {0};
      } else {
        value = composite_at(*o, t, 1, deco, flat);
      }
      Perm sigma(flat.begin(), flat.end());
      SparseVec image = o->seq.at(n).action(sigma).apply(value, f);
      m.set_col(cidx[col], std::move(image));
    }
    res.map.components.emplace(n, std::move(m));
  }
  return res;
}

}  // namespace opk
