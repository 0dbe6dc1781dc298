#include "opk/alg_module.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <numeric>

#include "opk/error.hpp"

namespace opk {

namespace {

bool odd(long v) { return (v % 2 + 2) % 2 == 1; }

/// Calls fn on every tuple of l generators whose total weight is at most budget.
void for_each_tuple(const std::vector<int>& weights, int l, int budget,
                    const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> cur;
  std::function<void(int)> rec = [&](int left) {
    if (static_cast<int>(cur.size()) == l) {
      fn(cur);
      return;
    }
    const int rest = l - static_cast<int>(cur.size()) - 1;  // each later slot needs weight >= 1
    for (std::size_t g = 0; g < weights.size(); ++g) {
      if (weights[g] > left - rest) continue;
      cur.push_back(g);
      rec(left - weights[g]);
      cur.pop_back();
    }
  };
  rec(budget);
}

/// Multilinear extension of the action.
SparseVec act_multi(const Algebra& a, const SparseVec& op, const std::vector<SparseVec>& args) {
  VecBuilder out;
  std::vector<std::size_t> key(args.size() + 1);
  std::function<void(std::size_t, const Scalar&)> rec = [&](std::size_t j, const Scalar& c) {
    if (j == args.size()) {
      std::vector<std::size_t> rest(key.begin() + 1, key.end());
      out.add(a.act(key[0], rest), c);
      return;
    }
    for (const auto& [g, x] : args[j]) {
      key[j + 1] = g;
      rec(j + 1, c * x);
    }
  };
  for (const auto& [o, x] : op) {
    key[0] = o;
    rec(0, x);
  }
  return out.finish(a.field());
}

std::vector<SparseVec> units(const std::vector<std::size_t>& args) {
  std::vector<SparseVec> out;
  for (auto g : args) out.push_back(SparseVec::unit(g));
  return out;
}

void require_same(const Operad& a, const Operad& b, const char* what) {
  if (graded_dims(a.seq) != graded_dims(b.seq) || a.comp != b.comp)
    throw Error(ErrorCode::InvalidInput, std::string(what) + ": operads differ");
}

std::vector<int> default_weights(const ChainComplex& v, std::vector<int> w) {
  if (w.empty()) w.assign(v.dim(), 1);
  if (w.size() != v.dim()) throw Error(ErrorCode::InvalidInput, "weights do not match the carrier");
  for (int x : w)
    if (x < 1) throw Error(ErrorCode::InvalidInput, "carrier weights must be at least 1");
  return w;
}

}  // namespace

SparseVec Algebra::act(std::size_t op, const std::vector<std::size_t>& args) const {
  auto it = actions.find(static_cast<int>(args.size()));
  if (it == actions.end()) return {};
  std::vector<std::size_t> key;
  key.reserve(args.size() + 1);
  key.push_back(op);
  key.insert(key.end(), args.begin(), args.end());
  auto jt = it->second.find(key);
  return jt == it->second.end() ? SparseVec{} : jt->second;
}

int Algebra::max_weight() const {
  int w = 0;
  for (int x : weights) w = std::max(w, x);
  return w;
}

ValidationReport validate_algebra(const Algebra& a) {
  ValidationReport r;
  if (!a.operad) {
    r.add("algebra has no operad");
    return r;
  }
  const auto& f = a.field();
  const auto& o = *a.operad;
  const auto& d = a.carrier.differential();
  if (!(o.field() == f)) r.add("operad and carrier fields differ");
  if (a.weights.size() != a.carrier.dim()) r.add("weights do not match the carrier");
  for (int w : a.weights)
    if (w < 1) r.add("carrier weight below 1");
  if (!r.ok()) return r;
  for (std::size_t g = 0; g < a.carrier.dim(); ++g)
    for (const auto& [h, x] : d.col(g))
      if (a.weights[h] != a.weights[g]) r.add("differential does not preserve weight at " + a.carrier.generator(g).id);

  // shape, degree and weight of stored entries
  for (const auto& [l, table] : a.actions)
    for (const auto& [key, v] : table) {
      if (static_cast<int>(key.size()) != l + 1 || key[0] >= o.seq.dim(l)) {
        r.add("action key out of range in arity " + std::to_string(l));
        continue;
      }
      int deg = o.seq.degree(l, key[0]), w = 0;
      bool bad = false;
      for (std::size_t j = 1; j < key.size(); ++j) {
        if (key[j] >= a.carrier.dim()) bad = true;
        if (bad) break;
        deg += a.carrier.degree(key[j]);
        w += a.weights[key[j]];
      }
      if (bad) {
        r.add("action argument out of range");
        continue;
      }
      for (const auto& [h, x] : v) {
        if (h >= a.carrier.dim() || a.carrier.degree(h) != deg) r.add("action does not preserve degree");
        else if (a.weights[h] != w) r.add("action does not add weights");
      }
    }
  if (!r.ok()) return r;

  const int W = a.max_weight();
  for (std::size_t g = 0; g < a.carrier.dim(); ++g)
    if (!(a.act(o.unit, {g}) == SparseVec::unit(g))) r.add("unit does not act as the identity");

  for (const auto& [l, x] : o.seq.components()) {
    if (l < 1 || l > W) continue;
    const auto& ox = x.complex();
    for (std::size_t op = 0; op < ox.dim(); ++op) {
      const int dop = ox.degree(op);
      for_each_tuple(a.weights, l, W, [&](const std::vector<std::size_t>& args) {
        auto argv = units(args);
        // d-compatibility
        auto lhs = d.apply(a.act(op, args), f);
        VecBuilder rhs;
        rhs.add(act_multi(a, ox.differential().col(op), argv));
        int before = dop;
        for (std::size_t j = 0; j < args.size(); ++j) {
          auto mod = argv;
          mod[j] = d.col(args[j]);
          rhs.add(act_multi(a, SparseVec::unit(op), mod), odd(before) ? Scalar(-1) : Scalar(1));
          before += a.carrier.degree(args[j]);
        }
        if (!(lhs == rhs.finish(f))) r.add("action is not a chain map in arity " + std::to_string(l));
        // equivariance on adjacent transpositions
        for (int k = 1; k < l; ++k) {
          auto swapped = argv;
          std::swap(swapped[static_cast<std::size_t>(k - 1)], swapped[static_cast<std::size_t>(k)]);
          auto left = act_multi(a, x.transposition(k).col(op), swapped);
          auto right = a.act(op, args);
          const long s = static_cast<long>(a.carrier.degree(args[static_cast<std::size_t>(k - 1)])) *
                         a.carrier.degree(args[static_cast<std::size_t>(k)]);
          if (odd(s)) right.scale(-1, f);
          if (!(left == right)) r.add("action is not equivariant in arity " + std::to_string(l));
        }
      });
    }
  }

  // associativity against partial compositions
  for (const auto& [key, m] : o.comp) {
    auto [mm, i, n] = key;
    const int total = mm + n - 1;
    if (total < 1 || total > W) continue;
    const std::size_t dn = o.seq.dim(n);
    for (std::size_t col = 0; col < m.cols(); ++col) {
      const std::size_t op = col / dn, inner = col % dn;
      const int dinner = o.seq.degree(n, inner);
      for_each_tuple(a.weights, total, W, [&](const std::vector<std::size_t>& args) {
        auto lhs = act_multi(a, m.col(col), units(args));
        std::vector<std::size_t> mid(args.begin() + (i - 1), args.begin() + (i - 1 + n));
        int before = 0;
        for (int j = 0; j < i - 1; ++j) before += a.carrier.degree(args[static_cast<std::size_t>(j)]);
        std::vector<SparseVec> outer;
        for (int j = 0; j < i - 1; ++j) outer.push_back(SparseVec::unit(args[static_cast<std::size_t>(j)]));
        outer.push_back(a.act(inner, mid));
        for (int j = i - 1 + n; j < total; ++j) outer.push_back(SparseVec::unit(args[static_cast<std::size_t>(j)]));
        auto rhs = act_multi(a, SparseVec::unit(op), outer);
        if (odd(static_cast<long>(dinner) * before)) rhs.scale(-1, f);
        if (!(lhs == rhs))
          r.add("associativity fails at (" + std::to_string(mm) + "," + std::to_string(i) + "," + std::to_string(n) + ")");
      });
    }
  }
  return r;
}

ValidationReport validate_coalgebra(const Coalgebra& c) {
  ValidationReport r = validate_algebra(c.dual);
  if (c.carrier.dim() != c.dual.carrier.dim()) r.add("carrier and dual carrier sizes differ");
  if (c.weights.size() != c.carrier.dim()) r.add("weights do not match the carrier");
  if (c.dual.operad && graded_dims(c.dual.operad->seq) != graded_dims(dualize(c.cooperad).seq))
    r.add("dual algebra is not over the dual cooperad");
  return r;
}

namespace {

/// Lifts of every quotient generator, computed once.
std::vector<std::vector<TreeTerm>> all_lifts(const QuotientTrees& q) {
  std::vector<std::vector<TreeTerm>> out(q.dim());
  for (std::size_t g = 0; g < q.dim(); ++g) out[g] = q.lift(g);
  return out;
}

/// γ(op; q_1, ..., q_l) on a tree complex whose root is decorated by r: the
/// root decorations are composed into op and the rest of the trees kept.
using SlotCompose = std::function<SparseVec(int, int, int, std::size_t, std::size_t)>;

SparseVec graft(const QuotientTrees& q, const TreeSpace& lift_space, const std::vector<std::vector<TreeTerm>>& lifts,
                const SlotCompose& compose, const SparseVec& op, const std::vector<std::size_t>& args) {
  const auto& sp = lift_space;
  const auto& target = q.space();
  const auto& f = sp.field();
  const std::size_t l = args.size();
  std::vector<TreeTerm> out;
  std::vector<const TreeTerm*> pick(l);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j < l) {
      for (const auto& term : lifts[args[j]]) {
        pick[j] = &term;
        rec(j + 1);
      }
      return;
    }
    Scalar c = 1;
    Tree raw;
    raw.nodes.push_back({0, {}});
    std::vector<int> factors{0};
    int cur = static_cast<int>(l), offset = 0, leaf_off = 0;
    long sign = 0, before = 0;
    SparseVec comp = op;
    for (std::size_t k = 0; k < l; ++k) {
      const Tree& t = pick[k]->first;
      c *= pick[k]->second;
      const int rd = sp.node_degree(t, 0);
      sign += static_cast<long>(rd) * before;
      before += sp.degree(t) - rd;
      const int ak = TreeSpace::arity(t, 0);
      VecBuilder vb;
      for (const auto& [g, x] : comp) vb.add(compose(cur, offset + 1, ak, g, t.nodes[0].gen), x);
      comp = vb.finish(f);
      cur += ak - 1;
      offset += ak;
      const int base = static_cast<int>(raw.nodes.size()) - 1;
      auto remap = [&](int code) { return code >= 0 ? base + code : leaf_code(leaf_label(code) + leaf_off); };
      for (std::size_t v = 1; v < t.nodes.size(); ++v) {
        Tree::Node nd = t.nodes[v];
        for (auto& kid : nd.kids) kid = remap(kid);
        raw.nodes.push_back(nd);
      }
      for (int kid : t.nodes[0].kids) raw.nodes[0].kids.push_back(remap(kid));
      for (int fc : sp.factors(t))
        if (fc != 0) factors.push_back(remap(fc));
      raw.leaf_gen.insert(raw.leaf_gen.end(), t.leaf_gen.begin(), t.leaf_gen.end());
      leaf_off += t.leaves;
    }
    raw.leaves = leaf_off;
    if (odd(sign)) c = -c;
    for (const auto& [g, x] : comp) {
      raw.nodes[0].gen = g;
      target.canonicalize(raw, factors, c * x, out);
    }
  };
  rec(0);
  return q.project(out);
}

/// Action tables of an algebra over o on a tree complex with root operad r,
/// o acting through phi : o(l) -> r(l).
std::map<int, ActionTable> graft_tables(const QuotientTrees& q, const Operad& o, const Operad& r,
                                        const std::function<SparseVec(int, std::size_t)>& phi, int K) {
  auto lifts = all_lifts(q);
  const SlotCompose rc = [&r](int m, int i, int n, std::size_t a, std::size_t b) { return r.compose(m, i, n, a, b); };
  std::map<int, ActionTable> out;
  for (const auto& [l, x] : o.seq.components()) {
    if (l < 1 || l > K) continue;
    for (std::size_t op = 0; op < x.dim(); ++op) {
      auto ph = phi(l, op);
      if (ph.empty()) continue;
      for_each_tuple(q.weights(), l, K, [&](const std::vector<std::size_t>& args) {
        auto v = graft(q, q.space(), lifts, rc, ph, args);
        if (v.empty()) return;
        std::vector<std::size_t> key{op};
        key.insert(key.end(), args.begin(), args.end());
        out[l][key] = std::move(v);
      });
    }
  }
  return out;
}

std::function<SparseVec(int, std::size_t)> identity_phi() {
  return [](int, std::size_t g) { return SparseVec::unit(g); };
}

std::function<SparseVec(int, int, int, std::size_t, std::size_t)> module_act(const RightModule& m) {
  auto act = std::make_shared<SlotMaps>(m.act);
  auto o = m.operad;
  return [act, o](int mm, int i, int n, std::size_t a, std::size_t b) {
    auto it = act->find({mm, i, n});
    if (it == act->end()) return SparseVec{};
    return it->second.col(a * o->seq.dim(n) + b);
  };
}

/// Tree complex root ∘ Ō^{∘s} ∘ A without certification.
std::shared_ptr<const QuotientTrees> two_sided(const SymmetricSequence& root,
                                               std::function<SparseVec(int, int, int, std::size_t, std::size_t)> root_act,
                                               const Algebra& a, int K, int max_degree) {
  auto o = a.operad;
  TreeGrammar g;
  g.root = restrict(root, K);
  g.vert = augmentation_ideal(*o);
  g.vert_shift = 1;
  g.min_vert_arity = 2;
  g.carrier = a.carrier;
  g.carrier_weights = a.weights;
  g.max_weight = K;
  g.max_degree = max_degree;
  g.max_arity = K;
  TreeOps ops = vertex_ops(o);
  ops.root_act = std::move(root_act);
  auto alg = std::make_shared<Algebra>(a);
  ops.leaf_act = [alg](int, std::size_t op, const std::vector<std::size_t>& args) { return alg->act(op, args); };
  return std::make_shared<const QuotientTrees>(TreeSpace(std::move(g)), std::move(ops));
}

std::shared_ptr<const QuotientTrees> cotangent_trees(const Algebra& a, int K, int max_degree) {
  return two_sided(unit_sequence(a.field()), [](int, int, int, std::size_t, std::size_t) { return SparseVec{}; }, a, K,
                   max_degree);
}

int window(const Caps& caps) { return caps.max_degree == INT_MAX ? INT_MAX : caps.max_degree + 1; }

void certify(const Algebra& a, const std::string& what) {
  for (const auto& [n, x] : a.operad->seq.components())
    for (const auto& gen : x.complex().generators())
      if (gen.degree < 0)
        throw Error(ErrorCode::NotCertifiablyConvergent, what + ": operad has a generator in negative degree");
  auto c = connectivity(a.carrier);
  if (!c.zero_connected)
    throw Error(ErrorCode::NotCertifiablyConvergent,
                what + ": carrier is not 0-connected (homology in degree " + std::to_string(*c.least) + ")");
}

Algebra induce_impl(const OperadMap& f, const Algebra& a, int K, int max_degree) {
  auto m = module_along(f);
  auto q = two_sided(m.seq, module_act(m), a, K, max_degree);
  Algebra out;
  out.name = "induce(" + a.name + ")";
  out.operad = f.target;
  out.carrier = q->complex();
  out.weights = q->weights();
  out.actions = graft_tables(*q, *f.target, *f.target, identity_phi(), K);
  return out;
}

}  // namespace

namespace {

/// O ∘ V as a tree complex: root decorated by O, leaves by V.
std::shared_ptr<const QuotientTrees> free_trees(const SymmetricSequence& root, const ChainComplex& v,
                                                std::vector<int> weights, int K, int max_degree) {
  TreeGrammar g;
  g.root = restrict(root, K);
  g.vert = SymmetricSequence(root.field());
  g.carrier = v;
  g.carrier_weights = default_weights(v, std::move(weights));
  g.max_weight = K;
  g.max_degree = max_degree;
  g.max_arity = K;
  return std::make_shared<const QuotientTrees>(TreeSpace(std::move(g)), TreeOps{});
}

Algebra free_from_trees(OperadPtr o, const QuotientTrees& q, int K) {
  Algebra a;
  a.name = "free(" + o->name + ")";
  a.operad = o;
  a.carrier = q.complex();
  a.weights = q.weights();
  a.actions = graft_tables(q, *o, *o, identity_phi(), K);
  return a;
}

}  // namespace

Algebra free_algebra(OperadPtr o, const ChainComplex& v, const Caps& caps, std::vector<int> weights) {
  validate_caps(caps);
  if (!(o->field() == v.field())) throw Error(ErrorCode::FieldMismatch, "free_algebra: fields differ");
  check_plethysm_convergence(o->seq, v, caps);
  const int K = caps.max_arity;
  auto q = free_trees(o->seq, v, std::move(weights), K, caps.max_degree);
  return free_from_trees(o, *q, K);
}

ChainMap free_collapse_map(const RightModule& m, const ChainComplex& v, std::vector<int> weights, int K,
                           int max_degree) {
  if (!(m.field() == v.field())) throw Error(ErrorCode::FieldMismatch, "free_collapse: fields differ");
  const auto& f = v.field();
  auto qf = free_trees(m.operad->seq, v, weights, K, max_degree);
  auto a = free_from_trees(m.operad, *qf, K);
  auto src = two_sided(m.seq, module_act(m), a, K, max_degree);
  auto tgt = free_trees(m.seq, v, weights, K, max_degree);
  const auto lifts = all_lifts(*qf);
  const SlotCompose act = module_act(m);
  SparseMatrix mat(tgt->dim(), src->dim());
  for (std::size_t col = 0; col < src->dim(); ++col) {
    VecBuilder vb;
    for (const auto& [t, c] : src->lift(col)) {
      if (t.nodes.size() != 1) continue;  // trees with vertices go to zero
      vb.add(graft(*tgt, qf->space(), lifts, act, SparseVec::unit(t.nodes[0].gen), t.leaf_gen), c);
    }
    mat.set_col(col, vb.finish(f));
  }
  return ChainMap(src->complex(), tgt->complex(), std::move(mat));
}

Algebra trivial_algebra(OperadPtr o, const ChainComplex& v, std::vector<int> weights) {
  if (!(o->field() == v.field())) throw Error(ErrorCode::FieldMismatch, "trivial_algebra: fields differ");
  if (!o->is_reduced()) throw Error(ErrorCode::InvalidInput, "trivial_algebra: operad is not reduced");
  Algebra a;
  a.name = "trivial(" + o->name + ")";
  a.operad = o;
  a.carrier = v;
  a.weights = default_weights(v, std::move(weights));
  for (std::size_t g = 0; g < v.dim(); ++g) a.actions[1][{o->unit, g}] = SparseVec::unit(g);
  return a;
}

Algebra restrict_algebra(const OperadMap& f, const Algebra& a) {
  require_same(*f.target, *a.operad, "restrict_algebra");
  Algebra out;
  out.name = "restrict(" + a.name + ")";
  out.operad = f.source;
  out.carrier = a.carrier;
  out.weights = a.weights;
  for (const auto& [l, table] : a.actions) {
    auto it = f.components.find(l);
    if (it == f.components.end()) continue;
    auto back = it->second.transpose();  // column c: source generators hitting c
    std::map<std::vector<std::size_t>, VecBuilder> acc;
    for (const auto& [key, v] : table)
      for (const auto& [src, x] : back.col(key[0])) {
        auto k2 = key;
        k2[0] = src;
        acc[k2].add(v, x);
      }
    for (auto& [key, b] : acc) {
      auto v = b.finish(a.field());
      if (!v.empty()) out.actions[l][key] = std::move(v);
    }
  }
  return out;
}

Algebra induce_algebra(const OperadMap& f, const Algebra& a, const Caps& caps) {
  validate_caps(caps);
  require_same(*f.source, *a.operad, "induce_algebra");
  certify(a, "induce_algebra");
  return induce_impl(f, a, caps.max_arity, window(caps));
}

RelativeTensor relative_tensor(const RightModule& m, const Algebra& a, const Caps& caps, bool explicit_cap) {
  validate_caps(caps);
  require_same(*m.operad, *a.operad, "relative_tensor");
  if (!explicit_cap) certify(a, "relative_tensor");
  return RelativeTensor{two_sided(m.seq, module_act(m), a, caps.max_arity, window(caps))};
}

ChainMap relative_tensor_map(const RightModule& m, const Algebra& a, const Algebra& b, const ChainMap& f,
                             const Caps& caps) {
  validate_caps(caps);
  require_same(*a.operad, *b.operad, "relative_tensor_map");
  const int K = caps.max_arity;
  auto src = two_sided(m.seq, module_act(m), a, K, window(caps));
  auto tgt = two_sided(m.seq, module_act(m), b, K, window(caps));
  SparseMatrix mat(tgt->dim(), src->dim());
  for (std::size_t col = 0; col < src->dim(); ++col) {
    std::vector<TreeTerm> out;
    for (const auto& [t, c] : src->lift(col)) {
      const auto factors = src->space().factors(t);
      Tree raw = t;
      std::function<void(std::size_t, Scalar)> rec = [&](std::size_t j, Scalar coeff) {
        if (j == t.leaf_gen.size()) {
          tgt->space().canonicalize(raw, factors, coeff, out);
          return;
        }
        for (const auto& [g, x] : f.matrix().col(t.leaf_gen[j])) {
          raw.leaf_gen[j] = g;
          rec(j + 1, coeff * x);
        }
      };
      rec(0, c);
    }
    mat.set_col(col, tgt->project(out));
  }
  return ChainMap(src->complex(), tgt->complex(), std::move(mat));
}

RelativeTensor cotangent_complex(const Algebra& a, const Caps& caps, bool explicit_cap) {
  validate_caps(caps);
  if (!explicit_cap) certify(a, "cotangent_complex");
  return RelativeTensor{cotangent_trees(a, caps.max_arity, window(caps))};
}

namespace {

/// Dual algebra of the coaction on a bar tree complex: each lifted tree is cut
/// below the root into an upper bar tree and branches, symmetrized over the
/// labels of the upper tree and paired with dual bases.
Algebra dual_coaction(const QuotientTrees& c, const BarCooperad& bar, OperadPtr dual_op, const std::string& name) {
  const auto& sp = c.space();
  const auto& bs = bar.trees->space();
  const auto& f = sp.field();
  auto cidx = dual_index(c.complex());
  std::map<int, std::vector<std::size_t>> pidx;
  for (const auto& [n, x] : bar.cooperad.seq.components()) pidx[n] = dual_index(x.complex());
  std::map<int, std::map<std::vector<std::size_t>, VecBuilder>> acc;

  for (std::size_t col = 0; col < c.dim(); ++col) {
    for (const auto& [t, coef] : c.lift(col)) {
      const std::size_t N = t.nodes.size();
      auto par = TreeSpace::parents(t);
      auto mins = TreeSpace::min_leaves(t);
      auto tf = sp.factors(t);
      std::vector<char> in(N, 0);
      in[0] = 1;

      auto emit = [&]() {
        // upper nodes in preorder and the branches hanging off them
        std::vector<std::size_t> upper;
        std::vector<int> branches;
        std::function<void(std::size_t)> walk = [&](std::size_t k) {
          upper.push_back(k);
          for (int kid : t.nodes[k].kids) {
            if (kid >= 0 && in[static_cast<std::size_t>(kid)]) walk(static_cast<std::size_t>(kid));
            else branches.push_back(kid);
          }
        };
        walk(0);
        auto min_of = [&](int code) { return code < 0 ? leaf_label(code) : mins[static_cast<std::size_t>(code)]; };
        std::vector<std::size_t> order(branches.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return min_of(branches[x]) < min_of(branches[y]); });
        std::map<int, int> rank;  // branch code -> label in the upper tree
        for (std::size_t r = 0; r < order.size(); ++r) rank[branches[order[r]]] = static_cast<int>(r);
        const int l = static_cast<int>(branches.size());

        Tree b;
        b.leaves = l;
        std::map<std::size_t, int> bindex;
        for (std::size_t j = 0; j < upper.size(); ++j) bindex[upper[j]] = static_cast<int>(j);
        for (std::size_t k : upper) {
          Tree::Node nd{t.nodes[k].gen, {}};
          for (int kid : t.nodes[k].kids)
            nd.kids.push_back(kid >= 0 && in[static_cast<std::size_t>(kid)] ? bindex[static_cast<std::size_t>(kid)]
                                                                               : leaf_code(rank[kid]));
          b.nodes.push_back(std::move(nd));
        }

        // target positions of the factors of t and the branch elements
        std::map<int, int> pos;
        int next = 0;
        for (std::size_t k : upper) pos[static_cast<int>(k)] = next++;
        std::vector<SparseVec> q(static_cast<std::size_t>(l));
        std::vector<int> qdeg(static_cast<std::size_t>(l));
        for (int r = 0; r < l; ++r) {
          const int code = branches[order[static_cast<std::size_t>(r)]];
          Tree bt;
          bt.nodes.push_back({t.nodes[0].gen, {}});
          if (code < 0) {
            pos[code] = next++;
            bt.leaves = 1;
            bt.nodes[0].kids.push_back(leaf_code(0));
            bt.leaf_gen.push_back(t.leaf_gen[static_cast<std::size_t>(leaf_label(code))]);
          } else {
            auto sub = TreeSpace::subtree_nodes(t, static_cast<std::size_t>(code));
            auto leaves = TreeSpace::leaf_set(t, static_cast<std::size_t>(code));
            std::map<std::size_t, int> nidx;
            for (std::size_t j = 0; j < sub.size(); ++j) nidx[sub[j]] = static_cast<int>(j) + 1;
            std::map<int, int> lidx;
            for (std::size_t j = 0; j < leaves.size(); ++j) lidx[leaves[j]] = static_cast<int>(j);
            bt.leaves = static_cast<int>(leaves.size());
            bt.nodes[0].kids.push_back(1);
            for (std::size_t k : sub) {
              pos[static_cast<int>(k)] = next++;
              Tree::Node nd{t.nodes[k].gen, {}};
              for (int kid : t.nodes[k].kids)
                nd.kids.push_back(kid >= 0 ? nidx[static_cast<std::size_t>(kid)] : leaf_code(lidx[leaf_label(kid)]));
              bt.nodes.push_back(std::move(nd));
            }
            for (int lab : leaves) {
              pos[leaf_code(lab)] = next++;
              bt.leaf_gen.push_back(t.leaf_gen[static_cast<std::size_t>(lab)]);
            }
          }
          q[static_cast<std::size_t>(r)] = c.project({{bt, Scalar(1)}});
          qdeg[static_cast<std::size_t>(r)] = sp.degree(bt);
        }
        std::vector<std::pair<int, int>> pd;
        for (int fc : tf)
          pd.emplace_back(pos.at(fc), fc >= 0 ? sp.node_degree(t, static_cast<std::size_t>(fc)) : sp.leaf_degree(t, leaf_label(fc)));
        const Scalar base = koszul_odd(pd) ? Scalar(-coef) : coef;
        const int bdeg = bs.degree(b);

        for (const auto& sigma : all_perms(l)) {
          std::vector<TreeTerm> rel;
          bs.relabel(b, sigma, base, rel);
          std::vector<std::pair<int, int>> pp;
          std::vector<int> slot(static_cast<std::size_t>(l));  // slot -> branch
          for (int r = 0; r < l; ++r) {
            pp.emplace_back(sigma[static_cast<std::size_t>(r)], qdeg[static_cast<std::size_t>(r)]);
            slot[static_cast<std::size_t>(sigma[static_cast<std::size_t>(r)])] = r;
          }
          long pair = 0, seen = bdeg;
          for (int s2 = 0; s2 < l; ++s2) {
            const int dq = qdeg[static_cast<std::size_t>(slot[static_cast<std::size_t>(s2)])];
            pair += seen * dq;
            seen += dq;
          }
          const bool flip = koszul_odd(pp) != odd(pair);
          for (const auto& [bt2, x] : rel) {
            auto bi = bar.trees->index(bt2);
            if (!bi) throw Error(ErrorCode::InvalidInput, "cut outside the bar basis");
            std::vector<std::size_t> key{pidx.at(l)[*bi]};
            key.resize(static_cast<std::size_t>(l) + 1);
            std::function<void(int, const Scalar&)> expand = [&](int s2, const Scalar& v) {
              if (s2 == l) {
                acc[l][key].add(cidx[col], flip ? Scalar(-v) : v);
                return;
              }
              for (const auto& [g, y] : q[static_cast<std::size_t>(slot[static_cast<std::size_t>(s2)])]) {
                key[static_cast<std::size_t>(s2) + 1] = cidx[g];
                expand(s2 + 1, v * y);
              }
            };
            expand(0, x);
          }
        }
      };

      std::function<void(std::size_t)> choose = [&](std::size_t v) {
        if (v == N) {
          emit();
          return;
        }
        choose(v + 1);
        if (in[static_cast<std::size_t>(par[v])]) {
          in[v] = 1;
          choose(v + 1);
          in[v] = 0;
        }
      };
      choose(1);
    }
  }

  Algebra out;
  out.name = name;
  out.operad = std::move(dual_op);
  out.carrier = dualize(c.complex());
  out.weights.assign(c.dim(), 1);
  for (std::size_t g = 0; g < c.dim(); ++g) out.weights[cidx[g]] = c.weight(g);
  for (auto& [l, table] : acc)
    for (auto& [key, b] : table) {
      auto v = b.finish(f);
      if (!v.empty()) out.actions[l][key] = std::move(v);
    }
  return out;
}

std::vector<int> dual_weights(const ChainComplex& c, const std::vector<int>& w) {
  auto idx = dual_index(c);
  std::vector<int> out(w.size());
  for (std::size_t g = 0; g < w.size(); ++g) out[idx[g]] = w[g];
  return out;
}

Coalgebra bar_algebra_impl(const Algebra& a, const Caps& caps, int max_degree) {
  auto bar = std::make_shared<const BarCooperad>(bar_operad(a.operad, caps));
  auto q = cotangent_trees(a, caps.max_arity, max_degree);
  auto dual_op = std::make_shared<const Operad>(dualize(bar->cooperad));
  Coalgebra out;
  out.name = "bar(" + a.name + ")";
  out.cooperad = bar->cooperad;
  out.carrier = q->complex();
  out.weights = q->weights();
  out.dual = dual_coaction(*q, *bar, std::move(dual_op), "dual(" + out.name + ")");
  return out;
}

Coalgebra from_dual(std::string name, const Cooperad& p, Algebra dual) {
  Coalgebra out;
  out.name = std::move(name);
  out.cooperad = p;
  out.carrier = dualize(dual.carrier);
  out.weights = dual_weights(dual.carrier, dual.weights);
  out.dual = std::move(dual);
  return out;
}

struct RhoLevel {
  Algebra algebra;
  std::shared_ptr<const QuotientTrees> trees;
  OperadPtr root;
};

RhoLevel rho_level(const Algebra& a, int k, int K, int max_degree) {
  auto o = a.operad;
  auto rk_op = std::make_shared<const Operad>(truncate_operad(*o, k));
  auto rk = truncation_map(o, rk_op);
  auto m = module_along(rk);
  auto q = two_sided(m.seq, module_act(m), a, K, max_degree);
  Algebra lvl;
  lvl.name = "rho" + std::to_string(k) + "(" + a.name + ")";
  lvl.operad = o;
  lvl.carrier = q->complex();
  lvl.weights = q->weights();
  lvl.actions = graft_tables(*q, *o, *rk_op, [rk](int l, std::size_t g) { return rk.apply(l, g); }, K);
  return {std::move(lvl), q, rk_op};
}

RhoTower rho_tower_impl(const Algebra& a, int kmax, int K, int max_degree) {
  if (kmax < 1) throw Error(ErrorCode::InvalidInput, "rho: k must be at least 1");
  RhoTower out;
  std::vector<RhoLevel> lv;
  for (int k = 1; k <= kmax; ++k) {
    lv.push_back(rho_level(a, k, K, max_degree));
    out.levels.push_back(lv.back().algebra);
  }
  for (int k = 2; k <= kmax; ++k) {
    const auto& hi = lv[static_cast<std::size_t>(k - 1)];
    const auto& lo = lv[static_cast<std::size_t>(k - 2)];
    auto step = truncation_map(hi.root, lo.root);
    const auto& sp = lo.trees->space();
    SparseMatrix m(lo.trees->dim(), hi.trees->dim());
    for (std::size_t col = 0; col < hi.trees->dim(); ++col) {
      std::vector<TreeTerm> terms;
      for (const auto& [t, c] : hi.trees->lift(col)) {
        auto fac = sp.factors(t);
        for (const auto& [g, x] : step.apply(TreeSpace::arity(t, 0), t.nodes[0].gen)) {
          Tree raw = t;
          raw.nodes[0].gen = g;
          sp.canonicalize(raw, fac, c * x, terms);
        }
      }
      m.set_col(col, lo.trees->project(terms));
    }
    out.maps.emplace_back(hi.algebra.carrier, lo.algebra.carrier, std::move(m));
  }
  return out;
}

}  // namespace

Coalgebra bar_algebra(const Algebra& a, const Caps& caps, bool explicit_cap) {
  validate_caps(caps);
  if (!explicit_cap) certify(a, "bar_algebra");
  return bar_algebra_impl(a, caps, window(caps));
}

RightComodule bar_module(const RightModule& m, const Caps& caps) {
  validate_caps(caps);
  const int K = caps.max_arity;
  auto g = bar_grammar(*m.operad, K);
  g.root = restrict(m.seq, K);
  auto ops = vertex_ops(m.operad);
  ops.root_act = module_act(m);
  SequenceTrees upper(TreeSpace(std::move(g)), std::move(ops));
  auto bar = bar_operad(m.operad, caps);
  RightComodule out;
  out.name = "bar(" + m.name + ")";
  out.seq = upper.sequence();
  out.coact = tree_cuts(upper, *bar.trees, K);
  return out;
}

Algebra cobar_coalgebra(const Coalgebra& c, const Caps& caps) {
  validate_caps(caps);
  Caps open = caps;
  open.max_degree = INT_MAX;
  auto out = bar_algebra_impl(c.dual, open, INT_MAX).dual;
  out.name = "cobar(" + c.name + ")";
  return out;
}

Coalgebra cofree_coalgebra(const Cooperad& p, const ChainComplex& v, const Caps& caps, std::vector<int> weights) {
  validate_caps(caps);
  auto pd = std::make_shared<const Operad>(dualize(p));
  Caps open = caps;
  open.max_degree = INT_MAX;
  auto w = dual_weights(v, default_weights(v, std::move(weights)));
  return from_dual("cofree(" + p.name + ")", p, free_algebra(pd, dualize(v), open, std::move(w)));
}

Coalgebra trivial_coalgebra(const Cooperad& p, const ChainComplex& v, std::vector<int> weights) {
  auto pd = std::make_shared<const Operad>(dualize(p));
  auto w = default_weights(v, std::move(weights));
  Coalgebra out;
  out.name = "trivial(" + p.name + ")";
  out.cooperad = p;
  out.carrier = v;
  out.weights = w;
  out.dual = trivial_algebra(pd, dualize(v), dual_weights(v, w));
  return out;
}

RhoTower rho_tower(const Algebra& a, int kmax, const Caps& caps, bool explicit_cap) {
  validate_caps(caps);
  if (!explicit_cap) certify(a, "rho");
  return rho_tower_impl(a, kmax, caps.max_arity, window(caps));
}

Algebra rho(const Algebra& a, int k, const Caps& caps, bool explicit_cap) {
  validate_caps(caps);
  if (k < 1) throw Error(ErrorCode::InvalidInput, "rho: k must be at least 1");
  if (!explicit_cap) certify(a, "rho");
  return rho_level(a, k, caps.max_arity, window(caps)).algebra;
}

Coalgebra tau(OperadPtr o, const Coalgebra& c, int k, const Caps& caps) {
  validate_caps(caps);
  if (k < 1) throw Error(ErrorCode::InvalidInput, "tau: k must be at least 1");
  auto conn = connectivity(c.carrier);
  if (!conn.zero_connected)
    throw Error(ErrorCode::NotCertifiablyConvergent,
                "tau: coalgebra is not 0-connected (homology in degree " + std::to_string(*conn.least) + ")");
  const int K = caps.max_arity;
  const int kk = std::min(k, K);
  auto tower = bar_tower(o, K, caps);
  if (graded_dims(tower.full->cooperad.seq) != graded_dims(c.cooperad.seq))
    throw Error(ErrorCode::InvalidInput, "tau: coalgebra is not over Bar(O) with these caps");
  const auto& pk = tower.bars[static_cast<std::size_t>(kk - 1)]->cooperad;
  OperadMap g;
  g.source = std::make_shared<const Operad>(dualize(pk));
  g.target = c.dual.operad;
  for (const auto& [n, m] : tower.from_full[static_cast<std::size_t>(kk - 1)].components) {
    if (!pk.seq.has(n)) continue;
    g.components[n] = dual_map(m, tower.full->cooperad.seq.at(n).complex(), pk.seq.at(n).complex());
  }
  auto induced = induce_impl(g, restrict_algebra(g, c.dual), K, INT_MAX);
  return from_dual("tau" + std::to_string(k) + "(" + c.name + ")", c.cooperad, std::move(induced));
}

LayerReport fiber_layer(const Algebra& a, int k, const Caps& caps) {
  validate_caps(caps);
  if (k < 2) throw Error(ErrorCode::InvalidInput, "fiber_layer: k must be at least 2");
  certify(a, "fiber_layer");
  const int K = caps.max_arity, D = caps.max_degree;
  const int md = D == INT_MAX ? INT_MAX : D + 2;
  auto cot = cotangent_trees(a, K, md);
  TreeGrammar g;
  g.root = SymmetricSequence(a.field());
  if (a.operad->seq.has(k) && k <= K) g.root.set(k, a.operad->seq.at(k));
  g.vert = SymmetricSequence(a.field());
  g.carrier = cot->complex();
  g.carrier_weights = cot->weights();
  g.max_weight = K;
  g.max_degree = md;
  g.max_arity = K;
  QuotientTrees layer(TreeSpace(std::move(g)), TreeOps{});
  auto tower = rho_tower_impl(a, k, K, md);
  LayerReport out;
  out.layer = layer.complex();
  out.layer_weights = layer.weights();
  out.layer_homology = homology_through(out.layer, D);
  out.cone_homology = homology_through(cone(tower.maps.back()), D == INT_MAX ? D : D + 1);
  out.ok = true;
  for (const auto& [d, x] : out.layer_homology.dims)
    if (out.cone_homology.dim(d + 1) != x) out.ok = false;
  for (const auto& [d, x] : out.cone_homology.dims)
    if (out.layer_homology.dim(d - 1) != x) out.ok = false;
  return out;
}

Connectivity connectivity(const ChainComplex& c) {
  Connectivity out;
  auto h = homology(c);
  if (!h.dims.empty()) out.least = h.dims.begin()->first;
  out.zero_connected = !out.least || *out.least >= 1;
  return out;
}

}  // namespace opk
