#include "opk/trees.hpp"

#include <algorithm>
#include <numeric>

#include "opk/error.hpp"

namespace opk {

bool koszul_odd(std::vector<std::pair<int, int>> pd) {
  bool odd = false;
  for (std::size_t a = 0; a < pd.size(); ++a) {
    if (pd[a].second % 2 == 0) continue;
    for (std::size_t b = a + 1; b < pd.size(); ++b)
      if (pd[b].second % 2 != 0 && pd[a].first > pd[b].first) odd = !odd;
  }
  return odd;
}

namespace {

bool odd(int d) { return d % 2 != 0; }

// Set partitions of `items` into blocks ordered by least element, as
// restricted growth strings.
void set_partitions(const std::vector<int>& items, std::vector<std::vector<std::vector<int>>>& out) {
  const std::size_t n = items.size();
  if (n == 0) {
    out.push_back({});
    return;
  }
  std::vector<int> rgs(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int maxb) {
    if (k == n) {
      std::vector<std::vector<int>> blocks(static_cast<std::size_t>(maxb + 1));
      for (std::size_t a = 0; a < n; ++a) blocks[static_cast<std::size_t>(rgs[a])].push_back(items[a]);
      out.push_back(std::move(blocks));
      return;
    }
    for (int b = 0; b <= maxb + 1; ++b) {
      rgs[k] = b;
      rec(k + 1, std::max(maxb, b));
    }
  };
  rgs[0] = 0;
  rec(1, 0);
}

// Subtree fragment: nodes in preorder with kid indices relative to the
// fragment, or a single leaf.
struct Frag {
  std::vector<Tree::Node> nodes;
  int leaf = -1;
};

void append_frag(std::vector<Tree::Node>& nodes, std::vector<int>& kids, const Frag& f) {
  if (f.leaf >= 0) {
    kids.push_back(leaf_code(f.leaf));
    return;
  }
  const int off = static_cast<int>(nodes.size());
  kids.push_back(off);
  for (auto nd : f.nodes) {
    for (auto& k : nd.kids)
      if (k >= 0) k += off;
    nodes.push_back(std::move(nd));
  }
}

}  // namespace

TreeSpace::TreeSpace(TreeGrammar g) : g_(std::move(g)) {
  if (g_.carrier && g_.carrier_weights.empty()) g_.carrier_weights.assign(g_.carrier->dim(), 1);
  if (g_.carrier && g_.carrier_weights.size() != g_.carrier->dim())
    throw Error(ErrorCode::InvalidInput, "carrier weights do not match carrier dimension");
  if (!g_.two_level && g_.min_vert_arity < 2 && g_.vert.max_arity() >= 1 && g_.vert.has(1))
    throw Error(ErrorCode::NotFinitelySupported, "unary decorations on stacked vertices give infinitely many trees");
}

int TreeSpace::node_degree(const Tree& t, std::size_t k) const {
  const auto& s = seq_for(k);
  int d = s.degree(arity(t, k), t.nodes[k].gen);
  return k == 0 ? d : d + g_.vert_shift;
}

int TreeSpace::leaf_degree(const Tree& t, int label) const {
  if (!g_.carrier) return 0;
  return g_.carrier->degree(t.leaf_gen[static_cast<std::size_t>(label)]);
}

int TreeSpace::degree(const Tree& t) const {
  int d = 0;
  for (std::size_t k = 0; k < t.nodes.size(); ++k) d += node_degree(t, k);
  for (int l = 0; l < static_cast<int>(t.leaf_gen.size()); ++l) d += leaf_degree(t, l);
  return d;
}

int TreeSpace::carrier_weight(std::size_t gen) const { return g_.carrier_weights.empty() ? 1 : g_.carrier_weights[gen]; }

int TreeSpace::weight(const Tree& t) const {
  if (!g_.carrier) return t.leaves;
  int w = 0;
  for (auto g : t.leaf_gen) w += carrier_weight(g);
  return w;
}

const SparseMatrix& TreeSpace::decoration_action(bool root, int ar, const Perm& p) const {
  auto key = std::make_tuple(root, ar, p);
  auto it = action_cache_.find(key);
  if (it != action_cache_.end()) return it->second;
  const auto& s = root ? g_.root : g_.vert;
  return action_cache_.emplace(key, s.at(ar).action(p)).first->second;
}

std::vector<int> TreeSpace::min_leaves(const Tree& t) {
  std::vector<int> mn(t.nodes.size(), INT_MAX);
  std::function<int(std::size_t)> rec = [&](std::size_t k) {
    int m = INT_MAX;
    for (int c : t.nodes[k].kids) m = std::min(m, c < 0 ? leaf_label(c) : rec(static_cast<std::size_t>(c)));
    mn[k] = m;
    return m;
  };
  if (!t.nodes.empty()) rec(0);
  return mn;
}

std::vector<int> TreeSpace::leaf_set(const Tree& t, std::size_t k) {
  std::vector<int> out;
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    for (int c : t.nodes[v].kids) {
      if (c < 0) out.push_back(leaf_label(c));
      else rec(static_cast<std::size_t>(c));
    }
  };
  rec(k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> TreeSpace::subtree_nodes(const Tree& t, std::size_t k) {
  std::vector<std::size_t> out;
  std::function<void(std::size_t)> rec = [&](std::size_t v) {
    out.push_back(v);
    for (int c : t.nodes[v].kids)
      if (c >= 0) rec(static_cast<std::size_t>(c));
  };
  rec(k);
  return out;
}

std::vector<int> TreeSpace::parents(const Tree& t) {
  std::vector<int> p(t.nodes.size(), -1);
  for (std::size_t k = 0; k < t.nodes.size(); ++k)
    for (int c : t.nodes[k].kids)
      if (c >= 0) p[static_cast<std::size_t>(c)] = static_cast<int>(k);
  return p;
}

std::string TreeSpace::to_string(const Tree& t) const {
  std::function<std::string(int)> rec = [&](int c) -> std::string {
    if (c < 0) {
      int l = leaf_label(c);
      if (g_.carrier) return g_.carrier->generator(t.leaf_gen[static_cast<std::size_t>(l)]).id;
      return std::to_string(l + 1);
    }
    auto k = static_cast<std::size_t>(c);
    const auto& s = seq_for(k);
    std::string r = s.at(arity(t, k)).complex().generator(t.nodes[k].gen).id;
    r += "[";
    for (std::size_t j = 0; j < t.nodes[k].kids.size(); ++j) r += (j ? "," : "") + rec(t.nodes[k].kids[j]);
    return r + "]";
  };
  return t.nodes.empty() ? std::string("∅") : rec(0);
}

std::vector<int> TreeSpace::factors(const Tree& t) const {
  std::vector<int> f(t.nodes.size());
  std::iota(f.begin(), f.end(), 0);
  if (g_.carrier)
    for (int l = 0; l < t.leaves; ++l) f.push_back(leaf_code(l));
  return f;
}

void TreeSpace::canonicalize(const Tree& raw, const std::vector<int>& factors, const Scalar& coeff,
                             std::vector<TreeTerm>& out) const {
  if (coeff == 0) return;
  const std::size_t n_nodes = raw.nodes.size();
  auto mn = min_leaves(raw);
  auto key = [&](int c) { return c < 0 ? leaf_label(c) : mn[static_cast<std::size_t>(c)]; };

  std::vector<std::vector<int>> kids(n_nodes);
  std::vector<SparseVec> deco(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    const auto& K = raw.nodes[k].kids;
    const std::size_t m = K.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(K[a]) < key(K[b]); });
    Perm sigma(m);
    bool ident = true;
    for (std::size_t j = 0; j < m; ++j) {
      sigma[order[j]] = static_cast<int>(j);
      kids[k].push_back(K[order[j]]);
      if (order[j] != j) ident = false;
    }
    if (ident) deco[k] = SparseVec::unit(raw.nodes[k].gen);
    else deco[k] = decoration_action(k == 0, static_cast<int>(m), sigma).col(raw.nodes[k].gen);
    if (deco[k].empty()) return;
  }

  std::vector<int> newidx(n_nodes, -1);
  std::vector<std::size_t> pre;
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    newidx[v] = static_cast<int>(pre.size());
    pre.push_back(v);
    for (int c : kids[v])
      if (c >= 0) dfs(static_cast<std::size_t>(c));
  };
  dfs(0);
  if (pre.size() != n_nodes) throw Error(ErrorCode::InvalidInput, "disconnected tree");

  std::vector<std::pair<int, int>> pd;
  pd.reserve(factors.size());
  for (int f : factors) {
    if (f >= 0) pd.emplace_back(newidx[static_cast<std::size_t>(f)], node_degree(raw, static_cast<std::size_t>(f)));
    else pd.emplace_back(static_cast<int>(n_nodes) + leaf_label(f), leaf_degree(raw, leaf_label(f)));
  }
  Scalar c0 = koszul_odd(pd) ? Scalar(-coeff) : coeff;

  Tree t;
  t.leaves = raw.leaves;
  t.leaf_gen = raw.leaf_gen;
  t.nodes.resize(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    auto& nd = t.nodes[static_cast<std::size_t>(newidx[k])];
    for (int c : kids[k]) nd.kids.push_back(c < 0 ? c : newidx[static_cast<std::size_t>(c)]);
  }
  // expand the tensor product of decorations, in canonical node order
  std::vector<std::size_t> pos(n_nodes, 0);
  const auto& f = field();
  while (true) {
    Scalar c = c0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const auto& [g, v] = deco[k].entries()[pos[k]];
      t.nodes[static_cast<std::size_t>(newidx[k])].gen = g;
      c *= v;
    }
    c = f.normalize(c);
    if (c != 0) out.emplace_back(t, c);
    std::size_t k = 0;
    while (k < n_nodes && ++pos[k] == deco[k].size()) pos[k++] = 0;
    if (k == n_nodes) break;
  }
}

void TreeSpace::relabel(const Tree& t, const Perm& sigma, const Scalar& coeff, std::vector<TreeTerm>& out) const {
  Tree raw = t;
  for (auto& nd : raw.nodes)
    for (auto& c : nd.kids)
      if (c < 0) c = leaf_code(sigma[static_cast<std::size_t>(leaf_label(c))]);
  std::vector<int> fac(t.nodes.size());
  std::iota(fac.begin(), fac.end(), 0);
  if (g_.carrier) {
    for (int l = 0; l < t.leaves; ++l) {
      raw.leaf_gen[static_cast<std::size_t>(sigma[static_cast<std::size_t>(l)])] = t.leaf_gen[static_cast<std::size_t>(l)];
      fac.push_back(leaf_code(sigma[static_cast<std::size_t>(l)]));
    }
  }
  canonicalize(raw, fac, coeff, out);
}

const std::vector<Tree>& TreeSpace::shapes(int n) const {
  auto it = shapes_cache_.find(n);
  if (it != shapes_cache_.end()) return it->second;

  std::function<std::vector<Frag>(const std::vector<int>&)> subtrees = [&](const std::vector<int>& block) {
    std::vector<Frag> res;
    if (g_.two_level) {
      int a = static_cast<int>(block.size());
      if (a >= g_.min_vert_arity && g_.vert.has(a)) {
        Frag f;
        Tree::Node nd;
        for (int l : block) nd.kids.push_back(leaf_code(l));
        f.nodes.push_back(nd);
        res.push_back(f);
      }
      return res;
    }
    if (block.size() == 1) {
      Frag f;
      f.leaf = block[0];
      res.push_back(f);
    }
    if (block.size() < 2) return res;
    std::vector<std::vector<std::vector<int>>> parts;
    set_partitions(block, parts);
    for (const auto& p : parts) {
      int a = static_cast<int>(p.size());
      if (a < std::max(2, g_.min_vert_arity) || !g_.vert.has(a)) continue;
      std::vector<std::vector<Frag>> opts;
      for (const auto& b : p) opts.push_back(subtrees(b));
      bool empty = std::any_of(opts.begin(), opts.end(), [](const auto& o) { return o.empty(); });
      if (empty) continue;
      std::vector<std::size_t> idx(opts.size(), 0);
      while (true) {
        Frag f;
        f.nodes.emplace_back();
        std::vector<int> kids;
        for (std::size_t j = 0; j < opts.size(); ++j) append_frag(f.nodes, kids, opts[j][idx[j]]);
        f.nodes[0].kids = kids;
        res.push_back(std::move(f));
        std::size_t j = 0;
        while (j < idx.size() && ++idx[j] == opts[j].size()) idx[j++] = 0;
        if (j == idx.size()) break;
      }
    }
    return res;
  };

  std::vector<Tree> skeletons;
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::vector<int>>> parts;
  set_partitions(all, parts);
  for (const auto& p : parts) {
    int m = static_cast<int>(p.size());
    if (!g_.root.has(m)) continue;
    std::vector<std::vector<Frag>> opts;
    for (const auto& b : p) opts.push_back(subtrees(b));
    if (std::any_of(opts.begin(), opts.end(), [](const auto& o) { return o.empty(); })) continue;
    std::vector<std::size_t> idx(opts.size(), 0);
    while (true) {
      Tree t;
      t.leaves = n;
      t.nodes.emplace_back();
      std::vector<int> kids;
      for (std::size_t j = 0; j < opts.size(); ++j) append_frag(t.nodes, kids, opts[j][idx[j]]);
      t.nodes[0].kids = kids;
      skeletons.push_back(std::move(t));
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == opts[j].size()) idx[j++] = 0;
      if (j == idx.size()) break;
    }
  }

  std::vector<Tree> result;
  for (const auto& sk : skeletons) {
    std::vector<std::size_t> dims(sk.nodes.size());
    bool zero = false;
    for (std::size_t k = 0; k < sk.nodes.size(); ++k) {
      dims[k] = seq_for(k).dim(arity(sk, k));
      if (dims[k] == 0) zero = true;
    }
    if (zero) continue;
    std::vector<std::size_t> g(sk.nodes.size(), 0);
    while (true) {
      Tree t = sk;
      for (std::size_t k = 0; k < t.nodes.size(); ++k) t.nodes[k].gen = g[k];
      result.push_back(std::move(t));
      std::size_t k = 0;
      while (k < g.size() && ++g[k] == dims[k]) g[k++] = 0;
      if (k == g.size()) break;
    }
  }
  std::stable_sort(result.begin(), result.end(), [&](const Tree& a, const Tree& b) {
    int da = degree(a), db = degree(b);
    if (da != db) return da < db;
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    return a < b;
  });
  return shapes_cache_.emplace(n, std::move(result)).first->second;
}

void tree_differential(const TreeSpace& space, const TreeOps& ops, const Tree& t, std::vector<TreeTerm>& out) {
  const auto& g = space.grammar();
  const auto& f = space.field();
  const std::size_t N = t.nodes.size();
  std::vector<int> ndeg(N);
  for (std::size_t k = 0; k < N; ++k) ndeg[k] = space.node_degree(t, k);
  std::vector<int> prefix(N + 1, 0);
  for (std::size_t k = 0; k < N; ++k) prefix[k + 1] = prefix[k] + ndeg[k];

  // decoration differentials
  for (std::size_t k = 0; k < N; ++k) {
    int ar = TreeSpace::arity(t, k);
    const auto& dcol = space.seq_for(k).at(ar).complex().differential().col(t.nodes[k].gen);
    if (dcol.empty()) continue;
    bool neg = odd(prefix[k]) != (k != 0 && odd(g.vert_shift));
    for (const auto& [gen, v] : dcol) {
      Tree u = t;
      u.nodes[k].gen = gen;
      out.emplace_back(std::move(u), neg ? f.neg(v) : v);
    }
  }
  if (g.carrier) {
    int before = prefix[N];
    for (int l = 0; l < t.leaves; ++l) {
      const auto& dcol = g.carrier->differential().col(t.leaf_gen[static_cast<std::size_t>(l)]);
      for (const auto& [gen, v] : dcol) {
        Tree u = t;
        u.leaf_gen[static_cast<std::size_t>(l)] = gen;
        out.emplace_back(std::move(u), odd(before) ? f.neg(v) : v);
      }
      before += space.leaf_degree(t, l);
    }
  }

  // edge contractions
  for (std::size_t u = 0; u < N; ++u) {
    const auto& op = u == 0 ? ops.root_act : ops.vert_compose;
    if (!op) continue;
    const auto& kids = t.nodes[u].kids;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (kids[i] < 0) continue;
      auto v = static_cast<std::size_t>(kids[i]);
      int between = prefix[v] - prefix[u + 1];
      bool neg = odd(ndeg[v]) && odd(between);
      if (odd(prefix[u])) neg = !neg;
      int inner_u = space.seq_for(u).degree(TreeSpace::arity(t, u), t.nodes[u].gen);
      if (odd(inner_u)) neg = !neg;
      // the root carries no suspension of its own
      if (u == 0 && odd(g.vert_shift)) neg = !neg;
      int m = TreeSpace::arity(t, u), n = TreeSpace::arity(t, v);
      SparseVec res = op(m, static_cast<int>(i) + 1, n, t.nodes[u].gen, t.nodes[v].gen);
      if (res.empty()) continue;
      Tree raw;
      raw.leaves = t.leaves;
      raw.leaf_gen = t.leaf_gen;
      auto renum = [&](int c) { return c < 0 ? c : (static_cast<std::size_t>(c) > v ? c - 1 : c); };
      for (std::size_t k = 0; k < N; ++k) {
        if (k == v) continue;
        Tree::Node nd = t.nodes[k];
        if (k == u) {
          nd.kids.clear();
          for (std::size_t j = 0; j < kids.size(); ++j) {
            if (j == i) {
              for (int c : t.nodes[v].kids) nd.kids.push_back(c);
            } else {
              nd.kids.push_back(kids[j]);
            }
          }
        }
        for (auto& c : nd.kids) c = renum(c);
        raw.nodes.push_back(std::move(nd));
      }
      std::vector<int> fac(N - 1);
      std::iota(fac.begin(), fac.end(), 0);
      if (g.carrier)
        for (int l = 0; l < t.leaves; ++l) fac.push_back(leaf_code(l));
      const std::size_t un = u;  // u < v keeps its index
      for (const auto& [gen, c] : res) {
        raw.nodes[un].gen = gen;
        space.canonicalize(raw, fac, neg ? f.neg(c) : c, out);
      }
    }
  }

  // leaf contractions
  if (g.carrier && ops.leaf_act) {
    auto par = TreeSpace::parents(t);
    for (std::size_t v = 1; v < N; ++v) {
      const auto& kids = t.nodes[v].kids;
      if (std::any_of(kids.begin(), kids.end(), [](int c) { return c >= 0; })) continue;
      std::vector<int> labels;
      std::vector<std::size_t> args;
      for (int c : kids) {
        labels.push_back(leaf_label(c));
        args.push_back(t.leaf_gen[static_cast<std::size_t>(leaf_label(c))]);
      }
      SparseVec res = ops.leaf_act(static_cast<int>(kids.size()), t.nodes[v].gen, args);
      if (res.empty()) continue;
      // move the leaves (in kid order) right after v
      std::vector<std::pair<int, int>> pd;
      std::vector<int> target_of_label(static_cast<std::size_t>(t.leaves));
      {
        int pos = 0;
        std::vector<int> order;
        for (std::size_t k = 0; k <= v; ++k) order.push_back(static_cast<int>(k));
        for (int l : labels) order.push_back(leaf_code(l));
        for (std::size_t k = v + 1; k < N; ++k) order.push_back(static_cast<int>(k));
        for (int l = 0; l < t.leaves; ++l)
          if (std::find(labels.begin(), labels.end(), l) == labels.end()) order.push_back(leaf_code(l));
        std::map<int, int> where;
        for (int x : order) where[x] = pos++;
        for (std::size_t k = 0; k < N; ++k) pd.emplace_back(where[static_cast<int>(k)], ndeg[k]);
        for (int l = 0; l < t.leaves; ++l) pd.emplace_back(where[leaf_code(l)], space.leaf_degree(t, l));
      }
      bool neg = koszul_odd(pd);
      if (odd(prefix[v])) neg = !neg;
      // new labels: the merged leaf takes the least label of the group
      int merged = *std::min_element(labels.begin(), labels.end());
      std::vector<int> newlab(static_cast<std::size_t>(t.leaves), -1);
      int next = 0;
      for (int l = 0; l < t.leaves; ++l) {
        bool in = std::find(labels.begin(), labels.end(), l) != labels.end();
        if (!in || l == merged) newlab[static_cast<std::size_t>(l)] = next++;
      }
      int merged_new = newlab[static_cast<std::size_t>(merged)];
      Tree raw;
      raw.leaves = next;
      raw.leaf_gen.assign(static_cast<std::size_t>(next), 0);
      for (int l = 0; l < t.leaves; ++l)
        if (newlab[static_cast<std::size_t>(l)] >= 0) raw.leaf_gen[static_cast<std::size_t>(newlab[static_cast<std::size_t>(l)])] = t.leaf_gen[static_cast<std::size_t>(l)];
      auto renum = [&](int c) -> int {
        if (c < 0) return leaf_code(newlab[static_cast<std::size_t>(leaf_label(c))]);
        auto cc = static_cast<std::size_t>(c);
        if (cc == v) return leaf_code(merged_new);
        return cc > v ? c - 1 : c;
      };
      for (std::size_t k = 0; k < N; ++k) {
        if (k == v) continue;
        Tree::Node nd = t.nodes[k];
        for (auto& c : nd.kids) c = renum(c);
        raw.nodes.push_back(std::move(nd));
      }
      std::vector<int> fac;
      for (std::size_t k = 0; k < v; ++k) fac.push_back(static_cast<int>(k));
      fac.push_back(leaf_code(merged_new));
      for (std::size_t k = v + 1; k < N; ++k) fac.push_back(static_cast<int>(k - 1));
      for (int l = 0; l < next; ++l)
        if (l != merged_new) fac.push_back(leaf_code(l));
      for (const auto& [gen, c] : res) {
        raw.leaf_gen[static_cast<std::size_t>(merged_new)] = gen;
        space.canonicalize(raw, fac, neg ? f.neg(c) : c, out);
      }
      (void)par;
    }
  }
}

SequenceTrees::SequenceTrees(TreeSpace space, TreeOps ops) : space_(std::move(space)), ops_(std::move(ops)) {
  if (space_.quotient_mode()) throw Error(ErrorCode::InvalidInput, "sequence trees need labelled leaves");
}

void SequenceTrees::build_index(int n) const {
  if (index_.count(n)) return;
  auto& idx = index_[n];
  const auto& b = space_.shapes(n);
  for (std::size_t k = 0; k < b.size(); ++k) idx.emplace(b[k], k);
}

std::optional<std::size_t> SequenceTrees::index(const Tree& t) const {
  build_index(t.leaves);
  const auto& idx = index_.at(t.leaves);
  auto it = idx.find(t);
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

SparseVec SequenceTrees::collect(int n, const std::vector<TreeTerm>& terms) const {
  build_index(n);
  const auto& idx = index_.at(n);
  VecBuilder vb;
  for (const auto& [t, c] : terms) {
    auto it = idx.find(t);
    if (it == idx.end()) throw Error(ErrorCode::InvalidInput, "tree outside the basis: " + space_.to_string(t));
    vb.add(it->second, c);
  }
  return vb.finish(space_.field());
}

const EquivariantComplex& SequenceTrees::component(int n) const {
  auto it = comps_.find(n);
  if (it != comps_.end()) return it->second;
  const auto& b = space_.shapes(n);
  const auto& f = space_.field();
  std::vector<Generator> gens;
  for (const auto& t : b) gens.push_back({space_.to_string(t), space_.degree(t)});
  SparseMatrix d(b.size(), b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    std::vector<TreeTerm> terms;
    tree_differential(space_, ops_, b[k], terms);
    d.set_col(k, collect(n, terms));
  }
  std::vector<SparseMatrix> trans;
  for (int i = 1; i < n; ++i) {
    Perm s = identity_perm(n);
    std::swap(s[static_cast<std::size_t>(i - 1)], s[static_cast<std::size_t>(i)]);
    SparseMatrix m(b.size(), b.size());
    for (std::size_t k = 0; k < b.size(); ++k) {
      std::vector<TreeTerm> terms;
      space_.relabel(b[k], s, 1, terms);
      m.set_col(k, collect(n, terms));
    }
    trans.push_back(std::move(m));
  }
  ChainComplex c(f, std::move(gens), std::move(d));
  return comps_.emplace(n, EquivariantComplex(std::move(c), n, std::move(trans))).first->second;
}

SymmetricSequence SequenceTrees::sequence() const {
  SymmetricSequence s(space_.field());
  for (int n = 0; n <= space_.grammar().max_arity; ++n)
    if (!space_.shapes(n).empty()) s.set(n, component(n));
  return s;
}

QuotientTrees::QuotientTrees(TreeSpace space, TreeOps ops) : space_(std::move(space)), ops_(std::move(ops)) {
  if (!space_.quotient_mode()) throw Error(ErrorCode::InvalidInput, "quotient trees need a carrier");
  const auto& g = space_.grammar();
  const auto& f = space_.field();
  const auto& car = *g.carrier;
  const std::size_t cdim = car.dim();

  struct Gen {
    int degree;
    int arity;
    std::size_t orbit;
  };
  std::vector<Gen> gens;
  for (int n = 0; n <= g.max_arity; ++n) {
    const auto& shapes = space_.shapes(n);
    if (shapes.empty()) continue;
    Block blk;
    std::vector<std::size_t> tuple(static_cast<std::size_t>(n));
    for (const auto& sh : shapes) {
      int base = space_.degree(sh);
      std::function<void(int, int, int)> rec = [&](int l, int w, int d) {
        if (l == n) {
          if (d > g.max_degree) return;
          Tree t = sh;
          t.leaf_gen = tuple;
          blk.index.emplace(t, blk.labelled.size());
          blk.labelled.push_back(std::move(t));
          return;
        }
        for (std::size_t c = 0; c < cdim; ++c) {
          int w2 = w + space_.carrier_weight(c);
          if (w2 > g.max_weight) continue;
          tuple[static_cast<std::size_t>(l)] = c;
          rec(l + 1, w2, d + car.degree(c));
        }
      };
      rec(0, 0, base);
    }
    if (blk.labelled.empty()) continue;
    if (n >= 2) require_semisimple(f, n, "coinvariants of tree complexes");
    std::vector<SparseMatrix> trans;
    for (int i = 1; i < n; ++i) {
      Perm s = identity_perm(n);
      std::swap(s[static_cast<std::size_t>(i - 1)], s[static_cast<std::size_t>(i)]);
      SparseMatrix m(blk.labelled.size(), blk.labelled.size());
      for (std::size_t k = 0; k < blk.labelled.size(); ++k) {
        std::vector<TreeTerm> terms;
        space_.relabel(blk.labelled[k], s, 1, terms);
        VecBuilder vb;
        for (const auto& [t, c] : terms) vb.add(blk.index.at(t), c);
        m.set_col(k, vb.finish(f));
      }
      trans.push_back(std::move(m));
    }
    blk.split = coinvariant_split(blk.labelled.size(), n, trans, f);
    for (std::size_t o = 0; o < blk.split.rank; ++o) {
      // degree of an orbit: any labelled element in the section's support
      const auto& col = blk.split.section.col(o);
      gens.push_back({space_.degree(blk.labelled[col.front().first]), n, o});
    }
    blk.position.assign(blk.split.rank, 0);
    blocks_.emplace(n, std::move(blk));
  }
  std::stable_sort(gens.begin(), gens.end(), [](const Gen& a, const Gen& b) { return a.degree < b.degree; });
  std::vector<Generator> cgens;
  for (std::size_t q = 0; q < gens.size(); ++q) {
    auto& blk = blocks_.at(gens[q].arity);
    blk.position[gens[q].orbit] = q;
    origin_.emplace_back(gens[q].arity, gens[q].orbit);
    const auto& rep = blk.labelled[blk.split.section.col(gens[q].orbit).front().first];
    cgens.push_back({space_.to_string(rep), gens[q].degree});
    weights_.push_back(space_.weight(rep));
  }
  SparseMatrix d(gens.size(), gens.size());
  for (std::size_t q = 0; q < gens.size(); ++q) {
    std::vector<TreeTerm> terms;
    for (const auto& [t, c] : lift(q)) {
      std::vector<TreeTerm> dt;
      tree_differential(space_, ops_, t, dt);
      for (auto& [u, x] : dt) terms.emplace_back(std::move(u), f.mul(x, c));
    }
    d.set_col(q, project(terms));
  }
  complex_ = ChainComplex(f, std::move(cgens), std::move(d));
}

SparseVec QuotientTrees::project(const std::vector<TreeTerm>& terms) const {
  VecBuilder vb;
  for (const auto& [t, c] : terms) {
    auto bit = blocks_.find(t.leaves);
    if (bit == blocks_.end()) continue;
    const auto& blk = bit->second;
    auto it = blk.index.find(t);
    if (it == blk.index.end()) continue;
    for (const auto& [o, v] : blk.split.projection.col(it->second)) vb.add(blk.position[o], c * v);
  }
  return vb.finish(space_.field());
}

std::vector<TreeTerm> QuotientTrees::lift(std::size_t q) const {
  const auto& [n, o] = origin_.at(q);
  const auto& blk = blocks_.at(n);
  std::vector<TreeTerm> out;
  for (const auto& [k, v] : blk.split.section.col(o)) out.emplace_back(blk.labelled[k], v);
  return out;
}

}  // namespace opk
