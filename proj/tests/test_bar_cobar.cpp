#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>

#include "opk/bar_cobar.hpp"
#include "opk/error.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();
using Poly = std::map<int, std::size_t>;

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

Poly dims_of(const ChainComplex& c) {
  Poly p;
  for (const auto& g : c.generators()) ++p[g.degree];
  return p;
}

// Sum over set partitions of a j-element set into k blocks of Π dim O(|B|).
std::size_t partition_weight(const std::vector<std::size_t>& dim, int j, int k) {
  std::size_t total = 0;
  std::vector<int> sizes;
  std::function<void(int)> rec = [&](int e) {
    if (e == j) {
      if (static_cast<int>(sizes.size()) != k) return;
      std::size_t w = 1;
      for (int b : sizes) w *= b < static_cast<int>(dim.size()) ? dim[static_cast<std::size_t>(b)] : 0;
      total += w;
      return;
    }
    for (std::size_t b = 0; b < sizes.size(); ++b) {
      ++sizes[b];
      rec(e + 1);
      --sizes[b];
    }
    sizes.push_back(1);
    rec(e + 1);
    sizes.pop_back();
  };
  rec(0);
  return total;
}

// Trees with n labelled leaves and vertices of arity >= 2 decorated by a
// basis of O(k), counted by vertex number.
Poly tree_oracle(const std::vector<std::size_t>& dim, int n) {
  std::map<int, Poly> memo;
  std::function<Poly(int)> count = [&](int size) -> Poly {
    if (size == 1) return {{0, 1}};
    if (memo.count(size)) return memo[size];
    Poly total;
    std::function<void(int, int, Poly)> rec = [&](int left, int blocks, Poly acc) {
      if (left == 0) {
        if (blocks < 2 || blocks >= static_cast<int>(dim.size()) || dim[static_cast<std::size_t>(blocks)] == 0) return;
        for (auto [w, x] : acc) total[w + 1] += x * dim[static_cast<std::size_t>(blocks)];
        return;
      }
      // choose the block of the least remaining element: size b, choose b-1 others
      for (int b = 1; b <= left; ++b) {
        if (b == size) continue;
        std::size_t choose = 1;
        for (int t = 0; t < b - 1; ++t) choose = choose * static_cast<std::size_t>(left - 1 - t) / static_cast<std::size_t>(t + 1);
        Poly sub = count(b), next;
        for (auto [w1, x1] : acc)
          for (auto [w2, x2] : sub) next[w1 + w2] += x1 * x2 * choose;
        rec(left - b, blocks + 1, next);
      }
    };
    rec(size, 0, {{0, 1}});
    memo[size] = total;
    return total;
  };
  return count(n);
}

// Euler characteristic of the normalized simplicial bar: chains of set
// partitions n = j_0 > j_1 > ... > j_s = 1.
long long simplicial_euler(const std::vector<std::size_t>& dim, int n) {
  std::function<long long(int, int)> rec = [&](int j, int s) -> long long {
    if (j == 1) return s % 2 == 0 ? 1 : -1;
    long long total = 0;
    for (int k = 1; k < j; ++k) total += static_cast<long long>(partition_weight(dim, j, k)) * rec(k, s + 1);
    return total;
  };
  return rec(n, 0);
}

long long euler(const Poly& p) {
  long long e = 0;
  for (auto [d, x] : p) e += (d % 2 == 0 ? 1 : -1) * static_cast<long long>(x);
  return e;
}

std::size_t factorial(int n) { return n <= 1 ? 1 : static_cast<std::size_t>(n) * factorial(n - 1); }

}  // namespace

TEST_CASE("bar of builtins") {
  Caps caps{4, 8, 0};
  auto bt = bar_operad(share(builtin_operad("triv", 4)), caps);
  CHECK(graded_dims(bt.cooperad.seq) == graded_dims(builtin_operad("triv", 4).seq));
  auto bc = bar_operad(share(builtin_operad("com", 4)), caps);
  CHECK(dims_of(bc.cooperad.seq.at(2).complex()) == Poly{{1, 1}});
  CHECK(dims_of(bc.cooperad.seq.at(3).complex()) == Poly{{1, 1}, {2, 3}});
  CHECK(homology(bc.cooperad.seq.at(3).complex()).dims == Poly{{2, 2}});
  for (int n = 1; n <= 4; ++n)
    CHECK(homology(bc.cooperad.seq.at(n).complex()).dims == Poly{{n - 1, factorial(n - 1)}});
  auto ba = bar_operad(share(builtin_operad("ass", 3)), Caps{3, 8, 0});
  for (int n = 1; n <= 3; ++n) CHECK(homology(ba.cooperad.seq.at(n).complex()).dims == Poly{{n - 1, factorial(n)}});
  CHECK(bc.weight(3, 0) == 1);
  CHECK(bc.provenance.construction == "bar");
}

TEST_CASE("bar rejects bad input") {
  auto com = builtin_operad("com", 3);
  Operad unital = com;
  unital.seq.set(0, EquivariantComplex::trivial(ChainComplex(Q, {{"e", 0}}, SparseMatrix(1, 1)), 0));
  CHECK_THROWS_AS(bar_operad(share(unital), Caps{3, 6, 0}), Error);
}

TEST_CASE("property: bar dimensions match tree and simplicial oracles") {
  for (const auto& name : {"com", "ass"}) {
    auto o = share(builtin_operad(name, 4));
    auto b = bar_operad(o, Caps{4, 8, 0});
    std::vector<std::size_t> dim{0};
    for (int k = 1; k <= 4; ++k) dim.push_back(o->seq.dim(k));
    for (int n = 2; n <= 4; ++n) {
      auto p = dims_of(b.cooperad.seq.at(n).complex());
      CHECK(p == tree_oracle(dim, n));
      CHECK(euler(p) == simplicial_euler(dim, n));
    }
  }
}

TEST_CASE("bar and cobar validate") {
  Caps caps{4, 8, 0};
  for (const auto& o : {builtin_operad("com", 4), builtin_operad("ass", 4), truncate_operad(builtin_operad("com", 4), 2),
                        suspend(builtin_operad("com", 4))}) {
    auto b = bar_operad(share(o), caps);
    auto r = validate_cooperad(b.cooperad);
    CHECK_MESSAGE(r.report.ok(), o.name);
    auto c = cobar_cooperad(b.cooperad, caps);
    CHECK_MESSAGE(validate_operad(c.operad).report.ok(), o.name);
  }
  auto ct = cobar_cooperad(dualize(builtin_operad("triv", 3)), Caps{3, 6, 0});
  CHECK(graded_dims(ct.operad.seq) == graded_dims(builtin_operad("triv", 3).seq));
  auto cc = cobar_cooperad(dualize(builtin_operad("com", 3)), Caps{3, 6, 0});
  CHECK(dims_of(cc.operad.seq.at(2).complex()) == Poly{{-1, 1}});
  auto cbc = cobar_cooperad(bar_operad(share(builtin_operad("com", 3)), Caps{3, 6, 0}).cooperad, Caps{3, 6, 0});
  CHECK(homology(cbc.operad.seq.at(3).complex()).dims == Poly{{0, 1}});
}

TEST_CASE("counit is a quasi-isomorphism") {
  Caps caps{4, 8, 0};
  auto com = builtin_operad("com", 4);
  for (const auto& o : {com, builtin_operad("ass", 4), truncate_operad(com, 2), truncate_operad(com, 3),
                        builtin_operad("triv", 4)}) {
    auto op = share(o);
    auto cu = counit_map(op, caps);
    CHECK_MESSAGE(validate_operad_map(cu.map).ok(), o.name);
    for (const auto& [n, x] : cu.cobar_bar->seq.components()) {
      ChainMap m(x.complex(), o.seq.at(n).complex(), cu.map.components.at(n));
      CHECK_MESSAGE(is_quasi_iso(m), o.name << " arity " << n);
      CHECK(homology(cone(m)).is_zero());
    }
  }
}

TEST_CASE("bar functoriality and tower") {
  Caps caps{4, 8, 0};
  auto com = share(builtin_operad("com", 4));
  auto tower = bar_tower(com, 4, caps);
  CHECK(graded_dims(tower.bars[0]->cooperad.seq) == graded_dims(builtin_operad("triv", 4).seq));
  const auto& b2 = tower.bars[1]->cooperad.seq.at(3).complex();
  CHECK(dims_of(b2) == Poly{{2, 3}});
  CHECK(b2.differential().is_zero());
  CHECK(homology(b2).dims == Poly{{2, 3}});
  for (int k = 1; k <= 4; ++k) {
    const auto& fk = tower.from_full[static_cast<std::size_t>(k - 1)];
    CHECK(validate_cooperad_map(fk, tower.full->cooperad, tower.bars[static_cast<std::size_t>(k - 1)]->cooperad).ok());
    for (int n = 1; n <= k; ++n) CHECK(fk.components.at(n) == SparseMatrix::identity(tower.full->cooperad.seq.dim(n)));
    if (k == 1) continue;
    const auto& step = tower.steps[static_cast<std::size_t>(k - 2)];
    CHECK(validate_cooperad_map(step, tower.bars[static_cast<std::size_t>(k - 1)]->cooperad,
                                tower.bars[static_cast<std::size_t>(k - 2)]->cooperad)
              .ok());
    auto via = compose_cooperad_maps(step, fk, Q);
    for (const auto& [n, m] : tower.from_full[static_cast<std::size_t>(k - 2)].components) CHECK(via.components.at(n) == m);
  }
  // Bar(g ∘ f) = Bar(g) ∘ Bar(f)
  auto t3 = tower.truncations[2], t2 = tower.truncations[1];
  auto f = truncation_map(com, t3), g = truncation_map(t3, t2);
  auto lhs = bar_map(compose_maps(g, f), *tower.full, *tower.bars[1]);
  auto rhs = compose_cooperad_maps(bar_map(g, *tower.bars[2], *tower.bars[1]), bar_map(f, *tower.full, *tower.bars[2]), Q);
  for (const auto& [n, m] : lhs.components) CHECK(rhs.components.at(n) == m);
  auto broken = tower.from_full[1];
  broken.components.at(2) = scale(broken.components.at(2), 2, Q);
  CHECK_FALSE(validate_cooperad_map(broken, tower.full->cooperad, tower.bars[1]->cooperad).ok());
}
