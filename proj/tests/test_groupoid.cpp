#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "opk/error.hpp"
#include "opk/groupoid.hpp"
#include "opk/operad.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();
using Poly = std::map<int, std::size_t>;

GroupoidPtr share(FiniteGroupoid g) { return std::make_shared<const FiniteGroupoid>(std::move(g)); }

ChainComplex point(int degree, const FieldSpec& f = Q) { return ChainComplex(f, {{"x", degree}}, SparseMatrix(1, 1)); }
ChainComplex zero_complex() { return ChainComplex(Q); }

Poly dims_of(const ChainComplex& c) {
  Poly p;
  for (const auto& g : c.generators()) ++p[g.degree];
  return p;
}

Poly hdims(const ChainComplex& c) { return homology(c).dims; }

// One-object groupoid of the cyclic group of order 2.
FiniteGroupoid b_z2() {
  FiniteGroupoid g;
  g.objects = {"*"};
  g.names = {"e", "s"};
  g.src = {0, 0};
  g.tgt = {0, 0};
  g.identity = {0};
  g.comp = {{{0, 0}, 0}, {{0, 1}, 1}, {{1, 0}, 1}, {{1, 1}, 0}};
  return g;
}

// Constant functor with value c on every object, identity actions.
GroupoidFunctor constant(GroupoidPtr g, const ChainComplex& c) {
  GroupoidFunctor f{g, std::vector<ChainComplex>(g->num_objects(), c), {}};
  for (std::size_t m = 0; m < g->num_morphisms(); ++m) f.action.push_back(SparseMatrix::identity(c.dim()));
  return f;
}

// Functor on G^op × G that is c at every object, acting by sign(v) on the second factor.
GroupoidFunctor diagonal_sign(GroupoidPtr bz2) {
  auto p = share(product(opposite(*bz2), *bz2));
  GroupoidFunctor f{p, std::vector<ChainComplex>(p->num_objects(), point(0)), {}};
  for (std::size_t m = 0; m < p->num_morphisms(); ++m) {
    const bool odd_v = (m % bz2->num_morphisms()) == 1;
    SparseMatrix a(1, 1);
    a.set_col(0, SparseVec::unit(0, odd_v ? -1 : 1));
    f.action.push_back(a);
  }
  return f;
}

std::size_t aut_order(const FiniteGroupoid& g, std::size_t o) { return g.hom(o, o).size(); }

std::multiset<std::size_t> component_aut_orders(const FiniteGroupoid& g) {
  std::multiset<std::size_t> out;
  for (const auto& c : components(g)) out.insert(aut_order(g, c.front()));
  return out;
}

// Complex with random generator degrees in [0, 2] and a random pairing d.
ChainComplex random_complex(std::mt19937& rng, int gens) {
  std::uniform_int_distribution<int> deg(0, 2), coin(0, 1);
  std::vector<Generator> g;
  for (int i = 0; i < gens; ++i) g.push_back({"t" + std::to_string(i), deg(rng)});
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t;
  std::vector<bool> used(g.size(), false);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (!used[i] && !used[j] && i != j && g[i].degree == g[j].degree + 1 && coin(rng)) {
        t.emplace_back(j, i, Scalar(coin(rng) ? 2 : -1));
        used[i] = used[j] = true;
      }
  return ChainComplex(Q, g, SparseMatrix::from_triplets(g.size(), g.size(), t, Q));
}

// Homology in weights 1..k of Sym and of ⊕_{p<=k} H^{⊗p}, from the homology dims of T.
Poly sym_oracle(const Poly& h, int k, bool symmetric) {
  // series indexed by (weight, degree)
  std::map<std::pair<int, int>, long long> s{{{0, 0}, 1}};
  if (!symmetric) {
    std::map<std::pair<int, int>, long long> power{{{0, 0}, 1}}, total = power;
    for (int p = 1; p <= k; ++p) {
      std::map<std::pair<int, int>, long long> next;
      for (auto [wd, c] : power)
        for (auto [d, x] : h) next[{wd.first + 1, wd.second + d}] += c * static_cast<long long>(x);
      power = next;
      for (auto [wd, c] : power) total[wd] += c;
    }
    s = total;
  } else {
    for (auto [d, x] : h)
      for (std::size_t r = 0; r < x; ++r) {
        std::map<std::pair<int, int>, long long> next;
        for (auto [wd, c] : s)
          for (int e = 0; wd.first + e <= k; ++e) {
            if (d % 2 != 0 && e > 1) break;
            next[{wd.first + e, wd.second + e * d}] += c;
          }
        s = next;
      }
  }
  Poly out;
  for (auto [wd, c] : s)
    if (c != 0 && wd.first > 0) out[wd.second] += static_cast<std::size_t>(c);
  return out;
}

}  // namespace

TEST_CASE("finite groupoids validate and detect broken tables") {
  const auto g = fin_bij(3);
  CHECK(g.num_objects() == 4);
  CHECK(g.num_morphisms() == 10);
  CHECK(validate_groupoid(g).ok());
  CHECK(validate_groupoid(opposite(g)).ok());
  CHECK(validate_groupoid(product(fin_bij(2), b_z2())).ok());
  CHECK(validate_groupoid(b_z2()).ok());
  CHECK(components(g).size() == 4);
  CHECK(fin_perm(g, g.identity[3] + 5) == Perm{2, 1, 0});
  CHECK(g.compose(g.inverse(g.identity[3] + 3), g.identity[3] + 3) == g.identity[3]);

  auto broken = b_z2();
  broken.comp[{1, 1}] = 1;
  CHECK_FALSE(validate_groupoid(broken).ok());
  auto missing = b_z2();
  missing.comp.erase({1, 0});
  CHECK_FALSE(validate_groupoid(missing).ok());
}

TEST_CASE("twisted arrow groupoids") {
  SUBCASE("trivial group") {
    const auto t = twisted_arrow(fin_bij(0));
    CHECK(t.groupoid.num_objects() == 1);
    CHECK(t.groupoid.num_morphisms() == 1);
  }
  SUBCASE("one object with automorphisms of order 2") {
    const auto t = twisted_arrow(fin_bij(2, 2));
    CHECK(validate_groupoid(t.groupoid).ok());
    CHECK(components(t.groupoid).size() == 1);
    CHECK(component_aut_orders(t.groupoid) == std::multiset<std::size_t>{2});
  }
  SUBCASE("components and automorphism groups match the groupoid") {
    for (auto [k, from] : std::vector<std::pair<int, int>>{{2, 0}, {2, 1}, {3, 0}, {3, 1}}) {
      const auto g = fin_bij(k, from);
      const auto t = twisted_arrow(g);
      CHECK(validate_groupoid(t.groupoid).ok());
      CHECK(components(t.groupoid).size() == components(g).size());
      CHECK(component_aut_orders(t.groupoid) == component_aut_orders(g));
    }
    CHECK(components(twisted_arrow(fin_bij(2, 1)).groupoid).size() == 2);
    CHECK(components(twisted_arrow(fin_bij(2)).groupoid).size() == 3);
    CHECK(component_aut_orders(twisted_arrow(fin_bij(3)).groupoid) == std::multiset<std::size_t>{1, 1, 2, 6});
  }
  SUBCASE("projection is a functor into G^op × G") {
    const auto g = fin_bij(3);
    const auto t = twisted_arrow(g);
    GroupoidMap p{share(t.groupoid), share(product(opposite(g), g)), t.proj_obj, t.proj_mor};
    CHECK(validate_groupoid_map(p).ok());
  }
}

TEST_CASE("coends and ends of small functors") {
  auto trivial = share(fin_bij(0));
  auto sq = share(product(opposite(*trivial), *trivial));
  SUBCASE("constant functor on the trivial group") {
    ChainComplex c(Q, {{"a", 0}, {"b", 1}, {"c", 3}}, SparseMatrix(3, 3));
    CHECK(dims_of(coend(*trivial, constant(sq, c))) == dims_of(c));
    CHECK(dims_of(end(*trivial, constant(sq, c))) == dims_of(c));
  }
  SUBCASE("sign functor on B(Z/2)") {
    auto bz2 = share(b_z2());
    const auto f = diagonal_sign(bz2);
    CHECK(validate_functor(f).ok());
    CHECK(coend(*bz2, f).dim() == 0);
    CHECK(end(*bz2, f).dim() == 0);
    auto sq2 = share(product(opposite(*bz2), *bz2));
    CHECK(coend(*bz2, constant(sq2, point(4))).dim() == 1);
  }
  SUBCASE("semisimplicity guard") {
    auto bz2 = share(b_z2());
    auto sq2 = share(product(opposite(*bz2), *bz2));
    auto f2 = FieldSpec::prime(2);
    GroupoidFunctor c{sq2, std::vector<ChainComplex>(sq2->num_objects(), point(0, f2)), {}};
    for (std::size_t m = 0; m < sq2->num_morphisms(); ++m) c.action.push_back(SparseMatrix::identity(1));
    try {
      (void)coend(*bz2, c);
      FAIL("expected a guard violation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonSemisimpleContext);
    }
    auto f3 = FieldSpec::prime(3);
    for (auto& v : c.values) v = point(0, f3);
    CHECK(coend(*bz2, c).dim() == 1);
  }
}

TEST_CASE("coend equals plethysm") {
  const auto ops = {"triv", "com", "ass"};
  SUBCASE("unit sequence gives T back") {
    ChainComplex t(Q, {{"a", 1}, {"b", 2}}, SparseMatrix(2, 2));
    const auto r = coend_vs_plethysm(unit_sequence(Q), t, 3);
    CHECK(r.ok);
    CHECK(r.lhs == Poly{{1, 1}, {2, 1}});
  }
  SUBCASE("com on one generator") {
    const auto com = builtin_operad("com", 3).seq;
    const auto even = coend_vs_plethysm(com, point(2), 3);
    CHECK(even.ok);
    CHECK(even.lhs == Poly{{2, 1}, {4, 1}, {6, 1}});
    const auto odd = coend_vs_plethysm(com, point(1), 3);
    CHECK(odd.ok);
    CHECK(odd.lhs == Poly{{1, 1}});
  }
  SUBCASE("builtin sequences against single generators") {
    for (const char* name : ops)
      for (int d : {1, 2})
        for (int k = 1; k <= 3; ++k) {
          const auto r = coend_vs_plethysm(builtin_operad(name, k).seq, point(d), k);
          CHECK_MESSAGE(r.ok, name << " degree " << d << " K " << k);
        }
  }
  SUBCASE("random complexes against the symmetric and tensor power oracles") {
    std::mt19937 rng(20261018);
    for (int trial = 0; trial < 6; ++trial) {
      const int k = trial < 3 ? 3 : 4;
      const auto t = random_complex(rng, trial < 3 ? 3 : 2);
      const auto h = hdims(t);
      for (const char* name : ops) {
        const auto r = coend_vs_plethysm(builtin_operad(name, k).seq, t, k);
        CHECK_MESSAGE(r.ok, name << " trial " << trial);
        if (std::string(name) == "com") CHECK(r.lhs == sym_oracle(h, k, true));
        if (std::string(name) == "ass") CHECK(r.lhs == sym_oracle(h, k, false));
        if (std::string(name) == "triv") CHECK(r.lhs == h);
      }
    }
  }
  SUBCASE("coend and end agree over the rationals") {
    auto fin = share(fin_bij(3));
    for (const char* name : ops) {
      const auto f = tensor_functor(sequence_functor(builtin_operad(name, 3).seq, fin), tensor_powers(point(2), fin));
      CHECK(validate_functor(f).ok());
      CHECK(dims_of(coend(*fin, f)) == dims_of(end(*fin, f)));
    }
  }
}

TEST_CASE("colimits over groupoids") {
  auto fin = share(fin_bij(3, 1));
  const auto z = tensor_powers(ChainComplex(Q, {{"a", 1}, {"b", 2}}, SparseMatrix(2, 2)), fin);
  CHECK(validate_functor(z).ok());
  const auto col = colimit(z);
  // the structure maps form a cocone
  for (std::size_t m = 0; m < fin->num_morphisms(); ++m)
    CHECK(multiply(col.to_colimit[fin->tgt[m]], z.action[m], Q) == col.to_colimit[fin->src[m]]);
  // symmetric powers of one odd and one even generator
  CHECK(dims_of(col.complex) == Poly{{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}});
  CHECK(dims_of(limit(z)) == dims_of(col.complex));

  SUBCASE("base point independence") {
    // two-object groupoid equivalent to B(Σ_2): relabel the base
    FiniteGroupoid g;
    g.objects = {"p", "q"};
    // morphisms p->p (e, s), q->q (e, s), p->q (f, fs), q->p (f', f's)
    g.names = {"ep", "sp", "eq", "sq", "f", "fs", "g", "gs"};
    g.src = {0, 0, 1, 1, 0, 0, 1, 1};
    g.tgt = {0, 0, 1, 1, 1, 1, 0, 0};
    g.identity = {0, 2};
    auto z2 = [](int x, int y) { return x ^ y; };
    // morphism = (src, tgt, group element)
    auto code = [](std::size_t s, std::size_t t, int e) -> std::size_t {
      if (s == 0 && t == 0) return static_cast<std::size_t>(e);
      if (s == 1 && t == 1) return 2 + static_cast<std::size_t>(e);
      if (s == 0) return 4 + static_cast<std::size_t>(e);
      return 6 + static_cast<std::size_t>(e);
    };
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t b = 0; b < 8; ++b)
        if (g.tgt[b] == g.src[a])
          g.comp[{a, b}] = code(g.src[b], g.tgt[a], z2(static_cast<int>(a % 2), static_cast<int>(b % 2)));
    REQUIRE(validate_groupoid(g).ok());
    auto gp = share(g);
    ChainComplex c(Q, {{"u", 0}, {"v", 0}}, SparseMatrix(2, 2));
    SparseMatrix swap(2, 2);
    swap.set_col(0, SparseVec::unit(1));
    swap.set_col(1, SparseVec::unit(0));
    SparseMatrix neg(2, 2);
    neg.set_col(0, SparseVec::unit(0, -1));
    neg.set_col(1, SparseVec::unit(1, -1));
    GroupoidFunctor f{gp, {c, c}, {}};
    for (std::size_t m = 0; m < 8; ++m) f.action.push_back(m % 2 ? neg : SparseMatrix::identity(2));
    REQUIRE(validate_functor(f).ok());
    FiniteGroupoid h = g;
    std::swap(h.objects[0], h.objects[1]);
    for (auto& s : h.src) s = 1 - s;
    for (auto& t : h.tgt) t = 1 - t;
    std::swap(h.identity[0], h.identity[1]);
    GroupoidFunctor fh{share(h), {c, c}, f.action};
    REQUIRE(validate_functor(fh).ok());
    CHECK(colimit(f).complex.dim() == 0);
    CHECK(colimit(fh).complex.dim() == 0);
    for (std::size_t m = 0; m < 8; ++m) f.action[m] = m % 2 ? swap : SparseMatrix::identity(2);
    fh.action = f.action;
    CHECK(colimit(f).complex.dim() == 1);
    CHECK(colimit(fh).complex.dim() == 1);
  }
}

TEST_CASE("left Kan extension and the tensor formula") {
  auto small = share(fin_bij(2));
  auto large = share(fin_bij(3));
  const auto com = builtin_operad("com", 3).seq;
  const auto ass = builtin_operad("ass", 3).seq;
  const ChainComplex t(Q, {{"a", 1}, {"b", 2}}, SparseMatrix(2, 2));

  SUBCASE("identity") {
    const auto j = identity_groupoid_map(large);
    const auto x = sequence_functor(ass, large);
    const auto y = tensor_powers(t, large);
    const auto ky = left_kan(j, y);
    CHECK(validate_functor(ky).ok());
    CHECK(dims_of(ky.values[3]) == dims_of(y.values[3]));
    const auto r = kan_tensor_check(j, x, y);
    CHECK(r.ok);
  }
  SUBCASE("inclusion of finite sets of size at most two") {
    const auto j = fin_inclusion(small, large);
    REQUIRE(validate_groupoid_map(j).ok());
    for (const auto& s : {com, ass}) {
      const auto x = sequence_functor(s, large);
      const auto y = tensor_powers(t, small);
      const auto ky = left_kan(j, y);
      CHECK(validate_functor(ky).ok());
      CHECK(ky.values[3].dim() == 0);
      const auto r = kan_tensor_check(j, x, y);
      CHECK(r.ok);
      // ⊕_{p<=2} coinvariants(X(p) ⊗ Y(p))
      CHECK(r.lhs == coend_vs_plethysm(s, t, 2).lhs);
    }
  }
  SUBCASE("zero functor") {
    const auto j = fin_inclusion(small, large);
    GroupoidFunctor x{large, std::vector<ChainComplex>(4, zero_complex()),
                      std::vector<SparseMatrix>(large->num_morphisms(), SparseMatrix(0, 0))};
    const auto r = kan_tensor_check(j, x, tensor_powers(t, small));
    CHECK(r.ok);
    CHECK(r.lhs.empty());
    CHECK(r.rhs.empty());
  }
}
