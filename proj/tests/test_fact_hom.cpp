#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opk/error.hpp"
#include "opk/fact_hom.hpp"
#include "opk/groupoid.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();
using Poly = std::map<int, std::size_t>;

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

ChainComplex point(int degree) { return ChainComplex(Q, {{"x", degree}}, SparseMatrix(1, 1)); }

Poly dims_of(const ChainComplex& c) {
  Poly p;
  for (const auto& g : c.generators()) ++p[g.degree];
  return p;
}

Poly through(const Poly& p, int d) {
  Poly out;
  for (auto [k, x] : p)
    if (k <= d) out[k] = x;
  return out;
}

Poly hom_through(const ChainComplex& c, int d) { return homology_through(c, d).dims; }

// Acyclic pair in degrees 3, 2 plus classes in degrees 1 and 2.
ChainComplex small_complex() {
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t{{1, 2, Scalar(3)}};
  return ChainComplex(Q, {{"a", 1}, {"b", 2}, {"c", 3}, {"e", 2}}, SparseMatrix::from_triplets(4, 4, t, Q));
}

bool verdict_consistent(const KoszulReport& r) {
  bool all = same_dims(r.lhs_homology, r.rhs_homology);
  for (const auto& t : r.tower_tables) all = all && t.ok && same_dims(t.lhs, t.rhs);
  for (const auto& l : r.layer_tables) all = all && l.ok && l.exact;
  return (r.verdict == Verdict::equivalent_within_caps) == all && (r.verdict == Verdict::mismatch) == !all;
}

}  // namespace

TEST_CASE("factorization homology over triv is the coinvariant sum") {
  auto triv = share(builtin_operad("triv", 3));
  const Caps caps{3, 8, 0};
  const auto t = small_complex();
  for (const char* name : {"triv", "com", "ass"}) {
    const auto s = builtin_operad(name, 3).seq;
    const auto c = fact_homology(triv_module(s, triv), trivial_algebra(triv, t), caps);
    const auto oracle = coend_vs_plethysm(s, t, 3);
    REQUIRE(oracle.ok);
    CHECK_MESSAGE(hom_through(c, 8) == through(oracle.lhs, 8), name);
  }
}

TEST_CASE("factorization cohomology over triv is the invariant sum and agrees with homology") {
  auto triv = share(builtin_operad("triv", 3));
  const auto triv_co = dualize(*triv);
  const Caps caps{3, 8, 0};
  const auto t = small_complex();
  auto fin = std::make_shared<const FiniteGroupoid>(fin_bij(3));
  for (const char* name : {"triv", "com", "ass"}) {
    const auto s = builtin_operad(name, 3).seq;
    const auto h = fact_homology(triv_module(s, triv), trivial_algebra(triv, t), caps);
    const auto ch = fact_cohomology(triv_comodule(s, triv_co), triv_co, trivial_coalgebra(triv_co, t), caps);
    const auto e = end(*fin, tensor_functor(sequence_functor(s, fin), tensor_powers(t, fin)));
    CHECK_MESSAGE(dims_of(ch) == dims_of(e), name);
    CHECK_MESSAGE(through(dims_of(ch), 9) == dims_of(h), name);
    CHECK_MESSAGE(hom_through(ch, 8) == hom_through(h, 8), name);
  }
}

TEST_CASE("free coefficients collapse") {
  auto com = share(builtin_operad("com", 3));
  auto ass = share(builtin_operad("ass", 3));
  const Caps caps{3, 6, 0};
  SUBCASE("com acting on itself, degree-2 generator") {
    const auto c = fact_homology(self_module(com), free_algebra(com, point(2), caps), caps);
    CHECK(hom_through(c, 6) == Poly{{2, 1}, {4, 1}, {6, 1}});
    CHECK(hom_through(c, 6) == hom_through(plethysm(com->seq, point(2), caps), 6));
  }
  SUBCASE("collapse maps are quasi-isomorphisms") {
    for (const auto& o : {com, ass})
      for (const auto& m : {self_module(o), trivial_module(o)})
        for (const auto& v : {point(2), small_complex()}) {
          const auto f = free_collapse(m, v, caps);
          CHECK(is_quasi_iso(f));
          CHECK(dims_of(f.target()) == dims_of(plethysm(m.seq, v, Caps{3, 20, 0})));
        }
  }
  SUBCASE("over triv the collapse is the identity") {
    auto triv = share(builtin_operad("triv", 3));
    const auto f = free_collapse(triv_module(com->seq, triv), small_complex(), caps);
    CHECK(f.matrix() == SparseMatrix::identity(f.source().dim()));
    CHECK(identical_up_to_ids(f.source(), f.target()));
  }
  SUBCASE("zero module") {
    RightModule zero{"zero", com, SymmetricSequence(Q), {}};
    const auto f = free_collapse(zero, point(2), caps);
    CHECK(f.source().dim() == 0);
    CHECK(f.target().dim() == 0);
  }
}

TEST_CASE("cofree coefficients collapse") {
  auto com = share(builtin_operad("com", 3));
  const Caps caps{3, 6, 0};
  const auto bar = bar_operad(com, caps);
  SUBCASE("bar of com acting on itself, degree-2 generator") {
    const auto w = bar_module(self_module(com), caps);
    const auto f = cofree_collapse(w, bar.cooperad, point(2), caps);
    CHECK(is_quasi_iso(f));
    const auto direct = fact_cohomology(w, bar.cooperad, cofree_coalgebra(bar.cooperad, point(2), caps), caps);
    CHECK(dims_of(f.target()) == dims_of(direct));
    CHECK(hom_through(direct, 6) == hom_through(plethysm(w.seq, point(2), Caps{3, 9, 0}), 6));
  }
  SUBCASE("over triv") {
    auto triv = share(builtin_operad("triv", 3));
    const auto triv_co = dualize(*triv);
    const auto f = cofree_collapse(triv_comodule(com->seq, triv_co), triv_co, small_complex(), caps);
    CHECK(is_quasi_iso(f));
    CHECK(f.matrix() == SparseMatrix::identity(f.source().dim()));
  }
  SUBCASE("zero coefficients") {
    const auto w = bar_module(self_module(com), caps);
    const auto f = cofree_collapse(w, bar.cooperad, ChainComplex(Q), caps);
    CHECK(f.source().dim() == 0);
    CHECK(f.target().dim() == 0);
  }
}

TEST_CASE("main theorem instance for a free algebra") {
  auto com = share(builtin_operad("com", 3));
  const Caps caps{3, 6, 0};
  const auto a = free_algebra(com, point(2), caps);
  const auto w = bar_module(self_module(com), caps);
  const auto c = bar_algebra(a, caps);
  const auto coh = fact_cohomology(w, c.cooperad, c, caps);
  CHECK(hom_through(coh, 6) == hom_through(fact_homology(self_module(com), a, caps), 6));
}

TEST_CASE("certification of factorization cohomology") {
  auto com = share(builtin_operad("com", 3));
  const Caps caps{3, 6, 0};
  const auto bar = bar_operad(com, caps);
  const auto w = bar_module(self_module(com), caps);
  const auto c = trivial_coalgebra(bar.cooperad, point(0));
  try {
    (void)fact_cohomology(w, bar.cooperad, c, caps);
    FAIL("expected a certification failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCertifiablyConvergent);
  }
  CHECK_NOTHROW((void)fact_cohomology(w, bar.cooperad, c, caps, true));
}

TEST_CASE("base change") {
  auto com = share(builtin_operad("com", 3));
  auto triv = share(builtin_operad("triv", 3));
  auto com2 = share(truncate_operad(*com, 2));
  const Caps caps{3, 6, 0};
  SUBCASE("identity") {
    const auto r = base_change_check(identity_map(com), self_module(com), free_algebra(com, point(2), caps), caps);
    CHECK(r.ok);
  }
  SUBCASE("unit inclusion with a linear algebra") {
    for (const auto& m : {self_module(com), trivial_module(com)}) {
      const auto r = base_change_check(unit_map(triv, com), m, trivial_algebra(triv, small_complex()), caps);
      CHECK(r.ok);
      CHECK(r.rhs.dims == hom_through(plethysm(m.seq, small_complex(), Caps{3, 7, 0}), 6));
    }
  }
  SUBCASE("truncation with a free algebra") {
    const auto r = base_change_check(truncation_map(com, com2), self_module(com2), free_algebra(com, point(2), caps), caps);
    CHECK(r.ok);
    CHECK(r.lhs.dims == Poly{{2, 1}, {4, 1}});
  }
}

TEST_CASE("Koszul comparison") {
  auto com = share(builtin_operad("com", 3));
  const Caps caps{3, 6, 0};
  SUBCASE("inventory") {
    for (const auto& m : {self_module(com), trivial_module(com)})
      for (const auto& a : {free_algebra(com, point(2), caps), trivial_algebra(com, point(2))}) {
        const auto r = koszul_compare(m, a, caps);
        CHECK_MESSAGE(r.verdict == Verdict::equivalent_within_caps, m.name << " " << a.name);
        CHECK(r.tower_tables.size() == 3);
        CHECK(r.layer_tables.size() == 2);
        CHECK(verdict_consistent(r));
        for (const auto& l : r.layer_tables) {
          CHECK(l.exact);
          CHECK(l.fiber.dims == Poly{{2 * l.k, 1}});
        }
      }
  }
  SUBCASE("free algebra values") {
    const auto r = koszul_compare(self_module(com), free_algebra(com, point(2), caps), caps);
    CHECK(r.lhs_homology.dims == Poly{{2, 1}, {4, 1}, {6, 1}});
    CHECK(r.tower_tables[1].lhs.dims == Poly{{2, 1}, {4, 1}});
  }
  SUBCASE("trivial operad") {
    auto triv = share(builtin_operad("triv", 3));
    for (const char* name : {"com", "ass"}) {
      const auto r =
          koszul_compare(triv_module(builtin_operad(name, 3).seq, triv), trivial_algebra(triv, small_complex()), caps);
      CHECK_MESSAGE(r.verdict == Verdict::equivalent_within_caps, name);
      CHECK(verdict_consistent(r));
    }
  }
  SUBCASE("refusal outside the certified range") {
    const auto r = koszul_compare(self_module(com), trivial_algebra(com, point(0)), caps);
    CHECK(r.verdict == Verdict::not_certified);
    CHECK_FALSE(r.reason.empty());
    CHECK(r.tower_tables.empty());
    CHECK(to_string(r.verdict) == "not_certified");
  }
}

TEST_CASE("tower maps on factorization homology compose") {
  auto com = share(builtin_operad("com", 3));
  const Caps caps{3, 6, 0};
  const auto a = free_algebra(com, point(2), caps);
  const auto tower = rho_tower(a, 3, caps);
  for (const auto& m : {self_module(com), trivial_module(com)}) {
    const auto s32 = relative_tensor_map(m, tower.levels[2], tower.levels[1], tower.maps[1], caps);
    const auto s21 = relative_tensor_map(m, tower.levels[1], tower.levels[0], tower.maps[0], caps);
    const auto s31 = relative_tensor_map(m, tower.levels[2], tower.levels[0], compose(tower.maps[0], tower.maps[1]), caps);
    CHECK(compose(s21, s32).matrix() == s31.matrix());
  }
}
