#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opk/alg_module.hpp"
#include "opk/error.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();
using Poly = std::map<int, std::size_t>;

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

ChainComplex point(int degree, const std::string& id = "x") { return ChainComplex(Q, {{id, degree}}, SparseMatrix(1, 1)); }

Poly dims_of(const ChainComplex& c) {
  Poly p;
  for (const auto& g : c.generators()) ++p[g.degree];
  return p;
}

ChainComplex points(int degree, int count) {
  std::vector<Generator> g;
  for (int i = 0; i < count; ++i) g.push_back({"x" + std::to_string(i), degree});
  return ChainComplex(Q, g, SparseMatrix(static_cast<std::size_t>(count), static_cast<std::size_t>(count)));
}

Poly through(const Poly& p, int d) {
  Poly out;
  for (auto [k, x] : p)
    if (k <= d) out[k] = x;
  return out;
}

// Dimensions of the free Lie superalgebra on `gens` odd generators by weight,
// from the PBW identity 1/(1 - gens t) = Π_{n odd} (1 + t^n)^{a_n} Π_{n even} (1 - t^n)^{-a_n}.
std::vector<long long> free_lie_odd(int gens, int max_weight) {
  std::vector<long long> a(static_cast<std::size_t>(max_weight) + 1, 0);
  auto series = [&](int upto) {
    std::vector<long long> s(static_cast<std::size_t>(max_weight) + 1, 0);
    s[0] = 1;
    for (int n = 1; n <= upto; ++n)
      for (long long r = 0; r < a[static_cast<std::size_t>(n)]; ++r) {
        std::vector<long long> next(s.size(), 0);
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (n % 2 == 1) {
            next[i] += s[i];
            if (i + static_cast<std::size_t>(n) < s.size()) next[i + static_cast<std::size_t>(n)] += s[i];
          } else {
            for (std::size_t j = i; j < s.size(); j += static_cast<std::size_t>(n)) next[j] += s[i];
          }
        }
        s = next;
      }
    return s;
  };
  long long power = 1;
  for (int n = 1; n <= max_weight; ++n) {
    power *= gens;
    a[static_cast<std::size_t>(n)] = power - series(n - 1)[static_cast<std::size_t>(n)];
  }
  return a;
}

}  // namespace

TEST_CASE("free and trivial algebras") {
  Caps caps{3, 6, 0};
  for (const auto& name : {"triv", "com", "ass"}) {
    auto o = share(builtin_operad(name, 3));
    auto a = free_algebra(o, point(2), caps);
    auto r = validate_algebra(a);
    CHECK_MESSAGE(r.ok(), name << ": " << (r.ok() ? "" : r.violations.front()));
    CHECK(validate_algebra(trivial_algebra(o, point(2))).ok());
  }
  auto com = share(builtin_operad("com", 4));
  CHECK(dims_of(free_algebra(com, point(2), Caps{4, 8, 0}).carrier) == Poly{{2, 1}, {4, 1}, {6, 1}, {8, 1}});
  CHECK(dims_of(free_algebra(com, point(1), Caps{4, 8, 0}).carrier) == Poly{{1, 1}});
}

TEST_CASE("cotangent complex and relative tensor") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto a = free_algebra(com, point(2), caps);
  CHECK(homology_through(cotangent_complex(a, caps).complex(), 6).dims == Poly{{2, 1}});
  auto t = trivial_algebra(com, point(2));
  // free Lie coalgebra on one odd class: weight 1 and the bracket square in weight 2
  CHECK(homology_through(cotangent_complex(t, Caps{3, 5, 0}).complex(), 5).dims == Poly{{2, 1}, {5, 1}});
  auto self = relative_tensor(self_module(com), a, caps);
  CHECK(homology_through(self.complex(), 6).dims == homology(a.carrier).dims);
}


TEST_CASE("free Lie oracle sanity") {
  auto a = free_lie_odd(2, 3);
  CHECK(a[1] == 2);
  CHECK(a[2] == 3);
  CHECK(a[3] == 2);
  CHECK(free_lie_odd(1, 3)[3] == 0);
}

TEST_CASE("cotangent of trivial algebras is the free shifted Lie coalgebra") {
  auto com = share(builtin_operad("com", 3));
  for (int gens = 1; gens <= 2; ++gens) {
    auto t = trivial_algebra(com, points(2, gens));
    auto h = homology_through(cotangent_complex(t, Caps{3, 8, 0}).complex(), 8).dims;
    auto lie = free_lie_odd(gens, 3);
    Poly expect;
    for (int w = 1; w <= 3; ++w)
      if (lie[static_cast<std::size_t>(w)] > 0) expect[3 * w - 1] = static_cast<std::size_t>(lie[static_cast<std::size_t>(w)]);
    CHECK(h == expect);
  }
  // over triv the cotangent complex is the carrier
  auto triv = share(builtin_operad("triv", 3));
  CHECK(identical_up_to_ids(cotangent_complex(trivial_algebra(triv, points(2, 2)), Caps{3, 6, 0}).complex(), points(2, 2)));
}

TEST_CASE("relative tensor examples") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto triv = share(builtin_operad("triv", 3));
  auto v = points(2, 2);
  // over triv: plethysm
  auto as_triv_module = module_along(unit_map(triv, com));
  auto lhs = relative_tensor(as_triv_module, trivial_algebra(triv, v), caps);
  CHECK(dims_of(lhs.complex()) == dims_of(plethysm(com->seq, v, Caps{3, 7, 0})));
  // free coefficients collapse to M ∘ V
  auto a = free_algebra(com, v, caps);
  auto t2 = share(truncate_operad(*com, 2));
  for (const auto& m : {self_module(com), trivial_module(com), module_along(truncation_map(com, t2))}) {
    auto h = homology_through(relative_tensor(m, a, caps).complex(), 6).dims;
    CHECK_MESSAGE(h == homology_through(plethysm(m.seq, v, caps), 6).dims, m.name);
  }
  // self module gives back A
  auto ass = share(builtin_operad("ass", 3));
  auto b = free_algebra(ass, points(2, 1), caps);
  CHECK(homology_through(relative_tensor(self_module(ass), b, caps).complex(), 6).dims == homology(b.carrier).dims);
}

TEST_CASE("certification") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto t0 = trivial_algebra(com, point(0));
  CHECK_THROWS_AS(cotangent_complex(t0, caps), Error);
  try {
    relative_tensor(self_module(com), t0, caps);
    FAIL("expected a certification failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotCertifiablyConvergent);
  }
  CHECK_NOTHROW(relative_tensor(self_module(com), t0, caps, true));
  CHECK_THROWS_AS(rho(t0, 2, caps), Error);
  auto c = bar_algebra(free_algebra(com, point(2), caps), caps);
  auto c0 = trivial_coalgebra(c.cooperad, point(0));
  CHECK_THROWS_AS(tau(com, c0, 1, caps), Error);
}

TEST_CASE("validation detects broken algebras") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto a = free_algebra(com, points(2, 2), caps);
  CHECK(validate_algebra(a).ok());
  auto bad = a;
  auto& table = bad.actions.at(2);
  auto it = std::find_if(table.begin(), table.end(), [](const auto& e) { return e.first[1] != e.first[2]; });
  REQUIRE(it != table.end());
  it->second.scale(2, Q);
  CHECK_FALSE(validate_algebra(bad).ok());
  auto unit_bad = a;
  unit_bad.actions.at(1).begin()->second.scale(3, Q);
  CHECK_FALSE(validate_algebra(unit_bad).ok());
}

TEST_CASE("restriction and induction") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto triv = share(builtin_operad("triv", 3));
  auto v = points(2, 2);
  auto a = free_algebra(com, v, caps);
  auto same = restrict_algebra(identity_map(com), a);
  CHECK(same.actions == a.actions);
  auto down = restrict_algebra(unit_map(triv, com), a);
  CHECK(validate_algebra(down).ok());
  auto up = induce_algebra(identity_map(com), a, caps);
  CHECK(validate_algebra(up).ok());
  CHECK(homology_through(up.carrier, 6).dims == homology(a.carrier).dims);
  // inducing a free triv-algebra gives the free algebra
  auto ind = induce_algebra(unit_map(triv, com), free_algebra(triv, v, caps), caps);
  CHECK(validate_algebra(ind).ok());
  CHECK(homology_through(ind.carrier, 6).dims == homology(a.carrier).dims);
  // restricting then inducing a trivial algebra
  auto rt = restrict_algebra(unit_map(triv, com), trivial_algebra(com, v));
  CHECK(rt.actions.at(1).size() == v.dim());
}

TEST_CASE("bar and cobar of algebras") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  for (const auto& name : {"com", "ass"}) {
    auto o = share(builtin_operad(name, 3));
    for (const auto& a : {free_algebra(o, point(2), caps), free_algebra(o, points(2, 2), caps), trivial_algebra(o, points(2, 2))}) {
      auto c = bar_algebra(a, caps);
      CHECK_MESSAGE(validate_coalgebra(c).ok(), name << " " << a.name);
      CHECK(identical_up_to_ids(c.carrier, cotangent_complex(a, caps).complex()));
      CHECK(connectivity(c.carrier).zero_connected);
      auto back = cobar_coalgebra(c, caps);
      CHECK_MESSAGE(validate_algebra(back).ok(), name << " " << a.name);
      CHECK(homology_through(back.carrier, 6).dims == homology_through(a.carrier, 6).dims);
    }
  }
  auto a = free_algebra(com, point(2), caps);
  CHECK(homology_through(bar_algebra(a, caps).carrier, 6).dims == Poly{{2, 1}});
  // over triv the bar construction is the identity on carriers
  auto triv = share(builtin_operad("triv", 3));
  auto bt = bar_algebra(trivial_algebra(triv, points(2, 2)), caps);
  CHECK(identical_up_to_ids(bt.carrier, points(2, 2)));
  auto cbt = cobar_coalgebra(trivial_coalgebra(bt.cooperad, points(2, 2)), caps);
  CHECK(dims_of(cbt.carrier) == Poly{{2, 2}});
}

TEST_CASE("cofree and trivial coalgebras") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto bc = bar_operad(com, caps).cooperad;
  auto cf = cofree_coalgebra(bc, point(2), caps);
  CHECK(validate_coalgebra(cf).ok());
  CHECK(through(dims_of(cf.carrier), 6) == Poly{{2, 1}, {5, 1}});
  CHECK(validate_coalgebra(trivial_coalgebra(bc, points(2, 2))).ok());
  auto triv = share(builtin_operad("triv", 3));
  auto bt = bar_operad(triv, caps).cooperad;
  CHECK(dims_of(cofree_coalgebra(bt, points(2, 2), caps).carrier) == Poly{{-0 + 2, 2}});
  // the bar construction sends trivial algebras to cofree coalgebras
  for (int gens = 1; gens <= 2; ++gens) {
    auto v = points(2, gens);
    auto b = bar_algebra(trivial_algebra(com, v), Caps{3, 8, 0});
    auto c = cofree_coalgebra(bar_operad(com, Caps{3, 8, 0}).cooperad, v, Caps{3, 8, 0});
    CHECK(through(dims_of(b.carrier), 8) == through(dims_of(c.carrier), 8));
  }
}

TEST_CASE("bar of modules") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto w = bar_module(self_module(com), caps);
  CHECK(w.seq.dim(1) == 1);
  CHECK(homology(w.seq.at(1).complex()).dims == Poly{{0, 1}});
  for (int n = 2; n <= 3; ++n) CHECK(homology(w.seq.at(n).complex()).is_zero());
  CHECK_FALSE(w.coact.empty());
  auto tw = bar_module(trivial_module(com), caps);
  CHECK(graded_dims(tw.seq) == graded_dims(bar_operad(com, caps).cooperad.seq));
}

TEST_CASE("rho tower") {
  Caps caps{3, 6, 0};
  for (const auto& name : {"com", "ass"}) {
    auto o = share(builtin_operad(name, 3));
    auto v = points(2, 2);
    auto a = free_algebra(o, v, caps);
    auto tw = rho_tower(a, 3, caps);
    REQUIRE(tw.levels.size() == 3);
    REQUIRE(tw.maps.size() == 2);
    for (int k = 1; k <= 3; ++k) {
      const auto& l = tw.levels[static_cast<std::size_t>(k - 1)];
      CHECK_MESSAGE(validate_algebra(l).ok(), name << " k=" << k);
      auto expect = homology_through(plethysm(truncate_operad(*o, k).seq, v, caps), 6).dims;
      CHECK(homology_through(l.carrier, 6).dims == expect);
    }
    CHECK(homology_through(tw.levels[0].carrier, 6).dims == Poly{{2, 2}});
    CHECK(homology_through(tw.levels[2].carrier, 6).dims == homology(a.carrier).dims);
    // layer additivity through the long exact sequence
    for (int k = 2; k <= 3; ++k) {
      auto lr = fiber_layer(a, k, caps);
      CHECK(lr.ok);
      auto hk = homology_through(tw.levels[static_cast<std::size_t>(k - 1)].carrier, 6).dims;
      auto hk1 = homology_through(tw.levels[static_cast<std::size_t>(k - 2)].carrier, 6).dims;
      for (int d = 0; d <= 6; ++d) CHECK(hk[d] == hk1[d] + lr.layer_homology.dim(d));
    }
  }
  auto com = share(builtin_operad("com", 3));
  CHECK(homology_through(rho(free_algebra(com, point(2), caps), 1, caps).carrier, 6).dims == Poly{{2, 1}});
}

TEST_CASE("fiber layers") {
  Caps caps{3, 6, 0};
  auto com = share(builtin_operad("com", 3));
  auto a = free_algebra(com, point(2), caps);
  auto l2 = fiber_layer(a, 2, caps);
  CHECK(l2.ok);
  CHECK(l2.layer_homology.dims == Poly{{4, 1}});
  CHECK(l2.cone_homology.dims == Poly{{5, 1}});
  CHECK(fiber_layer(a, 3, caps).layer_homology.dims == Poly{{6, 1}});
  auto triv = share(builtin_operad("triv", 3));
  auto lt = fiber_layer(trivial_algebra(triv, point(2)), 2, caps);
  CHECK(lt.ok);
  CHECK(lt.layer_homology.is_zero());
  auto t = fiber_layer(trivial_algebra(com, points(2, 2)), 2, caps);
  CHECK(t.ok);
  CHECK_THROWS_AS(fiber_layer(a, 1, caps), Error);
}

TEST_CASE("tau tower and the tower equivalence") {
  Caps caps{3, 6, 0};
  for (const auto& name : {"com", "ass"}) {
    auto o = share(builtin_operad(name, 3));
    for (const auto& a : {free_algebra(o, point(2), caps), free_algebra(o, points(2, 2), caps), trivial_algebra(o, point(3))}) {
      auto c = bar_algebra(a, caps);
      auto tw = rho_tower(a, 3, caps);
      for (int k = 1; k <= 3; ++k) {
        auto t = tau(o, c, k, caps);
        CHECK_MESSAGE(validate_coalgebra(t).ok(), name << " " << a.name << " k=" << k);
        auto lhs = homology_through(bar_algebra(tw.levels[static_cast<std::size_t>(k - 1)], caps).carrier, 6).dims;
        CHECK_MESSAGE(homology_through(t.carrier, 6).dims == lhs, name << " " << a.name << " k=" << k);
        CHECK(connectivity(t.carrier).zero_connected);
      }
      // τ^{≤1} is cofree on the underlying complex; τ^{≤K} recovers C
      auto cot = cotangent_complex(a, caps);
      auto cf = cofree_coalgebra(c.cooperad, cot.complex(), caps, cot.weights());
      CHECK(homology_through(tau(o, c, 1, caps).carrier, 6).dims == homology_through(cf.carrier, 6).dims);
      CHECK(homology_through(tau(o, c, 3, caps).carrier, 6).dims == homology_through(c.carrier, 6).dims);
      CHECK(homology_through(tau(o, c, 5, caps).carrier, 6).dims == homology_through(c.carrier, 6).dims);
    }
  }
}

TEST_CASE("connectivity") {
  auto c = connectivity(point(2));
  CHECK(c.least == 2);
  CHECK(c.zero_connected);
  ChainComplex acyclic(Q, {{"a", 1}, {"b", 2}}, SparseMatrix::from_triplets(2, 2, {{0, 1, Scalar(1)}}, Q));
  CHECK_FALSE(connectivity(acyclic).least.has_value());
  CHECK(connectivity(acyclic).zero_connected);
  CHECK_FALSE(connectivity(point(0)).zero_connected);
}
