#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <random>

#include "opk/error.hpp"
#include "opk/operad.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

bool mentions(const ValidationReport& r, const std::string& word) {
  for (const auto& v : r.violations)
    if (v.find(word) != std::string::npos) return true;
  return false;
}

std::map<int, std::map<int, std::size_t>> negated(const std::map<int, std::map<int, std::size_t>>& d) {
  std::map<int, std::map<int, std::size_t>> out;
  for (const auto& [n, row] : d)
    for (const auto& [deg, x] : row) out[n][-deg] = x;
  return out;
}

}  // namespace

TEST_CASE("builtin operads") {
  auto com = builtin_operad("com", 4);
  auto r = validate_operad(com);
  CHECK(r.report.ok());
  CHECK(r.reduced);
  CHECK(r.nonunital);
  CHECK(r.connected);
  CHECK(com.seq.dim(3) == 1);
  auto triv = builtin_operad("triv", 4);
  CHECK(validate_operad(triv).report.ok());
  CHECK(triv.seq.dim(2) == 0);
  auto ass = builtin_operad("ass", 4);
  CHECK(ass.seq.dim(3) == 6);
  CHECK(validate_operad(ass).report.ok());
  CHECK(validate_operad(builtin_operad("ass", 4, FieldSpec::prime(5))).report.ok());
  CHECK_THROWS_AS(builtin_operad("lie", 3), Error);
  CHECK(is_builtin_operad("com"));
  CHECK_FALSE(is_builtin_operad("lie"));
}

TEST_CASE("broken operads are reported") {
  auto com = builtin_operad("com", 4);
  auto& m = com.comp.at({2, 1, 2});
  m = scale(m, -1, Q);
  auto r = validate_operad(com);
  CHECK_FALSE(r.report.ok());
  CHECK(mentions(r.report, "associativity"));

  auto ass = builtin_operad("ass", 3);
  // swap the two outcomes of x12 ∘_1 x12 and x21 ∘_1 x12
  auto& a = ass.comp.at({2, 1, 2});
  auto c0 = a.col(0), c2 = a.col(2);
  a.set_col(0, c2);
  a.set_col(2, c0);
  CHECK_FALSE(validate_operad(ass).report.ok());
}

TEST_CASE("ass compositions") {
  auto ass = builtin_operad("ass", 3);
  // x12 ∘_1 x21 = x213 and x21 ∘_2 x12 = x231
  auto p = all_perms(3);
  CHECK(ass.compose(2, 1, 2, 0, 1) == SparseVec::unit(perm_rank({1, 0, 2})));
  CHECK(ass.compose(2, 2, 2, 1, 0) == SparseVec::unit(perm_rank({1, 2, 0})));
  CHECK(p.size() == 6);
}

TEST_CASE("truncation") {
  auto ass = share(builtin_operad("ass", 5));
  auto com = share(builtin_operad("com", 4));
  auto t1 = truncate_operad(*com, 1);
  CHECK(graded_dims(t1.seq) == graded_dims(builtin_operad("triv", 4).seq));
  auto t2 = truncate_operad(*com, 2);
  CHECK(t2.seq.dim(3) == 0);
  CHECK(t2.seq.dim(2) == 1);
  CHECK(validate_operad(t2).report.ok());
  CHECK(validate_operad(truncate_operad(*ass, 3)).report.ok());

  for (const auto& o : {ass, com}) {
    std::vector<OperadPtr> tower;
    for (int k = 1; k <= 4; ++k) tower.push_back(share(truncate_operad(*o, k)));
    for (int k = 1; k <= 4; ++k) {
      auto rk = truncation_map(o, tower[static_cast<std::size_t>(k - 1)]);
      CHECK(validate_operad_map(rk).ok());
      if (k == 1) continue;
      auto step = truncation_map(tower[static_cast<std::size_t>(k - 1)], tower[static_cast<std::size_t>(k - 2)]);
      CHECK(validate_operad_map(step).ok());
      auto via = compose_maps(step, rk);
      auto direct = truncation_map(o, tower[static_cast<std::size_t>(k - 2)]);
      for (const auto& [n, m] : direct.components) CHECK(via.components.at(n) == m);
    }
    for (int k = 1; k <= 4; ++k)
      for (int j = 1; j <= 4; ++j) {
        auto a = truncate_operad(truncate_operad(*o, k), j);
        auto b = truncate_operad(*o, std::min(j, k));
        CHECK(graded_dims(a.seq) == graded_dims(b.seq));
        CHECK(a.comp == b.comp);
      }
  }
  // r_1 is the augmentation: the unit goes to the unit, everything else to zero
  auto r1 = truncation_map(com, share(t1));
  CHECK(r1.apply(1, com->unit) == SparseVec::unit(0));
  CHECK(r1.apply(2, 0).empty());
}

TEST_CASE("unit and identity maps") {
  auto ass = share(builtin_operad("ass", 4));
  auto triv = share(builtin_operad("triv", 4));
  CHECK(validate_operad_map(unit_map(triv, ass)).ok());
  CHECK(validate_operad_map(identity_map(ass)).ok());
  auto bad = identity_map(ass);
  bad.components.at(2) = scale(bad.components.at(2), 2, Q);
  CHECK_FALSE(validate_operad_map(bad).ok());
}

TEST_CASE("augmentation ideal") {
  auto com = builtin_operad("com", 3);
  auto ideal = augmentation_ideal(com);
  CHECK(ideal.dim(1) == 0);
  CHECK(ideal.dim(2) == 1);
  CHECK(augmentation_ideal(builtin_operad("triv", 3)).components().empty());
  Operad fat = com;
  auto two = ChainComplex(Q, {{"u", 0}, {"v", 0}}, SparseMatrix(2, 2));
  fat.seq.set(1, EquivariantComplex::trivial(two, 1));
  CHECK_THROWS_AS(augmentation_ideal(fat), Error);
}

TEST_CASE("suspension") {
  auto st = suspend(builtin_operad("triv", 3));
  CHECK(graded_dims(st.seq) == graded_dims(builtin_operad("triv", 3).seq));
  auto com = builtin_operad("com", 4);
  auto sc = suspend(com);
  CHECK(validate_operad(sc).report.ok());
  CHECK(graded_dims(sc.seq)[2] == std::map<int, std::size_t>{{1, 1}});
  CHECK(graded_dims(sc.seq)[3] == std::map<int, std::size_t>{{2, 1}});
  CHECK(sc.seq.at(3).transposition(1).at(0, 0) == -1);
  for (const auto& name : {"com", "ass"}) {
    auto o = builtin_operad(name, 4);
    auto ss = suspend(suspend(o));
    CHECK(validate_operad(suspend(o)).report.ok());
    CHECK(validate_operad(ss).report.ok());
    for (const auto& [n, x] : ss.seq.components()) {
      for (std::size_t g = 0; g < x.dim(); ++g) CHECK(x.complex().degree(g) == o.seq.degree(n, g) + 2 * (n - 1));
      CHECK(x.transpositions() == o.seq.at(n).transpositions());
    }
  }
}

TEST_CASE("dualization") {
  for (const auto& name : {"triv", "com", "ass"}) {
    auto o = builtin_operad(name, 4);
    auto p = dualize(o);
    CHECK(validate_cooperad(p).report.ok());
    CHECK(graded_dims(p.seq) == negated(graded_dims(o.seq)));
    auto back = dualize(p);
    CHECK(graded_dims(back.seq) == graded_dims(o.seq));
    CHECK(back.comp == o.comp);
  }
  CHECK(dualize(builtin_operad("com", 3)).seq.dim(3) == 1);
  auto sp = dualize(suspend(builtin_operad("ass", 4)));
  CHECK(validate_cooperad(sp).report.ok());
  auto broken = dualize(builtin_operad("com", 3));
  auto& m = broken.decomp.at({2, 2, 2});
  m = scale(m, 3, Q);
  CHECK_FALSE(validate_cooperad(broken).report.ok());
}

TEST_CASE("dual complexes and maps") {
  // x(2) -> y(1) -> 0, z(1)
  auto d = SparseMatrix::from_triplets(3, 3, {{0, 2, Scalar(2)}}, Q);
  ChainComplex c(Q, {{"y", 1}, {"z", 1}, {"x", 2}}, d);
  auto dc = dualize(c);
  CHECK(dc.generator(0).id == "x*");
  CHECK(dc.degree(0) == -2);
  CHECK(negated({{0, homology(c).dims}})[0] == homology(dc).dims);
  auto ddc = dualize(dc);
  for (std::size_t k = 0; k < c.dim(); ++k) CHECK(ddc.degree(k) == c.degree(k));
  CHECK(ddc.generator(2).id == "x**");
  CHECK(ddc.differential() == scale(c.differential(), -1, Q));
  // projection c -> (x -> y) is a chain map; so is its dual
  auto d2 = SparseMatrix::from_triplets(2, 2, {{0, 1, Scalar(2)}}, Q);
  ChainComplex t(Q, {{"y", 1}, {"x", 2}}, d2);
  auto proj = SparseMatrix::from_triplets(2, 3, {{0, 0, Scalar(1)}, {1, 2, Scalar(1)}}, Q);
  ChainMap pm(c, t, proj);
  CHECK_NOTHROW(ChainMap(dualize(t), dualize(c), dual_map(proj, c, t)));
}

TEST_CASE("modules") {
  auto ass = share(builtin_operad("ass", 4));
  CHECK(validate_module(self_module(ass)).ok());
  CHECK(validate_module(trivial_module(ass)).ok());
  auto t2 = share(truncate_operad(*ass, 2));
  auto along = module_along(truncation_map(ass, t2));
  CHECK(validate_module(along).ok());
  auto comod = dualize(self_module(ass));
  auto dual_ass = share(dualize(dualize(*ass)));
  CHECK(validate_module(dualize(comod, dual_ass)).ok());
  auto bad = self_module(ass);
  auto& m = bad.act.at({3, 2, 2});
  m = scale(m, -1, Q);
  CHECK_FALSE(validate_module(bad).ok());
}

TEST_CASE("property: block permutations compose") {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    int m = 1 + static_cast<int>(rng() % 4), n = static_cast<int>(rng() % 4);
    int i = 1 + static_cast<int>(rng() % static_cast<unsigned>(m));
    auto pm = all_perms(m), pn = all_perms(n);
    const auto& s1 = pm[rng() % pm.size()];
    const auto& s2 = pm[rng() % pm.size()];
    const auto& t1 = pn[rng() % pn.size()];
    const auto& t2 = pn[rng() % pn.size()];
    auto lhs = block_perm(compose_perm(s1, s2), i, compose_perm(t1, t2));
    auto rhs = compose_perm(block_perm(s1, s2[static_cast<std::size_t>(i - 1)] + 1, t1), block_perm(s2, i, t2));
    CHECK(lhs == rhs);
  }
}
