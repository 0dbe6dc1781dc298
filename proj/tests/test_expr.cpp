#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opk/error.hpp"
#include "opk/expr.hpp"

using namespace opk;

namespace {

using Poly = std::map<int, std::size_t>;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

EvalOptions opts(int k, int d) {
  EvalOptions o;
  o.caps = Caps{k, d, 0};
  return o;
}

std::size_t factorial(int n) { return n <= 1 ? 1 : static_cast<std::size_t>(n) * factorial(n - 1); }

}  // namespace

TEST_CASE("parse and print") {
  const auto e = parse("bar(truncate(com,3))");
  CHECK(e.kind == Expr::Kind::call);
  CHECK(e.head == "bar");
  REQUIRE(e.args.size() == 1);
  CHECK(e.args[0].head == "truncate");
  CHECK(e.args[0].args[0].head == "com");
  CHECK(e.args[0].args[1].value == 3);
  CHECK(print(e) == "bar(truncate(com, 3))");

  for (const char* text : {"bar(truncate(com, 3))", "facthom(com, com, free(com, gen(2)))", "coend(unit, gen(-1))",
                           "gen(1, 2, 3)", "factcoh(bar(self), bar(com), bar(free(com, gen(2))))", "com", "7"})
    CHECK(print(parse(text)) == text);
  CHECK(print(parse("  rho( com ,free(com,gen(2)) ,2 ) ")) == "rho(com, free(com, gen(2)), 2)");
}

TEST_CASE("parse errors carry positions") {
  CHECK(code_of([] { parse("truncate(com)"); }) == ErrorCode::ParseError);
  CHECK(message_of([] { parse("truncate(com)"); }).find("column 1") != std::string::npos);
  CHECK(message_of([] { parse("bar(com"); }).find("column 8") != std::string::npos);
  CHECK(code_of([] { parse("bar(com))"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("frob(com)"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("bar()"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse(""); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("bar(com,,)"); }) == ErrorCode::ParseError);
}

TEST_CASE("sort checking") {
  CHECK(check_sort(parse("facthom(com, com, free(com, gen(2)))")) == Sort::complex);
  CHECK(check_sort(parse("bar(truncate(com, 3))")) == Sort::cooperad);
  CHECK(check_sort(parse("bar(free(com, gen(2)))")) == Sort::coalgebra);
  CHECK(check_sort(parse("bar(self)")) == Sort::comodule);
  CHECK(check_sort(parse("cobar(bar(com))")) == Sort::operad);
  CHECK(check_sort(parse("dual(gen(1))")) == Sort::complex);
  CHECK(check_sort(parse("coend(com, gen(1))")) == Sort::complex);
  CHECK(check_sort(parse("tau(com, bar(free(com, gen(2))), 2)")) == Sort::coalgebra);
  CHECK(code_of([] { check_sort(parse("bar(gen(2))")); }) == ErrorCode::SortError);
  CHECK(code_of([] { check_sort(parse("truncate(com, com)")); }) == ErrorCode::SortError);
  CHECK(code_of([] { check_sort(parse("free(com, com)")); }) == ErrorCode::SortError);
  CHECK(code_of([] { check_sort(parse("bar(lie)")); }) == ErrorCode::UnknownName);
  const auto msg = message_of([] { check_sort(parse("facthom(com, com, gen(2))")); });
  CHECK(msg.find("column 19") != std::string::npos);
  CHECK(msg.find("gen(2)") != std::string::npos);
}

TEST_CASE("evaluation") {
  SUBCASE("bar of triv is triv") {
    const auto r = evaluate("bar(triv)", opts(3, 6));
    REQUIRE(r.sort == Sort::cooperad);
    CHECK(graded_dims(std::get<Cooperad>(r.value).seq) == graded_dims(builtin_operad("triv", 3).seq));
  }
  SUBCASE("bar of com") {
    const auto r = evaluate("bar(com)", opts(4, 8));
    for (int n = 1; n <= 4; ++n) CHECK(r.homology.at(n).dims == Poly{{n - 1, factorial(n - 1)}});
    CHECK(r.homology.at(3).dims == Poly{{2, 2}});
  }
  SUBCASE("free com-algebra and its factorization homology") {
    const auto a = evaluate("free(com, gen(2))", opts(3, 6));
    CHECK(a.homology.at(0).dims == Poly{{2, 1}, {4, 1}, {6, 1}});
    const auto c = evaluate("facthom(com, com, free(com, gen(2)))", opts(3, 6));
    CHECK(c.sort == Sort::complex);
    CHECK(c.homology.at(0).dims == Poly{{2, 1}, {4, 1}, {6, 1}});
    const auto s = evaluate("facthom(trivmod, com, free(com, gen(2)))", opts(3, 6));
    CHECK(s.homology.at(0).dims == Poly{{2, 1}});
  }
  SUBCASE("coend of a sequence") {
    const auto r = evaluate("coend(com, gen(2))", opts(3, 6));
    CHECK(r.homology.at(0).dims == Poly{{2, 1}, {4, 1}, {6, 1}});
    CHECK(evaluate("coend(unit, gen(1))", opts(3, 6)).homology.at(0).dims == Poly{{1, 1}});
  }
  SUBCASE("cobar bar and dual") {
    const auto r = evaluate("cobar(bar(com))", opts(3, 6));
    for (int n = 1; n <= 3; ++n) CHECK(r.homology.at(n).dims == Poly{{0, 1}});
    CHECK(evaluate("dual(gen(2))", opts(3, 6)).homology.at(0).dims == Poly{{-2, 1}});
  }
  SUBCASE("module names follow the operad argument") {
    const auto r = evaluate("facthom(self, ass, free(ass, gen(2)))", opts(2, 6));
    CHECK(r.homology.at(0).dims == Poly{{2, 1}, {4, 1}});
  }
  SUBCASE("deterministic") {
    const auto a = evaluate("bar(com)", opts(3, 6));
    const auto b = evaluate("bar(com)", opts(3, 6));
    CHECK(graded_dims(std::get<Cooperad>(a.value).seq) == graded_dims(std::get<Cooperad>(b.value).seq));
  }
}

TEST_CASE("evaluation errors") {
  CHECK(code_of([] { evaluate("bar(com)", opts(0, 6)); }) == ErrorCode::ConfigError);
  const auto msg = message_of([] { evaluate("facthom(com, com, trivial(com, gen(0)))", opts(3, 6)); });
  CHECK(msg.find("NotCertifiablyConvergent") != std::string::npos);
  CHECK(msg.find("facthom(com, com, trivial(com, gen(0)))") != std::string::npos);
  const auto inner = message_of([] { evaluate("bar(truncate(com, 0))", opts(3, 6)); });
  CHECK(inner.find("in 'truncate(com, 0)'") != std::string::npos);
}
