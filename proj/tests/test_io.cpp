#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "opk/error.hpp"
#include "opk/io.hpp"

using namespace opk;

namespace {

FieldSpec Q = FieldSpec::rationals();

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

ChainComplex point(int degree) { return ChainComplex(Q, {{"x", degree}}, SparseMatrix(1, 1)); }

ChainComplex small_complex(const FieldSpec& f) {
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> t{{1, 2, Scalar(3, 2)}};
  return ChainComplex(f, {{"a", 1}, {"b", 2}, {"c", 3}, {"e", 2}}, SparseMatrix::from_triplets(4, 4, t, f));
}

// re-serializing the loaded value reproduces the text
template <class T, class Load>
void round_trip(const T& x, Load load) {
  const auto j = to_json(x);
  const auto text = j.dump();
  const auto back = load(Json::parse(text));
  CHECK(to_json(back).dump() == text);
}

}  // namespace

TEST_CASE("complexes and sequences round-trip") {
  for (const auto& f : {Q, FieldSpec::prime(5)}) {
    const auto c = small_complex(f);
    const auto back = complex_from_json(Json::parse(to_json(c).dump()));
    CHECK(identical_up_to_ids(c, back));
    CHECK(homology(back).dims == homology(c).dims);
    round_trip(c, complex_from_json);
  }
  for (const char* name : {"triv", "com", "ass"}) {
    const auto s = builtin_operad(name, 4).seq;
    const auto back = sequence_from_json(Json::parse(to_json(s).dump()));
    CHECK(graded_dims(back) == graded_dims(s));
    round_trip(s, sequence_from_json);
    round_trip(s.at(3), equivariant_from_json);
  }
}

TEST_CASE("operads, cooperads and algebras round-trip") {
  const Caps caps{3, 6, 0};
  for (const char* name : {"triv", "com", "ass"}) {
    const auto o = builtin_operad(name, 3);
    round_trip(o, operad_from_json);
    CHECK(graded_dims(operad_from_json(to_json(o)).seq) == graded_dims(o.seq));
    const auto bar = bar_operad(share(o), caps).cooperad;
    const auto back = cooperad_from_json(Json::parse(to_json(bar).dump()));
    CHECK(graded_dims(back.seq) == graded_dims(bar.seq));
    for (const auto& [n, x] : bar.seq.components())
      CHECK(homology(back.seq.at(n).complex()).dims == homology(x.complex()).dims);
    round_trip(bar, cooperad_from_json);
  }
  auto com = share(builtin_operad("com", 3));
  for (const auto& a : {free_algebra(com, point(2), caps), trivial_algebra(com, small_complex(Q))}) {
    const auto back = algebra_from_json(Json::parse(to_json(a).dump()), com);
    CHECK(identical_up_to_ids(back.carrier, a.carrier));
    CHECK(back.weights == a.weights);
    CHECK(to_json(back).dump() == to_json(a).dump());
  }
}

TEST_CASE("groupoids round-trip") {
  for (const auto& g : {fin_bij(3), fin_bij(2, 1), product(fin_bij(2), opposite(fin_bij(2)))}) {
    const auto back = groupoid_from_json(Json::parse(to_json(g).dump()));
    CHECK(back.num_objects() == g.num_objects());
    CHECK(back.num_morphisms() == g.num_morphisms());
    CHECK(components(back).size() == components(g).size());
    round_trip(back, groupoid_from_json);
  }
}

TEST_CASE("malformed input") {
  auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidInput;
  };
  CHECK(code([] { complex_from_json(Json::parse(R"({"field": "Q"})")); }) == ErrorCode::ParseError);
  CHECK(code([] { field_from_json(Json::parse(R"("R")")); }) == ErrorCode::ConfigError);
  CHECK(field_from_json(Json::parse(R"({"Fp": 7})")) == FieldSpec::prime(7));
  CHECK(code([] {
          complex_from_json(Json::parse(R"({"field":"Q","degrees":{"0":["a"],"1":["b"]},"differentials":{"1":[[3,0,"1"]]}})"));
        }) == ErrorCode::ParseError);
  // d² ≠ 0
  CHECK(code([] {
          complex_from_json(Json::parse(
              R"({"field":"Q","degrees":{"0":["a"],"1":["b"],"2":["c"]},"differentials":{"1":[[0,0,"1"]],"2":[[0,0,"1"]]}})"));
        }) == ErrorCode::InvalidInput);
  auto o = to_json(builtin_operad("com", 3));
  o["partial_compositions"]["2,1,2"] = Json::array();
  CHECK(code([&] { operad_from_json(o); }) == ErrorCode::InvalidInput);
  CHECK(code([] { read_json_file("/nonexistent/x.json"); }) == ErrorCode::IoError);
}

TEST_CASE("files and reports") {
  const auto dir = std::filesystem::temp_directory_path() / "opk_test_io";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "c.json").string();
  write_json_file(path, to_json(small_complex(Q)));
  CHECK(identical_up_to_ids(complex_from_json(read_json_file(path)), small_complex(Q)));
  const auto h = to_json(homology_through(small_complex(Q), 3));
  CHECK(h.at("dims").at("1") == 1);
  CHECK(h.at("dims").at("2") == 1);
  std::filesystem::remove_all(dir);
}
