#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "opk/error.hpp"
#include "opk/suite.hpp"

using namespace opk;

namespace {

SuiteConfig config(const std::string& suite) {
  SuiteConfig c;
  c.suite = suite;
  c.caps = Caps{3, 6, 0};
  return c;
}

Json without_times(Json j) {
  j.erase("wall_time_ms");
  for (auto& c : j["checks"]) c.erase("wall_time_ms");
  return j;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("every suite passes on its default inventory") {
  for (const auto& name : suite_names()) {
    const auto r = run_suite(config(name));
    CHECK_MESSAGE(r.exit_code == 0, name);
    CHECK_FALSE(r.checks.empty());
    for (const auto& c : r.checks) CHECK_MESSAGE(c.ok(), c.name << " " << c.detail);
  }
}

TEST_CASE("refusals") {
  auto c = config("koszul");
  c.algebras = {"trivial:0"};
  c.modules = {"self"};
  auto r = run_suite(c);
  CHECK(r.exit_code == 0);
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].outcome == Outcome::not_certified);
  CHECK(r.checks[0].expected == Outcome::not_certified);
  c.demand_pass = true;
  CHECK(run_suite(c).exit_code == 3);

  auto t = config("algebra-towers");
  t.algebras = {"trivial:0"};
  r = run_suite(t);
  CHECK(r.exit_code == 0);
  for (const auto& ch : r.checks) CHECK(ch.outcome == Outcome::not_certified);
}

TEST_CASE("configuration errors") {
  CHECK(code_of([] { run_suite(config("nosuch")); }) == ErrorCode::ConfigError);
  auto c = config("koszul");
  c.caps.max_arity = 0;
  CHECK(code_of([&] { run_suite(c); }) == ErrorCode::ConfigError);
  c = config("koszul");
  c.algebras = {"free:x"};
  CHECK(code_of([&] { run_suite(c); }) == ErrorCode::ConfigError);
  c = config("koszul");
  c.modules = {"left"};
  CHECK(code_of([&] { run_suite(c); }) == ErrorCode::ConfigError);
  c = config("barcobar");
  c.operads = {"gen(2)"};
  CHECK(code_of([&] { run_suite(c); }) == ErrorCode::ConfigError);
  c.operads = {"truncate(com)"};
  CHECK(code_of([&] { run_suite(c); }) == ErrorCode::ParseError);
}

TEST_CASE("reports are deterministic and carry a schema version") {
  const auto dir = std::filesystem::temp_directory_path() / "opk_test_suite";
  std::filesystem::create_directories(dir);
  auto c = config("koszul");
  c.report_path = (dir / "a.json").string();
  c.jobs = 1;
  run_suite(c);
  c.report_path = (dir / "b.json").string();
  c.jobs = 3;
  run_suite(c);
  auto a = read_json_file((dir / "a.json").string());
  auto b = read_json_file((dir / "b.json").string());
  CHECK(a.at("schema_version") == kSchemaVersion);
  CHECK(a.at("summary").at("exit_code") == 0);
  a["config"].erase("jobs");
  b["config"].erase("jobs");
  CHECK(without_times(a).dump() == without_times(b).dump());
  for (const auto& ch : a.at("checks")) {
    CHECK(ch.contains("dims"));
    CHECK(ch.at("wall_time_ms").is_number());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("operad inputs from files") {
  const auto dir = std::filesystem::temp_directory_path() / "opk_test_suite_files";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "com.json").string();
  write_json_file(path, to_json(builtin_operad("com", 3)));
  auto c = config("barcobar");
  c.operads = {path};
  CHECK(run_suite(c).exit_code == 0);
  std::filesystem::remove_all(dir);
}
