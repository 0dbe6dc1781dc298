#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "opk/error.hpp"
#include "opk/expr.hpp"
#include "opk/suite.hpp"

using namespace opk;

namespace {

struct Options {
  std::vector<std::string> operads, algebras, modules;
  int max_arity = 3;
  int max_degree = 6;
  std::string field = "Q";
  std::string report;
  int jobs = 1;
  bool demand_pass = false;
  std::string context_operad = "com";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--max-arity,-K", o.max_arity, "arity and weight cap K");
  cmd->add_option("--max-degree,-D", o.max_degree, "homology is reported through degree D");
  cmd->add_option("--field", o.field, "Q or Fp:p");
  cmd->add_option("--report", o.report, "write a JSON report to this path");
}

void add_inventory(CLI::App* cmd, Options& o) {
  cmd->add_option("--operad", o.operads, "operad expression or .json path (repeatable)");
  cmd->add_option("--algebra", o.algebras, "free:d, trivial:d, an expression or a .json path (repeatable)");
  cmd->add_option("--module", o.modules, "self or trivmod (repeatable)");
  cmd->add_option("--jobs,-j", o.jobs, "worker threads");
  cmd->add_flag("--demand-pass", o.demand_pass, "a certification refusal fails the run with exit code 3");
}

std::string cache_dir() {
  const char* env = std::getenv("OPK_CACHE_DIR");
  return env ? env : "";
}

SuiteConfig make_config(const std::string& suite, const Options& o) {
  SuiteConfig c;
  c.suite = suite;
  c.caps = Caps{o.max_arity, o.max_degree, 0};
  c.field = FieldSpec::parse(o.field);
  c.operads = o.operads;
  c.algebras = o.algebras;
  c.modules = o.modules;
  c.report_path = o.report;
  c.jobs = o.jobs;
  c.demand_pass = o.demand_pass;
  c.cache_dir = cache_dir();
  return c;
}

std::string dims_text(const std::map<int, std::size_t>& m) {
  std::string out = "{";
  for (const auto& [d, x] : m) out += (out.size() > 1 ? ", " : "") + std::to_string(d) + ": " + std::to_string(x);
  return out + "}";
}

int run(const SuiteConfig& c) {
  const auto r = run_suite(c);
  std::size_t ok = 0;
  for (const auto& ch : r.checks) {
    ok += ch.ok() ? 1 : 0;
    std::cout << (ch.ok() ? "ok   " : "FAIL ") << ch.name << "  " << to_string(ch.outcome);
    if (ch.expected != Outcome::pass) std::cout << " (expected " << to_string(ch.expected) << ")";
    std::cout << "  " << static_cast<long>(ch.wall_ms) << " ms";
    if (!ch.ok() && !ch.detail.empty()) std::cout << "  " << ch.detail;
    std::cout << "\n";
  }
  std::cout << c.suite << ": " << ok << "/" << r.checks.size() << " as expected, exit " << r.exit_code << "\n";
  return r.exit_code;
}

int eval(const std::string& text, const Options& o) {
  EvalOptions opts;
  opts.caps = Caps{o.max_arity, o.max_degree, 0};
  opts.field = FieldSpec::parse(o.field);
  opts.context_operad = o.context_operad;
  opts.cache_dir = cache_dir();
  const Expr e = parse(text);
  const auto r = evaluate(e, opts);
  std::cout << print(e) << " : " << to_string(r.sort) << "\n";
  const bool by_arity = r.sort != Sort::complex && r.sort != Sort::algebra && r.sort != Sort::coalgebra;
  for (const auto& [n, h] : r.homology)
    std::cout << (by_arity ? "  arity " + std::to_string(n) + ": " : "  homology: ") << dims_text(h.dims) << "\n";
  if (!o.report.empty()) {
    Json hom = Json::object();
    for (const auto& [n, h] : r.homology) hom[std::to_string(n)] = to_json(h);
    write_json_file(o.report, Json{{"schema_version", kSchemaVersion},
                                   {"expression", print(e)},
                                   {"sort", to_string(r.sort)},
                                   {"caps", {{"max_arity", o.max_arity}, {"max_degree", o.max_degree}}},
                                   {"field", opts.field.name()},
                                   {"homology", hom}});
  }
  return 0;
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::NotCertifiablyConvergent ? 3 : 2; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opk: operadic Koszul duality at the chain level"};
  app.require_subcommand(1);
  Options o;

  std::string suite;
  auto* run_cmd = app.add_subcommand("run", "run a check suite");
  run_cmd->add_option("suite", suite, "barcobar | trunc-tower | algebra-towers | koszul | coend")->required();
  add_common(run_cmd, o);
  add_inventory(run_cmd, o);

  std::string text;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate an expression and print its homology");
  eval_cmd->add_option("expr", text, "expression, e.g. 'bar(truncate(com, 3))'")->required();
  eval_cmd->add_option("--operad", o.context_operad, "operad for self and trivmod outside facthom");
  add_common(eval_cmd, o);

  auto* parse_cmd = app.add_subcommand("parse", "print the canonical form and sort of an expression");
  parse_cmd->add_option("expr", text, "expression")->required();

  std::string check = "plethysm";
  auto* coend_cmd = app.add_subcommand("coend", "coend suite over finite sets and bijections");
  coend_cmd->add_option("--check", check, "plethysm")->check(CLI::IsMember({"plethysm"}));
  add_common(coend_cmd, o);
  add_inventory(coend_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return run(make_config(suite, o));
    if (*coend_cmd) return run(make_config("coend", o));
    if (*eval_cmd) return eval(text, o);
    const Expr e = parse(text);
    std::cout << print(e) << " : " << to_string(check_sort(e)) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "opk: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "opk: " << e.what() << "\n";
    return 2;
  }
}
