#include "opk/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "opk/error.hpp"
#include "opk/expr.hpp"

namespace opk {

namespace {

struct Body {
  Outcome outcome = Outcome::pass;
  Json dims = Json::object();
  std::string detail;
};

struct Check {
  std::string name;
  Outcome expected = Outcome::pass;
  std::function<Body()> run;
};

struct AlgebraInput {
  std::string label;
  std::optional<int> degree;  // generator degree of a shorthand
  std::function<Algebra(OperadPtr)> make;
  Outcome expected = Outcome::pass;
};

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

bool is_json_path(const std::string& s) { return s.size() > 5 && s.substr(s.size() - 5) == ".json"; }

Json dims_json(const std::map<int, std::size_t>& m) {
  Json o = Json::object();
  for (const auto& [d, x] : m) o[std::to_string(d)] = x;
  return o;
}

Json dims_json(const HomologyReport& h) { return dims_json(h.dims); }

Json arity_json(const SymmetricSequence& s, int through) {
  Json o = Json::object();
  for (const auto& [n, x] : s.components()) o[std::to_string(n)] = dims_json(homology_through(x.complex(), through));
  return o;
}

ChainComplex point(const FieldSpec& f, int degree) { return ChainComplex(f, {{"x", degree}}, SparseMatrix(1, 1)); }

EvalOptions eval_options(const SuiteConfig& c) {
  EvalOptions o;
  o.caps = c.caps;
  o.field = c.field;
  o.cache_dir = c.cache_dir;
  return o;
}

OperadPtr resolve_operad(const std::string& text, const SuiteConfig& c) {
  if (is_json_path(text)) return share(operad_from_json(read_json_file(text)));
  auto r = evaluate(text, eval_options(c));
  if (r.sort != Sort::operad) throw Error(ErrorCode::ConfigError, "'" + text + "' is a " + to_string(r.sort) + ", not an operad");
  return std::get<OperadPtr>(r.value);
}

SymmetricSequence resolve_sequence(const std::string& text, const SuiteConfig& c) {
  if (is_json_path(text)) return sequence_from_json(read_json_file(text));
  auto r = evaluate(text, eval_options(c));
  if (r.sort == Sort::operad) return std::get<OperadPtr>(r.value)->seq;
  if (r.sort == Sort::sequence) return std::get<SymmetricSequence>(r.value);
  throw Error(ErrorCode::ConfigError, "'" + text + "' is a " + to_string(r.sort) + ", not a sequence");
}

AlgebraInput resolve_algebra(const std::string& text, const SuiteConfig& c) {
  AlgebraInput in;
  in.label = text;
  const auto colon = text.find(':');
  if (colon != std::string::npos && text.find('(') == std::string::npos && !is_json_path(text)) {
    const auto kind = text.substr(0, colon);
    if (kind != "free" && kind != "trivial")
      throw Error(ErrorCode::ConfigError, "algebra shorthand '" + text + "' (expected free:d or trivial:d)");
    int d = 0;
    try {
      std::size_t used = 0;
      d = std::stoi(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "algebra shorthand '" + text + "' has no integer degree");
    }
    in.degree = d;
    // the relative tensor certificate asks for a 0-connected carrier
    in.expected = d >= 1 ? Outcome::pass : Outcome::not_certified;
    const Caps caps = c.caps;
    const FieldSpec f = c.field;
    if (kind == "free")
      in.make = [caps, f, d](OperadPtr o) { return free_algebra(o, point(f, d), caps); };
    else
      in.make = [f, d](OperadPtr o) { return trivial_algebra(o, point(f, d)); };
    return in;
  }
  if (is_json_path(text)) {
    const Json j = read_json_file(text);
    in.make = [j](OperadPtr o) { return algebra_from_json(j, o); };
    in.expected = connectivity(complex_from_json(j.at("carrier"))).zero_connected ? Outcome::pass : Outcome::not_certified;
    return in;
  }
  const Expr e = parse(text);
  if (check_sort(e) != Sort::algebra) throw Error(ErrorCode::ConfigError, "'" + text + "' is not an algebra");
  const auto opts = eval_options(c);
  in.make = [e, opts](OperadPtr) { return std::get<Algebra>(evaluate(e, opts).value); };
  return in;
}

RightModule resolve_module(const std::string& name, OperadPtr o) {
  if (name == "self") return self_module(o);
  if (name == "trivmod") return trivial_module(o);
  throw Error(ErrorCode::ConfigError, "module '" + name + "' (expected self or trivmod)");
}

std::vector<std::string> or_default(const std::vector<std::string>& v, std::vector<std::string> d) {
  return v.empty() ? d : v;
}

std::string tag(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return "[" + out + "]";
}

SparseMatrix component_or_zero(const std::map<int, SparseMatrix>& m, int n, std::size_t rows, std::size_t cols) {
  auto it = m.find(n);
  return it == m.end() ? SparseMatrix(rows, cols) : it->second;
}

bool homology_agrees(const HomologyReport& a, const HomologyReport& b) { return a.dims == b.dims; }

// ---- suites ----

void barcobar_checks(const SuiteConfig& c, std::vector<Check>& out) {
  const auto caps = c.caps;
  const int D = caps.max_degree;
  for (const auto& text : or_default(c.operads, {"com"})) {
    auto o = resolve_operad(text, c);
    out.push_back({"validate" + tag({text}), Outcome::pass, [o, caps] {
                     Body b;
                     const auto r = validate_operad(*o);
                     const auto bar = bar_operad(o, caps).cooperad;
                     const auto rb = validate_cooperad(bar);
                     bool d2 = true;
                     for (const auto& [n, x] : bar.seq.components()) {
                       const auto& d = x.complex().differential();
                       d2 = d2 && multiply(d, d, x.field()).is_zero();
                     }
                     b.outcome = r.report.ok() && rb.report.ok() && d2 ? Outcome::pass : Outcome::mismatch;
                     if (!r.report.ok()) b.detail = r.report.violations.front();
                     if (!rb.report.ok()) b.detail = rb.report.violations.front();
                     if (!d2) b.detail = "bar differential does not square to zero";
                     return b;
                   }});
    auto opts = eval_options(c);
    out.push_back({"counit" + tag({text}), Outcome::pass, [o, text, caps, D, opts] {
                     Body b;
                     const auto cu = counit_map(o, caps);
                     Json cones = Json::object();
                     bool ok = true;
                     for (int n = 1; n <= caps.max_arity; ++n) {
                       const ChainComplex src =
                           cu.cobar_bar->seq.has(n) ? cu.cobar_bar->seq.at(n).complex() : ChainComplex(o->field());
                       const ChainComplex tgt = o->seq.has(n) ? o->seq.at(n).complex() : ChainComplex(o->field());
                       const ChainMap m(src, tgt, component_or_zero(cu.map.components, n, tgt.dim(), src.dim()));
                       const auto h = homology(cone(m));
                       cones[std::to_string(n)] = dims_json(h);
                       if (!h.is_zero()) {
                         ok = false;
                         if (b.detail.empty()) b.detail = "counit cone not acyclic in arity " + std::to_string(n);
                       }
                     }
                     const auto bar = is_json_path(text) ? bar_operad(o, caps).cooperad
                                                         : std::get<Cooperad>(evaluate("bar(" + text + ")", opts).value);
                     b.dims = Json{{"cone", cones}, {"bar_homology", arity_json(bar.seq, D)}};
                     b.outcome = ok ? Outcome::pass : Outcome::mismatch;
                     return b;
                   }});
  }
}

void trunc_tower_checks(const SuiteConfig& c, std::vector<Check>& out) {
  const auto caps = c.caps;
  const int K = caps.max_arity;
  for (const auto& text : or_default(c.operads, {"com"})) {
    auto o = resolve_operad(text, c);
    auto tower = std::make_shared<std::shared_ptr<const BarTower>>();
    auto once = std::make_shared<std::once_flag>();
    auto get = [o, caps, K, tower, once] {
      std::call_once(*once, [&] { *tower = std::make_shared<const BarTower>(bar_tower(o, K, caps)); });
      return *tower;
    };
    const FieldSpec f = c.field;
    for (int k = 1; k <= K; ++k)
      out.push_back({"level" + tag({text, std::to_string(k)}), Outcome::pass, [get, k, f, caps, K] {
                       Body b;
                       const auto t = get();
                       const auto ku = static_cast<std::size_t>(k);
                       const auto& full = t->full->cooperad;
                       const auto& bk = t->bars[ku - 1]->cooperad;
                       const auto& fk = t->from_full[ku - 1];
                       std::vector<std::string> bad;
                       if (!validate_cooperad_map(fk, full, bk).ok()) bad.push_back("Bar(r_k) is not a cooperad map");
                       Json arities = Json::object();
                       for (int n = 1; n <= k; ++n) {
                         const auto dn = full.seq.dim(n);
                         if (bk.seq.dim(n) != dn ||
                             !(component_or_zero(fk.components, n, dn, dn) == SparseMatrix::identity(dn)))
                           bad.push_back("arity " + std::to_string(n) + " is not identified");
                         if (bk.seq.has(n)) arities[std::to_string(n)] = dims_json(homology_through(bk.seq.at(n).complex(), caps.max_degree));
                       }
                       if (k >= 2) {
                         const auto& step = t->steps[ku - 2];
                         const auto& bl = t->bars[ku - 2]->cooperad;
                         if (!validate_cooperad_map(step, bk, bl).ok()) bad.push_back("tower step is not a cooperad map");
                         const auto via = compose_cooperad_maps(step, fk, f);
                         for (int n = 1; n <= K; ++n) {
                           const auto& prev = t->from_full[ku - 2];
                           const auto rows = bl.seq.dim(n), cols = full.seq.dim(n);
                           if (!(component_or_zero(via.components, n, rows, cols) ==
                                 component_or_zero(prev.components, n, rows, cols)))
                             bad.push_back("tower maps do not compose in arity " + std::to_string(n));
                         }
                       } else {
                         const auto triv = builtin_operad("triv", K, f);
                         if (graded_dims(t->truncations[0]->seq) != graded_dims(triv.seq))
                           bad.push_back("level-1 truncation is not triv");
                         if (graded_dims(bk.seq) != graded_dims(dualize(triv).seq))
                           bad.push_back("level-1 bar is not triv");
                       }
                       b.dims = Json{{"bar_homology", arities}};
                       b.outcome = bad.empty() ? Outcome::pass : Outcome::mismatch;
                       if (!bad.empty()) b.detail = bad.front();
                       return b;
                     }});
  }
}

void algebra_tower_checks(const SuiteConfig& c, std::vector<Check>& out) {
  const auto caps = c.caps;
  const int K = caps.max_arity, D = caps.max_degree;
  for (const auto& otext : or_default(c.operads, {"com"})) {
    auto o = resolve_operad(otext, c);
    for (const auto& atext : or_default(c.algebras, {"free:2", "trivial:2"})) {
      const auto in = resolve_algebra(atext, c);
      const auto make = in.make;
      for (int k = 1; k <= K; ++k)
        out.push_back({"bar_rho" + tag({otext, atext, std::to_string(k)}), in.expected, [o, make, k, caps, D] {
                         Body b;
                         const auto a = make(o);
                         const auto lhs_c = bar_algebra(rho(a, k, caps), caps);
                         const auto rhs_c = tau(o, bar_algebra(a, caps), k, caps);
                         const auto lhs = homology_through(lhs_c.carrier, D), rhs = homology_through(rhs_c.carrier, D);
                         const bool conn = connectivity(lhs_c.carrier).zero_connected && connectivity(rhs_c.carrier).zero_connected;
                         b.dims = Json{{"bar_rho", dims_json(lhs)}, {"tau_bar", dims_json(rhs)}};
                         b.outcome = homology_agrees(lhs, rhs) && conn ? Outcome::pass : Outcome::mismatch;
                         if (!conn) b.detail = "a side is not 0-connected";
                         return b;
                       }});
      for (int k = 2; k <= K; ++k)
        out.push_back({"fiber_layer" + tag({otext, atext, std::to_string(k)}), in.expected, [o, make, k, caps] {
                         Body b;
                         const auto r = fiber_layer(make(o), k, caps);
                         b.dims = Json{{"layer", dims_json(r.layer_homology)}, {"cone", dims_json(r.cone_homology)}};
                         b.outcome = r.ok ? Outcome::pass : Outcome::mismatch;
                         return b;
                       }});
      out.push_back({"cobar_bar" + tag({otext, atext}), in.expected, [o, make, caps, D] {
                       Body b;
                       const auto a = make(o);
                       const auto lhs = homology_through(cobar_coalgebra(bar_algebra(a, caps), caps).carrier, D);
                       const auto rhs = homology_through(a.carrier, D);
                       b.dims = Json{{"cobar_bar", dims_json(lhs)}, {"algebra", dims_json(rhs)}};
                       b.outcome = homology_agrees(lhs, rhs) ? Outcome::pass : Outcome::mismatch;
                       return b;
                     }});
    }
  }
}

void koszul_checks(const SuiteConfig& c, std::vector<Check>& out) {
  const auto caps = c.caps;
  const FieldSpec f = c.field;
  for (const auto& otext : or_default(c.operads, {"com"})) {
    auto o = resolve_operad(otext, c);
    const auto algebras = or_default(c.algebras, {"free:2", "trivial:2"});
    std::vector<AlgebraInput> inputs;
    std::set<int> degrees;
    for (const auto& atext : algebras) {
      inputs.push_back(resolve_algebra(atext, c));
      if (inputs.back().degree && *inputs.back().degree >= 1) degrees.insert(*inputs.back().degree);
    }
    for (const auto& mname : or_default(c.modules, {"self", "trivmod"})) {
      (void)resolve_module(mname, o);
      for (const auto& in : inputs) {
        const auto make = in.make;
        out.push_back({"koszul" + tag({otext, mname, in.label}), in.expected, [o, mname, make, caps] {
                         Body b;
                         const auto r = koszul_compare(resolve_module(mname, o), make(o), caps);
                         const auto j = to_json(r);
                         b.dims = Json{{"lhs", j["lhs_homology"]["dims"]},
                                       {"rhs", j["rhs_homology"]["dims"]},
                                       {"tower", j["tower_tables"]},
                                       {"layers", j["layer_tables"]}};
                         b.outcome = r.verdict == Verdict::equivalent_within_caps ? Outcome::pass
                                     : r.verdict == Verdict::mismatch             ? Outcome::mismatch
                                                                                  : Outcome::not_certified;
                         b.detail = to_string(r.verdict);
                         if (r.mismatch_at)
                           b.detail += " at k=" + std::to_string(r.mismatch_at->first) +
                                       " degree " + std::to_string(r.mismatch_at->second);
                         if (!r.reason.empty()) b.detail += ": " + r.reason;
                         return b;
                       }});
      }
      for (int d : degrees) {
        const auto v = point(f, d);
        out.push_back({"free_collapse" + tag({otext, mname, "gen(" + std::to_string(d) + ")"}), Outcome::pass,
                       [o, mname, v, caps] {
                         Body b;
                         const auto m = free_collapse(resolve_module(mname, o), v, caps);
                         b.dims = Json{{"homology", dims_json(homology_through(m.target(), caps.max_degree))}};
                         b.outcome = is_quasi_iso(m) ? Outcome::pass : Outcome::mismatch;
                         return b;
                       }});
        out.push_back({"cofree_collapse" + tag({otext, mname, "gen(" + std::to_string(d) + ")"}), Outcome::pass,
                       [o, mname, v, caps] {
                         Body b;
                         const auto bar = bar_operad(o, caps);
                         const auto m = cofree_collapse(bar_module(resolve_module(mname, o), caps), bar.cooperad, v, caps);
                         b.dims = Json{{"homology", dims_json(homology_through(m.source(), caps.max_degree))}};
                         b.outcome = is_quasi_iso(m) ? Outcome::pass : Outcome::mismatch;
                         return b;
                       }});
      }
    }
  }
}

std::size_t factorial(int n) { return n <= 1 ? 1 : static_cast<std::size_t>(n) * factorial(n - 1); }

void coend_checks(const SuiteConfig& c, std::vector<Check>& out) {
  const int K = c.caps.max_arity;
  const FieldSpec f = c.field;
  for (const auto& text : or_default(c.operads, {"unit", "com", "ass"})) {
    const auto s = resolve_sequence(text, c);
    for (int d : {1, 2}) {
      const auto t = point(f, d);
      out.push_back({"coend_vs_plethysm" + tag({text, "gen(" + std::to_string(d) + ")"}), Outcome::pass, [s, t, K] {
                       Body b;
                       const auto r = coend_vs_plethysm(s, t, K);
                       b.dims = to_json(r);
                       b.outcome = r.ok ? Outcome::pass : Outcome::mismatch;
                       return b;
                     }});
      if (K >= 2)
        out.push_back({"kan_tensor" + tag({text, "gen(" + std::to_string(d) + ")"}), Outcome::pass, [s, t, K] {
                         Body b;
                         auto small = std::make_shared<const FiniteGroupoid>(fin_bij(K - 1));
                         auto large = std::make_shared<const FiniteGroupoid>(fin_bij(K));
                         const auto r = kan_tensor_check(fin_inclusion(small, large), sequence_functor(s, large),
                                                         tensor_powers(t, small));
                         b.dims = to_json(r);
                         b.outcome = r.ok ? Outcome::pass : Outcome::mismatch;
                         return b;
                       }});
    }
  }
  out.push_back({"twisted_arrow" + tag({"Fin<=" + std::to_string(K)}), Outcome::pass, [K] {
                   Body b;
                   const auto g = fin_bij(K);
                   const auto tw = twisted_arrow(g, false);
                   std::vector<std::size_t> auts;
                   for (const auto& comp : components(tw.groupoid))
                     auts.push_back(tw.groupoid.hom(comp.front(), comp.front()).size());
                   std::sort(auts.begin(), auts.end());
                   // TwAr of a groupoid is equivalent to it: one component per n, automorphisms Σ_n
                   std::vector<std::size_t> want;
                   for (int n = 0; n <= K; ++n) want.push_back(factorial(n));
                   std::sort(want.begin(), want.end());
                   b.dims = Json{{"components", auts.size()}, {"automorphisms", auts}};
                   b.outcome = auts == want ? Outcome::pass : Outcome::mismatch;
                   return b;
                 }});
}

CheckResult execute(const Check& check) {
  CheckResult r;
  r.name = check.name;
  r.expected = check.expected;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Body b = check.run();
    r.outcome = b.outcome;
    r.dims = std::move(b.dims);
    r.detail = std::move(b.detail);
  } catch (const Error& e) {
    r.outcome = e.code() == ErrorCode::NotCertifiablyConvergent ? Outcome::not_certified : Outcome::error;
    r.detail = e.what();
  } catch (const std::exception& e) {
    r.outcome = Outcome::error;
    r.detail = e.what();
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"barcobar", "trunc-tower", "algebra-towers", "koszul", "coend"};
  return names;
}

void validate_config(const SuiteConfig& c) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), c.suite) == names.end())
    throw Error(ErrorCode::ConfigError, "unknown suite '" + c.suite + "'");
  if (c.caps.max_arity < 1) throw Error(ErrorCode::ConfigError, "max-arity must be at least 1");
  if (c.caps.max_degree < c.caps.min_degree) throw Error(ErrorCode::ConfigError, "max-degree below min-degree");
  if (c.jobs < 1) throw Error(ErrorCode::ConfigError, "jobs must be at least 1");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::pass:
      return "pass";
    case Outcome::mismatch:
      return "mismatch";
    case Outcome::not_certified:
      return "not_certified";
    case Outcome::error:
      return "error";
  }
  return "unknown";
}

SuiteResult run_suite(const SuiteConfig& config) {
  validate_config(config);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Check> checks;
  if (config.suite == "barcobar") barcobar_checks(config, checks);
  if (config.suite == "trunc-tower") trunc_tower_checks(config, checks);
  if (config.suite == "algebra-towers") algebra_tower_checks(config, checks);
  if (config.suite == "koszul") koszul_checks(config, checks);
  if (config.suite == "coend") coend_checks(config, checks);
  if (config.demand_pass)
    for (auto& ch : checks) ch.expected = Outcome::pass;

  SuiteResult result;
  result.checks.resize(checks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < checks.size();) result.checks[i] = execute(checks[i]);
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), std::max<std::size_t>(checks.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool failed = false, refused = false;
  for (const auto& r : result.checks) {
    if (r.ok()) continue;
    if (r.outcome == Outcome::not_certified && r.expected == Outcome::pass)
      refused = true;
    else
      failed = true;
  }
  result.exit_code = failed ? 1 : refused ? 3 : 0;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!config.report_path.empty()) write_json_file(config.report_path, suite_report(config, result));
  return result;
}

Json suite_report(const SuiteConfig& c, const SuiteResult& result) {
  Json checks = Json::array();
  std::size_t passed = 0;
  for (const auto& r : result.checks) {
    passed += r.ok() ? 1 : 0;
    checks.push_back({{"name", r.name},
                      {"expected", to_string(r.expected)},
                      {"outcome", to_string(r.outcome)},
                      {"ok", r.ok()},
                      {"detail", r.detail},
                      {"dims", r.dims},
                      {"wall_time_ms", r.wall_ms}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"suite", c.suite},
              {"config",
               {{"max_arity", c.caps.max_arity},
                {"max_degree", c.caps.max_degree},
                {"field", c.field.name()},
                {"operads", c.operads},
                {"algebras", c.algebras},
                {"modules", c.modules},
                {"demand_pass", c.demand_pass}}},
              {"checks", checks},
              {"summary", {{"total", result.checks.size()}, {"as_expected", passed}, {"exit_code", result.exit_code}}},
              {"wall_time_ms", result.wall_ms}};
}

}  // namespace opk
