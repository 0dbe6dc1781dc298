#include "opk/expr.hpp"

#include <cctype>
#include <filesystem>

#include "opk/error.hpp"
#include "opk/groupoid.hpp"
#include "opk/io.hpp"

namespace opk {

namespace {

const std::map<std::string, int>& call_arity() {
  static const std::map<std::string, int> table{
      {"bar", 1},     {"cobar", 1}, {"truncate", 2}, {"suspend", 1}, {"dual", 1},    {"free", 2},  {"trivial", 2},
      {"rho", 3},     {"tau", 3},   {"facthom", 3},  {"factcoh", 3}, {"coend", 2},   {"gen", -1},
  };
  return table;
}

std::string at(std::size_t pos) { return " at column " + std::to_string(pos); }

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw Error(ErrorCode::ParseError, msg + at(i_ + 1)); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Expr expr() {
    skip();
    Expr e;
    e.pos = i_ + 1;
    if (i_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      const std::size_t start = i_;
      if (c == '-') ++i_;
      if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) fail("expected a digit");
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      e.kind = Expr::Kind::integer;
      try {
        e.value = std::stoi(s_.substr(start, i_ - start));
      } catch (const std::out_of_range&) {
        i_ = start;
        fail("integer out of range");
      }
      return e;
    }
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) fail("unexpected '" + std::string(1, c) + "'");
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    e.head = s_.substr(start, i_ - start);
    if (!eat('(')) {
      e.kind = Expr::Kind::name;
      return e;
    }
    e.kind = Expr::Kind::call;
    auto it = call_arity().find(e.head);
    if (it == call_arity().end()) throw Error(ErrorCode::ParseError, "unknown construction '" + e.head + "'" + at(e.pos));
    do e.args.push_back(expr());
    while (eat(','));
    if (!eat(')')) fail("expected ',' or ')'");
    const int want = it->second;
    if (want >= 0 && static_cast<int>(e.args.size()) != want)
      throw Error(ErrorCode::ParseError, e.head + " takes " + std::to_string(want) + " argument" + (want == 1 ? "" : "s") +
                                             ", got " + std::to_string(e.args.size()) + at(e.pos));
    return e;
  }
};

bool coerces(Sort from, Sort to) {
  if (from == to) return true;
  switch (from) {
    case Sort::operad:
      return to == Sort::module || to == Sort::sequence;
    case Sort::cooperad:
      return to == Sort::comodule || to == Sort::sequence;
    case Sort::module:
    case Sort::comodule:
      return to == Sort::sequence;
    default:
      return false;
  }
}

Sort expect(const Expr& e, Sort want) {
  const Sort got = check_sort(e);
  if (!coerces(got, want))
    throw Error(ErrorCode::SortError, "expected " + to_string(want) + ", got " + to_string(got) + " in '" + print(e) +
                                          "'" + at(e.pos));
  return got;
}

Sort first_of(const Expr& e, std::initializer_list<Sort> allowed) {
  const Sort got = check_sort(e.args[0]);
  for (Sort s : allowed)
    if (got == s) return got;
  std::string names;
  for (Sort s : allowed) names += (names.empty() ? "" : " or ") + to_string(s);
  throw Error(ErrorCode::SortError, e.head + " expects " + names + ", got " + to_string(got) + at(e.args[0].pos));
}

// ---- evaluation ----

struct Ctx {
  const EvalOptions& opts;
  OperadPtr module_operad;  // resolves self / trivmod
};

OperadPtr share(Operad o) { return std::make_shared<const Operad>(std::move(o)); }

Value eval_node(const Expr& e, const Ctx& ctx);

OperadPtr context_operad(const Ctx& ctx) {
  if (ctx.module_operad) return ctx.module_operad;
  return share(builtin_operad(ctx.opts.context_operad, ctx.opts.caps.max_arity, ctx.opts.field));
}

Value coerce(Value v, Sort from, Sort to) {
  if (from == to) return v;
  switch (from) {
    case Sort::operad: {
      auto o = std::get<OperadPtr>(v);
      if (to == Sort::module) return self_module(o);
      return o->seq;
    }
    case Sort::cooperad: {
      auto p = std::get<Cooperad>(std::move(v));
      if (to == Sort::comodule) {
        auto w = dualize(self_module(share(dualize(p))));
        w.name = p.name;
        return w;
      }
      return p.seq;
    }
    case Sort::module:
      return std::get<RightModule>(std::move(v)).seq;
    case Sort::comodule:
      return std::get<RightComodule>(std::move(v)).seq;
    default:
      throw Error(ErrorCode::SortError, "no coercion from " + to_string(from) + " to " + to_string(to));
  }
}

template <class T>
T arg(const Expr& e, std::size_t i, Sort want, const Ctx& ctx) {
  const Expr& a = e.args[i];
  return std::get<T>(coerce(eval_node(a, ctx), check_sort(a), want));
}

std::string file_key(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

Cooperad cached_bar(const Expr& operand, OperadPtr o, const EvalOptions& opts) {
  if (opts.cache_dir.empty()) return bar_operad(o, opts.caps).cooperad;
  namespace fs = std::filesystem;
  const auto path = fs::path(opts.cache_dir) /
                    ("bar_" + file_key(print(operand)) + "_" + file_key(opts.field.name()) + "_K" +
                     std::to_string(opts.caps.max_arity) + "_D" + std::to_string(opts.caps.max_degree) + ".json");
  if (fs::exists(path)) return cooperad_from_json(read_json_file(path.string()));
  auto p = bar_operad(o, opts.caps).cooperad;
  std::error_code ec;
  fs::create_directories(opts.cache_dir, ec);
  // a cache that cannot be written is not an error
  try {
    const auto tmp = path.string() + ".tmp";
    write_json_file(tmp, to_json(p));
    fs::rename(tmp, path, ec);
  } catch (const Error&) {
  }
  return p;
}

ChainComplex generators(const Expr& e, const FieldSpec& f) {
  std::vector<Generator> gens;
  for (std::size_t i = 0; i < e.args.size(); ++i)
    gens.push_back({e.args.size() == 1 ? "x" : "x" + std::to_string(i + 1), e.args[i].value});
  return ChainComplex(f, gens, SparseMatrix(gens.size(), gens.size()));
}

Value eval_call(const Expr& e, const Ctx& ctx) {
  const auto& caps = ctx.opts.caps;
  const auto& h = e.head;
  if (h == "gen") return generators(e, ctx.opts.field);
  if (h == "bar") {
    switch (check_sort(e.args[0])) {
      case Sort::operad:
        return cached_bar(e.args[0], arg<OperadPtr>(e, 0, Sort::operad, ctx), ctx.opts);
      case Sort::algebra:
        return bar_algebra(arg<Algebra>(e, 0, Sort::algebra, ctx), caps);
      default:
        return bar_module(arg<RightModule>(e, 0, Sort::module, ctx), caps);
    }
  }
  if (h == "cobar") {
    if (check_sort(e.args[0]) == Sort::cooperad)
      return share(cobar_cooperad(arg<Cooperad>(e, 0, Sort::cooperad, ctx), caps).operad);
    return cobar_coalgebra(arg<Coalgebra>(e, 0, Sort::coalgebra, ctx), caps);
  }
  if (h == "truncate") return share(truncate_operad(*arg<OperadPtr>(e, 0, Sort::operad, ctx), e.args[1].value));
  if (h == "suspend") return share(suspend(*arg<OperadPtr>(e, 0, Sort::operad, ctx)));
  if (h == "dual") {
    switch (check_sort(e.args[0])) {
      case Sort::operad:
        return dualize(*arg<OperadPtr>(e, 0, Sort::operad, ctx));
      case Sort::cooperad:
        return share(dualize(arg<Cooperad>(e, 0, Sort::cooperad, ctx)));
      case Sort::complex:
        return dualize(arg<ChainComplex>(e, 0, Sort::complex, ctx));
      default:
        return dualize(arg<SymmetricSequence>(e, 0, Sort::sequence, ctx));
    }
  }
  if (h == "free" || h == "trivial") {
    const auto v = arg<ChainComplex>(e, 1, Sort::complex, ctx);
    if (check_sort(e.args[0]) == Sort::operad) {
      auto o = arg<OperadPtr>(e, 0, Sort::operad, ctx);
      return h == "free" ? free_algebra(o, v, caps) : trivial_algebra(o, v);
    }
    const auto p = arg<Cooperad>(e, 0, Sort::cooperad, ctx);
    return h == "free" ? cofree_coalgebra(p, v, caps) : trivial_coalgebra(p, v);
  }
  if (h == "rho") {
    auto o = arg<OperadPtr>(e, 0, Sort::operad, ctx);
    auto a = arg<Algebra>(e, 1, Sort::algebra, ctx);
    if (graded_dims(a.operad->seq) != graded_dims(o->seq))
      throw Error(ErrorCode::InvalidInput, "rho: algebra is over a different operad");
    return rho(a, e.args[2].value, caps);
  }
  if (h == "tau") {
    auto o = arg<OperadPtr>(e, 0, Sort::operad, ctx);
    return tau(o, arg<Coalgebra>(e, 1, Sort::coalgebra, ctx), e.args[2].value, caps);
  }
  if (h == "facthom") {
    auto o = arg<OperadPtr>(e, 1, Sort::operad, ctx);
    const Ctx inner{ctx.opts, o};
    auto m = arg<RightModule>(e, 0, Sort::module, inner);
    return fact_homology(m, arg<Algebra>(e, 2, Sort::algebra, ctx), caps);
  }
  if (h == "factcoh") {
    auto p = arg<Cooperad>(e, 1, Sort::cooperad, ctx);
    auto w = arg<RightComodule>(e, 0, Sort::comodule, ctx);
    return fact_cohomology(w, p, arg<Coalgebra>(e, 2, Sort::coalgebra, ctx), caps);
  }
  // coend
  auto s = arg<SymmetricSequence>(e, 0, Sort::sequence, ctx);
  auto t = arg<ChainComplex>(e, 1, Sort::complex, ctx);
  auto fin = std::make_shared<const FiniteGroupoid>(fin_bij(caps.max_arity));
  return coend(*fin, tensor_functor(sequence_functor(s, fin), tensor_powers(t, fin)));
}

Value eval_leaf(const Expr& e, const Ctx& ctx) {
  if (e.kind == Expr::Kind::integer) return e.value;
  const auto& opts = ctx.opts;
  if (e.head == "unit") return unit_sequence(opts.field);
  if (e.head == "self") return self_module(context_operad(ctx));
  if (e.head == "trivmod") return trivial_module(context_operad(ctx));
  return share(builtin_operad(e.head, opts.caps.max_arity, opts.field));
}

std::string strip_code(const std::string& what) {
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

Value eval_node(const Expr& e, const Ctx& ctx) {
  try {
    return e.kind == Expr::Kind::call ? eval_call(e, ctx) : eval_leaf(e, ctx);
  } catch (const Error& err) {
    const auto msg = strip_code(err.what());
    if (msg.rfind("in '", 0) == 0) throw;
    throw Error(err.code(), "in '" + print(e) + "'" + at(e.pos) + ": " + msg);
  }
}

std::map<int, HomologyReport> per_arity(const SymmetricSequence& s, int d) {
  std::map<int, HomologyReport> out;
  for (const auto& [n, x] : s.components()) out[n] = homology_through(x.complex(), d);
  return out;
}

}  // namespace

std::string to_string(Sort s) {
  switch (s) {
    case Sort::operad:
      return "operad";
    case Sort::cooperad:
      return "cooperad";
    case Sort::algebra:
      return "algebra";
    case Sort::coalgebra:
      return "coalgebra";
    case Sort::module:
      return "module";
    case Sort::comodule:
      return "comodule";
    case Sort::complex:
      return "complex";
    case Sort::sequence:
      return "sequence";
    case Sort::integer:
      return "integer";
  }
  return "unknown";
}

Expr parse(const std::string& text) { return Parser(text).run(); }

std::string print(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::integer:
      return std::to_string(e.value);
    case Expr::Kind::name:
      return e.head;
    case Expr::Kind::call:
      break;
  }
  std::string out = e.head + "(";
  for (std::size_t i = 0; i < e.args.size(); ++i) out += (i ? ", " : "") + print(e.args[i]);
  return out + ")";
}

Sort check_sort(const Expr& e) {
  if (e.kind == Expr::Kind::integer) return Sort::integer;
  if (e.kind == Expr::Kind::name) {
    if (is_builtin_operad(e.head)) return Sort::operad;
    if (e.head == "self" || e.head == "trivmod") return Sort::module;
    if (e.head == "unit") return Sort::sequence;
    throw Error(ErrorCode::UnknownName, "unknown name '" + e.head + "'" + at(e.pos));
  }
  const auto& h = e.head;
  if (h == "gen") {
    for (const auto& a : e.args) expect(a, Sort::integer);
    return Sort::complex;
  }
  if (h == "bar") {
    switch (first_of(e, {Sort::operad, Sort::algebra, Sort::module})) {
      case Sort::operad:
        return Sort::cooperad;
      case Sort::algebra:
        return Sort::coalgebra;
      default:
        return Sort::comodule;
    }
  }
  if (h == "cobar") return first_of(e, {Sort::cooperad, Sort::coalgebra}) == Sort::cooperad ? Sort::operad : Sort::algebra;
  if (h == "truncate") {
    expect(e.args[0], Sort::operad);
    expect(e.args[1], Sort::integer);
    return Sort::operad;
  }
  if (h == "suspend") {
    expect(e.args[0], Sort::operad);
    return Sort::operad;
  }
  if (h == "dual") {
    switch (first_of(e, {Sort::operad, Sort::cooperad, Sort::complex, Sort::sequence})) {
      case Sort::operad:
        return Sort::cooperad;
      case Sort::cooperad:
        return Sort::operad;
      case Sort::complex:
        return Sort::complex;
      default:
        return Sort::sequence;
    }
  }
  if (h == "free" || h == "trivial") {
    const Sort s = first_of(e, {Sort::operad, Sort::cooperad});
    expect(e.args[1], Sort::complex);
    return s == Sort::operad ? Sort::algebra : Sort::coalgebra;
  }
  if (h == "rho" || h == "tau") {
    expect(e.args[0], Sort::operad);
    expect(e.args[1], h == "rho" ? Sort::algebra : Sort::coalgebra);
    expect(e.args[2], Sort::integer);
    return h == "rho" ? Sort::algebra : Sort::coalgebra;
  }
  if (h == "facthom") {
    expect(e.args[0], Sort::module);
    expect(e.args[1], Sort::operad);
    expect(e.args[2], Sort::algebra);
    return Sort::complex;
  }
  if (h == "factcoh") {
    expect(e.args[0], Sort::comodule);
    expect(e.args[1], Sort::cooperad);
    expect(e.args[2], Sort::coalgebra);
    return Sort::complex;
  }
  if (h == "coend") {
    expect(e.args[0], Sort::sequence);
    expect(e.args[1], Sort::complex);
    return Sort::complex;
  }
  throw Error(ErrorCode::ParseError, "unknown construction '" + h + "'" + at(e.pos));
}

Evaluation evaluate(const Expr& e, const EvalOptions& opts) {
  if (opts.caps.max_arity < 1) throw Error(ErrorCode::ConfigError, "max-arity must be at least 1");
  if (opts.caps.max_degree < opts.caps.min_degree) throw Error(ErrorCode::ConfigError, "max-degree below min-degree");
  Evaluation out;
  out.sort = check_sort(e);
  out.value = eval_node(e, Ctx{opts, nullptr});
  const int d = opts.caps.max_degree;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, OperadPtr>)
          out.homology = per_arity(v->seq, d);
        else if constexpr (std::is_same_v<T, Cooperad> || std::is_same_v<T, RightModule> ||
                           std::is_same_v<T, RightComodule>)
          out.homology = per_arity(v.seq, d);
        else if constexpr (std::is_same_v<T, SymmetricSequence>)
          out.homology = per_arity(v, d);
        else if constexpr (std::is_same_v<T, Algebra> || std::is_same_v<T, Coalgebra>)
          out.homology[0] = homology_through(v.carrier, d);
        else if constexpr (std::is_same_v<T, ChainComplex>)
          out.homology[0] = homology_through(v, d);
      },
      out.value);
  return out;
}

Evaluation evaluate(const std::string& text, const EvalOptions& opts) { return evaluate(parse(text), opts); }

}  // namespace opk
