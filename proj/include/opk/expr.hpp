#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opk/fact_hom.hpp"

namespace opk {

/// A name, an integer literal or a call head(args...). pos is the 1-based column.
struct Expr {
  enum class Kind { name, integer, call };
  Kind kind = Kind::name;
  std::string head;  // name or call head
  int value = 0;     // integer literal
  std::vector<Expr> args;
  std::size_t pos = 1;
};

enum class Sort { operad, cooperad, algebra, coalgebra, module, comodule, complex, sequence, integer };
std::string to_string(Sort s);

/// Throws ParseError with the column of the offending token.
Expr parse(const std::string& text);
/// Canonical form: "head(a, b)".
std::string print(const Expr& e);

/// Sort of a well-typed expression; throws SortError, UnknownName or ParseError
/// (wrong argument count) with the column of the offending sub-expression.
Sort check_sort(const Expr& e);

using Value = std::variant<OperadPtr, Cooperad, Algebra, Coalgebra, RightModule, RightComodule, ChainComplex,
                           SymmetricSequence, int>;

struct Evaluation {
  Sort sort = Sort::complex;
  Value value;
  /// Complexes, algebras, coalgebras: homology of the carrier under key 0.
  /// Operads, cooperads, modules, comodules, sequences: homology per arity.
  std::map<int, HomologyReport> homology;
};

struct EvalOptions {
  Caps caps;
  FieldSpec field = FieldSpec::rationals();
  /// Resolves "self" and "trivmod" outside facthom.
  std::string context_operad = "com";
  /// Directory for memoized bar cooperads; empty disables the cache.
  std::string cache_dir;
};

/// Errors from the modules are rethrown with the innermost failing sub-expression.
Evaluation evaluate(const Expr& e, const EvalOptions& opts);
Evaluation evaluate(const std::string& text, const EvalOptions& opts);

}  // namespace opk
