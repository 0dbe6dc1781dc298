#pragma once

#include <string>

#include "json.hpp"
#include "opk/alg_module.hpp"
#include "opk/bar_cobar.hpp"
#include "opk/fact_hom.hpp"
#include "opk/groupoid.hpp"

namespace opk {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const FieldSpec& f);
FieldSpec field_from_json(const Json& j);

/// Triplet list [[row, col, "scalar"], ...].
Json to_json(const SparseMatrix& m);
SparseMatrix matrix_from_json(const Json& j, std::size_t rows, std::size_t cols, const FieldSpec& f);

Json to_json(const ChainComplex& c);
ChainComplex complex_from_json(const Json& j);

Json to_json(const EquivariantComplex& x);
EquivariantComplex equivariant_from_json(const Json& j);

Json to_json(const SymmetricSequence& s);
SymmetricSequence sequence_from_json(const Json& j);

Json to_json(const Operad& o);
Operad operad_from_json(const Json& j);

Json to_json(const Cooperad& p);
Cooperad cooperad_from_json(const Json& j);
Json to_json(const Provenance& p);

/// Actions serialize per arity n as a matrix with columns op * d^n + Σ_j a_j d^{n-j}.
Json to_json(const Algebra& a);
Algebra algebra_from_json(const Json& j, OperadPtr operad);

Json to_json(const RightModule& m);

Json to_json(const HomologyReport& h);
Json to_json(const KoszulReport& r);
Json to_json(const DimComparison& d);

Json to_json(const FiniteGroupoid& g);
FiniteGroupoid groupoid_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace opk
