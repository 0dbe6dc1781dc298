#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opk/field.hpp"
#include "opk/sparse.hpp"

namespace opk {

struct Generator {
  std::string id;
  int degree = 0;
  friend bool operator==(const Generator&, const Generator&) = default;
};

/// Finite chain complex over a field, differential of degree -1.
///
/// Generators are kept in one global list sorted by degree (stable within a
/// degree). The differential is stored as one square matrix on that list; the
/// block from degree d to degree d-1 is the usual d_d.
class ChainComplex {
 public:
  ChainComplex() = default;
  explicit ChainComplex(FieldSpec field) : field_(std::move(field)) {}

  /// Validating constructor: generators are stably sorted by degree (the
  /// matrix is permuted accordingly), d must lower degree by one and square
  /// to zero.
  ChainComplex(FieldSpec field, std::vector<Generator> gens, SparseMatrix d);

  /// Per-degree constructor matching the JSON layout: differentials[d] maps
  /// gens[d] to gens[d-1] (rows = target).
  static ChainComplex from_degrees(FieldSpec field, const std::map<int, std::vector<std::string>>& gens,
                                   const std::map<int, SparseMatrix>& differentials);

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t dim() const noexcept { return gens_.size(); }
  const std::vector<Generator>& generators() const noexcept { return gens_; }
  const Generator& generator(std::size_t i) const { return gens_[i]; }
  int degree(std::size_t i) const { return gens_[i].degree; }
  const SparseMatrix& differential() const noexcept { return d_; }

  /// Indices of generators in degree d (a contiguous range).
  std::vector<std::size_t> indices_in_degree(int d) const;
  std::size_t dim_in_degree(int d) const;
  std::vector<int> degrees() const;
  std::optional<std::size_t> find(const std::string& id) const;

  /// The block d_d : C_d -> C_{d-1} with local indices.
  SparseMatrix differential_block(int d) const;

 private:
  FieldSpec field_;
  std::vector<Generator> gens_;
  SparseMatrix d_;
};

/// Degree-preserving map; matrix rows index target generators.
class ChainMap {
 public:
  ChainMap() = default;
  /// Validates that the map preserves degree and commutes with d.
  ChainMap(ChainComplex source, ChainComplex target, SparseMatrix matrix);

  static ChainMap identity(const ChainComplex& c);
  static ChainMap zero(const ChainComplex& s, const ChainComplex& t);

  const ChainComplex& source() const noexcept { return source_; }
  const ChainComplex& target() const noexcept { return target_; }
  const SparseMatrix& matrix() const noexcept { return m_; }
  /// Local-index block in degree d.
  SparseMatrix component(int d) const;

 private:
  ChainComplex source_;
  ChainComplex target_;
  SparseMatrix m_;
};

ChainMap compose(const ChainMap& g, const ChainMap& f);

struct HomologyCertification {
  bool finiteness_certified = true;
  std::optional<int> connectivity;  // least degree with nonzero homology
};

struct HomologyReport {
  std::map<int, std::size_t> dims;  // only nonzero entries are stored
  std::optional<std::map<int, std::vector<SparseVec>>> basis_witnesses;
  HomologyCertification certification;
  /// Degrees above this are outside the window where the report is exact.
  std::optional<int> exact_through;

  std::size_t dim(int d) const {
    auto it = dims.find(d);
    return it == dims.end() ? 0 : it->second;
  }
  bool is_zero() const { return dims.empty(); }
  std::string to_string() const;
};

HomologyReport homology(const ChainComplex& c, bool with_witnesses = false);
/// Homology dims restricted to degrees <= max_degree, flagged as exact there.
HomologyReport homology_through(const ChainComplex& c, int max_degree);
bool same_dims(const HomologyReport& a, const HomologyReport& b);

/// Euler characteristic of the chain groups.
long euler_characteristic(const ChainComplex& c);
long euler_characteristic(const HomologyReport& h);

/// Tensor product. Generators are pairs in lexicographic order within each
/// degree; d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy.
struct TensorProduct {
  ChainComplex complex;
  /// pair_index[i * dim(D) + j] = position of x_i ⊗ y_j in complex.
  std::vector<std::size_t> pair_index;
};
TensorProduct tensor(const ChainComplex& c, const ChainComplex& d);
/// Swap C⊗D -> D⊗C with Koszul sign (-1)^{|x||y|}.
ChainMap swap_map(const ChainComplex& c, const ChainComplex& d);
/// Tensor product of chain maps, Koszul sign (-1)^{|g||x|} is trivial for degree-0 maps.
ChainMap tensor(const ChainMap& f, const ChainMap& g);

/// Degree d becomes d + k; differential multiplied by (-1)^k.
ChainComplex shift(const ChainComplex& c, int k);

/// Mapping cone: cone_n = X_{n-1} ⊕ Y_n, d(x, y) = (-dx, f x + dy).
ChainComplex cone(const ChainMap& f);
bool is_quasi_iso(const ChainMap& f);

/// Generators of degree <= max_degree (a subcomplex).
ChainComplex truncate_above(const ChainComplex& c, int max_degree);
ChainComplex direct_sum(const ChainComplex& a, const ChainComplex& b);

/// Isomorphic complexes after relabelling bases in order (same degrees, same matrix).
bool identical_up_to_ids(const ChainComplex& a, const ChainComplex& b);

}  // namespace opk
