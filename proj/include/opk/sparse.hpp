#pragma once

#include <cstddef>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "opk/field.hpp"

namespace opk {

/// Sparse vector: (index, nonzero value) pairs sorted by index.
class SparseVec {
 public:
  using Entry = std::pair<std::size_t, Scalar>;

  SparseVec() = default;

  static SparseVec unit(std::size_t i, Scalar value = 1) {
    SparseVec v;
    if (value != 0) v.entries_.emplace_back(i, std::move(value));
    return v;
  }

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  Scalar at(std::size_t i) const;
  const Entry& front() const { return entries_.front(); }
  const Entry& back() const { return entries_.back(); }

  /// this += c * other.
  void axpy(const Scalar& c, const SparseVec& other, const FieldSpec& f);
  void scale(const Scalar& c, const FieldSpec& f);
  /// Appends an entry; caller guarantees increasing indices.
  void push_back(std::size_t i, Scalar value) { entries_.emplace_back(i, std::move(value)); }

  friend bool operator==(const SparseVec& a, const SparseVec& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Accumulates scattered contributions, then emits a sorted SparseVec.
class VecBuilder {
 public:
  void add(std::size_t i, const Scalar& c) {
    if (c == 0) return;
    acc_[i] += c;
  }
  void add(const SparseVec& v, const Scalar& c = 1) {
    for (const auto& [i, x] : v) add(i, x * c);
  }
  SparseVec finish(const FieldSpec& f) const;
  bool empty() const { return acc_.empty(); }

 private:
  std::map<std::size_t, Scalar> acc_;
};

/// Column-major sparse matrix over a field. Column c is the image of basis
/// vector c.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(cols) {}

  /// Builds from (row, col, value) triplets; rejects duplicates and stored zeros.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    const std::vector<std::tuple<std::size_t, std::size_t, Scalar>>& t,
                                    const FieldSpec& f);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zero(std::size_t rows, std::size_t cols) { return SparseMatrix(rows, cols); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const SparseVec& col(std::size_t c) const { return data_[c]; }
  void set_col(std::size_t c, SparseVec v) { data_[c] = std::move(v); }

  Scalar at(std::size_t r, std::size_t c) const { return data_[c].at(r); }
  std::size_t nnz() const;
  bool is_zero() const;
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> triplets() const;

  SparseVec apply(const SparseVec& v, const FieldSpec& f) const;
  SparseMatrix transpose() const;
  SparseMatrix select_cols(const std::vector<std::size_t>& cols) const;
  SparseMatrix select(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const;

  friend SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f);
  friend SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f);
  friend SparseMatrix scale(const SparseMatrix& a, const Scalar& c, const FieldSpec& f);
  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<SparseVec> data_;
};

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f);
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f);
SparseMatrix scale(const SparseMatrix& a, const Scalar& c, const FieldSpec& f);
/// Block-diagonal direct sum.
SparseMatrix direct_sum(const SparseMatrix& a, const SparseMatrix& b);
/// Kronecker product with rows/cols in lexicographic pair order (i * dim_b + j).
SparseMatrix kronecker(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f);

/// Incremental column echelon form: vectors are reduced against stored pivots
/// (pivot = leading index). Used for ranks, spans and membership tests.
class Echelon {
 public:
  explicit Echelon(FieldSpec f) : field_(std::move(f)) {}

  /// Reduces v in place against the stored basis; returns true if it was new
  /// (and stores it).
  bool insert(SparseVec v);
  SparseVec reduce(SparseVec v) const;
  bool contains(const SparseVec& v) const { return reduce(v).empty(); }
  std::size_t rank() const noexcept { return pivots_.size(); }

 private:
  FieldSpec field_;
  std::map<std::size_t, SparseVec> pivots_;  // leading index -> vector with leading coeff 1
};

std::size_t rank(const SparseMatrix& m, const FieldSpec& f);
std::size_t rank_of_columns(const SparseMatrix& m, const std::vector<std::size_t>& cols, const FieldSpec& f);

/// Reduced row echelon form. Returns the pivot columns and the nonzero rows
/// (each row a SparseVec over column indices). m = m[:, pivots] * R.
struct RowEchelon {
  std::vector<std::size_t> pivot_cols;
  std::vector<SparseVec> rows;
};
RowEchelon rref(const SparseMatrix& m, const FieldSpec& f);

/// Basis of the kernel of m, as vectors over the column index space.
std::vector<SparseVec> nullspace(const SparseMatrix& m, const FieldSpec& f);

}  // namespace opk
