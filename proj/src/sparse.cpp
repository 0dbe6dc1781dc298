#include "opk/sparse.hpp"

#include <algorithm>

#include "opk/error.hpp"

namespace opk {

Scalar SparseVec::at(std::size_t i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const Entry& e, std::size_t k) { return e.first < k; });
  if (it != entries_.end() && it->first == i) return it->second;
  return Scalar(0);
}

void SparseVec::axpy(const Scalar& c, const SparseVec& other, const FieldSpec& f) {
  if (c == 0 || other.empty()) return;
  std::vector<Entry> out;
  out.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      out.push_back(std::move(*a));
      ++a;
    } else if (a == entries_.end() || b->first < a->first) {
      Scalar v = f.mul(c, b->second);
      if (v != 0) out.emplace_back(b->first, std::move(v));
      ++b;
    } else {
      Scalar v = f.add(a->second, f.mul(c, b->second));
      if (v != 0) out.emplace_back(a->first, std::move(v));
      ++a;
      ++b;
    }
  }
  entries_ = std::move(out);
}

void SparseVec::scale(const Scalar& c, const FieldSpec& f) {
  if (c == 0) {
    entries_.clear();
    return;
  }
  for (auto& e : entries_) e.second = f.mul(e.second, c);
}

SparseVec VecBuilder::finish(const FieldSpec& f) const {
  SparseVec v;
  for (const auto& [i, x] : acc_) {
    Scalar y = f.normalize(x);
    if (y != 0) v.push_back(i, std::move(y));
  }
  return v;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         const std::vector<std::tuple<std::size_t, std::size_t, Scalar>>& t,
                                         const FieldSpec& f) {
  std::vector<std::map<std::size_t, Scalar>> tmp(cols);
  for (const auto& [r, c, x] : t) {
    if (r >= rows || c >= cols)
      throw Error(ErrorCode::IndexOutOfRange, "matrix entry (" + std::to_string(r) + "," + std::to_string(c) +
                                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    Scalar y = f.normalize(x);
    if (y == 0) throw Error(ErrorCode::InvalidInput, "stored zero entry in sparse matrix");
    if (!tmp[c].emplace(r, y).second) throw Error(ErrorCode::InvalidInput, "duplicate sparse matrix entry");
  }
  SparseMatrix m(rows, cols);
  for (std::size_t c = 0; c < cols; ++c)
    for (auto& [r, x] : tmp[c]) m.data_[c].push_back(r, x);
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.data_[i] = SparseVec::unit(i);
  return m;
}

std::size_t SparseMatrix::nnz() const {
  std::size_t n = 0;
  for (const auto& c : data_) n += c.size();
  return n;
}

bool SparseMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const SparseVec& v) { return v.empty(); });
}

std::vector<std::tuple<std::size_t, std::size_t, Scalar>> SparseMatrix::triplets() const {
  std::vector<std::tuple<std::size_t, std::size_t, Scalar>> out;
  for (std::size_t c = 0; c < cols_; ++c)
    for (const auto& [r, x] : data_[c]) out.emplace_back(r, c, x);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  return out;
}

SparseVec SparseMatrix::apply(const SparseVec& v, const FieldSpec& f) const {
  VecBuilder b;
  for (const auto& [i, x] : v) b.add(data_[i], x);
  return b.finish(f);
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c)
    for (const auto& [r, x] : data_[c]) t.data_[r].push_back(c, x);
  return t;
}

SparseMatrix SparseMatrix::select_cols(const std::vector<std::size_t>& cols) const {
  SparseMatrix m(rows_, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) m.data_[j] = data_[cols[j]];
  return m;
}

SparseMatrix SparseMatrix::select(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const {
  std::map<std::size_t, std::size_t> rmap;
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = i;
  SparseMatrix m(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::vector<SparseVec::Entry> tmp;
    for (const auto& [r, x] : data_[cols[j]]) {
      auto it = rmap.find(r);
      if (it != rmap.end()) tmp.emplace_back(it->second, x);
    }
    std::sort(tmp.begin(), tmp.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [r, x] : tmp) m.data_[j].push_back(r, x);
  }
  return m;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::InvalidInput, "matrix product dimension mismatch");
  SparseMatrix m(a.rows_, b.cols_);
  for (std::size_t c = 0; c < b.cols_; ++c) m.data_[c] = a.apply(b.data_[c], f);
  return m;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::InvalidInput, "matrix sum dimension mismatch");
  SparseMatrix m = a;
  for (std::size_t c = 0; c < a.cols_; ++c) m.data_[c].axpy(1, b.data_[c], f);
  return m;
}

SparseMatrix scale(const SparseMatrix& a, const Scalar& c, const FieldSpec& f) {
  SparseMatrix m = a;
  for (auto& col : m.data_) col.scale(c, f);
  return m;
}

SparseMatrix direct_sum(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
  for (std::size_t c = 0; c < a.cols(); ++c) m.set_col(c, a.col(c));
  for (std::size_t c = 0; c < b.cols(); ++c) {
    SparseVec v;
    for (const auto& [r, x] : b.col(c)) v.push_back(r + a.rows(), x);
    m.set_col(a.cols() + c, std::move(v));
  }
  return m;
}

SparseMatrix kronecker(const SparseMatrix& a, const SparseMatrix& b, const FieldSpec& f) {
  SparseMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      SparseVec v;
      for (const auto& [ri, x] : a.col(i))
        for (const auto& [rj, y] : b.col(j)) v.push_back(ri * b.rows() + rj, f.mul(x, y));
      m.set_col(i * b.cols() + j, std::move(v));
    }
  return m;
}

SparseVec Echelon::reduce(SparseVec v) const {
  std::size_t from = 0;
  while (true) {
    bool changed = false;
    for (const auto& [i, x] : v) {
      if (i < from) continue;
      auto it = pivots_.find(i);
      if (it == pivots_.end()) continue;
      Scalar c = field_.neg(x);
      from = i + 1;
      v.axpy(c, it->second, field_);
      changed = true;
      break;
    }
    if (!changed) return v;
  }
}

bool Echelon::insert(SparseVec v) {
  v = reduce(std::move(v));
  if (v.empty()) return false;
  Scalar lead = v.front().second;
  v.scale(field_.inv(lead), field_);
  std::size_t p = v.front().first;
  pivots_.emplace(p, std::move(v));
  return true;
}

std::size_t rank(const SparseMatrix& m, const FieldSpec& f) {
  Echelon e(f);
  for (std::size_t c = 0; c < m.cols(); ++c) e.insert(m.col(c));
  return e.rank();
}

std::size_t rank_of_columns(const SparseMatrix& m, const std::vector<std::size_t>& cols, const FieldSpec& f) {
  Echelon e(f);
  for (auto c : cols) e.insert(m.col(c));
  return e.rank();
}

RowEchelon rref(const SparseMatrix& m, const FieldSpec& f) {
  SparseMatrix t = m.transpose();  // columns of t are rows of m
  std::map<std::size_t, SparseVec> piv;
  for (std::size_t r = 0; r < t.cols(); ++r) {
    SparseVec v = t.col(r);
    // reduce against existing pivots
    std::size_t from = 0;
    while (true) {
      bool changed = false;
      for (const auto& [i, x] : v) {
        if (i < from) continue;
        auto it = piv.find(i);
        if (it == piv.end()) continue;
        Scalar c = f.neg(x);
        from = i + 1;
        v.axpy(c, it->second, f);
        changed = true;
        break;
      }
      if (!changed) break;
    }
    if (v.empty()) continue;
    v.scale(f.inv(v.front().second), f);
    std::size_t p = v.front().first;
    piv.emplace(p, std::move(v));
  }
  // back substitution, largest pivot first
  for (auto it = piv.rbegin(); it != piv.rend(); ++it) {
    std::size_t p = it->first;
    for (auto& [q, w] : piv) {
      if (q >= p) break;
      Scalar x = w.at(p);
      if (x != 0) w.axpy(f.neg(x), it->second, f);
    }
  }
  RowEchelon out;
  for (auto& [p, w] : piv) {
    out.pivot_cols.push_back(p);
    out.rows.push_back(std::move(w));
  }
  return out;
}

std::vector<SparseVec> nullspace(const SparseMatrix& m, const FieldSpec& f) {
  RowEchelon re = rref(m, f);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : re.pivot_cols) is_pivot[p] = true;
  std::vector<SparseVec> out;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (is_pivot[j]) continue;
    VecBuilder b;
    b.add(j, 1);
    for (std::size_t k = 0; k < re.rows.size(); ++k) {
      Scalar x = re.rows[k].at(j);
      if (x != 0) b.add(re.pivot_cols[k], -x);
    }
    out.push_back(b.finish(f));
  }
  return out;
}

}  // namespace opk
