#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace opk {

using Scalar = mpq_class;

/// Coefficient field: the rationals, or F_p for a prime p.
///
/// Elements of F_p are stored as integral Scalars in [0, p). Every arithmetic
/// helper returns a normalized value, so code written against FieldSpec works
/// unchanged for both kinds.
class FieldSpec {
 public:
  enum class Kind { Rationals, PrimeField };

  FieldSpec() = default;

  static FieldSpec rationals() { return FieldSpec(); }
  static FieldSpec prime(std::int64_t p);

  Kind kind() const noexcept { return kind_; }
  std::int64_t characteristic() const noexcept { return p_; }
  bool is_rational() const noexcept { return kind_ == Kind::Rationals; }

  /// True when n! is a unit, i.e. Σ_n-averaging is available.
  bool factorial_invertible(int n) const noexcept { return is_rational() || n < p_; }

  Scalar normalize(const Scalar& x) const;
  Scalar add(const Scalar& a, const Scalar& b) const { return normalize(a + b); }
  Scalar sub(const Scalar& a, const Scalar& b) const { return normalize(a - b); }
  Scalar mul(const Scalar& a, const Scalar& b) const { return normalize(a * b); }
  Scalar neg(const Scalar& a) const { return normalize(-a); }
  Scalar inv(const Scalar& a) const;
  Scalar div(const Scalar& a, const Scalar& b) const { return mul(a, inv(b)); }

  std::string name() const;
  static FieldSpec parse(const std::string& text);

  friend bool operator==(const FieldSpec& a, const FieldSpec& b) {
    return a.kind_ == b.kind_ && a.p_ == b.p_;
  }

 private:
  Kind kind_ = Kind::Rationals;
  std::int64_t p_ = 0;
};

std::string scalar_to_string(const Scalar& x);
Scalar scalar_from_string(const std::string& s);

inline Scalar sign_scalar(bool negative) { return negative ? Scalar(-1) : Scalar(1); }

}  // namespace opk
