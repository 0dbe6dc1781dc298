#include "opk/field.hpp"

#include "opk/error.hpp"

namespace opk {

namespace {

bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

}  // namespace

FieldSpec FieldSpec::prime(std::int64_t p) {
  if (!is_prime(p)) throw Error(ErrorCode::InvalidInput, "field characteristic " + std::to_string(p) + " is not prime");
  FieldSpec f;
  f.kind_ = Kind::PrimeField;
  f.p_ = p;
  return f;
}

Scalar FieldSpec::normalize(const Scalar& x) const {
  if (kind_ == Kind::Rationals) {
    Scalar y = x;
    y.canonicalize();
    return y;
  }
  mpz_class p(static_cast<long>(p_));
  mpz_class num = x.get_num() % p;
  if (num < 0) num += p;
  mpz_class den = x.get_den() % p;
  if (den < 0) den += p;
  if (den == 0) throw Error(ErrorCode::InvalidInput, "denominator divisible by field characteristic");
  mpz_class dinv;
  mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
  mpz_class r = (num * dinv) % p;
  return Scalar(r);
}

Scalar FieldSpec::inv(const Scalar& a) const {
  Scalar n = normalize(a);
  if (n == 0) throw Error(ErrorCode::InvalidInput, "division by zero");
  if (kind_ == Kind::Rationals) return Scalar(1) / n;
  mpz_class p(static_cast<long>(p_));
  mpz_class r;
  mpz_invert(r.get_mpz_t(), n.get_num().get_mpz_t(), p.get_mpz_t());
  return Scalar(r);
}

std::string FieldSpec::name() const {
  if (kind_ == Kind::Rationals) return "Q";
  return "Fp:" + std::to_string(p_);
}

FieldSpec FieldSpec::parse(const std::string& text) {
  if (text == "Q" || text == "q") return rationals();
  auto colon = text.find(':');
  if (colon != std::string::npos && (text.substr(0, colon) == "Fp" || text.substr(0, colon) == "F")) {
    try {
      return prime(std::stoll(text.substr(colon + 1)));
    } catch (const std::invalid_argument&) {
    }
  }
  throw Error(ErrorCode::ConfigError, "unrecognised field '" + text + "' (expected Q or Fp:p)");
}

std::string scalar_to_string(const Scalar& x) { return x.get_str(); }

Scalar scalar_from_string(const std::string& s) {
  try {
    Scalar x(s);
    x.canonicalize();
    return x;
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidInput, "bad scalar '" + s + "'");
  }
}

}  // namespace opk
