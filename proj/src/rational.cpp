#include "dimlab/rational.hpp"

#include <limits>

namespace dimlab {

Rational rational_pow(long base, int exponent) {
  if (base == 0 && exponent <= 0) throw InvalidArgument("rational_pow: 0 to a non-positive power");
  mpz_class p;
  unsigned e = static_cast<unsigned>(exponent < 0 ? -exponent : exponent);
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(base < 0 ? -base : base), e);
  if (base < 0 && (e % 2 == 1)) p = -p;
  Rational r = exponent < 0 ? Rational(mpz_class(1), p) : Rational(p);
  r.canonicalize();
  return r;
}

Rational ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InvalidArgument("ratio: zero denominator");
  Rational r{mpz_class(std::to_string(num)), mpz_class(std::to_string(den))};
  r.canonicalize();
  return r;
}

Rational dyadic(int n) { return rational_pow(2, -n); }

std::int64_t int_pow(std::int64_t base, int exponent) {
  if (exponent < 0) throw InvalidArgument("int_pow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (base != 0 && r > std::numeric_limits<std::int64_t>::max() / base)
      throw LimitExceeded("int_pow: 64-bit overflow");
    r *= base;
  }
  return r;
}

double to_double(const Rational& q) { return q.get_d(); }

std::string to_string(const Rational& q) { return q.get_str(); }

bool exact_sqrt(const Rational& q, Rational& root) {
  if (sgn(q) < 0) return false;
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return false;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  root = Rational(rn, rd);
  root.canonicalize();
  return true;
}

mpz_class floor_of(const Rational& q) {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

}  // namespace dimlab
