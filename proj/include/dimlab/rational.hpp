#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dimlab {

using Rational = mpq_class;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configured instance-size limit was exceeded; the caller should fall back
/// to a cheaper method or raise the limit.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied strategy broke its information contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// base^exponent for a small integer base; negative exponents give reciprocals.
Rational rational_pow(long base, int exponent);

/// num/den in lowest terms; throws InvalidArgument on a zero denominator.
Rational ratio(std::int64_t num, std::int64_t den);

/// 2^{-n}
Rational dyadic(int n);

/// base^exponent as a 64-bit integer, throwing on overflow.
std::int64_t int_pow(std::int64_t base, int exponent);

double to_double(const Rational& q);
std::string to_string(const Rational& q);

/// Exact square root when q is the square of a rational.
bool exact_sqrt(const Rational& q, Rational& root);

/// floor(q) as a GMP integer.
mpz_class floor_of(const Rational& q);

}  // namespace dimlab
