#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dimlab/dimension_estimators.hpp"
#include "dimlab/metric_spaces.hpp"

namespace dimlab {

/// f reads the odd-position digits, g the even-position digits, Sum is f+g:
/// for x = sum a_i 3^{-i}, f(x) = sum a_{2i-1} 3^{-i} and g(x) = sum a_{2i} 3^{-i}.
enum class DigitFunction { OddDigits, EvenDigits, Sum };

const char* function_name(DigitFunction fn);
DigitFunction parse_function(const std::string& s);

Rational eval(DigitFunction fn, const DigitVector& digits);

struct GraphEnumeration {
  int depth = 0;
  bool closure = false;
  std::vector<PlanarPoint> points;
};

constexpr int kDefaultEnumerationLimit = 24;

/// Graph points (x, h(x)) for all 2^D digit vectors of length D, in increasing
/// x order. With `closure` set, each length-D cylinder also contributes the
/// point whose digits after position D are all 1 (its right end), so the
/// result meets exactly the mesh squares met by the graph over the whole
/// Cantor set once D resolves the mesh.
GraphEnumeration enumerate_graph(DigitFunction fn, int depth, bool closure = false,
                                 int limit = kDefaultEnumerationLimit);

/// M_n of the graph over the full Cantor set at mesh 9^{-n}, by streaming all
/// depth-4n cylinders in integer arithmetic.
std::uint64_t brute_force_mesh_count(DigitFunction fn, int n, int limit = kDefaultEnumerationLimit);

struct ClosedFormCounts {
  mpz_class f;
  mpz_class g;
  mpz_class sum;
};

/// (2^{3n}, 2^{3n}, 2^{2n}(3^n + 1)).
ClosedFormCounts closed_form_counts(int n);

/// For every depth-2n prefix, the depth-4n extensions of (f+g) hit every
/// 3^{-2n} cell of [(f+g)(x_h), (f+g)(x_h) + 3^{-n}).
bool surjectivity_check(int n, int limit = kDefaultEnumerationLimit);

/// Base-9 mesh-count series of the graph for n in [n_lo, n_hi].
ScaleSeries mesh_series(DigitFunction fn, int n_lo, int n_hi, int limit = kDefaultEnumerationLimit);

}  // namespace dimlab
