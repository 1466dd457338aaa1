#include <cmath>
#include <set>

#include "doctest.h"

#include "dimlab/cantor_example.hpp"

using namespace dimlab;

namespace {

DigitVector digits(std::initializer_list<int> d) {
  DigitVector v;
  for (int x : d) v.digits.push_back(static_cast<std::uint8_t>(x));
  return v;
}

}  // namespace

TEST_CASE("evaluating the digit functions") {
  CHECK(eval(DigitFunction::OddDigits, digits({1, 0, 1, 0})) == Rational(4, 9));
  CHECK(eval(DigitFunction::EvenDigits, digits({1, 0, 1, 0})) == 0);
  CHECK(eval(DigitFunction::Sum, digits({1, 1})) == Rational(2, 3));
  CHECK_THROWS_AS(eval(DigitFunction::OddDigits, DigitVector{}), InvalidArgument);
}

TEST_CASE("sum equals f plus g for every digit vector up to depth 12") {
  for (std::size_t depth = 1; depth <= 12; ++depth)
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << depth); ++c) {
      const auto v = DigitVector::from_code(c, depth);
      REQUIRE(eval(DigitFunction::Sum, v) == eval(DigitFunction::OddDigits, v) + eval(DigitFunction::EvenDigits, v));
    }
}

TEST_CASE("graph enumeration examples") {
  const auto f1 = enumerate_graph(DigitFunction::OddDigits, 1);
  REQUIRE(f1.points.size() == 2);
  CHECK(f1.points[0] == PlanarPoint{0, 0});
  CHECK(f1.points[1] == PlanarPoint{Rational(1, 3), Rational(1, 3)});

  // Digits (a1, a2) in code order 00, 01, 10, 11; g reads the second digit.
  const auto g2 = enumerate_graph(DigitFunction::EvenDigits, 2);
  REQUIRE(g2.points.size() == 4);
  CHECK(g2.points[0] == PlanarPoint{0, 0});
  CHECK(g2.points[1] == PlanarPoint{Rational(1, 9), Rational(1, 3)});
  CHECK(g2.points[2] == PlanarPoint{Rational(1, 3), 0});
  CHECK(g2.points[3] == PlanarPoint{Rational(4, 9), Rational(1, 3)});

  const auto s2 = enumerate_graph(DigitFunction::Sum, 2);
  std::multiset<Rational> ys;
  for (const auto& p : s2.points) ys.insert(p.second);
  CHECK(ys == std::multiset<Rational>{0, Rational(1, 3), Rational(1, 3), Rational(2, 3)});
}

TEST_CASE("graph enumeration size, range and refusal") {
  const auto g = enumerate_graph(DigitFunction::Sum, 10);
  CHECK(g.points.size() == 1024);
  for (const auto& [x, y] : g.points) {
    CHECK(x >= 0);
    CHECK(x <= 1);
    CHECK(y >= 0);
    CHECK(y <= 1);
  }
  CHECK(enumerate_graph(DigitFunction::OddDigits, 3, true).points.size() == 16);
  CHECK_THROWS_AS(enumerate_graph(DigitFunction::OddDigits, 25), LimitExceeded);
  CHECK_THROWS_AS(enumerate_graph(DigitFunction::OddDigits, -1), InvalidArgument);
}

TEST_CASE("closed-form counts") {
  const auto c1 = closed_form_counts(1);
  CHECK(c1.f == 8);
  CHECK(c1.g == 8);
  CHECK(c1.sum == 16);
  const auto c2 = closed_form_counts(2);
  CHECK(c2.f == 64);
  CHECK(c2.sum == 160);
  const auto c3 = closed_form_counts(3);
  CHECK(c3.f == 512);
  CHECK(c3.g == 512);
  CHECK(c3.sum == 1792);
  CHECK_THROWS_AS(closed_form_counts(0), InvalidArgument);
}

TEST_CASE("brute-force mesh counts equal the closed forms for n <= 4") {
  for (int n = 1; n <= 4; ++n) {
    const auto cf = closed_form_counts(n);
    CHECK(brute_force_mesh_count(DigitFunction::OddDigits, n) == cf.f.get_ui());
    CHECK(brute_force_mesh_count(DigitFunction::EvenDigits, n) == cf.g.get_ui());
    CHECK(brute_force_mesh_count(DigitFunction::Sum, n) == cf.sum.get_ui());
  }
  CHECK_THROWS_AS(brute_force_mesh_count(DigitFunction::Sum, 7), LimitExceeded);
}

TEST_CASE("streaming count agrees with explicit mesh counting of the closed graph") {
  for (int n = 1; n <= 2; ++n)
    for (auto fn : {DigitFunction::OddDigits, DigitFunction::EvenDigits, DigitFunction::Sum}) {
      const auto g = enumerate_graph(fn, 4 * n, true);
      CHECK(mesh_count_2d(g.points, n) == brute_force_mesh_count(fn, n));
    }
}

TEST_CASE("the top cell is reached: the closed graph of f+g meets row 3^n above each prefix") {
  // With the endpoints added the count is 2^{2n}(3^n + 1); without them one row per prefix is lost.
  for (int n = 1; n <= 2; ++n) {
    const auto open = enumerate_graph(DigitFunction::Sum, 4 * n, false);
    CHECK(mesh_count_2d(open.points, n) < closed_form_counts(n).sum.get_ui());
  }
}

TEST_CASE("surjectivity of f+g on depth-2n prefixes") {
  CHECK(surjectivity_check(0));
  CHECK(surjectivity_check(1));
  CHECK(surjectivity_check(2));
  CHECK(surjectivity_check(3));
}

TEST_CASE("mesh series slopes and the dimension gap over n in [2,6]") {
  const auto f = mesh_series(DigitFunction::OddDigits, 2, 6);
  const auto s = mesh_series(DigitFunction::Sum, 2, 6);
  CHECK(f.base == 9);
  const double sf = box_dim_estimate(f, Variant::FullFit).slope;
  const double ss = box_dim_estimate(s, Variant::FullFit).slope;
  CHECK(sf == doctest::Approx(std::log(8.0) / std::log(9.0)).epsilon(1e-9));
  CHECK(ss - sf >= 0.15);
}

TEST_CASE("parsing function names") {
  CHECK(parse_function("f") == DigitFunction::OddDigits);
  CHECK(parse_function("g") == DigitFunction::EvenDigits);
  CHECK(parse_function("f+g") == DigitFunction::Sum);
  CHECK_THROWS_AS(parse_function("h"), InvalidArgument);
  CHECK(std::string(function_name(DigitFunction::Sum)) == "f+g");
}
