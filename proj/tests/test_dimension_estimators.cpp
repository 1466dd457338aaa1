#include <cmath>

#include "doctest.h"

#include "dimlab/cantor_example.hpp"
#include "dimlab/dimension_estimators.hpp"
#include "dimlab/packing.hpp"

using namespace dimlab;

namespace {

ResolutionNet three_points() {
  return ResolutionNet(SpaceDescriptor::unit_interval(), 8,
                       {Point::real(0), Point::real(Rational(1, 2)), Point::real(1)});
}

const double kLog2Over3 = std::log(2.0) / std::log(3.0);

}  // namespace

TEST_CASE("greedy packing with an explicit separation") {
  const auto net = three_points();
  const auto wide = max_packing_greedy_delta(net, Rational(2, 5));
  CHECK(wide.count == 3);
  const auto narrow = max_packing_greedy_delta(net, Rational(3, 5));
  CHECK(narrow.count == 2);
  REQUIRE(narrow.witness.size() == 2);
  CHECK(net.point(narrow.witness[0]).x == 0);
  CHECK(net.point(narrow.witness[1]).x == 1);
}

TEST_CASE("greedy equals exact on a Cantor net at n = 3") {
  const auto net = build_net(SpaceDescriptor::triadic_cantor(), 4);
  REQUIRE(net.size() <= 64);
  CHECK(max_packing_greedy(net, 3).count == max_packing_exact(net, 3).count);
}

TEST_CASE("exact packing examples") {
  const ResolutionNet single(SpaceDescriptor::unit_interval(), 5, {Point::real(Rational(1, 3))});
  CHECK(max_packing_exact(single, 2).count == 1);

  for (int n = 1; n <= 4; ++n) {
    // Interval grid at 2^{-(n+1)}: strict separation needs gaps of three grid steps.
    const auto net = build_net(SpaceDescriptor::unit_interval(), n + 1);
    CHECK(max_packing_exact(net, n).count == (std::size_t{1} << (n + 1)) / 3 + 1);
  }

  const ResolutionNet pair(SpaceDescriptor::unit_interval(), 5, {Point::real(0), Point::real(Rational(1, 8))});
  CHECK(max_packing_exact(pair, 3).count == 1);
  CHECK(max_packing_exact(pair, 4).count == 2);
}

TEST_CASE("packing witnesses are strictly separated and counts match") {
  for (const auto& sp : {SpaceDescriptor::unit_interval(), SpaceDescriptor::triadic_cantor(), SpaceDescriptor::harmonic_sequence()}) {
    const auto net = build_net(sp, 7);
    for (int n = 1; n <= 6; ++n) {
      const auto r = max_packing_greedy(net, n);
      REQUIRE(r.count == r.witness.size());
      for (std::size_t a = 0; a < r.witness.size(); ++a)
        for (std::size_t b = a + 1; b < r.witness.size(); ++b)
          REQUIRE(net.squared_distance(r.witness[a], r.witness[b]) > dyadic(n) * dyadic(n));
    }
  }
}

TEST_CASE("exact search refuses instances above the limit and greedy refuses coarse nets") {
  const auto net = build_net(SpaceDescriptor::unit_interval(), 7);
  CHECK(net.size() > 64);
  CHECK_THROWS_AS(max_packing_exact(net, 3), LimitExceeded);
  CHECK_THROWS_AS(max_packing_greedy(net, 7), InvalidArgument);
  const ResolutionNet empty(SpaceDescriptor::unit_interval(), 4, {});
  CHECK_THROWS_AS(max_packing_greedy(empty, 2), InvalidArgument);
}

TEST_CASE("sandwich: exact(n-1) <= greedy(n) and greedy(n) <= exact(n)") {
  for (const auto& sp : {SpaceDescriptor::unit_interval(), SpaceDescriptor::triadic_cantor(), SpaceDescriptor::harmonic_sequence()}) {
    const auto net = build_net(sp, 5);
    if (net.size() > 64) continue;
    for (int n = 1; n <= 4; ++n) {
      const auto g = max_packing_greedy(net, n).count;
      CHECK(g <= max_packing_exact(net, n).count);
      CHECK(max_packing_exact(net, n - 1).count <= g);
    }
  }
}

TEST_CASE("packing monotonicity in scale and under subsets") {
  const auto net = build_net(SpaceDescriptor::triadic_cantor(), 6);
  REQUIRE(net.size() <= 64);
  for (int n = 0; n < 5; ++n) CHECK(max_packing_exact(net, n).count <= max_packing_exact(net, n + 1).count);
  std::vector<std::size_t> half;
  for (std::size_t i = 0; i < net.size(); i += 2) half.push_back(i);
  const auto sub = net.subset(half);
  for (int n = 0; n <= 5; ++n) CHECK(max_packing_exact(sub, n).count <= max_packing_exact(net, n).count);
}

TEST_CASE("projection: the graph of a function packs at least as many points as its base") {
  // graph of the odd-digit function over a depth-6 Cantor net
  const auto base = build_net(SpaceDescriptor::triadic_cantor(), 4);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const Point p = base.point(i);
    pts.push_back(Point::real(p.x).with_fiber({eval(DigitFunction::OddDigits, p.digits)}));
  }
  const ResolutionNet graph(SpaceDescriptor::product_with_cube(SpaceDescriptor::unit_interval(), 1), 4, pts);
  for (int n = 0; n <= 3; ++n) CHECK(max_packing_exact(graph, n).count >= max_packing_exact(base, n).count);
}

TEST_CASE("maximum independent set on small graphs") {
  // 5-cycle: alpha = 2
  std::vector<std::uint64_t> c5(5, 0);
  for (int i = 0; i < 5; ++i) {
    const int j = (i + 1) % 5;
    c5[i] |= std::uint64_t{1} << j;
    c5[j] |= std::uint64_t{1} << i;
  }
  CHECK(maximum_independent_set(c5).size() == 2);
  CHECK(maximum_independent_set(std::vector<std::uint64_t>(7, 0)).size() == 7);
}

TEST_CASE("mesh counts on half-open squares") {
  for (int n = 0; n <= 3; ++n) {
    CHECK(mesh_count_2d({{0, 0}}, n) == 1);
    CHECK(mesh_count_2d({{0, 0}, {rational_pow(9, -n), 0}}, n) == 2);
  }
  const auto g = enumerate_graph(DigitFunction::OddDigits, 4);
  CHECK(mesh_count_2d(g.points, 1) == 8);
}

TEST_CASE("box dimension regression examples") {
  ScaleSeries s2;
  for (int n = 1; n <= 10; ++n) s2.add(n, std::uint64_t{1} << n);
  for (auto v : {Variant::FullFit, Variant::Liminf, Variant::Limsup}) {
    const auto e = box_dim_estimate(s2, v);
    CHECK(e.slope == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(box_dim_estimate(s2, Variant::FullFit).fit_r2 == doctest::Approx(1.0));

  ScaleSeries s9;
  s9.base = 9;
  for (int n = 1; n <= 6; ++n) s9.add(n, std::uint64_t{1} << (3 * n));
  CHECK(box_dim_estimate(s9, Variant::FullFit).slope == doctest::Approx(std::log(8.0) / std::log(9.0)).epsilon(1e-12));

  ScaleSeries sum;
  sum.base = 9;
  for (int n = 4; n <= 8; ++n) sum.add(n, closed_form_counts(n).sum.get_ui());
  CHECK(std::fabs(box_dim_estimate(sum, Variant::FullFit).slope - (0.5 + kLog2Over3)) <= 0.02);

  const auto e = box_dim_estimate(s2, Variant::Limsup);
  CHECK(e.n_min == 1);
  CHECK(e.n_max == 10);
  CHECK(e.variant == Variant::Limsup);
}

TEST_CASE("per-step tail rule agrees on exact power laws") {
  ScaleSeries s;
  for (int n = 3; n <= 9; ++n) s.add(n, std::uint64_t{1} << (2 * n));
  CHECK(box_dim_estimate(s, Variant::Liminf, TailRule::PerStep).slope == doctest::Approx(2.0));
}

TEST_CASE("regression input validation") {
  ScaleSeries s;
  s.add(1, 2);
  s.add(2, 4);
  CHECK_THROWS_AS(box_dim_estimate(s, Variant::FullFit), InvalidArgument);
  CHECK_THROWS_AS(s.add(2, 8), InvalidArgument);
  CHECK_THROWS_AS(s.add(3, 0), InvalidArgument);
  CHECK_THROWS_AS(parse_variant("median"), InvalidArgument);
}

TEST_CASE("localized upper box estimates") {
  SUBCASE("single piece equals the global fit") {
    const auto net = build_net(SpaceDescriptor::triadic_cantor(), 10);
    std::vector<Point> all;
    for (std::size_t i = 0; i < net.size(); ++i) all.push_back(net.point(i));
    const auto cover = make_cover(net.space(), {all});
    const auto loc = localized_upper_box(net, cover, 3, 9);
    CHECK(loc.value == doctest::Approx(box_dim_estimate(net_packing_series(net, 3, 9), Variant::FullFit).slope));
  }
  SUBCASE("interval halves") {
    const auto net = build_net(SpaceDescriptor::unit_interval(), 16);
    const auto loc = localized_upper_box(net, interval_split_cover(net, 2), 4, 10);
    CHECK(std::fabs(loc.value - 1.0) <= 0.05);
  }
  SUBCASE("Cantor halves by first digit") {
    const auto net = build_net(SpaceDescriptor::triadic_cantor(), 12);
    const auto loc = localized_upper_box(net, cantor_cylinder_cover(net, 1), 4, 11);
    CHECK(loc.piece_slopes.size() == 2);
    CHECK(std::fabs(loc.value - kLog2Over3) <= 0.05);
  }
  SUBCASE("empty pieces are skipped and counted") {
    const auto net = build_net(SpaceDescriptor::unit_interval(), 8);
    auto cover = interval_split_cover(net, 2);
    cover.pieces.push_back(CoverPiece{});
    const auto loc = localized_upper_box(net, cover, 3, 7);
    CHECK(loc.skipped == 1);
  }
}

TEST_CASE("recorded cover diameters equal the maximum pairwise distance") {
  const auto net = build_net(SpaceDescriptor::triadic_cantor(), 5);
  const auto cover = cantor_cylinder_cover(net, 2);
  for (const auto& piece : cover.pieces) {
    Rational best = 0;
    for (const auto& a : piece.points)
      for (const auto& b : piece.points) best = std::max<Rational>(best, metric_squared(net.space(), a, b));
    CHECK(piece.diameter_sq == best);
  }
}

TEST_CASE("Hausdorff content upper bounds") {
  const auto I = SpaceDescriptor::unit_interval();
  CHECK(hausdorff_content_upper(make_cover(I, {{Point::real(0), Point::real(1)}}), 0.5) == doctest::Approx(1.0));
  double prev = 2;
  for (int m = 1; m <= 10; ++m) {
    std::vector<std::vector<Point>> pieces;
    const Rational diam = rational_pow(3, -m);
    for (int k = 0; k < (1 << m); ++k) pieces.push_back({Point::real(ratio(k, 1 << m) / 2), Point::real(ratio(k, 1 << m) / 2 + diam)});
    const auto cover = make_cover(I, pieces);
    CHECK(hausdorff_content_upper(cover, kLog2Over3) == doctest::Approx(1.0).epsilon(1e-12));
    const double v = hausdorff_content_upper(cover, 0.7);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(hausdorff_content_upper(make_cover(I, {{Point::real(0)}}), -1), InvalidArgument);
}

TEST_CASE("discrete energy examples") {
  const auto I = SpaceDescriptor::unit_interval();
  const auto two = DiscreteMeasure::uniform(I, {Point::real(0), Point::real(1)});
  for (double s : {0.3, 1.0, 2.5}) CHECK(discrete_energy(two, s) == doctest::Approx(0.5));
  const auto close = DiscreteMeasure::uniform(I, {Point::real(0), Point::real(Rational(1, 2))});
  CHECK(discrete_energy(close, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(DiscreteMeasure::uniform(I, {Point::real(0), Point::real(0)}), InvalidArgument);
  DiscreteMeasure bad{I, {Point::real(0), Point::real(1)}, {Rational(1, 3), Rational(1, 3)}};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("Cantor energies are bounded below the critical exponent and grow above it") {
  std::vector<double> below, above;
  for (int m = 4; m <= 12; ++m) {
    const auto mu = cantor_natural_measure(m);
    below.push_back(discrete_energy(mu, 0.5));
    above.push_back(discrete_energy(mu, 0.75));
  }
  CHECK_FALSE(energy_sequence_divergent(below));
  CHECK(energy_sequence_divergent(above));
  // Successive increments shrink by exactly 3^s / 2, so the limit is a geometric tail.
  const double r = std::sqrt(3.0) / 2;
  for (std::size_t k = 2; k < below.size(); ++k)
    CHECK((below[k] - below[k - 1]) / (below[k - 1] - below[k - 2]) == doctest::Approx(r).epsilon(1e-3));
  const double tail = below.back() + (below.back() - below[below.size() - 2]) * r / (1 - r);
  CHECK(tail == doctest::Approx(6.63).epsilon(0.01));
  for (double v : below) CHECK(v < tail);
  CHECK(above.back() > 2 * above.front());
}

TEST_CASE("discrete energy is non-decreasing in s when distances are at most 1") {
  const auto mu = cantor_natural_measure(6);
  double prev = 0;
  for (int k = 1; k <= 20; ++k) {
    const double e = discrete_energy(mu, 0.1 * k);
    CHECK(e >= prev);
    prev = e;
  }
}

TEST_CASE("the grid evaluation agrees with single exponents") {
  const auto mu = interval_uniform_measure(5);
  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto e = discrete_energy_grid(mu, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(e[k] == doctest::Approx(discrete_energy(mu, grid[k])).epsilon(1e-10));
}

TEST_CASE("energy-dimension profiles") {
  std::vector<double> grid;
  for (int k = 1; k <= 30; ++k) grid.push_back(0.05 * k);
  std::vector<int> depths{4, 5, 6, 7, 8, 9, 10};
  SUBCASE("Cantor measure brackets log2/log3") {
    const auto p = energy_dimension_profile(cantor_natural_measure, depths, grid);
    CHECK(std::fabs(p.estimate - kLog2Over3) <= 0.05);
    CHECK(p.bracket_lo <= p.estimate);
    CHECK(p.bracket_hi > p.estimate);
  }
  SUBCASE("interval grids give a critical exponent near 1") {
    const auto p = energy_dimension_profile(interval_uniform_measure, depths, grid);
    CHECK(std::fabs(p.estimate - 1.0) <= 0.1);
  }
  SUBCASE("single-atom family is flagged at the 0 boundary") {
    const auto p = energy_dimension_profile(
        [](int) { return DiscreteMeasure::uniform(SpaceDescriptor::unit_interval(), {Point::real(0)}); }, depths, grid);
    CHECK(p.boundary);
    CHECK(p.estimate == 0);
    CHECK_FALSE(p.flag.empty());
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(energy_dimension_profile(cantor_natural_measure, {4, 5, 6}, grid), InvalidArgument);
    CHECK_THROWS_AS(energy_dimension_profile(cantor_natural_measure, depths, {0.1, 0.2, 0.3}), InvalidArgument);
  }
}
