#include <cmath>
#include <set>

#include "doctest.h"

#include "dimlab/packing.hpp"
#include "dimlab/prevalence_witness.hpp"

using namespace dimlab;

namespace {

const std::vector<LayerSpec>& cantor_layers() {
  static const auto layers = build_layers(SpaceDescriptor::triadic_cantor(), 7, 1);
  return layers;
}

Rational gap(const Point& a, const Point& b) { return abs(a.x - b.x); }

}  // namespace

TEST_CASE("grid examples") {
  const auto L5 = build_layer(SpaceDescriptor::triadic_cantor(), 5, 1);
  REQUIRE(L5.s_n == 2);
  CHECK(L5.grid[0] == Vec{0});
  CHECK(L5.grid[1] == Vec{Rational(1, 4)});

  const auto L3 = build_layer(SpaceDescriptor::unit_interval(), 3, 1);
  CHECK(L3.s_n == 1);
  CHECK(L3.grid[0] == Vec{0});
  CHECK(L3.m_n == 1);
  CHECK(L3.ell_n == 1);
}

TEST_CASE("k_5 on the Cantor set is the exact packing count and m_5 follows") {
  const auto& L5 = cantor_layers()[4];
  const auto net = build_net(SpaceDescriptor::triadic_cantor(), 6);
  REQUIRE(net.size() <= 64);
  CHECK(L5.k_n == max_packing_exact(net, 5).count);
  CHECK(L5.k_method == PackingMethod::Exact);
  // smallest m with (1/2)^m <= 1/(2 k 32)
  std::uint64_t m = 1;
  while (std::ldexp(1.0, -static_cast<int>(m)) > 1.0 / (2.0 * static_cast<double>(L5.k_n) * 32)) ++m;
  CHECK(L5.m_n == m);
  CHECK(L5.ell_n == 2 * m);
}

TEST_CASE("replication exponent is minimal") {
  for (std::size_t s : {2, 3, 5})
    for (std::size_t k : {1, 4, 9})
      for (int n : {3, 5, 8}) {
        const auto m = replication_exponent(s, k, n);
        const Rational q = 1 - Rational(1, static_cast<long>(s));
        const Rational target(1, static_cast<long>(s * k) << n);
        Rational pm = 1;
        for (std::uint64_t i = 0; i < m; ++i) pm *= q;
        CHECK(pm <= target);
        CHECK(pm / q > target);
      }
  CHECK(replication_exponent(1, 3, 4) == 1);
  CHECK_THROWS_AS(replication_exponent(0, 1, 1), InvalidArgument);
}

TEST_CASE("layer invariants on built Cantor and interval layers") {
  for (const auto& layers : {cantor_layers(), build_layers(SpaceDescriptor::unit_interval(), 6, 2)}) {
    std::set<Rational> seen;
    for (const auto& L : layers) {
      const Rational delta = dyadic(L.n);
      // grid is a 2^{-n+2}-packing with coordinates at most 8 n^{-2}
      for (std::size_t a = 0; a < L.grid.size(); ++a) {
        for (const auto& c : L.grid[a]) CHECK(c <= ratio(8, L.n * L.n));
        for (std::size_t b = a + 1; b < L.grid.size(); ++b) {
          Rational sq = 0;
          for (int k = 0; k < L.d; ++k) sq += (L.grid[a][k] - L.grid[b][k]) * (L.grid[a][k] - L.grid[b][k]);
          CHECK(sq >= 16 * delta * delta);
        }
      }
      CHECK(L.s_n == static_cast<std::size_t>(std::pow(grid_extent(L.n) + 1, L.d)));
      // packing gap >= 2^{-n} + 3 eps
      for (std::size_t a = 0; a < L.packing_points.size(); ++a)
        for (std::size_t b = a + 1; b < L.packing_points.size(); ++b)
          CHECK(gap(L.packing_points[a], L.packing_points[b]) >= delta + 3 * L.eps_n);
      // satellites sit in the eps-ball, distinct clusters are > 2^{-n} + eps apart, layers are disjoint
      REQUIRE(L.satellites.size() == L.k_n);
      for (std::size_t k = 0; k < L.k_n; ++k) {
        REQUIRE(L.satellites[k].size() == L.ell_n);
        for (const auto& p : L.satellites[k]) {
          CHECK(gap(p, L.packing_points[k]) < L.eps_n);
          CHECK(seen.insert(p.x).second);
        }
      }
      for (std::size_t k = 0; k + 1 < L.k_n; ++k)
        for (const auto& p : L.satellites[k])
          for (const auto& q : L.satellites[k + 1]) CHECK(gap(p, q) >= delta + L.eps_n);
      CHECK(sgn(L.bump_radius) > 0);
      CHECK(L.bump_radius < L.eps_n);
    }
  }
}

TEST_CASE("sampling is reproducible and trivial layers are deterministic") {
  const auto& layers = cantor_layers();
  const auto a = sample_witness(layers, 42);
  const auto b = sample_witness(layers, 42);
  CHECK(a.choice == b.choice);
  for (const auto& v : a.choice[2]) CHECK(v == 0);  // s_3 = 1
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("layer-5 values are uniform on the two grid points") {
  const auto& layers = cantor_layers();
  std::size_t zeros = 0;
  const std::size_t trials = 10000;
  for (std::size_t t = 0; t < trials; ++t) zeros += sample_witness(layers, derive_seed(9, t)).choice[4][0] == 0;
  CHECK(std::fabs(static_cast<double>(zeros) / trials - 0.5) <= 0.02);
}

TEST_CASE("witness values at satellites, on earlier layers and their bounds") {
  const auto& layers = cantor_layers();
  const auto sample = sample_witness(layers, 5);
  for (int n = 1; n <= 7; ++n) {
    const auto& L = layers[static_cast<std::size_t>(n - 1)];
    for (std::size_t k = 0; k < L.k_n; k += 3)
      for (std::size_t i = 0; i < L.ell_n; ++i) {
        const Point& x = L.satellites[k][i];
        const Vec only = eval_witness({layers.begin() + n - 1, layers.begin() + n}, WitnessSample{5, {sample.choice[n - 1]}}, x, 1);
        CHECK(only == L.grid[sample.choice[n - 1][i]]);
        // later layers vanish on this satellite
        const Vec upto = eval_witness(layers, sample, x, n);
        const Vec all = eval_witness(layers, sample, x, 7);
        CHECK(upto == all);
        Rational total_bound = 0;
        for (int m = 1; m <= 7; ++m) total_bound += Rational(8, m * m);
        CHECK(all[0] >= 0);
        CHECK(all[0] <= total_bound);
      }
  }
  CHECK_THROWS_AS(eval_witness(layers, sample, layers[0].satellites[0][0], 8), InvalidArgument);
}

TEST_CASE("truncation tail bound") {
  CHECK(witness_tail_bound(10, 1) < 0.77);
  CHECK(witness_tail_bound(10, 1) == doctest::Approx(0.76131).epsilon(1e-4));
  CHECK(witness_tail_bound(10, 4) == doctest::Approx(2 * witness_tail_bound(10, 1)));
}

TEST_CASE("event threshold and reports") {
  const auto& layers = cantor_layers();
  const auto sample = sample_witness(layers, 3);
  const auto r1 = check_event(layers, sample, zero_drift(1), 1);
  CHECK(r1.threshold == Rational(static_cast<long>(layers[0].k_n) * 2));
  CHECK(r1.holds == (Rational(static_cast<long>(r1.graph_count)) >= r1.threshold));
  const auto r6 = check_event(layers, sample, cantor_f_drift(), 6);
  CHECK(r6.threshold == ratio(static_cast<long>(layers[5].k_n) * 64, 36));
  CHECK(r6.holds == (Rational(static_cast<long>(r6.graph_count)) >= r6.threshold));
  CHECK_THROWS_AS(check_event(layers, sample, zero_drift(1), 8), InvalidArgument);
}

TEST_CASE("event fraction at n = 6 with zero drift") {
  const auto e = event_trials(cantor_layers(), zero_drift(1), 6, 200, 11);
  CHECK(e.fraction >= 1 - std::ldexp(1.0, -5));
  CHECK(e.pass);
}

TEST_CASE("Wilson interval") {
  const auto [lo, hi] = wilson_interval(0, 100);
  CHECK(lo == 0);
  CHECK(hi == doctest::Approx(0.0369935).epsilon(1e-4));
  const auto [lo2, hi2] = wilson_interval(50, 100);
  CHECK(lo2 < 0.5);
  CHECK(hi2 > 0.5);
  CHECK(0.5 - lo2 == doctest::Approx(hi2 - 0.5));
  CHECK_THROWS_AS(wilson_interval(0, 0), InvalidArgument);
}

TEST_CASE("translated packing simulations") {
  const auto& layers = cantor_layers();
  SUBCASE("a one-point grid never fails") {
    const auto r = simulate_statement_31(layers[2], zero_adversary(1), 200, 1);
    CHECK(r.failures == 0);
    CHECK(r.pass);
  }
  SUBCASE("n = 5 with both adversaries on a short run") {
    for (const auto& adv : {zero_adversary(1), colliding_adversary(1)}) {
      const auto r = simulate_statement_31(layers[4], adv, 5000, 2);
      CHECK(r.p_hat <= r.bound * 1.5 + 1e-3);
      CHECK(r.ci_low <= r.p_hat);
      CHECK(r.ci_high >= r.p_hat);
    }
  }
  SUBCASE("an adversary that needs the current value is refused") {
    Adversary peek = zero_adversary(1);
    peek.name = "peeking";
    peek.lookahead = 1;
    CHECK_THROWS_AS(simulate_statement_31(layers[4], peek, 10, 1), ContractViolation);
  }
  SUBCASE("the adversary only ever sees earlier values") {
    std::vector<std::size_t> lengths;
    Adversary spy{"spy", 0, [&](std::span<const Vec> h) {
                    lengths.push_back(h.size());
                    return Vec{0};
                  }};
    simulate_statement_31(layers[4], spy, 1, 1);
    REQUIRE(lengths.size() == layers[4].ell_n);
    for (std::size_t i = 0; i < lengths.size(); ++i) CHECK(lengths[i] == i);
  }
}

TEST_CASE("Euclidean packing counts") {
  CHECK(euclidean_packing_count({{0}, {Rational(1, 4)}, {Rational(1, 2)}}, 2) == 2);
  CHECK(euclidean_packing_count({{0}, {Rational(1, 4)}, {Rational(1, 2)}}, 3) == 3);
  CHECK(euclidean_packing_count({{0, 0}, {Rational(1, 4), 0}, {0, Rational(1, 4)}}, 2) == 2);
  CHECK(euclidean_packing_count({{0, 0}, {Rational(1, 4), 0}, {0, Rational(1, 4)}}, 3) == 3);
}

TEST_CASE("unsupported spaces are refused") {
  CHECK_THROWS_AS(build_layer(SpaceDescriptor::harmonic_sequence(), 3, 1), InvalidArgument);
  CHECK_THROWS_AS(build_layer(SpaceDescriptor::unit_interval(), 0, 1), InvalidArgument);
}
