#pragma once

#include <cstdint>
#include <vector>

#include "dimlab/dimension_estimators.hpp"
#include "dimlab/metric_spaces.hpp"
#include "dimlab/prevalence_witness.hpp"

namespace dimlab {

/// Nested pieces of the Cantor set realised as triadic cylinders; level-n
/// pieces have triadic depth t_n, the least t with 3^{-t} <= 2^{-n^2}.
/// Family points are one representative (left end) per deepest piece.
struct NestedFamily {
  struct Piece {
    DigitVector prefix;
    std::size_t parent = 0;
    std::vector<std::size_t> members;  ///< family point indices
    Rational diameter;
  };

  int depth = 0;
  std::vector<int> triadic_depth;  ///< t_n for n = 1..depth
  std::vector<int> branching;      ///< a_n for n = 1..depth
  std::vector<std::vector<Piece>> levels;
  std::vector<Point> points;
  std::vector<std::vector<std::size_t>> path;  ///< path[point][n-1] = piece index at level n
};

/// t_n: least t with 3^{-t} <= 2^{-n^2}.
int nested_triadic_depth(int n);

/// Builds the family on the Cantor set. An empty schedule keeps every
/// sub-cylinder; otherwise a_n children are spread evenly over the available ones.
NestedFamily build_nested_family(const SpaceDescriptor& space, int depth, const std::vector<int>& branching = {},
                                 int max_triadic_depth = 24);

/// Level of the deepest common piece of two family points (0 if none).
int common_level(const NestedFamily& family, std::size_t i, std::size_t j);

/// Independent values X in {0, 2^{-n}}^d for every piece of every level,
/// followed by `tail_levels` further levels drawn independently per point.
struct RandomFieldSample {
  std::uint64_t seed = 0;
  int d = 1;
  int tail_levels = 0;
  std::vector<std::vector<std::uint32_t>> level_bits;  ///< [level][piece] bitmask over coordinates
  std::vector<std::vector<std::uint64_t>> tail_bits;   ///< [point][coordinate] bit t = level depth+1+t
};

constexpr int kDefaultTailLevels = 40;

RandomFieldSample sample_field(const NestedFamily& family, std::uint64_t seed, int d = 1,
                               int tail_levels = kDefaultTailLevels);

/// f at a family point; the sum of dyadics is exact in double precision.
std::vector<double> field_value(const NestedFamily& family, const RandomFieldSample& sample, std::size_t point);
/// The single-level contribution f_n at a family point (n may exceed the depth for tail levels).
std::vector<double> field_level(const NestedFamily& family, const RandomFieldSample& sample, std::size_t point, int n);

// ---- integral bound --------------------------------------------------------

struct Lemma52Result {
  double integral = 0;
  double ratio = 0;
  double std_error = 0;
  double constant = 0;
  bool pass = false;
};

/// sup over p, q of the ratio: pi^{d/2} Gamma(u - d/2) / Gamma(u).
double lemma52_constant(int d, double u);

/// Double integral over [0,p]^{2d} of (q^2 + |alpha - beta + theta|^2)^{-u}.
/// d = 1 uses adaptive quadrature to relative error 1e-6 on the triangular
/// reduction; d = 2 uses randomly shifted Sobol points with a standard error.
Lemma52Result lemma_52_check(double p, double q, const std::vector<double>& theta, double u, int d,
                             std::uint64_t seed = 1, std::size_t samples = 1000000);

/// Inner integral over [0,1] of (q^2 + p^2 (a + gamma)^2)^{-u}.
double lemma52_inner(double p, double q, double gamma, double u);
/// gamma clamped to [-1, 0].
double lemma52_clamp(double gamma);
/// Integral over [-1,1] of (q^2 + p^2 a^2)^{-u}.
double lemma52_centered(double p, double q, double u);
/// Double integral with the translation clamped per beta, d = 1.
double lemma52_clamped_integral(double p, double q, double theta, double u);

// ---- expectation and energy checks ------------------------------------------

struct PairExpectation {
  std::size_t i = 0;
  std::size_t j = 0;
  double rho = 0;
  int level = 0;
  double expectation = 0;
  double c_hat = 0;
};

struct DecadeConstant {
  int decade = 0;  ///< floor(log10 rho)
  std::size_t pairs = 0;
  double c_hat = 0;
};

struct Statement55Result {
  std::vector<PairExpectation> pairs;
  std::vector<DecadeConstant> decades;
  double c_hat = 0;
  double stability = 0;  ///< max/min of per-decade constants
  bool pass = false;
};

using RealDrift = std::function<std::vector<double>(const Point&)>;
RealDrift zero_real_drift(int d);
/// The odd-digit Cantor-example function as a drift.
RealDrift cantor_f_real_drift();

/// Monte Carlo of E[(rho^2 + |(f+g)(x) - (f+g)(y)|^2)^{-(t+d)/2}] per pair;
/// pass iff the per-decade constants max_pairs E rho^s agree within a factor 2.
Statement55Result statement_55_check(const NestedFamily& family, const RealDrift& g, double t, double s, int d,
                                     std::size_t trials, std::uint64_t seed, std::size_t max_pairs = 200);

/// The same expectation for an infinitely deep field, from the integral:
/// 4^{nd} * double integral with p = 2^{-n}, q = rho, u = (t+d)/2.
double statement_55_reference(double rho, int level, double theta, double t, int d);

struct ExpectedEnergyResult {
  double mean_energy = 0;
  double energy_std_error = 0;
  double base_energy = 0;  ///< I_s(nu)
  double c_hat = 0;
  double reference = 0;    ///< c_hat * I_s(nu)
  double allowed = 0;      ///< 4 * reference
  bool pass = false;
};

/// Pushforward of nu under x -> (x, (f+g)(x)), as a measure on base x R^d.
DiscreteMeasure graph_measure(const NestedFamily& family, const DiscreteMeasure& nu, const RandomFieldSample& sample,
                              const RealDrift& g);

/// Uniform measure on the family points.
DiscreteMeasure family_measure(const NestedFamily& family);
/// Uniform measure on the leftmost family point of each level-n piece.
DiscreteMeasure piece_measure(const NestedFamily& family, int level);

ExpectedEnergyResult expected_energy_check(const NestedFamily& family, const DiscreteMeasure& nu, const RealDrift& g,
                                           double t, double s, int d, std::size_t trials, std::uint64_t seed,
                                           double c_hat);

}  // namespace dimlab
