#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dimlab/metric_spaces.hpp"
#include "dimlab/packing.hpp"

namespace dimlab {

using Vec = std::vector<Rational>;

/// Layer n of the random-function construction on a perfect base space.
struct LayerSpec {
  int n = 0;
  int d = 1;
  SpaceDescriptor space;
  std::vector<Vec> grid;  ///< S_n = 2^{-n+3} {0,...,floor(2^n / n^2)}^d
  std::size_t s_n = 0;
  std::size_t k_n = 0;
  PackingMethod k_method = PackingMethod::Exact;
  std::uint64_t m_n = 0;
  std::uint64_t ell_n = 0;
  std::vector<Point> packing_points;
  Rational eps_n;
  std::vector<std::vector<Point>> satellites;  ///< satellites[k][i], i < ell_n
  Rational bump_radius;

  /// Satellite base coordinates in increasing order with their (k, i) labels.
  std::vector<double> sorted_x;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sorted_label;
};

/// floor(2^n / n^2), the per-axis grid extent of S_n.
std::int64_t grid_extent(int n);

/// Smallest m >= 1 with (1 - 1/s)^m <= 1 / (s k 2^n).
std::uint64_t replication_exponent(std::size_t s, std::size_t k, int n);

/// Builds layer n given all earlier layers (needed for satellite disjointness
/// and the bump radius). Only UnitInterval and TriadicCantor are supported.
LayerSpec build_layer(const SpaceDescriptor& space, int n, int d, const std::vector<LayerSpec>& earlier = {},
                      int max_digit_depth = 80);

/// Layers 1..N in order.
std::vector<LayerSpec> build_layers(const SpaceDescriptor& space, int n_max, int d, int max_digit_depth = 80);

/// One draw of the layer values X^n_i (stored as indices into the grid).
struct WitnessSample {
  std::uint64_t seed = 0;
  std::vector<std::vector<std::uint32_t>> choice;  ///< choice[layer][i]
};

/// SplitMix64 mixing of (seed, stream) into an independent sub-seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

WitnessSample sample_witness(const std::vector<LayerSpec>& layers, std::uint64_t seed);

/// Sum over layers n <= n_max of the bump extension f_n at x.
Vec eval_witness(const std::vector<LayerSpec>& layers, const WitnessSample& sample, const Point& x, int n_max);

/// Sum over n > n_max of 8 n^{-2} sqrt(d): a bound on the truncation tail.
double witness_tail_bound(int n_max, int d);

using Drift = std::function<Vec(const Point&)>;
Drift zero_drift(int d);
/// The odd-digit function of the Cantor example, as a one-dimensional drift on Cantor points.
Drift cantor_f_drift();

struct EventReport {
  int n = 0;
  std::size_t graph_count = 0;
  Rational threshold;
  bool holds = false;
  bool all_exact = true;  ///< every conflict component was solved exactly
};

/// Packing count of the graph of (witness + g) over the layer-n satellites,
/// compared with k_n 2^{nd} n^{-2d}. Clusters around distinct packing points
/// are more than 2^{-n} apart, so the count is the sum of per-cluster maxima,
/// each computed exactly per conflict component (greedy above 64 points).
EventReport check_event(const std::vector<LayerSpec>& layers, const WitnessSample& sample, const Drift& g, int n);

struct EventTrials {
  int n = 0;
  std::size_t trials = 0;
  std::size_t holds = 0;
  double fraction = 0;
  double required = 0;
  bool pass = false;
};

/// Fraction of sampled witnesses satisfying the event; pass iff the fraction
/// is at least 1 - 2 * 2^{-n}.
EventTrials event_trials(const std::vector<LayerSpec>& layers, const Drift& g, int n, std::size_t trials,
                         std::uint64_t seed);

/// Chooses y_i from the values X_1..X_{i-1} only; the history span is all it sees.
struct Adversary {
  std::string name;
  int lookahead = 0;  ///< values it would need beyond the history; must be 0
  std::function<Vec(std::span<const Vec> history)> choose;
};

Adversary zero_adversary(int d);
/// y_1 = 0 and y_i = -X_{i-1}, pulling every point toward the previous one.
Adversary colliding_adversary(int d);

struct Statement31Result {
  int n = 0;
  std::size_t s_n = 0;
  std::size_t k_n = 0;
  std::uint64_t ell_n = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double p_hat = 0;
  double ci_low = 0;
  double ci_high = 0;
  double bound = 0;
  double allowed = 0;
  bool pass = false;
};

/// Wilson score interval at 95% confidence.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

/// Monte Carlo failure probability that the translated union contains no
/// s_n-element 2^{-n}-packing. pass iff the Wilson upper bound is at most
/// 1.5 / (k_n 2^n).
Statement31Result simulate_statement_31(const LayerSpec& layer, const Adversary& adversary, std::size_t trials,
                                        std::uint64_t seed);

/// Maximum 2^{-n}-packing size of a finite subset of R^d (exact for d = 1 and
/// for at most 64 distinct points, greedy otherwise).
std::size_t euclidean_packing_count(std::vector<Vec> pts, int n);

}  // namespace dimlab
