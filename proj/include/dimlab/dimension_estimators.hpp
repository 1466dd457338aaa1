#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dimlab/metric_spaces.hpp"
#include "dimlab/packing.hpp"

namespace dimlab {

/// Counts indexed by scale. `base` is 2 for packing counts at 2^{-n} and 9
/// for mesh counts at 9^{-n}.
struct ScaleSeries {
  int base = 2;
  std::vector<std::pair<int, std::uint64_t>> entries;

  void add(int n, std::uint64_t count);
  std::size_t size() const { return entries.size(); }
};

enum class Variant { Liminf, Limsup, FullFit };

/// How the liminf/limsup variants turn counts into per-scale dimension values.
///   InterceptCorrected: (log N_n - b) / (n log base), b the full-fit intercept.
///   PerStep:            log(N_{n+1}/N_n) / log base.
/// Both are restricted to the trailing half of the series.
enum class TailRule { InterceptCorrected, PerStep };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& s);

struct DimensionEstimate {
  double slope = 0;
  double intercept = 0;
  double fit_r2 = 0;
  int n_min = 0;
  int n_max = 0;
  Variant variant = Variant::FullFit;
};

DimensionEstimate box_dim_estimate(const ScaleSeries& series, Variant variant,
                                   TailRule rule = TailRule::InterceptCorrected);

/// Greedy packing counts of `space` for n in [n_lo, n_hi], each on a fresh net
/// at scale n + net_offset.
ScaleSeries packing_series(const SpaceDescriptor& space, int n_lo, int n_hi, int net_offset = 1);

/// Same for base x [0,1]^d using product_net at scale n + net_offset.
ScaleSeries product_packing_series(const SpaceDescriptor& base, int d, int n_lo, int n_hi, int net_offset = 1);

/// Packing counts of a fixed net (or subset of one) across scales; requires
/// net.scale_index() > n_hi.
ScaleSeries net_packing_series(const ResolutionNet& net, int n_lo, int n_hi);

using PlanarPoint = std::pair<Rational, Rational>;

/// Number of half-open 9^{-n} mesh squares meeting the point set.
std::uint64_t mesh_count_2d(const std::vector<PlanarPoint>& points, int n);

struct CoverPiece {
  std::vector<Point> points;
  Rational diameter_sq;
  double diameter() const;
};

struct CoverFamily {
  SpaceDescriptor space;
  std::vector<CoverPiece> pieces;
};

/// Builds a cover, recording each piece's exact diameter.
CoverFamily make_cover(const SpaceDescriptor& space, std::vector<std::vector<Point>> pieces);
/// Pieces of a net grouped by the first `level` ternary digits (Cantor nets).
CoverFamily cantor_cylinder_cover(const ResolutionNet& net, int level);
/// Pieces of a one-dimensional net split into `parts` closed intervals of equal length.
CoverFamily interval_split_cover(const ResolutionNet& net, int parts);

struct LocalizedEstimate {
  double value = 0;
  std::vector<double> piece_slopes;
  std::size_t skipped = 0;
};

/// Minimum over non-empty pieces of the full-fit slope of the piece's own
/// packing counts over [n_lo, n_hi].
LocalizedEstimate localized_upper_box(const ResolutionNet& net, const CoverFamily& cover, int n_lo, int n_hi);

/// Sum of diam^s over the cover.
double hausdorff_content_upper(const CoverFamily& cover, double s);

/// Probability measure with finitely many distinct atoms.
struct DiscreteMeasure {
  SpaceDescriptor space;
  std::vector<Point> atoms;
  std::vector<Rational> weights;

  /// Checks exact normalisation, positivity and distinctness.
  void validate() const;
  static DiscreteMeasure uniform(const SpaceDescriptor& space, std::vector<Point> atoms);
};

/// Off-diagonal s-energy: sum over x != y of w_x w_y rho(x,y)^{-s}.
double discrete_energy(const DiscreteMeasure& measure, double s);
/// One pass over the pairs for a whole grid of exponents.
std::vector<double> discrete_energy_grid(const DiscreteMeasure& measure, const std::vector<double>& s_values);

using MeasureFamily = std::function<DiscreteMeasure(int depth)>;

struct EnergyProfile {
  std::vector<int> depths;
  std::vector<double> s_grid;
  std::vector<std::vector<double>> energies;  ///< energies[s index][depth index]
  std::vector<bool> divergent;
  double estimate = 0;
  double bracket_lo = 0;
  double bracket_hi = 0;
  bool boundary = false;
  std::string flag;
};

/// An energy sequence counts as divergent when its last three successive
/// increments each grow (increment ratio above 1).
bool energy_sequence_divergent(const std::vector<double>& values);

EnergyProfile energy_dimension_profile(const MeasureFamily& family, const std::vector<int>& depths,
                                       const std::vector<double>& s_grid);

/// Uniform measures used by the profile experiments.
DiscreteMeasure cantor_natural_measure(int depth);
DiscreteMeasure interval_uniform_measure(int depth);
DiscreteMeasure harmonic_uniform_measure(int depth);

}  // namespace dimlab
