#include "dimlab/dimension_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace dimlab {

void ScaleSeries::add(int n, std::uint64_t count) {
  if (count < 1) throw InvalidArgument("ScaleSeries: counts must be at least 1");
  if (!entries.empty() && n <= entries.back().first)
    throw InvalidArgument("ScaleSeries: scale indices must be strictly increasing");
  entries.emplace_back(n, count);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Liminf: return "liminf";
    case Variant::Limsup: return "limsup";
    case Variant::FullFit: return "full-fit";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "liminf") return Variant::Liminf;
  if (s == "limsup") return Variant::Limsup;
  if (s == "full-fit" || s == "fullfit" || s == "full") return Variant::FullFit;
  throw InvalidArgument("unknown variant '" + s + "' (expected liminf, limsup or full-fit)");
}

DimensionEstimate box_dim_estimate(const ScaleSeries& series, Variant variant, TailRule rule) {
  const std::size_t m = series.size();
  if (m < 3) throw InvalidArgument("box_dim_estimate: need at least 3 entries, got " + std::to_string(m));
  if (series.base < 2) throw InvalidArgument("box_dim_estimate: base must be at least 2");
  const double lb = std::log(static_cast<double>(series.base));
  std::vector<double> x(m), y(m);
  for (std::size_t k = 0; k < m; ++k) {
    x[k] = series.entries[k].first * lb;
    y[k] = std::log(static_cast<double>(series.entries[k].second));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  DimensionEstimate est;
  est.variant = variant;
  est.n_min = series.entries.front().first;
  est.n_max = series.entries.back().first;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double ssres = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = y[k] - (est.intercept + est.slope * x[k]);
    ssres += r * r;
  }
  est.fit_r2 = syy > 0 ? std::clamp(1.0 - ssres / syy, 0.0, 1.0) : 1.0;
  if (variant == Variant::FullFit) return est;

  const std::size_t k0 = m / 2;
  std::vector<double> vals;
  if (rule == TailRule::PerStep) {
    for (std::size_t k = k0; k + 1 < m; ++k) vals.push_back((y[k + 1] - y[k]) / (x[k + 1] - x[k]));
  } else {
    for (std::size_t k = k0; k < m; ++k)
      if (x[k] > 0) vals.push_back((y[k] - est.intercept) / x[k]);
  }
  if (vals.empty()) throw InvalidArgument("box_dim_estimate: trailing half has no usable scales");
  est.slope = variant == Variant::Liminf ? *std::min_element(vals.begin(), vals.end())
                                         : *std::max_element(vals.begin(), vals.end());
  return est;
}

ScaleSeries packing_series(const SpaceDescriptor& space, int n_lo, int n_hi, int net_offset) {
  if (n_lo > n_hi) throw InvalidArgument("packing_series: empty scale range");
  if (net_offset < 1) throw InvalidArgument("packing_series: net offset must be at least 1");
  ScaleSeries s;
  for (int n = n_lo; n <= n_hi; ++n) s.add(n, max_packing_greedy(build_net(space, n + net_offset), n).count);
  return s;
}

ScaleSeries product_packing_series(const SpaceDescriptor& base, int d, int n_lo, int n_hi, int net_offset) {
  if (n_lo > n_hi) throw InvalidArgument("product_packing_series: empty scale range");
  if (net_offset < 1) throw InvalidArgument("product_packing_series: net offset must be at least 1");
  ScaleSeries s;
  for (int n = n_lo; n <= n_hi; ++n) {
    const int m = n + net_offset;
    s.add(n, max_packing_greedy(product_net(build_net(base, m), d, m), n).count);
  }
  return s;
}

ScaleSeries net_packing_series(const ResolutionNet& net, int n_lo, int n_hi) {
  if (n_lo > n_hi) throw InvalidArgument("net_packing_series: empty scale range");
  ScaleSeries s;
  for (int n = n_lo; n <= n_hi; ++n) s.add(n, max_packing_greedy(net, n).count);
  return s;
}

std::uint64_t mesh_count_2d(const std::vector<PlanarPoint>& points, int n) {
  if (n < 0) throw InvalidArgument("mesh_count_2d: negative scale index");
  const Rational scale = rational_pow(9, n);
  std::set<std::pair<mpz_class, mpz_class>> cells;
  for (const auto& [x, y] : points) cells.emplace(floor_of(x * scale), floor_of(y * scale));
  return cells.size();
}

double CoverPiece::diameter() const { return std::sqrt(to_double(diameter_sq)); }

CoverFamily make_cover(const SpaceDescriptor& space, std::vector<std::vector<Point>> pieces) {
  CoverFamily cover{space, {}};
  const bool line = space.base().kind() != SpaceKind::FinitePointCloud && space.cube_dim() == 0;
  for (auto& pts : pieces) {
    CoverPiece piece;
    piece.points = std::move(pts);
    piece.diameter_sq = 0;
    if (line && !piece.points.empty()) {
      auto [lo, hi] = std::minmax_element(piece.points.begin(), piece.points.end(),
                                          [](const Point& a, const Point& b) { return a.x < b.x; });
      Rational d = hi->x - lo->x;
      piece.diameter_sq = d * d;
    } else {
      for (std::size_t i = 0; i < piece.points.size(); ++i)
        for (std::size_t j = i + 1; j < piece.points.size(); ++j) {
          Rational d = metric_squared(space, piece.points[i], piece.points[j]);
          if (d > piece.diameter_sq) piece.diameter_sq = d;
        }
    }
    cover.pieces.push_back(std::move(piece));
  }
  return cover;
}

CoverFamily cantor_cylinder_cover(const ResolutionNet& net, int level) {
  if (net.space().kind() != SpaceKind::TriadicCantor) throw InvalidArgument("cantor_cylinder_cover: not a Cantor net");
  if (level < 0 || level > 30) throw InvalidArgument("cantor_cylinder_cover: level out of range");
  std::vector<std::vector<Point>> groups(std::size_t{1} << level);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Point& p = net.explicit_point(i);
    if (p.repr != Point::Repr::Digits || p.digits.depth() < static_cast<std::size_t>(level))
      throw InvalidArgument("cantor_cylinder_cover: net depth below the requested level");
    std::size_t code = 0;
    for (int k = 0; k < level; ++k) code = code * 2 + p.digits.digits[static_cast<std::size_t>(k)];
    groups[code].push_back(p);
  }
  return make_cover(net.space(), std::move(groups));
}

CoverFamily interval_split_cover(const ResolutionNet& net, int parts) {
  if (parts < 1) throw InvalidArgument("interval_split_cover: parts must be positive");
  if (net.dim() != 1) throw InvalidArgument("interval_split_cover: one-dimensional nets only");
  std::vector<std::vector<Point>> groups(static_cast<std::size_t>(parts));
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Point& p = net.explicit_point(i);
    for (int k = 0; k < parts; ++k)
      if (p.x >= ratio(k, parts) && p.x <= ratio(k + 1, parts)) groups[static_cast<std::size_t>(k)].push_back(p);
  }
  return make_cover(net.space(), std::move(groups));
}

LocalizedEstimate localized_upper_box(const ResolutionNet& net, const CoverFamily& cover, int n_lo, int n_hi) {
  if (n_hi - n_lo < 2) throw InvalidArgument("localized_upper_box: need at least 3 scales");
  if (net.scale_index() < n_hi + 1) throw InvalidArgument("localized_upper_box: net too coarse for the scale range");
  LocalizedEstimate out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& piece : cover.pieces) {
    if (piece.points.empty()) {
      ++out.skipped;
      continue;
    }
    ResolutionNet sub(net.space(), net.scale_index(), piece.points);
    const double slope = box_dim_estimate(net_packing_series(sub, n_lo, n_hi), Variant::FullFit).slope;
    out.piece_slopes.push_back(slope);
    out.value = std::min(out.value, slope);
  }
  if (out.piece_slopes.empty()) throw InvalidArgument("localized_upper_box: every cover piece is empty");
  return out;
}

double hausdorff_content_upper(const CoverFamily& cover, double s) {
  if (s < 0) throw InvalidArgument("hausdorff_content_upper: s must be non-negative");
  if (cover.pieces.empty()) throw InvalidArgument("hausdorff_content_upper: empty cover");
  // Equal diameters are grouped so that count * diam^s is formed once per class.
  std::map<Rational, std::size_t> classes;
  for (const auto& p : cover.pieces) ++classes[p.diameter_sq];
  double total = 0;
  for (const auto& [dsq, count] : classes) {
    if (sgn(dsq) == 0) {
      if (s == 0) total += static_cast<double>(count);
      continue;
    }
    total += std::exp(std::log(static_cast<double>(count)) + 0.5 * s * std::log(to_double(dsq)));
  }
  return total;
}

// ---------------------------------------------------------------------------

namespace {

bool point_less(const Point& a, const Point& b) {
  if (a.repr == Point::Repr::Cloud) return a.index < b.index;
  if (a.x != b.x) return a.x < b.x;
  return a.fiber < b.fiber;
}

bool point_equal(const Point& a, const Point& b) {
  if (a.repr == Point::Repr::Cloud) return a.index == b.index;
  return a.x == b.x && a.fiber == b.fiber;
}

}  // namespace

void DiscreteMeasure::validate() const {
  if (atoms.empty()) throw InvalidArgument("DiscreteMeasure: no atoms");
  if (atoms.size() != weights.size()) throw InvalidArgument("DiscreteMeasure: atom and weight counts differ");
  Rational total = 0;
  for (const auto& w : weights) {
    if (sgn(w) <= 0) throw InvalidArgument("DiscreteMeasure: non-positive weight");
    total += w;
  }
  if (total != 1) throw InvalidArgument("DiscreteMeasure: weights sum to " + to_string(total) + ", not 1");
  std::vector<const Point*> order;
  for (const auto& a : atoms) order.push_back(&a);
  std::sort(order.begin(), order.end(), [](const Point* a, const Point* b) { return point_less(*a, *b); });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (point_equal(*order[k - 1], *order[k])) throw InvalidArgument("DiscreteMeasure: coincident atoms");
}

DiscreteMeasure DiscreteMeasure::uniform(const SpaceDescriptor& space, std::vector<Point> atoms) {
  DiscreteMeasure m{space, std::move(atoms), {}};
  m.weights.assign(m.atoms.size(), Rational(1, static_cast<long>(std::max<std::size_t>(m.atoms.size(), 1))));
  m.validate();
  return m;
}

std::vector<double> discrete_energy_grid(const DiscreteMeasure& measure, const std::vector<double>& s_values) {
  measure.validate();
  for (double s : s_values)
    if (!(s > 0)) throw InvalidArgument("discrete_energy: exponent s must be positive");
  const std::size_t n = measure.atoms.size();
  const std::size_t g = s_values.size();
  const bool cloud = measure.space.base().kind() == SpaceKind::FinitePointCloud;
  const std::size_t fib = static_cast<std::size_t>(measure.space.cube_dim());
  const std::size_t dim = 1 + fib;
  std::vector<double> coords(cloud ? 0 : n * dim), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = to_double(measure.weights[i]);
    if (cloud) continue;
    if (measure.atoms[i].fiber.size() != fib) throw InvalidArgument("discrete_energy: atom fiber length mismatch");
    coords[i * dim] = to_double(measure.atoms[i].x);
    for (std::size_t k = 0; k < fib; ++k) coords[i * dim + 1 + k] = to_double(measure.atoms[i].fiber[k]);
  }
  // An arithmetic grid lets rho^{-s_k} be generated by repeated multiplication.
  bool arithmetic = g >= 2;
  const double step = g >= 2 ? s_values[1] - s_values[0] : 0;
  for (std::size_t k = 1; k < g && arithmetic; ++k)
    arithmetic = std::fabs((s_values[k] - s_values[k - 1]) - step) <= 1e-12 * std::max(1.0, std::fabs(step));
  std::vector<double> acc(g, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double lr;
      if (cloud) {
        lr = std::log(to_double(measure.space.cloud_distance(measure.atoms[i].index, measure.atoms[j].index)));
      } else {
        double d2 = 0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double t = coords[i * dim + k] - coords[j * dim + k];
          d2 += t * t;
        }
        lr = 0.5 * std::log(d2);
      }
      const double ww = w[i] * w[j];
      if (arithmetic) {
        double term = std::exp(-s_values[0] * lr);
        const double factor = std::exp(-step * lr);
        for (std::size_t k = 0; k < g; ++k) {
          acc[k] += ww * term;
          term *= factor;
        }
      } else {
        for (std::size_t k = 0; k < g; ++k) acc[k] += ww * std::exp(-s_values[k] * lr);
      }
    }
  }
  for (auto& a : acc) a *= 2;
  return acc;
}

double discrete_energy(const DiscreteMeasure& measure, double s) { return discrete_energy_grid(measure, {s})[0]; }

bool energy_sequence_divergent(const std::vector<double>& values) {
  if (values.size() < 3) throw InvalidArgument("energy_sequence_divergent: need at least 3 values");
  std::vector<double> inc;
  for (std::size_t k = 1; k < values.size(); ++k) inc.push_back(values[k] - values[k - 1]);
  const std::size_t ratios = std::min<std::size_t>(3, inc.size() - 1);
  for (std::size_t r = 0; r < ratios; ++r) {
    const double cur = inc[inc.size() - 1 - r];
    const double prev = inc[inc.size() - 2 - r];
    if (!(prev > 0 && cur > prev)) return false;
  }
  return true;
}

EnergyProfile energy_dimension_profile(const MeasureFamily& family, const std::vector<int>& depths,
                                       const std::vector<double>& s_grid) {
  if (depths.size() < 4) throw InvalidArgument("energy_dimension_profile: need at least 4 depths");
  if (s_grid.size() < 5) throw InvalidArgument("energy_dimension_profile: need at least 5 grid values");
  if (!std::is_sorted(s_grid.begin(), s_grid.end())) throw InvalidArgument("energy_dimension_profile: s grid must be increasing");
  EnergyProfile prof;
  prof.depths = depths;
  prof.s_grid = s_grid;
  prof.energies.assign(s_grid.size(), std::vector<double>(depths.size(), 0.0));
  for (std::size_t t = 0; t < depths.size(); ++t) {
    const auto e = discrete_energy_grid(family(depths[t]), s_grid);
    for (std::size_t k = 0; k < s_grid.size(); ++k) prof.energies[k][t] = e[k];
  }
  bool all_zero = true;
  for (const auto& row : prof.energies)
    for (double v : row)
      if (v != 0) all_zero = false;
  if (all_zero) {
    prof.divergent.assign(s_grid.size(), false);
    prof.estimate = 0;
    prof.bracket_lo = 0;
    prof.bracket_hi = s_grid.front();
    prof.boundary = true;
    prof.flag = "degenerate: no off-diagonal pairs";
    return prof;
  }
  for (const auto& row : prof.energies) prof.divergent.push_back(energy_sequence_divergent(row));
  std::size_t first_div = s_grid.size();
  for (std::size_t k = 0; k < s_grid.size(); ++k)
    if (prof.divergent[k]) {
      first_div = k;
      break;
    }
  if (first_div == 0) {
    prof.estimate = 0;
    prof.bracket_lo = 0;
    prof.bracket_hi = s_grid.front();
    prof.boundary = true;
    prof.flag = "all-divergent";
  } else if (first_div == s_grid.size()) {
    prof.estimate = s_grid.back();
    prof.bracket_lo = s_grid.back();
    prof.bracket_hi = s_grid.back();
    prof.boundary = true;
    prof.flag = "all-bounded";
  } else {
    prof.estimate = s_grid[first_div - 1];
    prof.bracket_lo = s_grid[first_div - 1];
    prof.bracket_hi = s_grid[first_div];
  }
  return prof;
}

DiscreteMeasure cantor_natural_measure(int depth) {
  if (depth < 0 || depth > 20) throw InvalidArgument("cantor_natural_measure: depth out of range");
  std::vector<Point> atoms;
  const std::uint64_t count = std::uint64_t{1} << depth;
  for (std::uint64_t c = 0; c < count; ++c) atoms.push_back(Point::cantor(DigitVector::from_code(c, static_cast<std::size_t>(depth))));
  return DiscreteMeasure::uniform(SpaceDescriptor::triadic_cantor(), std::move(atoms));
}

DiscreteMeasure interval_uniform_measure(int depth) {
  if (depth < 0 || depth > 20) throw InvalidArgument("interval_uniform_measure: depth out of range");
  std::vector<Point> atoms;
  const long m = 1L << depth;
  for (long k = 0; k <= m; ++k) atoms.push_back(Point::real(ratio(k, m)));
  return DiscreteMeasure::uniform(SpaceDescriptor::unit_interval(), std::move(atoms));
}

DiscreteMeasure harmonic_uniform_measure(int depth) {
  if (depth < 0 || depth > 20) throw InvalidArgument("harmonic_uniform_measure: depth out of range");
  const ResolutionNet net = build_net(SpaceDescriptor::harmonic_sequence(), depth);
  std::vector<Point> atoms;
  for (std::size_t i = 0; i < net.size(); ++i) atoms.push_back(net.explicit_point(i));
  return DiscreteMeasure::uniform(SpaceDescriptor::harmonic_sequence(), std::move(atoms));
}

}  // namespace dimlab
