#include "dimlab/energy_method.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_qrng.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>

#include "dimlab/cantor_example.hpp"

namespace dimlab {

int nested_triadic_depth(int n) {
  if (n < 1) throw InvalidArgument("nested_triadic_depth: n must be at least 1");
  mpz_class bound, three = 1;
  mpz_ui_pow_ui(bound.get_mpz_t(), 2, static_cast<unsigned long>(n) * static_cast<unsigned long>(n));
  int t = 0;
  while (three < bound) {
    three *= 3;
    ++t;
  }
  return t;
}

NestedFamily build_nested_family(const SpaceDescriptor& space, int depth, const std::vector<int>& branching,
                                 int max_triadic_depth) {
  if (space.kind() != SpaceKind::TriadicCantor) throw InvalidArgument("build_nested_family: the base must be the Cantor set");
  if (depth < 1 || depth > 4) throw InvalidArgument("build_nested_family: depth must be in 1..4, got " + std::to_string(depth));
  if (!branching.empty() && branching.size() != static_cast<std::size_t>(depth))
    throw InvalidArgument("build_nested_family: branching schedule length must equal the depth");
  NestedFamily fam;
  fam.depth = depth;
  for (int n = 1; n <= depth; ++n) fam.triadic_depth.push_back(nested_triadic_depth(n));
  if (fam.triadic_depth.back() > max_triadic_depth)
    throw LimitExceeded("build_nested_family: level " + std::to_string(depth) + " needs triadic depth " +
                        std::to_string(fam.triadic_depth.back()) + " but the limit is " + std::to_string(max_triadic_depth));
  int prev_t = 0;
  std::vector<NestedFamily::Piece> parents{NestedFamily::Piece{}};
  for (int n = 1; n <= depth; ++n) {
    const int t = fam.triadic_depth[static_cast<std::size_t>(n - 1)];
    const int bits = t - prev_t;
    const std::uint64_t avail = std::uint64_t{1} << bits;
    const std::uint64_t a = branching.empty() ? avail : static_cast<std::uint64_t>(branching[static_cast<std::size_t>(n - 1)]);
    if (a < 1 || a > avail)
      throw InvalidArgument("build_nested_family: a_" + std::to_string(n) + " must be in 1.." + std::to_string(avail));
    fam.branching.push_back(static_cast<int>(a));
    std::vector<NestedFamily::Piece> level;
    for (std::size_t pi = 0; pi < parents.size(); ++pi)
      for (std::uint64_t j = 0; j < a; ++j) {
        const std::uint64_t code = j * avail / a;
        NestedFamily::Piece piece;
        piece.prefix = parents[pi].prefix;
        const DigitVector tail = DigitVector::from_code(code, static_cast<std::size_t>(bits));
        piece.prefix.digits.insert(piece.prefix.digits.end(), tail.digits.begin(), tail.digits.end());
        piece.parent = pi;
        level.push_back(std::move(piece));
      }
    fam.levels.push_back(level);
    parents = std::move(level);
    prev_t = t;
  }
  const auto& leaves = fam.levels.back();
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    fam.points.push_back(Point::cantor(leaves[li].prefix));
    std::vector<std::size_t> path(static_cast<std::size_t>(depth));
    std::size_t idx = li;
    for (int n = depth; n >= 1; --n) {
      path[static_cast<std::size_t>(n - 1)] = idx;
      fam.levels[static_cast<std::size_t>(n - 1)][idx].members.push_back(li);
      idx = fam.levels[static_cast<std::size_t>(n - 1)][idx].parent;
    }
    fam.path.push_back(std::move(path));
  }
  for (auto& level : fam.levels)
    for (auto& piece : level) {
      Rational lo = fam.points[piece.members.front()].x, hi = lo;
      for (auto m : piece.members) {
        lo = std::min<Rational>(lo, fam.points[m].x);
        hi = std::max<Rational>(hi, fam.points[m].x);
      }
      piece.diameter = hi - lo;
    }
  return fam;
}

int common_level(const NestedFamily& family, std::size_t i, std::size_t j) {
  int level = 0;
  for (int n = 1; n <= family.depth; ++n)
    if (family.path[i][static_cast<std::size_t>(n - 1)] == family.path[j][static_cast<std::size_t>(n - 1)]) level = n;
  return level;
}

RandomFieldSample sample_field(const NestedFamily& family, std::uint64_t seed, int d, int tail_levels) {
  if (d < 1 || d > 16) throw InvalidArgument("sample_field: d must be in 1..16");
  if (tail_levels < 0 || family.depth + tail_levels > 52)
    throw InvalidArgument("sample_field: depth plus tail levels must stay within 52 so values remain exact doubles");
  RandomFieldSample s;
  s.seed = seed;
  s.d = d;
  s.tail_levels = tail_levels;
  std::mt19937_64 rng(seed);
  const std::uint32_t mask = (std::uint32_t{1} << d) - 1;
  for (const auto& level : family.levels) {
    std::vector<std::uint32_t> bits(level.size());
    for (auto& b : bits) b = static_cast<std::uint32_t>(rng()) & mask;
    s.level_bits.push_back(std::move(bits));
  }
  const std::uint64_t tmask = tail_levels == 0 ? 0 : (tail_levels >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << tail_levels) - 1));
  for (std::size_t p = 0; p < family.points.size(); ++p) {
    std::vector<std::uint64_t> t(static_cast<std::size_t>(d));
    for (auto& w : t) w = rng() & tmask;
    s.tail_bits.push_back(std::move(t));
  }
  return s;
}

std::vector<double> field_level(const NestedFamily& family, const RandomFieldSample& sample, std::size_t point, int n) {
  if (n < 1 || n > family.depth + sample.tail_levels) throw InvalidArgument("field_level: level out of range");
  std::vector<double> v(static_cast<std::size_t>(sample.d), 0.0);
  const double h = std::ldexp(1.0, -n);
  for (int a = 0; a < sample.d; ++a) {
    bool bit;
    if (n <= family.depth) {
      bit = sample.level_bits[static_cast<std::size_t>(n - 1)][family.path[point][static_cast<std::size_t>(n - 1)]] >> a & 1U;
    } else {
      bit = sample.tail_bits[point][static_cast<std::size_t>(a)] >> (n - family.depth - 1) & 1U;
    }
    v[static_cast<std::size_t>(a)] = bit ? h : 0.0;
  }
  return v;
}

std::vector<double> field_value(const NestedFamily& family, const RandomFieldSample& sample, std::size_t point) {
  std::vector<double> v(static_cast<std::size_t>(sample.d), 0.0);
  for (int n = 1; n <= family.depth + sample.tail_levels; ++n) {
    const auto c = field_level(family, sample, point, n);
    for (int a = 0; a < sample.d; ++a) v[static_cast<std::size_t>(a)] += c[static_cast<std::size_t>(a)];
  }
  return v;
}

// ---------------------------------------------------------------------------

namespace {

struct GslWorkspace {
  gsl_integration_workspace* w;
  GslWorkspace() : w(gsl_integration_workspace_alloc(2000)) {}
  ~GslWorkspace() { gsl_integration_workspace_free(w); }
  GslWorkspace(const GslWorkspace&) = delete;
  GslWorkspace& operator=(const GslWorkspace&) = delete;
};

template <class F>
double gsl_fn(double x, void* params) {
  return (*static_cast<F*>(params))(x);
}

template <class F>
double integrate(F f, double a, double b, std::vector<double> breaks = {}, double epsrel = 1e-6) {
  gsl_set_error_handler_off();
  GslWorkspace ws;
  gsl_function fn{&gsl_fn<F>, &f};
  double result = 0, err = 0;
  int status;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double x) { return !(x > a && x < b); }), breaks.end());
  if (breaks.empty()) {
    status = gsl_integration_qags(&fn, a, b, 0.0, epsrel, 2000, ws.w, &result, &err);
  } else {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    status = gsl_integration_qagp(&fn, breaks.data(), breaks.size(), 0.0, epsrel, 2000, ws.w, &result, &err);
  }
  if (status != GSL_SUCCESS && status != GSL_EROUND)
    throw Error(std::string("quadrature failed: ") + gsl_strerror(status));
  return result;
}

}  // namespace

double lemma52_constant(int d, double u) {
  if (d < 1) throw InvalidArgument("lemma52_constant: d must be positive");
  if (!(u > d / 2.0)) throw InvalidArgument("lemma52_constant: u must exceed d/2");
  return std::pow(std::numbers::pi, d / 2.0) * std::exp(std::lgamma(u - d / 2.0) - std::lgamma(u));
}

Lemma52Result lemma_52_check(double p, double q, const std::vector<double>& theta, double u, int d, std::uint64_t seed,
                             std::size_t samples) {
  if (d != 1 && d != 2) throw InvalidArgument("lemma_52_check: d must be 1 or 2");
  if (!(p > 0 && p <= 1 && q > 0 && q <= 1)) throw InvalidArgument("lemma_52_check: p and q must lie in (0,1]");
  if (theta.size() != static_cast<std::size_t>(d)) throw InvalidArgument("lemma_52_check: theta must have d coordinates");
  if (!(u > d / 2.0)) throw InvalidArgument("lemma_52_check: u must exceed d/2 (the bound is vacuous otherwise)");
  Lemma52Result r;
  r.constant = lemma52_constant(d, u);
  const double q2 = q * q;
  if (d == 1) {
    // Integrating out alpha - beta = w leaves the triangular weight p - |w| on [-p, p].
    const double th = theta[0];
    auto f = [&](double w) { return (p - std::fabs(w)) * std::pow(q2 + (w + th) * (w + th), -u); };
    r.integral = integrate(f, -p, p, {0.0, -th});
  } else {
    if (samples < 16) throw InvalidArgument("lemma_52_check: need at least 16 samples");
    const std::size_t replicates = 16;
    const std::size_t per = samples / replicates;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::unique_ptr<gsl_qrng, decltype(&gsl_qrng_free)> gen(gsl_qrng_alloc(gsl_qrng_sobol, 2), &gsl_qrng_free);
    std::vector<double> means;
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      const double s0 = unif(rng), s1 = unif(rng);
      gsl_qrng_init(gen.get());
      double acc = 0;
      for (std::size_t k = 0; k < per; ++k) {
        double v[2];
        gsl_qrng_get(gen.get(), v);
        const double w0 = -p + 2 * p * std::fmod(v[0] + s0, 1.0);
        const double w1 = -p + 2 * p * std::fmod(v[1] + s1, 1.0);
        const double a0 = w0 + theta[0], a1 = w1 + theta[1];
        acc += (p - std::fabs(w0)) * (p - std::fabs(w1)) * std::pow(q2 + a0 * a0 + a1 * a1, -u);
      }
      means.push_back(acc / static_cast<double>(per) * 4 * p * p);
    }
    double m = 0;
    for (double x : means) m += x;
    m /= static_cast<double>(replicates);
    double var = 0;
    for (double x : means) var += (x - m) * (x - m);
    var /= static_cast<double>(replicates - 1);
    r.integral = m;
    r.std_error = std::sqrt(var / static_cast<double>(replicates));
  }
  r.ratio = r.integral / (std::pow(p, d) * std::pow(q, d - 2 * u));
  r.pass = r.ratio <= r.constant;
  return r;
}

double lemma52_inner(double p, double q, double gamma, double u) {
  auto f = [&](double a) { return std::pow(q * q + p * p * (a + gamma) * (a + gamma), -u); };
  return integrate(f, 0.0, 1.0, {-gamma}, 1e-9);
}

double lemma52_clamp(double gamma) { return std::clamp(gamma, -1.0, 0.0); }

double lemma52_centered(double p, double q, double u) {
  auto f = [&](double a) { return std::pow(q * q + p * p * a * a, -u); };
  return integrate(f, -1.0, 1.0, {0.0}, 1e-9);
}

double lemma52_clamped_integral(double p, double q, double theta, double u) {
  // With alpha = p a and beta = p b, the inner translation is gamma = theta/p - b.
  auto outer = [&](double b) { return lemma52_inner(p, q, lemma52_clamp(theta / p - b), u); };
  return p * p * integrate(outer, 0.0, 1.0, {theta / p, theta / p + 1}, 1e-8);
}

// ---------------------------------------------------------------------------

RealDrift zero_real_drift(int d) {
  return [d](const Point&) { return std::vector<double>(static_cast<std::size_t>(d), 0.0); };
}

RealDrift cantor_f_real_drift() {
  return [](const Point& p) {
    if (p.repr != Point::Repr::Digits) throw InvalidArgument("cantor_f_real_drift: needs a Cantor digit point");
    return std::vector<double>{to_double(eval(DigitFunction::OddDigits, p.digits))};
  };
}

namespace {

std::vector<std::vector<double>> graph_values(const NestedFamily& family, const RandomFieldSample& sample,
                                              const std::vector<std::vector<double>>& drift) {
  std::vector<std::vector<double>> out(family.points.size());
  for (std::size_t p = 0; p < family.points.size(); ++p) {
    out[p] = field_value(family, sample, p);
    for (std::size_t a = 0; a < out[p].size(); ++a) out[p][a] += drift[p][a];
  }
  return out;
}

std::vector<std::vector<double>> drift_values(const NestedFamily& family, const RealDrift& g, int d) {
  std::vector<std::vector<double>> out;
  for (const auto& p : family.points) {
    auto v = g(p);
    if (v.size() != static_cast<std::size_t>(d)) throw InvalidArgument("drift dimension does not match d");
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

Statement55Result statement_55_check(const NestedFamily& family, const RealDrift& g, double t, double s, int d,
                                     std::size_t trials, std::uint64_t seed, std::size_t max_pairs) {
  if (!(t > 0 && t < s)) throw InvalidArgument("statement_55_check: need 0 < t < s");
  if (trials < 1) throw InvalidArgument("statement_55_check: trials must be at least 1");
  const std::size_t np = family.points.size();
  if (np < 2) throw InvalidArgument("statement_55_check: the family has fewer than two points");
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = i + 1; j < np; ++j) all.emplace_back(i, j);
  if (all.size() > max_pairs) {
    std::mt19937_64 rng(derive_seed(seed, 0x5055));
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(max_pairs);
    std::sort(all.begin(), all.end());
  }
  Statement55Result r;
  for (auto [i, j] : all) {
    PairExpectation pe;
    pe.i = i;
    pe.j = j;
    if (family.points[i].x == family.points[j].x) throw InvalidArgument("statement_55_check: coincident pair rejected");
    pe.rho = std::fabs(to_double(family.points[i].x - family.points[j].x));
    pe.level = common_level(family, i, j);
    r.pairs.push_back(pe);
  }
  const auto drift = drift_values(family, g, d);
  const double expo = -(t + d) / 2.0;
  std::vector<double> acc(r.pairs.size(), 0.0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto sample = sample_field(family, derive_seed(seed, trial), d);
    const auto val = graph_values(family, sample, drift);
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      const auto& pe = r.pairs[k];
      double sq = pe.rho * pe.rho;
      for (int a = 0; a < d; ++a) {
        const double diff = val[pe.i][static_cast<std::size_t>(a)] - val[pe.j][static_cast<std::size_t>(a)];
        sq += diff * diff;
      }
      acc[k] += std::pow(sq, expo);
    }
  }
  std::map<int, DecadeConstant> dec;
  for (std::size_t k = 0; k < r.pairs.size(); ++k) {
    auto& pe = r.pairs[k];
    pe.expectation = acc[k] / static_cast<double>(trials);
    pe.c_hat = pe.expectation * std::pow(pe.rho, s);
    r.c_hat = std::max(r.c_hat, pe.c_hat);
    const int decade = static_cast<int>(std::floor(std::log10(pe.rho)));
    auto& dc = dec[decade];
    dc.decade = decade;
    ++dc.pairs;
    dc.c_hat = std::max(dc.c_hat, pe.c_hat);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& [k, dc] : dec) {
    r.decades.push_back(dc);
    lo = std::min(lo, dc.c_hat);
    hi = std::max(hi, dc.c_hat);
  }
  r.stability = hi / lo;
  r.pass = std::isfinite(r.c_hat) && r.stability <= 2.0;
  return r;
}

double statement_55_reference(double rho, int level, double theta, double t, int d) {
  if (d != 1) throw InvalidArgument("statement_55_reference: only d = 1 is supported");
  const double p = std::ldexp(1.0, -level);
  const double integral = lemma_52_check(std::min(p, 1.0), std::min(rho, 1.0), {theta}, (t + d) / 2.0, d).integral;
  return std::pow(4.0, level * d) * integral;
}

DiscreteMeasure family_measure(const NestedFamily& family) {
  return DiscreteMeasure::uniform(SpaceDescriptor::triadic_cantor(), family.points);
}

DiscreteMeasure piece_measure(const NestedFamily& family, int level) {
  if (level < 1 || level > family.depth) throw InvalidArgument("piece_measure: level out of range");
  std::vector<Point> atoms;
  for (const auto& piece : family.levels[static_cast<std::size_t>(level - 1)]) atoms.push_back(family.points[piece.members.front()]);
  return DiscreteMeasure::uniform(SpaceDescriptor::triadic_cantor(), std::move(atoms));
}

DiscreteMeasure graph_measure(const NestedFamily& family, const DiscreteMeasure& nu, const RandomFieldSample& sample,
                              const RealDrift& g) {
  const auto& leaves = family.levels.back();
  const std::size_t leaf_depth = leaves.front().prefix.depth();
  std::map<std::vector<std::uint8_t>, std::size_t> leaf_of;
  for (std::size_t li = 0; li < leaves.size(); ++li)
    leaf_of.emplace(std::vector<std::uint8_t>(leaves[li].prefix.digits.begin(), leaves[li].prefix.digits.end()), li);
  DiscreteMeasure out{SpaceDescriptor::product_with_cube(SpaceDescriptor::triadic_cantor(), sample.d), {}, nu.weights};
  for (const auto& atom : nu.atoms) {
    if (atom.repr != Point::Repr::Digits || atom.digits.depth() < leaf_depth)
      throw InvalidArgument("graph_measure: atoms must be Cantor digit points of depth at least " +
                            std::to_string(leaf_depth));
    auto it = leaf_of.find(std::vector<std::uint8_t>(atom.digits.digits.begin(), atom.digits.digits.begin() +
                                                                          static_cast<std::ptrdiff_t>(leaf_depth)));
    if (it == leaf_of.end()) throw InvalidArgument("graph_measure: atom lies outside every deepest family piece");
    auto v = field_value(family, sample, it->second);
    const auto gv = g(atom);
    if (gv.size() != v.size()) throw InvalidArgument("graph_measure: drift dimension does not match the field");
    std::vector<Rational> fib;
    for (std::size_t a = 0; a < v.size(); ++a) fib.emplace_back(v[a] + gv[a]);
    out.atoms.push_back(atom.with_fiber(std::move(fib)));
  }
  return out;
}

ExpectedEnergyResult expected_energy_check(const NestedFamily& family, const DiscreteMeasure& nu, const RealDrift& g,
                                           double t, double s, int d, std::size_t trials, std::uint64_t seed,
                                           double c_hat) {
  if (!(t > 0 && t < s)) throw InvalidArgument("expected_energy_check: need 0 < t < s");
  if (trials < 2) throw InvalidArgument("expected_energy_check: trials must be at least 2");
  nu.validate();
  ExpectedEnergyResult r;
  r.base_energy = discrete_energy(nu, s);
  if (!std::isfinite(r.base_energy)) throw InvalidArgument("expected_energy_check: I_s(nu) is not finite");
  std::vector<double> e;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto sample = sample_field(family, derive_seed(seed, trial), d);
    e.push_back(discrete_energy(graph_measure(family, nu, sample, g), t + d));
  }
  double m = 0;
  for (double x : e) m += x;
  m /= static_cast<double>(trials);
  double var = 0;
  for (double x : e) var += (x - m) * (x - m);
  var /= static_cast<double>(trials - 1);
  r.mean_energy = m;
  r.energy_std_error = std::sqrt(var / static_cast<double>(trials));
  r.c_hat = c_hat;
  r.reference = c_hat * r.base_energy;
  r.allowed = 4 * r.reference;
  r.pass = r.mean_energy <= r.allowed;
  return r;
}

}  // namespace dimlab
