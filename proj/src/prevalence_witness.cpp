#include "dimlab/prevalence_witness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <set>

#include "dimlab/cantor_example.hpp"

namespace dimlab {

std::int64_t grid_extent(int n) {
  if (n < 1) throw InvalidArgument("grid_extent: n must be at least 1");
  if (n > 60) throw LimitExceeded("grid_extent: n above 60");
  return (std::int64_t{1} << n) / (static_cast<std::int64_t>(n) * n);
}

std::uint64_t replication_exponent(std::size_t s, std::size_t k, int n) {
  if (s < 1 || k < 1 || n < 1) throw InvalidArgument("replication_exponent: s, k and n must be positive");
  if (s == 1) return 1;
  // (s-1)^m * s k 2^n <= s^m
  mpz_class lhs = mpz_class(static_cast<unsigned long>(s)) * static_cast<unsigned long>(k);
  lhs <<= static_cast<mp_bitcnt_t>(n);
  mpz_class rhs = 1;
  for (std::uint64_t m = 1;; ++m) {
    lhs *= static_cast<unsigned long>(s - 1);
    rhs *= static_cast<unsigned long>(s);
    if (lhs <= rhs) return m;
    if (m > 1000000) throw LimitExceeded("replication_exponent: no m below 10^6");
  }
}

namespace {

std::vector<Vec> make_grid(int n, int d) {
  const std::int64_t ext = grid_extent(n);
  const Rational step = rational_pow(2, 3 - n);
  std::vector<Vec> grid;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vec v;
    for (auto i : idx) v.push_back(step * i);
    grid.push_back(std::move(v));
    int a = d - 1;
    while (a >= 0 && idx[static_cast<std::size_t>(a)] == ext) idx[static_cast<std::size_t>(a--)] = 0;
    if (a < 0) break;
    ++idx[static_cast<std::size_t>(a)];
  }
  return grid;
}

Rational abs_diff(const Rational& a, const Rational& b) {
  Rational r = a - b;
  if (sgn(r) < 0) r = -r;
  return r;
}

std::vector<Point> cantor_satellites(const Point& centre, const Rational& eps, std::uint64_t ell,
                                     const std::set<Rational>& taken, int max_depth) {
  if (centre.repr != Point::Repr::Digits) throw InvalidArgument("build_layer: Cantor packing point without digits");
  // Tail digits start after position t, where the all-ones tail 3^{-t}/2 is below eps.
  int t = static_cast<int>(centre.digits.depth());
  while (!(rational_pow(3, -t) / 2 < eps)) ++t;
  int bits = 0;
  while ((std::uint64_t{1} << bits) < ell) ++bits;
  while (true) {
    if (t + bits > max_depth)
      throw LimitExceeded("build_layer: cannot place " + std::to_string(ell) + " distinct satellites within digit depth " +
                          std::to_string(max_depth) + "; raise the maximum digit depth");
    std::vector<Point> out;
    DigitVector base = centre.digits;
    base.digits.resize(static_cast<std::size_t>(t), 0);
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits) && out.size() < ell; ++code) {
      DigitVector v = base;
      DigitVector tail = DigitVector::from_code(code, static_cast<std::size_t>(bits));
      v.digits.insert(v.digits.end(), tail.digits.begin(), tail.digits.end());
      Point p = Point::cantor(v);
      if (!taken.count(p.x)) out.push_back(std::move(p));
    }
    if (out.size() == ell) return out;
    ++bits;
  }
}

std::vector<Point> interval_satellites(const Point& centre, const Rational& eps, std::uint64_t ell,
                                       const std::set<Rational>& taken) {
  const int dir = centre.x + eps <= 1 ? 1 : -1;
  for (long refine = 1; refine <= (1L << 20); refine *= 2) {
    const long slots = static_cast<long>(2 * ell) * refine;
    const Rational h = eps / slots;
    std::vector<Point> out;
    for (long j = 0; j < slots && out.size() < ell; ++j) {
      Rational x = centre.x + h * j * dir;
      if (x < 0 || x > 1 || taken.count(x)) continue;
      out.push_back(Point::real(x));
    }
    if (out.size() == ell) return out;
  }
  throw LimitExceeded("build_layer: cannot place " + std::to_string(ell) + " distinct interval satellites");
}

}  // namespace

LayerSpec build_layer(const SpaceDescriptor& space, int n, int d, const std::vector<LayerSpec>& earlier,
                      int max_digit_depth) {
  if (space.kind() != SpaceKind::TriadicCantor && space.kind() != SpaceKind::UnitInterval)
    throw InvalidArgument("build_layer: only the Cantor set and the unit interval are supported, got " + space.name());
  if (n < 1) throw InvalidArgument("build_layer: n must be at least 1");
  if (d < 1 || d > 4) throw InvalidArgument("build_layer: d must be in 1..4");
  for (const auto& e : earlier)
    if (e.space.kind() != space.kind() || e.d != d || e.n >= n)
      throw InvalidArgument("build_layer: earlier layers must share space and d and precede n");

  LayerSpec L;
  L.n = n;
  L.d = d;
  L.space = space;
  L.grid = make_grid(n, d);
  L.s_n = L.grid.size();

  const ResolutionNet net = build_net(space, n + 1);
  const PackingResult pk = max_packing_auto(net, n);
  L.k_n = pk.count;
  L.k_method = pk.method;
  L.packing_points = net.points(pk.witness);
  std::sort(L.packing_points.begin(), L.packing_points.end(), [](const Point& a, const Point& b) { return a.x < b.x; });

  const Rational delta = dyadic(n);
  if (L.k_n >= 2) {
    Rational gap = L.packing_points[1].x - L.packing_points[0].x;
    for (std::size_t k = 2; k < L.k_n; ++k) gap = std::min<Rational>(gap, L.packing_points[k].x - L.packing_points[k - 1].x);
    L.eps_n = (gap - delta) / 3;
    if (sgn(L.eps_n) <= 0) throw InvalidArgument("build_layer: packing has no positive separation slack");
  } else {
    L.eps_n = delta / 3;
  }
  L.m_n = replication_exponent(L.s_n, L.k_n, n);
  L.ell_n = static_cast<std::uint64_t>(L.s_n) * L.m_n;

  std::set<Rational> taken;
  for (const auto& e : earlier)
    for (const auto& cluster : e.satellites)
      for (const auto& p : cluster) taken.insert(p.x);
  for (const auto& centre : L.packing_points) {
    L.satellites.push_back(space.kind() == SpaceKind::TriadicCantor
                               ? cantor_satellites(centre, L.eps_n, L.ell_n, taken, max_digit_depth)
                               : interval_satellites(centre, L.eps_n, L.ell_n, taken));
  }

  // Bump radius: a quarter of the smallest of eps_n, the gaps between layer-n
  // satellites, and the gaps to earlier satellites.
  std::vector<Rational> xs;
  for (const auto& cluster : L.satellites)
    for (const auto& p : cluster) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  Rational r = L.eps_n;
  for (std::size_t k = 1; k < xs.size(); ++k) r = std::min<Rational>(r, xs[k] - xs[k - 1]);
  for (const auto& x : xs) {
    auto it = taken.lower_bound(x);
    if (it != taken.end()) r = std::min<Rational>(r, *it - x);
    if (it != taken.begin()) r = std::min<Rational>(r, x - *std::prev(it));
  }
  L.bump_radius = r / 4;

  for (std::uint32_t k = 0; k < L.satellites.size(); ++k)
    for (std::uint32_t i = 0; i < L.satellites[k].size(); ++i) {
      L.sorted_x.push_back(to_double(L.satellites[k][i].x));
      L.sorted_label.emplace_back(k, i);
    }
  std::vector<std::size_t> order(L.sorted_x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return L.sorted_x[a] < L.sorted_x[b]; });
  std::vector<double> sx;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sl;
  for (auto o : order) {
    sx.push_back(L.sorted_x[o]);
    sl.push_back(L.sorted_label[o]);
  }
  L.sorted_x = std::move(sx);
  L.sorted_label = std::move(sl);
  return L;
}

std::vector<LayerSpec> build_layers(const SpaceDescriptor& space, int n_max, int d, int max_digit_depth) {
  if (n_max < 1) throw InvalidArgument("build_layers: need at least one layer");
  std::vector<LayerSpec> layers;
  for (int n = 1; n <= n_max; ++n) layers.push_back(build_layer(space, n, d, layers, max_digit_depth));
  return layers;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

WitnessSample sample_witness(const std::vector<LayerSpec>& layers, std::uint64_t seed) {
  WitnessSample s;
  s.seed = seed;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& L = layers[li];
    if (li > 0 && (L.space.kind() != layers[0].space.kind() || L.d != layers[0].d))
      throw InvalidArgument("sample_witness: layers disagree on space or d");
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(L.n)));
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(L.s_n - 1));
    std::vector<std::uint32_t> c(L.ell_n);
    for (auto& v : c) v = pick(rng);
    s.choice.push_back(std::move(c));
  }
  return s;
}

Vec eval_witness(const std::vector<LayerSpec>& layers, const WitnessSample& sample, const Point& x, int n_max) {
  if (n_max < 0 || static_cast<std::size_t>(n_max) > layers.size())
    throw InvalidArgument("eval_witness: requested layers beyond those built");
  if (sample.choice.size() < static_cast<std::size_t>(n_max)) throw InvalidArgument("eval_witness: sample too short");
  const int d = layers.empty() ? 1 : layers[0].d;
  Vec value(static_cast<std::size_t>(d), Rational(0));
  const double xd = to_double(x.x);
  for (int li = 0; li < n_max; ++li) {
    const LayerSpec& L = layers[static_cast<std::size_t>(li)];
    const double rd = to_double(L.bump_radius) * (1 + 1e-9) + 1e-300;
    auto it = std::lower_bound(L.sorted_x.begin(), L.sorted_x.end(), xd - rd);
    for (; it != L.sorted_x.end() && *it <= xd + rd; ++it) {
      const auto [k, i] = L.sorted_label[static_cast<std::size_t>(it - L.sorted_x.begin())];
      const Rational rho = abs_diff(x.x, L.satellites[k][i].x);
      if (rho >= L.bump_radius) continue;
      const Rational factor = 1 - rho / L.bump_radius;
      const Vec& X = L.grid[sample.choice[static_cast<std::size_t>(li)][i]];
      for (int a = 0; a < d; ++a) value[static_cast<std::size_t>(a)] += X[static_cast<std::size_t>(a)] * factor;
      break;  // bumps of one layer have disjoint supports
    }
  }
  return value;
}

double witness_tail_bound(int n_max, int d) {
  double partial = 0;
  for (int k = 1; k <= n_max; ++k) partial += 1.0 / (static_cast<double>(k) * k);
  return 8.0 * (std::numbers::pi * std::numbers::pi / 6.0 - partial) * std::sqrt(static_cast<double>(d));
}

Drift zero_drift(int d) {
  return [d](const Point&) { return Vec(static_cast<std::size_t>(d), Rational(0)); };
}

Drift cantor_f_drift() {
  return [](const Point& p) {
    if (p.repr != Point::Repr::Digits) throw InvalidArgument("cantor_f_drift: needs a Cantor digit point");
    return Vec{eval(DigitFunction::OddDigits, p.digits)};
  };
}

namespace {

/// Maximum packing of one cluster of graph points, solved per conflict component.
std::size_t cluster_packing(const SpaceDescriptor& graph_space, std::vector<Point> pts, int n, bool& exact) {
  if (pts.empty()) return 0;
  const ResolutionNet net(graph_space, n + 1, std::move(pts));
  const SeparationTest sep(net, dyadic(n));
  const std::size_t m = net.size();
  std::vector<std::vector<std::size_t>> adj(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (!sep.separated(i, j)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
  std::vector<int> comp(m, -1);
  std::size_t total = 0;
  for (std::size_t s = 0; s < m; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<std::size_t> members{s};
    comp[s] = static_cast<int>(s);
    for (std::size_t q = 0; q < members.size(); ++q)
      for (auto v : adj[members[q]])
        if (comp[v] < 0) {
          comp[v] = static_cast<int>(s);
          members.push_back(v);
        }
    std::sort(members.begin(), members.end());
    if (members.size() <= 64) {
      std::vector<std::uint64_t> bits(members.size(), 0);
      for (std::size_t a = 0; a < members.size(); ++a)
        for (auto v : adj[members[a]]) {
          const auto b = static_cast<std::size_t>(std::lower_bound(members.begin(), members.end(), v) - members.begin());
          bits[a] |= std::uint64_t{1} << b;
        }
      total += maximum_independent_set(bits).size();
    } else {
      exact = false;
      std::vector<std::size_t> chosen;
      for (auto v : members) {
        bool ok = true;
        for (auto c : chosen)
          if (std::find(adj[v].begin(), adj[v].end(), c) != adj[v].end()) {
            ok = false;
            break;
          }
        if (ok) chosen.push_back(v);
      }
      total += chosen.size();
    }
  }
  return total;
}

}  // namespace

EventReport check_event(const std::vector<LayerSpec>& layers, const WitnessSample& sample, const Drift& g, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > layers.size()) throw InvalidArgument("check_event: layer n not built");
  const LayerSpec& L = layers[static_cast<std::size_t>(n - 1)];
  const int d = L.d;
  EventReport rep;
  rep.n = n;
  rep.threshold = Rational(static_cast<long>(L.k_n)) * rational_pow(2, n * d) / rational_pow(n, 2 * d);
  const SpaceDescriptor graph_space = SpaceDescriptor::product_with_cube(L.space, d);
  for (const auto& cluster : L.satellites) {
    std::vector<Point> pts;
    pts.reserve(cluster.size());
    for (const auto& x : cluster) {
      Vec v = eval_witness(layers, sample, x, n);
      const Vec gv = g(x);
      if (gv.size() != v.size()) throw InvalidArgument("check_event: drift dimension mismatch");
      for (std::size_t a = 0; a < v.size(); ++a) v[a] += gv[a];
      pts.push_back(x.with_fiber(std::move(v)));
    }
    rep.graph_count += cluster_packing(graph_space, std::move(pts), n, rep.all_exact);
  }
  rep.holds = Rational(static_cast<long>(rep.graph_count)) >= rep.threshold;
  return rep;
}

EventTrials event_trials(const std::vector<LayerSpec>& layers, const Drift& g, int n, std::size_t trials,
                         std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("event_trials: trials must be at least 1");
  EventTrials out;
  out.n = n;
  out.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const WitnessSample s = sample_witness(layers, derive_seed(seed, t));
    if (check_event(layers, s, g, n).holds) ++out.holds;
  }
  out.fraction = static_cast<double>(out.holds) / static_cast<double>(trials);
  out.required = 1.0 - 2.0 * std::ldexp(1.0, -n);
  out.pass = out.fraction >= out.required;
  return out;
}

Adversary zero_adversary(int d) {
  return {"zero", 0, [d](std::span<const Vec>) { return Vec(static_cast<std::size_t>(d), Rational(0)); }};
}

Adversary colliding_adversary(int d) {
  return {"colliding", 0, [d](std::span<const Vec> history) {
            Vec y(static_cast<std::size_t>(d), Rational(0));
            if (!history.empty())
              for (int a = 0; a < d; ++a) y[static_cast<std::size_t>(a)] = -history.back()[static_cast<std::size_t>(a)];
            return y;
          }};
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw InvalidArgument("wilson_interval: no trials");
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1 + z * z / nn;
  const double centre = (p + z * z / (2 * nn)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

std::size_t euclidean_packing_count(std::vector<Vec> pts, int n) {
  if (pts.empty()) return 0;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const Rational delta = dyadic(n);
  const std::size_t d = pts[0].size();
  if (d == 1) {
    std::size_t count = 1;
    Rational last = pts[0][0];
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i][0] - last > delta) {
        ++count;
        last = pts[i][0];
      }
    return count;
  }
  std::vector<Point> ps;
  for (auto& v : pts) ps.push_back(Point::real(v[0]).with_fiber(Vec(v.begin() + 1, v.end())));
  const ResolutionNet net(SpaceDescriptor::product_with_cube(SpaceDescriptor::unit_interval(), static_cast<int>(d - 1)),
                          n + 1, std::move(ps));
  return net.size() <= kDefaultExactLimit ? max_packing_exact(net, n).count : max_packing_greedy(net, n).count;
}

Statement31Result simulate_statement_31(const LayerSpec& layer, const Adversary& adversary, std::size_t trials,
                                        std::uint64_t seed) {
  if (adversary.lookahead > 0)
    throw ContractViolation("simulate_statement_31: adversary '" + adversary.name + "' requests " +
                            std::to_string(adversary.lookahead) +
                            " values beyond its history; y_i may depend only on X_1..X_{i-1}");
  if (trials < 1) throw InvalidArgument("simulate_statement_31: trials must be at least 1");
  Statement31Result r;
  r.n = layer.n;
  r.s_n = layer.s_n;
  r.k_n = layer.k_n;
  r.ell_n = layer.ell_n;
  r.trials = trials;
  r.bound = 1.0 / (static_cast<double>(layer.k_n) * std::ldexp(1.0, layer.n));
  r.allowed = 1.5 * r.bound;
  for (std::size_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(layer.s_n - 1));
    std::vector<Vec> history;
    std::vector<Vec> translated;
    history.reserve(layer.ell_n);
    for (std::uint64_t i = 0; i < layer.ell_n; ++i) {
      const Vec y = adversary.choose(std::span<const Vec>(history));
      if (y.size() != static_cast<std::size_t>(layer.d)) throw ContractViolation("simulate_statement_31: adversary returned wrong dimension");
      const Vec& X = layer.grid[pick(rng)];
      Vec p(X.size());
      for (std::size_t a = 0; a < X.size(); ++a) p[a] = X[a] + y[a];
      translated.push_back(std::move(p));
      history.push_back(X);
    }
    if (euclidean_packing_count(std::move(translated), layer.n) < layer.s_n) ++r.failures;
  }
  r.p_hat = static_cast<double>(r.failures) / static_cast<double>(trials);
  std::tie(r.ci_low, r.ci_high) = wilson_interval(r.failures, trials);
  r.pass = r.ci_high <= r.allowed;
  return r;
}

}  // namespace dimlab
