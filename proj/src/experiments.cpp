#include "dimlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "dimlab/cantor_example.hpp"
#include "dimlab/dimension_estimators.hpp"
#include "dimlab/energy_method.hpp"
#include "dimlab/prevalence_witness.hpp"

namespace dimlab {

using nlohmann::json;

namespace {

const double kLog2Over3 = std::log(2.0) / std::log(3.0);

// Tolerances of the acceptance criteria.
constexpr double kSlopeTol = 0.02;
constexpr double kGapMin = 0.15;
constexpr double kEstimateTol = 0.05;
constexpr double kOrderSlack = 0.05;
constexpr double kProductTol = 0.05;
constexpr double kEnergyTol = 0.05;
constexpr double kLemmaSpotTol = 1e-4;
constexpr double kLemmaSlopeBand = 0.1;
constexpr double kStabilityMax = 2.0;
constexpr double kCountSeconds = 5.0;
constexpr double kSlopeSeconds = 120.0;
constexpr double kStatement31Seconds = 60.0;

std::string params(json j) {
  j["version"] = kVersionTag;
  return j.dump();
}

ResultRow make_row(std::string experiment, const json& p, double value, std::optional<double> reference, bool pass,
                   std::uint64_t seed) {
  ResultRow r;
  r.experiment = std::move(experiment);
  r.param_json = params(p);
  r.value = value;
  r.reference = reference;
  r.pass = pass;
  r.seed = seed;
  return r;
}

ResultTable make_table(const std::string& experiment, const ExperimentConfig& c, json p) {
  ResultTable t;
  t.experiment = experiment;
  t.seed = c.seed;
  t.param_json = params(std::move(p));
  return t;
}

SpaceDescriptor base_space(const std::string& name) {
  if (name == "interval") return SpaceDescriptor::unit_interval();
  if (name == "cantor") return SpaceDescriptor::triadic_cantor();
  if (name == "harmonic") return SpaceDescriptor::harmonic_sequence();
  throw InvalidArgument("unknown space '" + name + "' (expected interval, cantor or harmonic)");
}

double hausdorff_reference(const std::string& space) {
  if (space == "interval") return 1.0;
  if (space == "cantor") return kLog2Over3;
  if (space == "harmonic") return 0.0;
  throw InvalidArgument("unknown space '" + space + "'");
}

MeasureFamily measure_family(const std::string& space) {
  if (space == "interval") return interval_uniform_measure;
  if (space == "cantor") return cantor_natural_measure;
  if (space == "harmonic") return harmonic_uniform_measure;
  throw InvalidArgument("unknown space '" + space + "'");
}

std::vector<double> default_s_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 30; ++k) g.push_back(0.05 * k);
  return g;
}

std::vector<int> depth_list(ScaleRange r) {
  std::vector<int> v;
  for (int k = r.lo; k <= r.hi; ++k) v.push_back(k);
  return v;
}

std::size_t nearest_index(const std::vector<double>& grid, double s) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (std::fabs(grid[k] - s) < std::fabs(grid[best] - s)) best = k;
  return best;
}

std::size_t trials_or(const ExperimentConfig& c, std::size_t fallback) { return c.trials ? *c.trials : fallback; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidArgument("option '" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw InvalidArgument("option '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double reference_dimension(const std::string& space) {
  if (space == "interval") return 1.0;
  if (space == "cantor") return kLog2Over3;
  if (space == "harmonic") return 0.5;
  throw InvalidArgument("unknown space '" + space + "' (expected interval, cantor or harmonic)");
}

ScaleRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  ScaleRange r;
  if (dots == std::string::npos) {
    r.lo = r.hi = static_cast<int>(parse_int("n", text));
  } else {
    r.lo = static_cast<int>(parse_int("n", text.substr(0, dots)));
    r.hi = static_cast<int>(parse_int("n", text.substr(dots + 2)));
  }
  if (r.lo < 0) throw InvalidArgument("scale range '" + text + "' must be non-negative");
  if (r.lo > r.hi) throw InvalidArgument("scale range '" + text + "' is empty");
  return r;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "space") c.space = value;
  else if (key == "variant") c.variant = value;
  else if (key == "n") c.n = parse_range(value);
  else if (key == "n-max" || key == "n_max") c.n_max = static_cast<int>(parse_int(key, value));
  else if (key == "d") c.d = static_cast<int>(parse_int(key, value));
  else if (key == "u") c.u = parse_double(key, value);
  else if (key == "sweep") c.sweep = value;
  else if (key == "trials") {
    const long long t = parse_int(key, value);
    if (t < 1) throw InvalidArgument("trials must be at least 1, got " + value);
    c.trials = static_cast<std::size_t>(t);
  } else if (key == "seed") {
    std::uint64_t s = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), s);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
      throw InvalidArgument("seed expects a non-negative integer, got '" + value + "'");
    c.seed = s;
  } else if (key == "check") c.check = value;
  else if (key == "drift") c.drift = value;
  else if (key == "adversary") c.adversary = value;
  else if (key == "depth") c.depth = static_cast<int>(parse_int(key, value));
  else if (key == "t") c.t = parse_double(key, value);
  else if (key == "s") c.s = parse_double(key, value);
  else if (key == "out") c.out = value;
  else if (key == "plot") c.plot = value;
  else if (key == "command") c.command = value;
  else throw InvalidArgument("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> commands{"estimate", "cantor", "prevalence", "statement31", "energy", "lemma52", "report"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw InvalidArgument("unknown command '" + command + "'");
  if (n && n->lo > n->hi) throw InvalidArgument("scale range is empty");
  if (trials && *trials < 1) throw InvalidArgument("trials must be at least 1");
  if (n_max && *n_max < 1) throw InvalidArgument("--n-max must be at least 1");
  if (!plot.empty() && !(command == "estimate" || (command == "cantor" && n)))
    throw InvalidArgument("--plot needs a scale-series experiment (estimate, or cantor with --n)");
  if (command == "estimate") {
    reference_dimension(space);
    parse_variant(variant);
    if (d < 0 || d > 2) throw InvalidArgument("estimate: --d must be 0 (base only), 1 or 2");
  } else if (command == "cantor") {
    if (n && n->lo < 1) throw InvalidArgument("cantor: slope range must start at n >= 1");
    if (n && n->hi - n->lo < 1) throw InvalidArgument("cantor: slope range needs at least two scales");
  } else if (command == "prevalence" || command == "statement31") {
    if (space != "cantor" && space != "interval")
      throw InvalidArgument(command + ": --space must be cantor or interval");
    if (d < 0 || d > 2) throw InvalidArgument(command + ": --d must be 1 or 2");
    if (command == "prevalence") {
      if (drift != "zero" && drift != "f" && drift != "both")
        throw InvalidArgument("prevalence: --drift must be zero, f or both");
      if (drift != "zero" && space != "cantor") throw InvalidArgument("prevalence: the f drift needs --space cantor");
      if (n && n->lo < 1) throw InvalidArgument("prevalence: n must be at least 1");
    } else {
      if (adversary != "zero" && adversary != "colliding" && adversary != "both")
        throw InvalidArgument("statement31: --adversary must be zero, colliding or both");
      if (n && n->lo != n->hi) throw InvalidArgument("statement31: --n takes a single scale index");
      if (n && n->lo < 1) throw InvalidArgument("statement31: n must be at least 1");
    }
  } else if (command == "energy") {
    if (check == "profile") {
      hausdorff_reference(space);
      if (n && n->hi - n->lo < 3) throw InvalidArgument("energy: the depth range needs at least 4 depths");
    } else if (check == "statement55") {
      if (space != "cantor") throw InvalidArgument("energy: statement55 runs on --space cantor");
      if (!(t > 0 && t < s)) throw InvalidArgument("energy: need 0 < t < s");
      if (depth < 1 || depth > 4) throw InvalidArgument("energy: --depth must be in 1..4");
      if (d < 0 || d > 1) throw InvalidArgument("energy: statement55 supports d = 1");
      if (drift != "zero" && drift != "f" && drift != "both")
        throw InvalidArgument("energy: --drift must be zero, f or both");
    } else {
      throw InvalidArgument("energy: --check must be profile or statement55");
    }
  } else if (command == "lemma52") {
    const int dd = d == 0 ? 1 : d;
    if (dd != 1 && dd != 2) throw InvalidArgument("lemma52: --d must be 1 or 2");
    if (u && !(*u > dd / 2.0)) throw InvalidArgument("lemma52: --u must exceed d/2");
    if (sweep != "all" && sweep != "p" && sweep != "q" && sweep != "theta")
      throw InvalidArgument("lemma52: --sweep must be all, p, q or theta");
  }
}

// ---------------------------------------------------------------------------

ResultTable run_estimate(const ExperimentConfig& c) {
  const ScaleRange r = c.n.value_or(ScaleRange{4, 12});
  const Variant v = parse_variant(c.variant);
  const SpaceDescriptor base = base_space(c.space);
  json p{{"space", c.space}, {"variant", variant_name(v)}, {"n_lo", r.lo}, {"n_hi", r.hi}, {"d", c.d}};
  ResultTable t = make_table("estimate", c, p);
  const ScaleSeries s = c.d == 0 ? packing_series(base, r.lo, r.hi) : product_packing_series(base, c.d, r.lo, r.hi);
  const auto est = box_dim_estimate(s, v);
  const double ref = reference_dimension(c.space) + c.d;
  t.rows.push_back(make_row("estimate", p, est.slope, ref, std::fabs(est.slope - ref) <= kEstimateTol, c.seed));
  t.series.push_back({c.space + (c.d ? "*cube" + std::to_string(c.d) : std::string()), s});
  return t;
}

ResultTable run_cantor(const ExperimentConfig& c) {
  const int n_max = c.n_max.value_or(c.n ? 0 : 3);
  json tp{{"n_max", n_max}};
  if (c.n) tp["n_lo"] = c.n->lo, tp["n_hi"] = c.n->hi;
  ResultTable t = make_table("cantor", c, tp);
  constexpr int kLimit = 28;
  for (int n = 1; n <= n_max; ++n) {
    const auto cf = closed_form_counts(n);
    for (auto fn : {DigitFunction::OddDigits, DigitFunction::EvenDigits, DigitFunction::Sum}) {
      const std::uint64_t brute = brute_force_mesh_count(fn, n, kLimit);
      const mpz_class& ref = fn == DigitFunction::OddDigits ? cf.f : fn == DigitFunction::EvenDigits ? cf.g : cf.sum;
      json p{{"n", n}, {"function", function_name(fn)}};
      t.rows.push_back(make_row("cantor.count", p, static_cast<double>(brute), ref.get_d(), mpz_class(std::to_string(brute)) == ref, c.seed));
    }
  }
  if (c.n) {
    double slope_f = 0, slope_sum = 0;
    for (auto fn : {DigitFunction::OddDigits, DigitFunction::Sum}) {
      const ScaleSeries s = mesh_series(fn, c.n->lo, c.n->hi, kLimit);
      const double slope = box_dim_estimate(s, Variant::FullFit).slope;
      const double ref = fn == DigitFunction::OddDigits ? std::log(8.0) / std::log(9.0) : 0.5 + kLog2Over3;
      json p{{"function", function_name(fn)}, {"n_lo", c.n->lo}, {"n_hi", c.n->hi}, {"tolerance", kSlopeTol}};
      t.rows.push_back(make_row("cantor.slope", p, slope, ref, std::fabs(slope - ref) <= kSlopeTol, c.seed));
      t.series.push_back({std::string("graph(") + function_name(fn) + ")", s});
      (fn == DigitFunction::OddDigits ? slope_f : slope_sum) = slope;
    }
    json p{{"n_lo", c.n->lo}, {"n_hi", c.n->hi}};
    t.rows.push_back(make_row("cantor.gap", p, slope_sum - slope_f, kGapMin, slope_sum - slope_f >= kGapMin, c.seed));
  }
  return t;
}

ResultTable run_prevalence(const ExperimentConfig& c) {
  const ScaleRange r = c.n.value_or(ScaleRange{5, 7});
  const int d = c.d == 0 ? 1 : c.d;
  const std::size_t trials = trials_or(c, 200);
  json tp{{"space", c.space}, {"d", d}, {"n_lo", r.lo}, {"n_hi", r.hi}, {"trials", trials}, {"drift", c.drift}};
  ResultTable t = make_table("prevalence", c, tp);
  const auto layers = build_layers(base_space(c.space), r.hi, d);
  std::vector<std::pair<std::string, Drift>> drifts;
  if (c.drift != "f") drifts.emplace_back("zero", zero_drift(d));
  if (c.drift != "zero") {
    if (d != 1) throw InvalidArgument("prevalence: the f drift is one-dimensional; use --d 1");
    drifts.emplace_back("f", cantor_f_drift());
  }
  std::vector<std::future<ResultRow>> jobs;
  for (const auto& [name, g] : drifts)
    for (int n = r.lo; n <= r.hi; ++n)
      jobs.push_back(std::async(std::launch::async, [&, n, name = name, g = g] {
        const auto e = event_trials(layers, g, n, trials, c.seed);
        json p{{"space", c.space}, {"d", d}, {"n", n}, {"drift", name}, {"trials", trials}};
        ResultRow row = make_row("prevalence.event", p, e.fraction, e.required, e.pass, c.seed);
        const auto [lo, hi] = wilson_interval(e.holds, e.trials);
        row.ci_low = lo;
        row.ci_high = hi;
        return row;
      }));
  for (auto& j : jobs) t.rows.push_back(j.get());
  return t;
}

ResultTable run_statement31(const ExperimentConfig& c) {
  const int n = c.n ? c.n->lo : 5;
  const int d = c.d == 0 ? 1 : c.d;
  const std::size_t trials = trials_or(c, 100000);
  json tp{{"space", c.space}, {"d", d}, {"n", n}, {"trials", trials}, {"adversary", c.adversary}};
  ResultTable t = make_table("statement31", c, tp);
  const auto layers = build_layers(base_space(c.space), n, d);
  const LayerSpec& layer = layers.back();
  std::vector<Adversary> advs;
  if (c.adversary != "colliding") advs.push_back(zero_adversary(d));
  if (c.adversary != "zero") advs.push_back(colliding_adversary(d));
  std::vector<std::future<ResultRow>> jobs;
  for (const auto& a : advs)
    jobs.push_back(std::async(std::launch::async, [&, a] {
      const auto r = simulate_statement_31(layer, a, trials, c.seed);
      json p{{"space", c.space}, {"d", d}, {"n", n}, {"adversary", a.name}, {"trials", trials}, {"s_n", r.s_n},
             {"k_n", r.k_n}, {"ell_n", r.ell_n}, {"failures", r.failures}};
      ResultRow row = make_row("statement31", p, r.p_hat, r.allowed, r.pass, c.seed);
      row.ci_low = r.ci_low;
      row.ci_high = r.ci_high;
      return row;
    }));
  for (auto& j : jobs) t.rows.push_back(j.get());
  return t;
}

namespace {

ResultTable energy_profile_table(const ExperimentConfig& c) {
  const ScaleRange r = c.n.value_or(ScaleRange{4, 12});
  const auto grid = default_s_grid();
  json tp{{"space", c.space}, {"depth_lo", r.lo}, {"depth_hi", r.hi}, {"s_step", 0.05}, {"s_max", 1.5}};
  ResultTable t = make_table("energy.profile", c, tp);
  const auto prof = energy_dimension_profile(measure_family(c.space), depth_list(r), grid);
  const double ref = hausdorff_reference(c.space);
  json p = tp;
  p["flag"] = prof.flag;
  ResultRow row = make_row("energy.profile", p, prof.estimate, ref, std::fabs(prof.estimate - ref) <= kEnergyTol, c.seed);
  row.ci_low = prof.bracket_lo;
  row.ci_high = prof.bracket_hi;
  t.rows.push_back(row);
  if (c.space == "cantor") {
    const std::size_t lo = nearest_index(grid, 0.5), hi = nearest_index(grid, 0.75);
    t.rows.push_back(make_row("energy.bounded", json{{"space", c.space}, {"s", grid[lo]}}, prof.energies[lo].back(), std::nullopt,
                              !prof.divergent[lo], c.seed));
    t.rows.push_back(make_row("energy.divergent", json{{"space", c.space}, {"s", grid[hi]}}, prof.energies[hi].back(),
                              std::nullopt, static_cast<bool>(prof.divergent[hi]), c.seed));
  }
  return t;
}

ResultTable statement55_table(const ExperimentConfig& c, const std::vector<int>& energy_levels) {
  const std::size_t trials = trials_or(c, 1000);
  json tp{{"depth", c.depth}, {"t", c.t}, {"s", c.s}, {"d", 1}, {"trials", trials}, {"drift", c.drift}};
  ResultTable t = make_table("energy.statement55", c, tp);
  const auto family = build_nested_family(SpaceDescriptor::triadic_cantor(), c.depth);
  std::vector<std::pair<std::string, RealDrift>> drifts;
  if (c.drift != "f") drifts.emplace_back("zero", zero_real_drift(1));
  if (c.drift != "zero") drifts.emplace_back("f", cantor_f_real_drift());
  std::vector<std::future<ResultTable>> jobs;
  for (const auto& [name, g] : drifts)
    jobs.push_back(std::async(std::launch::async, [&, name = name, g = g] {
      ResultTable part;
      const auto r = statement_55_check(family, g, c.t, c.s, 1, trials, c.seed);
      json base{{"depth", c.depth}, {"t", c.t}, {"s", c.s}, {"d", 1}, {"trials", trials}, {"drift", name}, {"pairs", r.pairs.size()}};
      for (const auto& dc : r.decades) {
        json p = base;
        p["decade"] = dc.decade;
        p["decade_pairs"] = dc.pairs;
        part.rows.push_back(make_row("statement55.decade", p, dc.c_hat, std::nullopt, std::isfinite(dc.c_hat), c.seed));
      }
      part.rows.push_back(make_row("statement55.c_hat", base, r.c_hat, std::nullopt, std::isfinite(r.c_hat), c.seed));
      part.rows.push_back(make_row("statement55.stability", base, r.stability, kStabilityMax, r.pass, c.seed));
      for (int level : energy_levels) {
        const auto e = expected_energy_check(family, piece_measure(family, level), g, c.t, c.s, 1, trials, c.seed, r.c_hat);
        json p = base;
        p["level"] = level;
        p["base_energy"] = e.base_energy;
        p["c_hat"] = e.c_hat;
        ResultRow row = make_row("expected_energy", p, e.mean_energy, e.allowed, e.pass, c.seed);
        row.ci_low = e.mean_energy - 1.96 * e.energy_std_error;
        row.ci_high = e.mean_energy + 1.96 * e.energy_std_error;
        part.rows.push_back(row);
      }
      return part;
    }));
  for (auto& j : jobs) t.append(j.get());
  return t;
}

}  // namespace

ResultTable run_energy(const ExperimentConfig& c) {
  if (c.check == "profile") return energy_profile_table(c);
  std::vector<int> levels;
  for (int l = 2; l <= c.depth; ++l) levels.push_back(l);
  if (levels.empty()) levels.push_back(1);
  return statement55_table(c, levels);
}

ResultTable run_lemma52(const ExperimentConfig& c) {
  const int d = c.d == 0 ? 1 : c.d;
  std::vector<double> us;
  if (c.u) us.push_back(*c.u);
  else if (d == 1) us = {0.75, 1.0, 1.5};
  else us = {1.25, 1.5, 2.0};
  std::vector<double> grid;
  for (int k = 1; k <= 8; ++k) grid.push_back(std::ldexp(1.0, -k));
  const std::vector<double> thetas =
      (c.sweep == "all" || c.sweep == "theta") ? std::vector<double>{0.0, 0.3, 2.0} : std::vector<double>{0.0};
  const std::vector<double> ps = (c.sweep == "all" || c.sweep == "p") ? grid : std::vector<double>{0.5};
  const std::vector<double> qs = (c.sweep == "all" || c.sweep == "q") ? grid : std::vector<double>{0.5};
  const std::size_t samples = d == 2 ? trials_or(c, 1000000) : 0;
  json tp{{"d", d}, {"sweep", c.sweep}};
  ResultTable t = make_table("lemma52", c, tp);

  if (d == 1 && (!c.u || *c.u == 1.0)) {
    const auto spot = lemma_52_check(1, 1, {0.0}, 1.0, 1);
    const double ref = std::numbers::pi / 2 - std::log(2.0);
    t.rows.push_back(make_row("lemma52.spot", json{{"p", 1}, {"q", 1}, {"theta", 0}, {"u", 1}, {"d", 1}, {"tolerance", kLemmaSpotTol}},
                              spot.integral, ref, std::fabs(spot.integral - ref) <= kLemmaSpotTol, c.seed));
  }
  std::uint64_t stream = 0;
  for (double u : us) {
    struct Cell {
      double p, q, theta;
      std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (double p : ps)
      for (double th : thetas)
        for (double q : qs) cells.push_back({p, q, th, derive_seed(c.seed, stream++)});
    std::vector<std::future<Lemma52Result>> jobs;
    for (const auto& cell : cells)
      jobs.push_back(std::async(std::launch::async, [=] {
        std::vector<double> theta(static_cast<std::size_t>(d), 0.0);
        theta[0] = cell.theta;
        return lemma_52_check(cell.p, cell.q, theta, u, d, cell.seed, samples == 0 ? 1 : samples);
      }));
    double max_ratio = 0;
    const double constant = lemma52_constant(d, u);
    std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> by_p_theta;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto res = jobs[k].get();
      const auto& cell = cells[k];
      json p{{"d", d}, {"u", u}, {"p", cell.p}, {"q", cell.q}, {"theta", cell.theta}};
      ResultRow row = make_row("lemma52.ratio", p, res.ratio, constant, res.pass, d == 2 ? cell.seed : c.seed);
      if (d == 2) {
        const double scale = std::pow(cell.p, d) * std::pow(cell.q, d - 2 * u);
        row.ci_low = res.ratio - 1.96 * res.std_error / scale;
        row.ci_high = res.ratio + 1.96 * res.std_error / scale;
      }
      t.rows.push_back(row);
      max_ratio = std::max(max_ratio, res.ratio);
      by_p_theta[{cell.p, cell.theta}].emplace_back(std::log(cell.q), std::log(res.ratio));
    }
    t.rows.push_back(make_row("lemma52.bound", json{{"d", d}, {"u", u}, {"sweep", c.sweep}}, max_ratio, constant,
                              max_ratio <= constant, c.seed));
    if (qs.size() >= 2) {
      for (const auto& [key, pts] : by_p_theta) {
        double mx = 0, my = 0;
        for (auto [x, y] : pts) mx += x, my += y;
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0, sxx = 0;
        for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
        const double slope = sxy / sxx;
        json p{{"d", d}, {"u", u}, {"p", key.first}, {"theta", key.second}, {"band", kLemmaSlopeBand}};
        t.rows.push_back(make_row("lemma52.slope", p, slope, 0.0, std::fabs(slope) <= kLemmaSlopeBand, c.seed));
      }
    }
  }
  return t;
}

ResultTable run_report(const ExperimentConfig& c) {
  ResultTable t = make_table("report", c, json::object());
  std::vector<std::future<CriterionOutcome>> jobs;
  for (int id = 1; id <= kCriterionCount; ++id)
    jobs.push_back(std::async(std::launch::async, [id, seed = c.seed] { return run_criterion(id, seed); }));
  for (auto& j : jobs) {
    const auto o = j.get();
    t.append(o.table);
    t.rows.push_back(make_row("criterion", json{{"id", o.id}, {"title", o.title}}, o.pass ? 1.0 : 0.0, 1.0, o.pass, c.seed));
  }
  return t;
}

ResultTable run(const ExperimentConfig& c) {
  c.validate();
  if (c.command == "estimate") return run_estimate(c);
  if (c.command == "cantor") return run_cantor(c);
  if (c.command == "prevalence") return run_prevalence(c);
  if (c.command == "statement31") return run_statement31(c);
  if (c.command == "energy") return run_energy(c);
  if (c.command == "lemma52") return run_lemma52(c);
  return run_report(c);
}

// ---------------------------------------------------------------------------

ScaleRange product_window(const std::string& space, int d) {
  if (d < 1 || d > 2) throw InvalidArgument("product_window: d must be 1 or 2");
  if (space == "cantor") return d == 1 ? ScaleRange{5, 11} : ScaleRange{2, 7};
  if (space == "interval") return d == 1 ? ScaleRange{5, 11} : ScaleRange{5, 7};
  if (space == "harmonic") return d == 1 ? ScaleRange{5, 11} : ScaleRange{5, 8};
  throw InvalidArgument("unknown space '" + space + "'");
}

namespace {

ScaleRange ordering_window(const std::string& space) {
  if (space == "cantor") return {4, 14};
  return {4, 12};
}

CriterionOutcome criterion_1(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "cantor";
  c.n_max = 3;
  c.seed = seed;
  CriterionOutcome o{1, "exact mesh counts for f, g, f+g at n = 1..3", false, "", 0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  o.table = run_cantor(c);
  o.seconds = seconds_since(t0);
  o.pass = o.table.all_pass() && o.seconds < kCountSeconds;
  std::ostringstream os;
  for (const auto& r : o.table.rows) os << format_double(r.value) << (r.pass ? "" : "(x)") << ' ';
  os << "runtime " << format_double(std::round(o.seconds * 100) / 100) << "s < " << kCountSeconds << "s";
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_2(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "cantor";
  c.n = ScaleRange{3, 7};
  c.n_max = 0;
  c.seed = seed;
  CriterionOutcome o{2, "base-9 mesh slopes over n in [3,7] and the f+g gap", false, "", 0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  o.table = run_cantor(c);
  o.seconds = seconds_since(t0);
  o.pass = o.table.all_pass() && o.seconds < kSlopeSeconds;
  std::ostringstream os;
  for (const auto& r : o.table.rows)
    os << r.experiment << '=' << format_double(std::round(r.value * 1e5) / 1e5) << (r.pass ? "" : "(x)") << ' ';
  os << "tol " << kSlopeTol << " runtime " << format_double(std::round(o.seconds * 10) / 10) << "s";
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_3(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "estimate";
  c.space = "harmonic";
  c.variant = "liminf";
  c.n = ScaleRange{4, 12};
  c.seed = seed;
  CriterionOutcome o{3, "harmonic sequence lower box dimension over n in [4,12]", false, "", 0, {}};
  o.table = run_estimate(c);
  o.pass = o.table.all_pass();
  o.detail = "liminf slope " + format_double(std::round(o.table.rows[0].value * 1e4) / 1e4) + " vs 0.5 +- " +
             format_double(kEstimateTol);
  return o;
}

CriterionOutcome criterion_4(std::uint64_t seed) {
  CriterionOutcome o{4, "energy <= liminf <= limsup and product dimension = base + d", false, "", 0, {}};
  ResultTable& t = o.table;
  t.experiment = "ordering";
  t.seed = seed;
  t.param_json = params(json::object());
  std::ostringstream os;
  const std::vector<std::string> spaces{"interval", "cantor", "harmonic"};
  std::vector<std::future<ResultTable>> jobs;
  for (const auto& space : spaces)
    jobs.push_back(std::async(std::launch::async, [space, seed] {
      ResultTable part;
      const ScaleRange w = ordering_window(space);
      const auto series = packing_series(base_space(space), w.lo, w.hi);
      const double lo = box_dim_estimate(series, Variant::Liminf).slope;
      const double hi = box_dim_estimate(series, Variant::Limsup).slope;
      const auto prof = energy_dimension_profile(measure_family(space), depth_list({4, 12}), default_s_grid());
      json p{{"space", space}, {"n_lo", w.lo}, {"n_hi", w.hi}, {"depth_lo", 4}, {"depth_hi", 12}, {"slack", kOrderSlack}};
      part.rows.push_back(make_row("ordering.energy_le_liminf", p, prof.estimate, lo, prof.estimate <= lo + kOrderSlack, seed));
      part.rows.push_back(make_row("ordering.liminf_le_limsup", p, lo, hi, lo <= hi + kOrderSlack, seed));
      for (int d = 1; d <= 2; ++d) {
        const ScaleRange pw = product_window(space, d);
        const double b = box_dim_estimate(packing_series(base_space(space), pw.lo, pw.hi), Variant::FullFit).slope;
        const double pr =
            box_dim_estimate(product_packing_series(base_space(space), d, pw.lo, pw.hi), Variant::FullFit).slope;
        json q{{"space", space}, {"d", d}, {"n_lo", pw.lo}, {"n_hi", pw.hi}, {"tolerance", kProductTol}, {"base_slope", b}};
        part.rows.push_back(make_row("product.slope", q, pr, b + d, std::fabs(pr - b - d) <= kProductTol, seed));
      }
      return part;
    }));
  for (auto& j : jobs) t.append(j.get());
  for (const auto& r : t.rows) {
    const json p = json::parse(r.param_json);
    os << p["space"].get<std::string>() << ':' << r.experiment.substr(r.experiment.find('.') + 1);
    if (p.contains("d")) os << "(d=" << p["d"].get<int>() << ')';
    os << '=' << format_double(std::round(r.value * 1e3) / 1e3) << '/' << format_double(std::round(*r.reference * 1e3) / 1e3)
       << (r.pass ? "" : "(x)") << ' ';
  }
  o.pass = t.all_pass();
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_5(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "energy";
  c.space = "cantor";
  c.n = ScaleRange{4, 12};
  c.seed = seed;
  CriterionOutcome o{5, "energy profile of the natural Cantor measure brackets log2/log3", false, "", 0, {}};
  o.table = run_energy(c);
  o.pass = o.table.all_pass();
  const auto& r = o.table.rows[0];
  o.detail = "estimate " + format_double(r.value) + " bracket [" + format_double(*r.ci_low) + ", " + format_double(*r.ci_high) +
             "] bounded@0.5=" + (o.table.rows[1].pass ? "yes" : "no") + " divergent@0.75=" + (o.table.rows[2].pass ? "yes" : "no");
  return o;
}

CriterionOutcome criterion_6(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "statement31";
  c.space = "cantor";
  c.n = ScaleRange{5, 5};
  c.d = 1;
  c.trials = 100000;
  c.seed = seed;
  CriterionOutcome o{6, "packing failure probability at n = 5, zero and colliding adversaries", false, "", 0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  o.table = run_statement31(c);
  o.seconds = seconds_since(t0);
  o.pass = o.table.all_pass() && o.seconds < kStatement31Seconds;
  std::ostringstream os;
  for (const auto& r : o.table.rows)
    os << json::parse(r.param_json)["adversary"].get<std::string>() << ": wilson_hi " << format_double(*r.ci_high)
       << " <= " << format_double(*r.reference) << (r.pass ? "" : "(x)") << "; ";
  os << "runtime " << format_double(std::round(o.seconds * 10) / 10) << "s";
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_7(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "prevalence";
  c.space = "cantor";
  c.d = 1;
  c.n = ScaleRange{5, 7};
  c.trials = 200;
  c.drift = "both";
  c.seed = seed;
  CriterionOutcome o{7, "event fraction over 200 witnesses, n = 5..7, drifts 0 and f", false, "", 0, {}};
  o.table = run_prevalence(c);
  o.pass = o.table.all_pass();
  std::ostringstream os;
  for (const auto& r : o.table.rows) {
    const json p = json::parse(r.param_json);
    os << p["drift"].get<std::string>() << "/n" << p["n"].get<int>() << '=' << format_double(r.value) << ">="
       << format_double(*r.reference) << (r.pass ? "" : "(x)") << ' ';
  }
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_8(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "lemma52";
  c.d = 1;
  c.sweep = "all";
  c.seed = seed;
  CriterionOutcome o{8, "integral bound: constant per u, flat q trend, spot value", false, "", 0, {}};
  o.table = run_lemma52(c);
  o.pass = o.table.all_pass();
  std::ostringstream os;
  double worst = 0;
  std::size_t slopes = 0, slope_fail = 0;
  for (const auto& r : o.table.rows) {
    if (r.experiment == "lemma52.spot") os << "spot " << format_double(r.value) << (r.pass ? "" : "(x)") << "; ";
    if (r.experiment == "lemma52.bound") {
      const json p = json::parse(r.param_json);
      os << "u=" << p["u"].get<double>() << " max ratio " << format_double(std::round(r.value * 1e4) / 1e4) << " <= "
         << format_double(std::round(*r.reference * 1e4) / 1e4) << (r.pass ? "" : "(x)") << "; ";
    }
    if (r.experiment == "lemma52.slope") {
      ++slopes;
      if (!r.pass) ++slope_fail;
      if (std::fabs(r.value) > std::fabs(worst)) worst = r.value;
    }
  }
  os << "q-slopes outside +-" << kLemmaSlopeBand << ": " << slope_fail << '/' << slopes << " (worst "
     << format_double(std::round(worst * 1e3) / 1e3) << ")";
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_9(std::uint64_t seed) {
  ExperimentConfig c;
  c.command = "energy";
  c.check = "statement55";
  c.space = "cantor";
  c.depth = 3;
  c.t = 0.5;
  c.s = 0.6;
  c.d = 1;
  c.trials = 1000;
  c.drift = "both";
  c.seed = seed;
  CriterionOutcome o{9, "separation-stable expectation constant and expected energy bound", false, "", 0, {}};
  o.table = statement55_table(c, {2, 3});
  o.pass = o.table.all_pass();
  std::ostringstream os;
  for (const auto& r : o.table.rows) {
    const json p = json::parse(r.param_json);
    if (r.experiment == "statement55.stability")
      os << p["drift"].get<std::string>() << ": stability " << format_double(std::round(r.value * 1e3) / 1e3) << " <= 2"
         << (r.pass ? "" : "(x)") << ' ';
    if (r.experiment == "expected_energy")
      os << "E[I] L" << p["level"].get<int>() << ' ' << format_double(std::round(r.value * 1e2) / 1e2) << " <= "
         << format_double(std::round(*r.reference * 1e2) / 1e2) << (r.pass ? "" : "(x)") << "; ";
  }
  o.detail = os.str();
  return o;
}

CriterionOutcome criterion_10(std::uint64_t seed) {
  CriterionOutcome o{10, "same seed reproduces byte-identical CSV", false, "", 0, {}};
  o.table.experiment = "determinism";
  o.table.seed = seed;
  o.table.param_json = params(json::object());
  const std::vector<int> ids{1, 3, 5, 6, 7, 8, 9};
  std::vector<std::future<std::pair<std::string, std::string>>> jobs;
  for (int id : ids)
    jobs.push_back(std::async(std::launch::async, [id, seed] {
      const std::string first = to_csv(run_criterion(id, seed).table);
      const std::string second = to_csv(run_criterion(id, seed).table);
      return std::make_pair(first, second);
    }));
  std::ostringstream os;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto [a, b] = jobs[k].get();
    const bool same = a == b && !a.empty();
    o.table.rows.push_back(make_row("determinism", json{{"criterion", ids[k]}, {"bytes", a.size()}}, same ? 1.0 : 0.0, 1.0, same, seed));
    os << "c" << ids[k] << (same ? " identical " : " DIFFERS ");
  }
  o.pass = o.table.all_pass();
  o.detail = os.str();
  return o;
}

}  // namespace

CriterionOutcome run_criterion(int id, std::uint64_t seed) {
  switch (id) {
    case 1: return criterion_1(seed);
    case 2: return criterion_2(seed);
    case 3: return criterion_3(seed);
    case 4: return criterion_4(seed);
    case 5: return criterion_5(seed);
    case 6: return criterion_6(seed);
    case 7: return criterion_7(seed);
    case 8: return criterion_8(seed);
    case 9: return criterion_9(seed);
    case 10: return criterion_10(seed);
  }
  throw InvalidArgument("criterion id must be in 1.." + std::to_string(kCriterionCount));
}

}  // namespace dimlab
