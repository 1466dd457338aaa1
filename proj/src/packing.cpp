#include "dimlab/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace dimlab {

const char* method_name(PackingMethod m) { return m == PackingMethod::Exact ? "exact" : "greedy"; }

namespace {

int bits_of(__int128 v) {
  if (v < 0) v = -v;
  int b = 0;
  while (v > 0) {
    v >>= 1;
    ++b;
  }
  return b;
}

constexpr double kTieBand = 1e-9;

}  // namespace

SeparationTest::SeparationTest(const ResolutionNet& net, const Rational& delta) : net_(net) {
  if (sgn(delta) <= 0) throw InvalidArgument("packing: separation delta must be positive");
  delta_sq_ = delta * delta;
  delta_d_ = to_double(delta);
  delta_sq_d_ = delta_d_ * delta_d_;
  if (net.is_cloud() || !net.has_integer_coords()) return;
  if (!delta.get_num().fits_slong_p() || !delta.get_den().fits_slong_p()) return;
  const __int128 a = delta.get_num().get_si();
  const __int128 b = delta.get_den().get_si();
  const auto& dens = net.axis_denominators();
  mpz_class lcm = 1;
  for (auto dv : dens) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), mpz_class(static_cast<long>(dv)).get_mpz_t());
  if (!lcm.fits_slong_p()) return;
  const __int128 m = lcm.get_si();
  if (bits_of(a * m) > 60) return;
  weights_.resize(dens.size());
  for (std::size_t k = 0; k < dens.size(); ++k) {
    const __int128 f = (m / dens[k]) * b;
    if (bits_of(f) + bits_of(net.axis_span(k)) > 60) {
      weights_.clear();
      return;
    }
    weights_[k] = f * f;
  }
  rhs_ = (a * m) * (a * m);
  int_ok_ = true;
}

bool SeparationTest::exact(std::size_t i, std::size_t j, const std::int64_t* ni, const std::int64_t* nj) const {
  if (net_.is_cloud()) {
    const Rational& d = net_.space().cloud_distance(net_.explicit_point(i).index, net_.explicit_point(j).index);
    return d * d > delta_sq_;
  }
  if (int_ok_ && ni != nullptr && nj != nullptr) {
    __int128 total = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      const __int128 diff = static_cast<__int128>(ni[k]) - nj[k];
      total += diff * diff * weights_[k];
    }
    return total > rhs_;
  }
  return net_.squared_distance(i, j) > delta_sq_;
}

bool SeparationTest::separated(std::size_t i, const double* xi, const std::int64_t* ni, std::size_t j,
                               const double* xj, const std::int64_t* nj) const {
  double d2 = 0;
  const std::size_t dim = net_.dim();
  for (std::size_t k = 0; k < dim; ++k) {
    const double t = xi[k] - xj[k];
    d2 += t * t;
  }
  if (d2 > delta_sq_d_ * (1 + kTieBand)) return true;
  if (d2 < delta_sq_d_ * (1 - kTieBand)) return false;
  return exact(i, j, ni, nj);
}

bool SeparationTest::separated(std::size_t i, std::size_t j) const {
  if (net_.is_cloud()) return exact(i, j, nullptr, nullptr);
  double xi[16], xj[16];
  std::int64_t ni[16], nj[16];
  net_.approx(i, xi);
  net_.approx(j, xj);
  if (int_ok_) {
    net_.integer_coords(i, ni);
    net_.integer_coords(j, nj);
  }
  return separated(i, xi, int_ok_ ? ni : nullptr, j, xj, int_ok_ ? nj : nullptr);
}

// ---------------------------------------------------------------------------

namespace {

/// Uniform grid of cell size delta holding the accepted points.
class CellIndex {
 public:
  CellIndex(std::size_t dim, double cell, const std::vector<double>& lo, const std::vector<double>& hi)
      : dim_(dim), cell_(cell), lo_(lo) {
    sides_.resize(dim);
    double total = 1;
    for (std::size_t k = 0; k < dim; ++k) {
      sides_[k] = static_cast<std::int64_t>(std::floor((hi[k] - lo[k]) / cell)) + 1;
      total *= static_cast<double>(sides_[k]);
    }
    dense_ = total <= static_cast<double>(1 << 26);
    if (dense_) head_.assign(static_cast<std::size_t>(total), -1);
  }

  void cell_of(const double* x, std::int64_t* c) const {
    for (std::size_t k = 0; k < dim_; ++k) {
      std::int64_t v = static_cast<std::int64_t>(std::floor((x[k] - lo_[k]) / cell_));
      c[k] = std::clamp<std::int64_t>(v, 0, sides_[k] - 1);
    }
  }

  template <class F>
  bool any_neighbor(const std::int64_t* c, F&& conflict) const {
    std::int64_t off[16];
    for (std::size_t k = 0; k < dim_; ++k) off[k] = -1;
    while (true) {
      bool inside = true;
      std::int64_t cc[16];
      for (std::size_t k = 0; k < dim_; ++k) {
        cc[k] = c[k] + off[k];
        if (cc[k] < 0 || cc[k] >= sides_[k]) inside = false;
      }
      if (inside) {
        for (std::int64_t e = first(cc); e >= 0; e = next_[static_cast<std::size_t>(e)])
          if (conflict(static_cast<std::size_t>(e))) return true;
      }
      std::size_t k = 0;
      while (k < dim_ && off[k] == 1) off[k++] = -1;
      if (k == dim_) break;
      ++off[k];
    }
    return false;
  }

  void insert(const std::int64_t* c, std::size_t id) {
    if (next_.size() <= id) next_.resize(id + 1, -1);
    if (dense_) {
      auto& h = head_[linear(c)];
      next_[id] = h;
      h = static_cast<std::int64_t>(id);
    } else {
      auto& h = sparse_.try_emplace(key(c), -1).first->second;
      next_[id] = h;
      h = static_cast<std::int64_t>(id);
    }
  }

 private:
  std::size_t linear(const std::int64_t* c) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dim_; ++k) idx = idx * static_cast<std::size_t>(sides_[k]) + static_cast<std::size_t>(c[k]);
    return idx;
  }
  std::uint64_t key(const std::int64_t* c) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t k = 0; k < dim_; ++k) {
      h ^= static_cast<std::uint64_t>(c[k]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
  std::int64_t first(const std::int64_t* c) const {
    if (dense_) return head_[linear(c)];
    auto it = sparse_.find(key(c));
    return it == sparse_.end() ? -1 : it->second;
  }

  std::size_t dim_;
  double cell_;
  std::vector<double> lo_;
  std::vector<std::int64_t> sides_;
  bool dense_ = false;
  std::vector<std::int64_t> head_;
  std::unordered_map<std::uint64_t, std::int64_t> sparse_;
  std::vector<std::int64_t> next_;
};

PackingResult greedy_impl(const ResolutionNet& net, const Rational& delta, int scale_index) {
  if (net.size() == 0) throw InvalidArgument("max_packing_greedy: empty net");
  SeparationTest sep(net, delta);
  PackingResult r;
  r.scale_index = scale_index;
  r.method = PackingMethod::Greedy;

  if (net.is_cloud()) {
    for (std::size_t i = 0; i < net.size(); ++i) {
      bool ok = true;
      for (auto j : r.witness)
        if (!sep.separated(i, j)) {
          ok = false;
          break;
        }
      if (ok) r.witness.push_back(i);
    }
    r.count = r.witness.size();
    return r;
  }

  const std::size_t dim = net.dim();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity()), hi(dim, -std::numeric_limits<double>::infinity());
  {
    double x[16];
    for (std::size_t e = 0; e < net.explicit_size(); ++e) {
      net.approx(e * (net.size() / net.explicit_size()), x);
      for (std::size_t k = 0; k < dim - static_cast<std::size_t>(net.grid_dim()); ++k) {
        lo[k] = std::min(lo[k], x[k]);
        hi[k] = std::max(hi[k], x[k]);
      }
    }
    for (std::size_t k = dim - static_cast<std::size_t>(net.grid_dim()); k < dim; ++k) {
      lo[k] = 0;
      hi[k] = 1;
    }
  }
  CellIndex index(dim, sep.delta(), lo, hi);
  const bool ints = sep.integer_path();
  std::vector<double> acc_x;
  std::vector<std::int64_t> acc_n;
  double x[16];
  std::int64_t nx[16], cell[16];
  for (std::size_t i = 0; i < net.size(); ++i) {
    net.approx(i, x);
    if (ints) net.integer_coords(i, nx);
    index.cell_of(x, cell);
    const bool blocked = index.any_neighbor(cell, [&](std::size_t slot) {
      return !sep.separated(i, x, ints ? nx : nullptr, r.witness[slot], &acc_x[slot * dim],
                            ints ? &acc_n[slot * dim] : nullptr);
    });
    if (blocked) continue;
    const std::size_t slot = r.witness.size();
    r.witness.push_back(i);
    acc_x.insert(acc_x.end(), x, x + dim);
    if (ints) acc_n.insert(acc_n.end(), nx, nx + dim);
    index.insert(cell, slot);
  }
  r.count = r.witness.size();
  return r;
}

struct MisSearch {
  const std::vector<std::uint64_t>& conflict;
  std::vector<std::uint64_t> compat;
  std::uint64_t best_set = 0;
  int best = 0;

  explicit MisSearch(const std::vector<std::uint64_t>& adj) : conflict(adj) {
    const std::size_t n = adj.size();
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    compat.resize(n);
    for (std::size_t i = 0; i < n; ++i) compat[i] = ~adj[i] & all & ~(std::uint64_t{1} << i);
  }

  void expand(std::uint64_t current, int size, std::uint64_t candidates) {
    if (candidates == 0) {
      if (size > best) {
        best = size;
        best_set = current;
      }
      return;
    }
    // Greedy colouring of the candidates by mutually conflicting classes gives
    // an upper bound on how many of them can still be added.
    int order[64], colour[64], m = 0, c = 0;
    std::uint64_t uncoloured = candidates;
    while (uncoloured) {
      ++c;
      std::uint64_t q = uncoloured;
      while (q) {
        const int v = std::countr_zero(q);
        q &= ~(std::uint64_t{1} << v);
        uncoloured &= ~(std::uint64_t{1} << v);
        q &= conflict[static_cast<std::size_t>(v)];
        order[m] = v;
        colour[m] = c;
        ++m;
      }
    }
    for (int k = m - 1; k >= 0; --k) {
      if (size + colour[k] <= best) return;
      const int v = order[k];
      const std::uint64_t bit = std::uint64_t{1} << v;
      expand(current | bit, size + 1, candidates & compat[static_cast<std::size_t>(v)]);
      candidates &= ~bit;
    }
  }
};

PackingResult exact_impl(const ResolutionNet& net, const Rational& delta, int scale_index, std::size_t limit) {
  if (net.size() == 0) throw InvalidArgument("max_packing_exact: empty net");
  if (limit > 64) throw InvalidArgument("max_packing_exact: limit above the 64-point bitset capacity");
  if (net.size() > limit)
    throw LimitExceeded("max_packing_exact: " + std::to_string(net.size()) + " points exceed the exact-search limit " +
                        std::to_string(limit) + "; use max_packing_greedy");
  SeparationTest sep(net, delta);
  const std::size_t n = net.size();
  std::vector<std::uint64_t> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!sep.separated(i, j)) {
        adj[i] |= std::uint64_t{1} << j;
        adj[j] |= std::uint64_t{1} << i;
      }
  PackingResult r;
  r.scale_index = scale_index;
  r.method = PackingMethod::Exact;
  r.witness = maximum_independent_set(adj);
  r.count = r.witness.size();
  return r;
}

}  // namespace

std::vector<std::size_t> maximum_independent_set(const std::vector<std::uint64_t>& adj) {
  if (adj.size() > 64) throw LimitExceeded("maximum_independent_set: more than 64 vertices");
  if (adj.empty()) return {};
  MisSearch search(adj);
  const std::size_t n = adj.size();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  search.expand(0, 0, all);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (search.best_set >> i & 1U) out.push_back(i);
  return out;
}

PackingResult max_packing_greedy(const ResolutionNet& net, int n) {
  if (net.scale_index() < n + 1)
    throw InvalidArgument("max_packing_greedy: net scale index " + std::to_string(net.scale_index()) +
                          " must be at least n+1 = " + std::to_string(n + 1));
  return greedy_impl(net, dyadic(n), n);
}

PackingResult max_packing_greedy_delta(const ResolutionNet& net, const Rational& delta) {
  return greedy_impl(net, delta, net.scale_index());
}

PackingResult max_packing_exact(const ResolutionNet& net, int n, std::size_t limit) {
  return exact_impl(net, dyadic(n), n, limit);
}

PackingResult max_packing_exact_delta(const ResolutionNet& net, const Rational& delta, std::size_t limit) {
  return exact_impl(net, delta, net.scale_index(), limit);
}

PackingResult max_packing_auto(const ResolutionNet& net, int n, std::size_t limit) {
  if (net.size() <= limit) return max_packing_exact(net, n, limit);
  return max_packing_greedy(net, n);
}

}  // namespace dimlab
