#pragma once

#include <cstddef>
#include <vector>

#include "dimlab/metric_spaces.hpp"

namespace dimlab {

enum class PackingMethod { Greedy, Exact };

const char* method_name(PackingMethod m);

/// A delta-packing: witness indices into the net, pairwise distances > delta.
struct PackingResult {
  int scale_index = 0;
  std::size_t count = 0;
  std::vector<std::size_t> witness;
  PackingMethod method = PackingMethod::Greedy;
};

/// Exact "distance > delta" test on a net with a floating-point pre-filter.
///
/// Pairs whose squared distance is not clearly separated from delta^2 in
/// double precision are decided exactly, in 128-bit integers when the net
/// has a common-denominator form that fits, otherwise with rationals.
class SeparationTest {
 public:
  SeparationTest(const ResolutionNet& net, const Rational& delta);

  bool separated(std::size_t i, std::size_t j) const;
  /// Same test with precomputed embeddings of both points.
  bool separated(std::size_t i, const double* xi, const std::int64_t* ni, std::size_t j, const double* xj,
                 const std::int64_t* nj) const;

  const ResolutionNet& net() const { return net_; }
  double delta() const { return delta_d_; }
  bool integer_path() const { return int_ok_; }

 private:
  bool exact(std::size_t i, std::size_t j, const std::int64_t* ni, const std::int64_t* nj) const;

  const ResolutionNet& net_;
  Rational delta_sq_;
  double delta_d_ = 0;
  double delta_sq_d_ = 0;
  bool int_ok_ = false;
  std::vector<__int128> weights_;
  __int128 rhs_ = 0;
};

/// Greedy maximal packing in net order (lexicographic on exact coordinates).
/// Requires net.scale_index() >= n + 1.
PackingResult max_packing_greedy(const ResolutionNet& net, int n);
/// Greedy maximal packing for an explicit separation delta (no scale precondition).
PackingResult max_packing_greedy_delta(const ResolutionNet& net, const Rational& delta);

constexpr std::size_t kDefaultExactLimit = 64;

/// Maximum packing by branch and bound; refuses instances above `limit` points.
PackingResult max_packing_exact(const ResolutionNet& net, int n, std::size_t limit = kDefaultExactLimit);
PackingResult max_packing_exact_delta(const ResolutionNet& net, const Rational& delta,
                                      std::size_t limit = kDefaultExactLimit);

/// Exact when the net fits under the limit, greedy otherwise.
PackingResult max_packing_auto(const ResolutionNet& net, int n, std::size_t limit = kDefaultExactLimit);

/// Maximum independent set of a graph on at most 64 vertices given by
/// adjacency bitmasks (bit j of adj[i] set when i and j conflict).
std::vector<std::size_t> maximum_independent_set(const std::vector<std::uint64_t>& adj);

}  // namespace dimlab
