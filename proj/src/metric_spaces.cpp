#include "dimlab/metric_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dimlab {

SpaceDescriptor SpaceDescriptor::unit_interval() { return SpaceDescriptor{}; }

SpaceDescriptor SpaceDescriptor::triadic_cantor() {
  SpaceDescriptor s;
  s.kind_ = SpaceKind::TriadicCantor;
  return s;
}

SpaceDescriptor SpaceDescriptor::harmonic_sequence() {
  SpaceDescriptor s;
  s.kind_ = SpaceKind::HarmonicSequence;
  return s;
}

SpaceDescriptor SpaceDescriptor::product_with_cube(const SpaceDescriptor& base, int d) {
  if (d < 1) throw InvalidArgument("product_with_cube: cube dimension must be positive, got " + std::to_string(d));
  SpaceDescriptor s;
  s.kind_ = SpaceKind::ProductWithCube;
  s.base_ = std::make_shared<const SpaceDescriptor>(base.base());
  s.d_ = d + base.cube_dim();
  return s;
}

SpaceDescriptor SpaceDescriptor::point_cloud(const std::vector<std::vector<Rational>>& table) {
  const std::size_t n = table.size();
  if (n == 0) throw InvalidArgument("point_cloud: empty distance table");
  for (const auto& row : table)
    if (row.size() != n) throw InvalidArgument("point_cloud: distance table is not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (table[i][i] != 0) throw InvalidArgument("point_cloud: non-zero diagonal at " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (table[i][j] != table[j][i])
        throw InvalidArgument("point_cloud: asymmetric entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (i != j && sgn(table[i][j]) <= 0)
        throw InvalidArgument("point_cloud: non-positive distance between distinct points " + std::to_string(i) +
                              " and " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (table[i][k] > table[i][j] + table[j][k])
          throw InvalidArgument("point_cloud: triangle inequality fails for (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ")");
  auto flat = std::make_shared<std::vector<Rational>>();
  flat->reserve(n * n);
  for (const auto& row : table) flat->insert(flat->end(), row.begin(), row.end());
  SpaceDescriptor s;
  s.kind_ = SpaceKind::FinitePointCloud;
  s.table_ = std::move(flat);
  s.cloud_n_ = n;
  return s;
}

const SpaceDescriptor& SpaceDescriptor::base() const {
  return kind_ == SpaceKind::ProductWithCube ? *base_ : *this;
}

std::size_t SpaceDescriptor::cloud_size() const {
  if (base().kind_ != SpaceKind::FinitePointCloud) throw InvalidArgument("cloud_size: not a point cloud");
  return base().cloud_n_;
}

const Rational& SpaceDescriptor::cloud_distance(std::size_t i, std::size_t j) const {
  const SpaceDescriptor& b = base();
  if (b.kind_ != SpaceKind::FinitePointCloud) throw InvalidArgument("cloud_distance: not a point cloud");
  if (i >= b.cloud_n_ || j >= b.cloud_n_) throw InvalidArgument("cloud_distance: index out of range");
  return (*b.table_)[i * b.cloud_n_ + j];
}

std::string SpaceDescriptor::name() const {
  switch (kind_) {
    case SpaceKind::UnitInterval: return "interval";
    case SpaceKind::TriadicCantor: return "cantor";
    case SpaceKind::HarmonicSequence: return "harmonic";
    case SpaceKind::FinitePointCloud: return "cloud" + std::to_string(cloud_n_);
    case SpaceKind::ProductWithCube: return base_->name() + "*cube" + std::to_string(d_);
  }
  return "unknown";
}

Rational DigitVector::value() const {
  // Horner evaluation from the last digit: x = (a_1 + (a_2 + ...)/3)/3.
  Rational x = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    x += *it;
    x /= 3;
  }
  return x;
}

DigitVector DigitVector::from_value(const Rational& x, std::size_t depth) {
  Rational scaled = x * rational_pow(3, static_cast<int>(depth));
  if (scaled.get_den() != 1) throw InvalidArgument("DigitVector::from_value: " + to_string(x) + " is not a depth-" +
                                                   std::to_string(depth) + " triadic rational");
  mpz_class code = scaled.get_num();
  DigitVector v;
  v.digits.assign(depth, 0);
  for (std::size_t i = depth; i-- > 0;) {
    mpz_class r = code % 3;
    if (r == 2 || code < 0) throw InvalidArgument("DigitVector::from_value: " + to_string(x) + " has a digit outside {0,1}");
    v.digits[i] = static_cast<std::uint8_t>(r.get_ui());
    code /= 3;
  }
  if (code != 0) throw InvalidArgument("DigitVector::from_value: " + to_string(x) + " lies outside the Cantor set");
  return v;
}

DigitVector DigitVector::from_code(std::uint64_t code, std::size_t depth) {
  DigitVector v;
  v.digits.resize(depth);
  for (std::size_t i = 0; i < depth; ++i) v.digits[depth - 1 - i] = static_cast<std::uint8_t>((code >> i) & 1U);
  return v;
}

Rational middle_thirds_value(const DigitVector& v) { return 2 * v.value(); }

Point Point::real(const Rational& x) {
  Point p;
  p.x = x;
  return p;
}

Point Point::cantor(const DigitVector& v) {
  for (auto d : v.digits)
    if (d > 1) throw InvalidArgument("Point::cantor: digit outside {0,1}");
  Point p;
  p.repr = Repr::Digits;
  p.digits = v;
  p.x = v.value();
  return p;
}

Point Point::cloud(std::size_t index) {
  Point p;
  p.repr = Repr::Cloud;
  p.index = index;
  return p;
}

Point Point::with_fiber(std::vector<Rational> z) const {
  Point p = *this;
  p.fiber = std::move(z);
  return p;
}

namespace {

const char* repr_name(Point::Repr r) {
  switch (r) {
    case Point::Repr::Real: return "real";
    case Point::Repr::Digits: return "digits";
    case Point::Repr::Cloud: return "cloud-index";
  }
  return "?";
}

Rational base_squared(const SpaceDescriptor& base, const Point& a, const Point& b) {
  if (a.repr != b.repr)
    throw InvalidArgument(std::string("metric: mixed point representations (") + repr_name(a.repr) + " vs " +
                          repr_name(b.repr) + ")");
  switch (base.kind()) {
    case SpaceKind::FinitePointCloud: {
      if (a.repr != Point::Repr::Cloud) throw InvalidArgument("metric: point cloud requires cloud-index points");
      const Rational& d = base.cloud_distance(a.index, b.index);
      return d * d;
    }
    case SpaceKind::TriadicCantor:
      if (a.repr == Point::Repr::Cloud) throw InvalidArgument("metric: cloud-index point on the Cantor set");
      break;
    default:
      if (a.repr != Point::Repr::Real)
        throw InvalidArgument(std::string("metric: ") + base.name() + " requires real points, got " + repr_name(a.repr));
  }
  Rational diff = a.x - b.x;
  return diff * diff;
}

}  // namespace

Rational metric_squared(const SpaceDescriptor& space, const Point& a, const Point& b) {
  const std::size_t d = static_cast<std::size_t>(space.cube_dim());
  if (a.fiber.size() != d || b.fiber.size() != d)
    throw InvalidArgument("metric: fiber length does not match " + space.name());
  Rational total = base_squared(space.base(), a, b);
  for (std::size_t k = 0; k < d; ++k) {
    Rational diff = a.fiber[k] - b.fiber[k];
    total += diff * diff;
  }
  return total;
}

Rational metric(const SpaceDescriptor& space, const Point& a, const Point& b) {
  if (space.base().kind() == SpaceKind::FinitePointCloud && space.cube_dim() == 0) {
    if (a.repr != Point::Repr::Cloud || b.repr != Point::Repr::Cloud)
      throw InvalidArgument("metric: point cloud requires cloud-index points");
    return space.cloud_distance(a.index, b.index);
  }
  Rational sq = metric_squared(space, a, b);
  Rational root;
  if (!exact_sqrt(sq, root))
    throw InvalidArgument("metric: distance sqrt(" + to_string(sq) + ") is irrational; use metric_squared");
  return root;
}

int cantor_depth_for_scale(int n) {
  if (n < 0) throw InvalidArgument("cantor_depth_for_scale: negative scale index");
  mpz_class two_n, three_t = 1;
  mpz_ui_pow_ui(two_n.get_mpz_t(), 2, static_cast<unsigned long>(n));
  int t = 0;
  while (three_t < two_n) {
    three_t *= 3;
    ++t;
  }
  return t + 2;
}

// ---------------------------------------------------------------------------

namespace {

bool lex_less(const Point& a, const Point& b) {
  if (a.x != b.x) return a.x < b.x;
  for (std::size_t k = 0; k < a.fiber.size() && k < b.fiber.size(); ++k)
    if (a.fiber[k] != b.fiber[k]) return a.fiber[k] < b.fiber[k];
  return a.fiber.size() < b.fiber.size();
}

constexpr std::int64_t kIntegerLimit = std::int64_t{1} << 42;

}  // namespace

ResolutionNet::ResolutionNet(SpaceDescriptor space, int scale_index, std::vector<Point> points)
    : space_(std::move(space)), scale_(scale_index), explicit_(std::move(points)) {
  if (scale_ < 0) throw InvalidArgument("ResolutionNet: negative scale index");
  const std::size_t fib = static_cast<std::size_t>(space_.cube_dim());
  for (const auto& p : explicit_)
    if (p.fiber.size() != fib) throw InvalidArgument("ResolutionNet: point fiber length does not match " + space_.name());
  explicit_dim_ = 1 + fib;
  if (is_cloud()) {
    if (fib != 0) throw InvalidArgument("ResolutionNet: products over point clouds are not supported");
    for (const auto& p : explicit_)
      if (p.repr != Point::Repr::Cloud || p.index >= space_.cloud_size())
        throw InvalidArgument("ResolutionNet: invalid point-cloud point");
    return;
  }
  std::sort(explicit_.begin(), explicit_.end(), lex_less);

  const std::size_t n = explicit_.size();
  shadow_.resize(n * explicit_dim_);
  for (std::size_t e = 0; e < n; ++e) {
    shadow_[e * explicit_dim_] = to_double(explicit_[e].x);
    for (std::size_t k = 0; k < fib; ++k) shadow_[e * explicit_dim_ + 1 + k] = to_double(explicit_[e].fiber[k]);
  }

  // Common denominator per axis, kept only when everything fits comfortably in 64 bits.
  integer_ = n > 0;
  std::vector<mpz_class> lcms(explicit_dim_, mpz_class(1));
  for (std::size_t e = 0; e < n && integer_; ++e)
    for (std::size_t a = 0; a < explicit_dim_ && integer_; ++a) {
      const Rational& c = a == 0 ? explicit_[e].x : explicit_[e].fiber[a - 1];
      mpz_lcm(lcms[a].get_mpz_t(), lcms[a].get_mpz_t(), c.get_den_mpz_t());
      if (lcms[a] > kIntegerLimit) integer_ = false;
    }
  if (!integer_) return;
  dens_.resize(explicit_dim_);
  spans_.assign(explicit_dim_, 0);
  nums_.resize(n * explicit_dim_);
  std::vector<std::int64_t> lo(explicit_dim_, 0), hi(explicit_dim_, 0);
  for (std::size_t a = 0; a < explicit_dim_; ++a) dens_[a] = lcms[a].get_si();
  for (std::size_t e = 0; e < n && integer_; ++e)
    for (std::size_t a = 0; a < explicit_dim_; ++a) {
      const Rational& c = a == 0 ? explicit_[e].x : explicit_[e].fiber[a - 1];
      Rational scaled = c * dens_[a];
      const mpz_class& num = scaled.get_num();
      if (num > kIntegerLimit || num < -kIntegerLimit) {
        integer_ = false;
        break;
      }
      std::int64_t v = num.get_si();
      nums_[e * explicit_dim_ + a] = v;
      if (e == 0 || v < lo[a]) lo[a] = v;
      if (e == 0 || v > hi[a]) hi[a] = v;
    }
  if (!integer_) {
    dens_.clear();
    spans_.clear();
    nums_.clear();
    return;
  }
  for (std::size_t a = 0; a < explicit_dim_; ++a) spans_[a] = hi[a] - lo[a];
}

void ResolutionNet::split(std::size_t i, std::size_t& e, std::size_t& g) const {
  if (i >= size()) throw InvalidArgument("ResolutionNet: index out of range");
  e = i / grid_count_;
  g = i % grid_count_;
}

void ResolutionNet::grid_digits(std::size_t g, std::int64_t* out) const {
  for (int k = grid_d_ - 1; k >= 0; --k) {
    out[k] = static_cast<std::int64_t>(g % grid_side_);
    g /= grid_side_;
  }
}

Point ResolutionNet::point(std::size_t i) const {
  std::size_t e, g;
  split(i, e, g);
  Point p = explicit_[e];
  if (grid_d_ > 0) {
    std::vector<std::int64_t> dig(static_cast<std::size_t>(grid_d_));
    grid_digits(g, dig.data());
    Rational h = dyadic(grid_m_);
    for (auto v : dig) p.fiber.push_back(h * v);
  }
  return p;
}

std::vector<Point> ResolutionNet::points(const std::vector<std::size_t>& indices) const {
  std::vector<Point> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(point(i));
  return out;
}

void ResolutionNet::approx(std::size_t i, double* out) const {
  if (is_cloud()) throw InvalidArgument("ResolutionNet::approx: point clouds have no embedding");
  std::size_t e, g;
  split(i, e, g);
  for (std::size_t a = 0; a < explicit_dim_; ++a) out[a] = shadow_[e * explicit_dim_ + a];
  if (grid_d_ > 0) {
    std::int64_t dig[16];
    grid_digits(g, dig);
    const double h = std::ldexp(1.0, -grid_m_);
    for (int k = 0; k < grid_d_; ++k) out[explicit_dim_ + static_cast<std::size_t>(k)] = h * static_cast<double>(dig[k]);
  }
}

void ResolutionNet::integer_coords(std::size_t i, std::int64_t* out) const {
  if (!integer_) throw InvalidArgument("ResolutionNet::integer_coords: no common-denominator representation");
  std::size_t e, g;
  split(i, e, g);
  for (std::size_t a = 0; a < explicit_dim_; ++a) out[a] = nums_[e * explicit_dim_ + a];
  if (grid_d_ > 0) grid_digits(g, out + explicit_dim_);
}

Rational ResolutionNet::squared_distance(std::size_t i, std::size_t j) const {
  if (is_cloud()) {
    const Rational& d = space_.cloud_distance(explicit_[i].index, explicit_[j].index);
    return d * d;
  }
  return metric_squared(space_, point(i), point(j));
}

ResolutionNet ResolutionNet::subset(const std::vector<std::size_t>& indices) const {
  return ResolutionNet(space_, scale_, points(indices));
}

ResolutionNet build_net(const SpaceDescriptor& space, int n) {
  if (n < 0) throw InvalidArgument("build_net: scale index must be non-negative");
  std::vector<Point> pts;
  switch (space.kind()) {
    case SpaceKind::UnitInterval: {
      if (n > 40) throw LimitExceeded("build_net: interval scale index above 40");
      const std::int64_t m = std::int64_t{1} << n;
      pts.reserve(static_cast<std::size_t>(m + 1));
      for (std::int64_t k = 0; k <= m; ++k) pts.push_back(Point::real(ratio(k, m)));
      break;
    }
    case SpaceKind::TriadicCantor: {
      const int depth = cantor_depth_for_scale(n);
      if (depth > 30) throw LimitExceeded("build_net: Cantor net depth " + std::to_string(depth) + " above 30");
      const std::uint64_t count = std::uint64_t{1} << depth;
      pts.reserve(count);
      for (std::uint64_t c = 0; c < count; ++c) pts.push_back(Point::cantor(DigitVector::from_code(c, static_cast<std::size_t>(depth))));
      break;
    }
    case SpaceKind::HarmonicSequence: {
      if (n > 30) throw LimitExceeded("build_net: harmonic scale index above 30");
      const std::int64_t kmax = std::int64_t{1} << n;
      pts.push_back(Point::real(0));
      for (std::int64_t k = 1; k <= kmax; ++k) pts.push_back(Point::real(Rational(1, k)));
      break;
    }
    case SpaceKind::FinitePointCloud:
      for (std::size_t i = 0; i < space.cloud_size(); ++i) pts.push_back(Point::cloud(i));
      break;
    case SpaceKind::ProductWithCube:
      return product_net(build_net(space.base(), n), space.cube_dim(), n);
  }
  return ResolutionNet(space, n, std::move(pts));
}

ResolutionNet product_net(const ResolutionNet& base, int d, int n) {
  if (d < 1) throw InvalidArgument("product_net: cube dimension must be positive");
  if (base.scale_index() < n)
    throw InvalidArgument("product_net: base net scale " + std::to_string(base.scale_index()) +
                          " is coarser than requested scale " + std::to_string(n));
  if (base.is_cloud()) throw InvalidArgument("product_net: products over point clouds are not supported");
  if (base.grid_dim() > 0 || base.space().cube_dim() > 0)
    throw InvalidArgument("product_net: base is already a product; build the product in one step");
  if (n > 30 || d > 8) throw LimitExceeded("product_net: grid too large");
  ResolutionNet out = base;
  out.space_ = SpaceDescriptor::product_with_cube(base.space(), d);
  out.scale_ = n;
  out.grid_d_ = d;
  out.grid_m_ = n;
  out.grid_side_ = (std::size_t{1} << n) + 1;
  out.grid_count_ = 1;
  for (int k = 0; k < d; ++k) out.grid_count_ *= out.grid_side_;
  if (out.integer_) {
    for (int k = 0; k < d; ++k) {
      out.dens_.push_back(std::int64_t{1} << n);
      out.spans_.push_back(std::int64_t{1} << n);
    }
  }
  return out;
}

}  // namespace dimlab
