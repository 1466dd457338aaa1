#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dimlab/rational.hpp"

namespace dimlab {

enum class SpaceKind { UnitInterval, TriadicCantor, HarmonicSequence, ProductWithCube, FinitePointCloud };

/// Symbolic description of one of the supported compact metric spaces.
///
/// Products are flattened: a product of a product with a cube is stored as the
/// innermost base times a single cube of the summed dimension.
class SpaceDescriptor {
 public:
  static SpaceDescriptor unit_interval();
  static SpaceDescriptor triadic_cantor();
  static SpaceDescriptor harmonic_sequence();
  static SpaceDescriptor product_with_cube(const SpaceDescriptor& base, int d);
  /// Validates symmetry, zero diagonal, positivity off the diagonal and the
  /// triangle inequality; throws InvalidArgument on the first violation.
  static SpaceDescriptor point_cloud(const std::vector<std::vector<Rational>>& table);

  SpaceKind kind() const { return kind_; }
  /// The non-product base; for non-product spaces this is the space itself.
  const SpaceDescriptor& base() const;
  int cube_dim() const { return d_; }
  std::size_t cloud_size() const;
  const Rational& cloud_distance(std::size_t i, std::size_t j) const;
  std::string name() const;

 private:
  SpaceKind kind_ = SpaceKind::UnitInterval;
  std::shared_ptr<const SpaceDescriptor> base_;
  int d_ = 0;
  std::shared_ptr<const std::vector<Rational>> table_;
  std::size_t cloud_n_ = 0;
};

/// Finite {0,1} digit string encoding x = sum a_i 3^{-i} in the scaled Cantor set.
struct DigitVector {
  std::vector<std::uint8_t> digits;

  std::size_t depth() const { return digits.size(); }
  Rational value() const;
  /// Inverse of value() at a fixed depth; throws if x has no such expansion.
  static DigitVector from_value(const Rational& x, std::size_t depth);
  /// Depth-D vector whose digits are the binary expansion of code, most significant first.
  static DigitVector from_code(std::uint64_t code, std::size_t depth);

  bool operator==(const DigitVector&) const = default;
};

/// Standard middle-thirds coordinate of a scaled Cantor point (digits doubled).
Rational middle_thirds_value(const DigitVector& v);

/// A point of a supported space. The base part is a real coordinate, a digit
/// vector (Cantor points) or a point-cloud index; product and graph points
/// carry their remaining coordinates in `fiber`.
struct Point {
  enum class Repr { Real, Digits, Cloud };

  Repr repr = Repr::Real;
  Rational x;
  DigitVector digits;
  std::size_t index = 0;
  std::vector<Rational> fiber;

  static Point real(const Rational& x);
  static Point cantor(const DigitVector& v);
  static Point cloud(std::size_t index);
  Point with_fiber(std::vector<Rational> z) const;
};

/// Exact squared distance. Mixed representations or a fiber length that does
/// not match the space raise InvalidArgument.
Rational metric_squared(const SpaceDescriptor& space, const Point& a, const Point& b);

/// Exact distance; throws InvalidArgument when the distance is irrational
/// (possible only on products), in which case use metric_squared.
Rational metric(const SpaceDescriptor& space, const Point& a, const Point& b);

/// Smallest t with 3^t >= 2^n, plus two.
int cantor_depth_for_scale(int n);

/// Finite point set standing in for a compact space at scale 2^{-scale_index}.
///
/// Points are held either explicitly or as explicit points times a regular
/// cube grid that is enumerated on demand, so products never materialize.
/// Index order is lexicographic on exact coordinates (point clouds keep their
/// index order).
class ResolutionNet {
 public:
  ResolutionNet(SpaceDescriptor space, int scale_index, std::vector<Point> points);

  const SpaceDescriptor& space() const { return space_; }
  int scale_index() const { return scale_; }
  std::size_t size() const { return explicit_.size() * grid_count_; }
  bool is_cloud() const { return space_.base().kind() == SpaceKind::FinitePointCloud; }
  /// Euclidean embedding dimension (base coordinate plus fiber); 0 for clouds.
  std::size_t dim() const { return is_cloud() ? 0 : explicit_dim_ + static_cast<std::size_t>(grid_d_); }
  std::size_t explicit_size() const { return explicit_.size(); }
  const Point& explicit_point(std::size_t e) const { return explicit_[e]; }
  int grid_dim() const { return grid_d_; }
  int grid_level() const { return grid_m_; }

  Point point(std::size_t i) const;
  std::vector<Point> points(const std::vector<std::size_t>& indices) const;
  void approx(std::size_t i, double* out) const;
  Rational squared_distance(std::size_t i, std::size_t j) const;

  /// Per-axis common-denominator integer representation, when available.
  bool has_integer_coords() const { return integer_; }
  void integer_coords(std::size_t i, std::int64_t* out) const;
  const std::vector<std::int64_t>& axis_denominators() const { return dens_; }
  std::int64_t axis_span(std::size_t axis) const { return spans_[axis]; }

  ResolutionNet subset(const std::vector<std::size_t>& indices) const;

  friend ResolutionNet product_net(const ResolutionNet& base, int d, int n);

 private:
  void split(std::size_t i, std::size_t& e, std::size_t& g) const;
  void grid_digits(std::size_t g, std::int64_t* out) const;

  SpaceDescriptor space_;
  int scale_ = 0;
  std::vector<Point> explicit_;
  std::size_t explicit_dim_ = 1;
  std::vector<double> shadow_;
  bool integer_ = false;
  std::vector<std::int64_t> nums_;
  std::vector<std::int64_t> dens_;
  std::vector<std::int64_t> spans_;
  int grid_d_ = 0;
  int grid_m_ = 0;
  std::size_t grid_side_ = 1;
  std::size_t grid_count_ = 1;
};

/// Deterministic 2^{-n}-net of a symbolic space.
ResolutionNet build_net(const SpaceDescriptor& space, int n);

/// Net of base x [0,1]^d using the 2^{-n} grid on the cube factor.
ResolutionNet product_net(const ResolutionNet& base, int d, int n);

}  // namespace dimlab
