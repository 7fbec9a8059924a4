#pragma once

#include <optional>

#include "memphase/grid.hpp"
#include "memphase/potential.hpp"

namespace memphase {

/// Splits the membrane into the phase region F (v = +1) and its complement.
struct PhaseSplit {
  enum class Kind { None, TwoArcs2D, Cap3D };

  Kind kind = Kind::None;
  double alpha1 = 0.0;  // TwoArcs2D: F is the arc (alpha1, alpha2)
  double alpha2 = 0.0;
  double theta0 = 0.0;  // Cap3D: F is the cap of polar angle < theta0

  static PhaseSplit none() { return {}; }
  static PhaseSplit two_arcs(double alpha1, double alpha2);
  static PhaseSplit cap(double theta0);
};

/// Analytic limit membrane dE (and phase region F on it). The signed
/// distance is positive inside E.
class Geometry {
 public:
  enum class Kind { Plane1DInterface, Disk2D, Sphere3D };

  /// Interface {x0 = position}, E = {x0 > position}. `cross_section` is the
  /// (n-1)-measure of the interface inside the computational box.
  static Geometry plane(double position, double cross_section = 1.0);
  static Geometry disk(double radius, double cx, double cy, PhaseSplit split = {});
  static Geometry sphere(double radius, const Point& center, PhaseSplit split = {});

  Kind kind() const { return kind_; }
  /// Ambient dimension; 0 for the plane, which embeds in any dimension.
  int dim() const;
  double radius() const { return radius_; }
  const Point& center() const { return center_; }
  double position() const { return position_; }
  double cross_section() const { return cross_section_; }
  const PhaseSplit& split() const { return split_; }

  double signed_distance(const Point& x) const;
  /// Unit normal grad d at x (points into E). Throws DomainError on the
  /// skeleton.
  Point normal(const Point& x) const;
  /// Nearest point on dE, x - d(x) * normal(x).
  Point project(const Point& x) const;
  /// Sum of principal curvatures of the parallel surface through x,
  /// sum k_i / (1 - k_i d), with k = 1/R for spheres and circles.
  double curvature_sum(const Point& x) const;

  /// Signed geodesic distance to dF for a point on dE (positive inside F).
  double geodesic_signed_distance(const Point& y) const;
  /// geodesic_signed_distance(project(x)) for any x. At the skeleton the
  /// value is the limit along the positive polar axis.
  double phase_coordinate(const Point& x) const;

 private:
  Geometry() = default;

  Kind kind_ = Kind::Sphere3D;
  double radius_ = 1.0;
  Point center_{0.0, 0.0, 0.0};
  double position_ = 0.0;
  double cross_section_ = 1.0;
  PhaseSplit split_;
};

/// Closed-form sharp-interface limits. Values that are undefined for the
/// geometry/split combination are empty.
struct SharpLimits {
  double perimeter = 0.0;           // sigma H^{n-1}(J_u)
  std::optional<double> line;       // sigma^2 H^{n-2}(J_v)
  std::optional<double> willmore;   // sigma * integral of a(v) |H|^2, n = 3
};

SharpLimits sharp_limits(const Geometry& g, const DoubleWell& w, const Modulus& m);

}  // namespace memphase
