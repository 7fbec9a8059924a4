#include "memphase/geometry.hpp"

#include <cmath>
#include <numbers>

#include "memphase/errors.hpp"

namespace memphase {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double norm3(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

Point minus(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

// Arc-length coordinate of an angle on a circle split into F = (a1, a2).
double arc_signed_distance(double radius, double angle, double a1, double a2) {
  double a = std::fmod(angle - a1, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  const double len = a2 - a1;
  if (a <= len) return radius * std::min(a, len - a);
  return -radius * std::min(a - len, kTwoPi - a);
}

}  // namespace

PhaseSplit PhaseSplit::two_arcs(double alpha1, double alpha2) {
  if (!(alpha1 < alpha2) || !(alpha2 - alpha1 < kTwoPi)) {
    throw ConfigError("split: need alpha1 < alpha2 < alpha1 + 2 pi");
  }
  PhaseSplit s;
  s.kind = Kind::TwoArcs2D;
  s.alpha1 = alpha1;
  s.alpha2 = alpha2;
  return s;
}

PhaseSplit PhaseSplit::cap(double theta0) {
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi)) throw ConfigError("split: theta0 must lie in (0, pi)");
  PhaseSplit s;
  s.kind = Kind::Cap3D;
  s.theta0 = theta0;
  return s;
}

Geometry Geometry::plane(double position, double cross_section) {
  if (!std::isfinite(position) || !(cross_section > 0.0)) {
    throw ConfigError("plane: position must be finite and cross_section > 0");
  }
  Geometry g;
  g.kind_ = Kind::Plane1DInterface;
  g.position_ = position;
  g.cross_section_ = cross_section;
  return g;
}

Geometry Geometry::disk(double radius, double cx, double cy, PhaseSplit split) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("disk2d: R must be > 0");
  if (split.kind == PhaseSplit::Kind::Cap3D) throw ConfigError("disk2d: cap split needs a sphere");
  Geometry g;
  g.kind_ = Kind::Disk2D;
  g.radius_ = radius;
  g.center_ = {cx, cy, 0.0};
  g.split_ = split;
  return g;
}

Geometry Geometry::sphere(double radius, const Point& center, PhaseSplit split) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("sphere3d: R must be > 0");
  if (split.kind == PhaseSplit::Kind::TwoArcs2D) {
    throw ConfigError("sphere3d: two-arc split needs a disk");
  }
  Geometry g;
  g.kind_ = Kind::Sphere3D;
  g.radius_ = radius;
  g.center_ = center;
  g.split_ = split;
  return g;
}

int Geometry::dim() const {
  switch (kind_) {
    case Kind::Plane1DInterface: return 0;
    case Kind::Disk2D: return 2;
    case Kind::Sphere3D: return 3;
  }
  return 0;
}

double Geometry::signed_distance(const Point& x) const {
  switch (kind_) {
    case Kind::Plane1DInterface: return x[0] - position_;
    case Kind::Disk2D: return radius_ - std::hypot(x[0] - center_[0], x[1] - center_[1]);
    case Kind::Sphere3D: return radius_ - norm3(minus(x, center_));
  }
  return 0.0;
}

Point Geometry::normal(const Point& x) const {
  if (kind_ == Kind::Plane1DInterface) return {1.0, 0.0, 0.0};
  Point r = minus(x, center_);
  if (kind_ == Kind::Disk2D) r[2] = 0.0;
  const double len = norm3(r);
  if (len == 0.0) throw DomainError("projection: degenerate projection at the centre (skeleton point)");
  return {-r[0] / len, -r[1] / len, -r[2] / len};
}

Point Geometry::project(const Point& x) const {
  const Point nu = normal(x);
  const double d = signed_distance(x);
  Point p{x[0] - d * nu[0], x[1] - d * nu[1], x[2] - d * nu[2]};
  if (kind_ == Kind::Disk2D) p[2] = x[2];
  return p;
}

double Geometry::curvature_sum(const Point& x) const {
  if (kind_ == Kind::Plane1DInterface) return 0.0;
  const double k = 1.0 / radius_;
  const double d = signed_distance(x);
  const double denom = 1.0 - k * d;
  if (!(denom > 0.0)) throw DomainError("curvature_sum: focal point crossed (curvature singularity)");
  const int principal = kind_ == Kind::Sphere3D ? 2 : 1;
  return principal * k / denom;
}

double Geometry::geodesic_signed_distance(const Point& y) const {
  if (split_.kind == PhaseSplit::Kind::None) {
    throw ConfigError("geodesic_signed_distance: geometry has no phase split");
  }
  if (std::abs(signed_distance(y)) > 1e-8) {
    throw DomainError("geodesic_signed_distance: point is not on the membrane");
  }
  return phase_coordinate(y);
}

double Geometry::phase_coordinate(const Point& x) const {
  const Point r = minus(x, center_);
  switch (split_.kind) {
    case PhaseSplit::Kind::None:
      throw ConfigError("phase coordinate: geometry has no phase split");
    case PhaseSplit::Kind::TwoArcs2D:
      return arc_signed_distance(radius_, std::atan2(r[1], r[0]), split_.alpha1, split_.alpha2);
    case PhaseSplit::Kind::Cap3D: {
      const double theta = std::atan2(std::hypot(r[0], r[1]), r[2]);
      return radius_ * (split_.theta0 - theta);
    }
  }
  return 0.0;
}

SharpLimits sharp_limits(const Geometry& g, const DoubleWell& w, const Modulus& m) {
  const double sigma = w.sigma();
  const double pi = std::numbers::pi;
  SharpLimits out;
  const double R = g.radius();
  switch (g.kind()) {
    case Geometry::Kind::Plane1DInterface:
      if (g.split().kind != PhaseSplit::Kind::None) throw ConfigError("limits: plane takes no split");
      out.perimeter = sigma * g.cross_section();
      break;
    case Geometry::Kind::Disk2D:
      out.perimeter = sigma * 2.0 * pi * R;
      if (g.split().kind == PhaseSplit::Kind::TwoArcs2D) out.line = sigma * sigma * 2.0;
      break;
    case Geometry::Kind::Sphere3D: {
      out.perimeter = sigma * 4.0 * pi * R * R;
      const double h2 = 4.0 / (R * R);
      if (g.split().kind == PhaseSplit::Kind::Cap3D) {
        const double theta0 = g.split().theta0;
        const double area_f = 2.0 * pi * R * R * (1.0 - std::cos(theta0));
        const double area_c = 4.0 * pi * R * R - area_f;
        out.line = sigma * sigma * 2.0 * pi * R * std::sin(theta0);
        out.willmore = sigma * h2 * (m.a1() * area_f + m.a2() * area_c);
      } else {
        out.willmore = sigma * h2 * m.a1() * 4.0 * pi * R * R;
      }
      break;
    }
  }
  return out;
}

}  // namespace memphase
