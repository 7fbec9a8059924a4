#pragma once

#include <functional>
#include <memory>
#include <string>

namespace memphase {

/// Double-well potential W with zeros exactly at -1 and +1 and p-growth at
/// infinity. Quartic is (1-t^2)^2; Custom carries user-supplied evaluators
/// (the config surface only exposes scaled quartics k(1-t^2)^2).
class DoubleWell {
 public:
  enum class Kind { Quartic, Custom };

  using Fn = std::function<double(double)>;

  static DoubleWell quartic();
  /// k(1-t^2)^2 routed through the generic (quadrature/ODE) code paths.
  static DoubleWell scaled_quartic(double k);
  /// Generic potential. `second_derivative` may be empty, in which case a
  /// central difference of `derivative` is used. Throws ConfigError when the
  /// sampled invariants fail.
  static DoubleWell custom(Fn value, Fn derivative, Fn second_derivative, double growth_exponent,
                           double growth_constant, double threshold, std::string label = "custom");

  /// "quartic" or "custom:scale=<k>".
  static DoubleWell parse(const std::string& descriptor);

  Kind kind() const { return kind_; }
  const std::string& label() const { return label_; }
  double growth_exponent() const { return p_; }
  double growth_constant() const { return c_; }
  double threshold() const { return threshold_; }

  double operator()(double t) const { return value(t); }
  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  /// phi(t) = integral of sqrt(2W) over [-1, t].
  double phi(double t) const;
  /// sigma = phi(1), computed once at construction.
  double sigma() const { return sigma_; }

 private:
  DoubleWell() = default;
  void finish();

  Kind kind_ = Kind::Quartic;
  std::string label_;
  Fn value_;
  Fn derivative_;
  Fn second_derivative_;
  double p_ = 4.0;
  double c_ = 0.5;
  double threshold_ = 2.0;
  double sigma_ = 0.0;
};

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 40);

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

/// Phase-dependent bending modulus a(t) = w(t) a1 + (1 - w(t)) a2 with a
/// compactly supported smooth bump w, w(-1) = 0, w(1) = 1.
class Modulus {
 public:
  Modulus(double a1, double a2);

  double a1() const { return a1_; }
  double a2() const { return a2_; }
  /// The bump: S((t+1)/2) * S((3-t)/2), supported in [-1, 3].
  double omega(double t) const;
  double operator()(double t) const { return omega(t) * a1_ + (1.0 - omega(t)) * a2_; }

 private:
  double a1_;
  double a2_;
};

}  // namespace memphase
