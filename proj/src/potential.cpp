#include "memphase/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "memphase/errors.hpp"

namespace memphase {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double bump_factor(double s) {
  if (s <= 1e-12) return 0.0;
  return std::exp(-1.0 / s);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

double smooth_step(double s) {
  const double f0 = bump_factor(s);
  const double f1 = bump_factor(1.0 - s);
  if (f0 == 0.0) return 0.0;
  if (f1 == 0.0) return 1.0;
  return f0 / (f0 + f1);
}

DoubleWell DoubleWell::quartic() {
  DoubleWell w;
  w.kind_ = Kind::Quartic;
  w.label_ = "quartic";
  w.value_ = [](double t) {
    const double a = 1.0 - t * t;
    return a * a;
  };
  w.derivative_ = [](double t) { return -4.0 * t * (1.0 - t * t); };
  w.second_derivative_ = [](double t) { return 12.0 * t * t - 4.0; };
  // (1-t^2)^2 >= (9/16) t^4 for |t| >= 2 and <= t^4 for |t| >= 1.
  w.p_ = 4.0;
  w.c_ = 9.0 / 16.0;
  w.threshold_ = 2.0;
  w.finish();
  return w;
}

DoubleWell DoubleWell::scaled_quartic(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("custom potential scale must be > 0");
  std::ostringstream label;
  label << "custom:scale=" << k;
  return custom([k](double t) { const double a = 1.0 - t * t; return k * a * a; },
                [k](double t) { return -4.0 * k * t * (1.0 - t * t); },
                [k](double t) { return k * (12.0 * t * t - 4.0); }, 4.0,
                std::min(9.0 * k / 16.0, 1.0 / k), 2.0, label.str());
}

DoubleWell DoubleWell::custom(Fn value, Fn derivative, Fn second_derivative,
                              double growth_exponent, double growth_constant, double threshold,
                              std::string label) {
  if (!value || !derivative) throw ConfigError("custom potential needs W and W'");
  if (!(growth_exponent > 1.0) || !(growth_constant > 0.0) || !(threshold > 0.0)) {
    throw ConfigError("custom potential growth parameters must satisfy p > 1, c > 0, T > 0");
  }
  DoubleWell w;
  w.kind_ = Kind::Custom;
  w.label_ = std::move(label);
  w.value_ = std::move(value);
  w.derivative_ = std::move(derivative);
  w.second_derivative_ = std::move(second_derivative);
  w.p_ = growth_exponent;
  w.c_ = growth_constant;
  w.threshold_ = threshold;

  if (w.value_(-1.0) != 0.0 || w.value_(1.0) != 0.0) {
    throw ConfigError("custom potential must vanish exactly at -1 and +1");
  }
  for (int i = -400; i <= 400; ++i) {
    const double t = 0.025 * i;
    const double wt = w.value_(t);
    if (!(wt >= 0.0)) throw ConfigError("custom potential is negative at a sampled point");
    if (std::abs(t) >= threshold) {
      const double tp = std::pow(std::abs(t), growth_exponent);
      if (wt < growth_constant * tp * (1 - 1e-12) || wt > tp / growth_constant * (1 + 1e-12)) {
        throw ConfigError("custom potential violates its growth bounds");
      }
    }
  }
  w.finish();
  return w;
}

DoubleWell DoubleWell::parse(const std::string& descriptor) {
  if (descriptor == "quartic") return quartic();
  const std::string prefix = "custom:scale=";
  if (descriptor.rfind(prefix, 0) == 0) {
    const std::string rest = descriptor.substr(prefix.size());
    std::size_t used = 0;
    double k = 0.0;
    try {
      k = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw ConfigError("potential: cannot parse scale in '" + descriptor + "'");
    }
    if (used != rest.size()) throw ConfigError("potential: trailing characters in '" + descriptor + "'");
    return scaled_quartic(k);
  }
  throw ConfigError("potential: unknown descriptor '" + descriptor + "'");
}

void DoubleWell::finish() { sigma_ = phi(1.0); }

double DoubleWell::value(double t) const { return value_(t); }
double DoubleWell::derivative(double t) const { return derivative_(t); }

double DoubleWell::second_derivative(double t) const {
  if (second_derivative_) return second_derivative_(t);
  const double h = 1e-5 * std::max(1.0, std::abs(t));
  return (derivative_(t + h) - derivative_(t - h)) / (2.0 * h);
}

double DoubleWell::phi(double t) const {
  if (!std::isfinite(t)) throw DomainError("phi: non-finite argument");
  if (kind_ == Kind::Quartic) {
    // sqrt(2W) = sqrt2 |1 - s^2|; the sign flips outside [-1, 1].
    const double t3 = t * t * t;
    if (t > 1.0) return std::numbers::sqrt2 * (4.0 / 3.0 + (t3 - 1.0) / 3.0 - (t - 1.0));
    if (t < -1.0) return -std::numbers::sqrt2 * (2.0 / 3.0 - t3 / 3.0 + t);
    return std::numbers::sqrt2 * (t - t3 / 3.0 + 2.0 / 3.0);
  }
  const auto integrand = [this](double s) { return std::sqrt(2.0 * value_(s)); };
  return adaptive_simpson(integrand, -1.0, t, 1e-10, 40);
}

Modulus::Modulus(double a1, double a2) : a1_(a1), a2_(a2) {
  if (!(a1 > 0.0) || !(a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2)) {
    throw ConfigError("modulus: a1 and a2 must be positive and finite");
  }
}

double Modulus::omega(double t) const {
  return smooth_step(0.5 * (t + 1.0)) * smooth_step(0.5 * (3.0 - t));
}

}  // namespace memphase
