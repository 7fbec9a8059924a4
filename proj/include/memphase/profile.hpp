#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "memphase/potential.hpp"

namespace memphase {

/// Heteroclinic transition profile w with w(0) = 0, w(+-inf) = +-1 and
/// w' = sqrt(2 W(w)). Quartic: tanh(sqrt2 t). Other potentials: RK4 on the
/// first-order equation with step 1e-4, stored as a Hermite lookup table.
class OptimalProfile {
 public:
  explicit OptimalProfile(const DoubleWell& well);

  const DoubleWell& potential() const { return well_; }
  double value(double t) const;
  double derivative(double t) const;
  /// Euler-Lagrange: w'' = W'(w).
  double second_derivative(double t) const;

 private:
  struct Table {
    double step = 1e-4;
    std::vector<double> forward;   // w(k * step), k >= 0
    std::vector<double> backward;  // w(-k * step), k >= 0
  };
  double table_value(double t) const;

  DoubleWell well_;
  std::shared_ptr<const Table> table_;
};

/// The log-truncated profile: w on [0, T], the Hermite cubic matching
/// (w(T), w'(T)) to (1, 0) on (T, 2T], 1 beyond, odd reflection, with
/// T = |log eps|.
class TruncatedProfile {
 public:
  TruncatedProfile(const DoubleWell& well, double epsilon);
  TruncatedProfile(std::shared_ptr<const OptimalProfile> profile, double epsilon);

  double epsilon() const { return epsilon_; }
  double truncation() const { return truncation_; }
  /// Coefficients of p(t) = c0 + c1 s + c2 s^2 + c3 s^3 with s = t - T.
  const std::array<double, 4>& cubic() const { return cubic_; }
  const OptimalProfile& profile() const { return *profile_; }

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  /// Physical-variable profile w_eps(s / eps) and its derivatives in s.
  double scaled(double s) const { return value(s / epsilon_); }
  double scaled_derivative(double s) const { return derivative(s / epsilon_) / epsilon_; }
  double scaled_second_derivative(double s) const {
    return second_derivative(s / epsilon_) / (epsilon_ * epsilon_);
  }
  /// Half-width of the transition layer in physical units, 2 eps T.
  double layer_half_width() const { return 2.0 * epsilon_ * truncation_; }

 private:
  double positive_value(double t) const;
  double positive_derivative(double t) const;
  double positive_second_derivative(double t) const;

  std::shared_ptr<const OptimalProfile> profile_;
  double epsilon_;
  double truncation_;
  std::array<double, 4> cubic_{};
};

struct ProfileEnergy {
  double total = 0.0;             // integral of W(w) + w'^2 / 2
  double gradient_squared = 0.0;  // integral of w'^2
};

/// Composite midpoint rule over [-half_width, half_width].
ProfileEnergy profile_energy_1d(const DoubleWell& well, const std::function<double(double)>& value,
                                const std::function<double(double)>& derivative, double half_width,
                                double step);
ProfileEnergy profile_energy_1d(const OptimalProfile& w, double half_width, double step);
ProfileEnergy profile_energy_1d(const TruncatedProfile& tp, double half_width, double step);

struct TruncationEstimates {
  double epsilon = 0.0;
  double epsilon_squared = 0.0;
  // Stretched variable t on (T, 2T).
  double sup_derivative = 0.0;
  double sup_second_derivative = 0.0;
  double sup_gap = 0.0;  // sup |w - w_eps|
  // Physical variable s = eps t on (eps T, 2 eps T).
  double sup_scaled_derivative = 0.0;
  double sup_scaled_second_derivative = 0.0;
};

/// Sup norms on the cubic segment, sampled at 10^4 midpoints.
TruncationEstimates truncation_estimates(const TruncatedProfile& tp);

}  // namespace memphase
