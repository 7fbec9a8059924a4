#include "memphase/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "memphase/errors.hpp"

namespace memphase {

namespace {

constexpr double kProfileStep = 1e-4;
constexpr double kSaturation = 1.0 - 1e-12;
constexpr double kMaxProfileTime = 200.0;

// Integrates w' = sign * sqrt(2W(w)) from w(0) = 0 until |w| reaches
// kSaturation.
std::vector<double> integrate_branch(const DoubleWell& well, double sign) {
  const auto rhs = [&](double w) { return sign * std::sqrt(2.0 * std::max(0.0, well.value(w))); };
  std::vector<double> out{0.0};
  const double h = kProfileStep;
  double w = 0.0;
  const auto max_steps = static_cast<std::size_t>(kMaxProfileTime / h);
  while (std::abs(w) < kSaturation && out.size() < max_steps) {
    const double k1 = rhs(w);
    const double k2 = rhs(w + 0.5 * h * k1);
    const double k3 = rhs(w + 0.5 * h * k2);
    const double k4 = rhs(w + h * k3);
    w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (std::abs(w) >= kSaturation) w = sign;
    out.push_back(w);
  }
  if (std::abs(out.back()) < kSaturation) out.back() = sign;
  return out;
}

}  // namespace

OptimalProfile::OptimalProfile(const DoubleWell& well) : well_(well) {
  if (well_.kind() == DoubleWell::Kind::Quartic) return;
  if (well_.value(0.0) == 0.0) {
    throw DomainError("optimal profile: W(0) = 0, the profile cannot cross zero");
  }
  auto table = std::make_shared<Table>();
  table->step = kProfileStep;
  table->forward = integrate_branch(well_, 1.0);
  table->backward = integrate_branch(well_, -1.0);
  table_ = std::move(table);
}

double OptimalProfile::table_value(double t) const {
  const auto& branch = t >= 0.0 ? table_->forward : table_->backward;
  const double sign = t >= 0.0 ? 1.0 : -1.0;
  const double x = std::abs(t) / table_->step;
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= branch.size()) return branch.back();
  // Cubic Hermite in |t| with slopes from the ODE right-hand side.
  const double s = x - static_cast<double>(k);
  const double h = table_->step;
  const double w0 = branch[k];
  const double w1 = branch[k + 1];
  // Along |t| the branch moves with slope sign * sqrt(2W(w)).
  const double m0 = sign * std::sqrt(2.0 * std::max(0.0, well_.value(w0))) * h;
  const double m1 = sign * std::sqrt(2.0 * std::max(0.0, well_.value(w1))) * h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * w0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * w1 +
         (s3 - s2) * m1;
}

double OptimalProfile::value(double t) const {
  if (!table_) return std::tanh(std::numbers::sqrt2 * t);
  return table_value(t);
}

double OptimalProfile::derivative(double t) const {
  if (!table_) {
    const double c = std::cosh(std::numbers::sqrt2 * t);
    return std::numbers::sqrt2 / (c * c);
  }
  return std::sqrt(2.0 * std::max(0.0, well_.value(value(t))));
}

double OptimalProfile::second_derivative(double t) const {
  if (!table_) {
    const double c = std::cosh(std::numbers::sqrt2 * t);
    return -4.0 * std::tanh(std::numbers::sqrt2 * t) / (c * c);
  }
  return well_.derivative(value(t));
}

TruncatedProfile::TruncatedProfile(const DoubleWell& well, double epsilon)
    : TruncatedProfile(std::make_shared<const OptimalProfile>(well), epsilon) {}

TruncatedProfile::TruncatedProfile(std::shared_ptr<const OptimalProfile> profile, double epsilon)
    : profile_(std::move(profile)), epsilon_(epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("truncated profile: epsilon must lie in (0, 1)");
  }
  truncation_ = std::abs(std::log(epsilon));
  const double len = truncation_;
  const double a = profile_->value(len);
  const double b = profile_->derivative(len);
  const double gap = 1.0 - a;
  cubic_ = {a, b, (3.0 * gap - 2.0 * b * len) / (len * len), (-2.0 * gap + b * len) / (len * len * len)};
}

double TruncatedProfile::positive_value(double t) const {
  if (t <= truncation_) return profile_->value(t);
  if (t > 2.0 * truncation_) return 1.0;
  const double s = t - truncation_;
  return cubic_[0] + s * (cubic_[1] + s * (cubic_[2] + s * cubic_[3]));
}

double TruncatedProfile::positive_derivative(double t) const {
  if (t <= truncation_) return profile_->derivative(t);
  if (t > 2.0 * truncation_) return 0.0;
  const double s = t - truncation_;
  return cubic_[1] + s * (2.0 * cubic_[2] + 3.0 * s * cubic_[3]);
}

double TruncatedProfile::positive_second_derivative(double t) const {
  if (t <= truncation_) return profile_->second_derivative(t);
  if (t > 2.0 * truncation_) return 0.0;
  const double s = t - truncation_;
  return 2.0 * cubic_[2] + 6.0 * s * cubic_[3];
}

double TruncatedProfile::value(double t) const {
  return t < 0.0 ? -positive_value(-t) : positive_value(t);
}

double TruncatedProfile::derivative(double t) const {
  return positive_derivative(std::abs(t));
}

double TruncatedProfile::second_derivative(double t) const {
  return t < 0.0 ? -positive_second_derivative(-t) : positive_second_derivative(t);
}

ProfileEnergy profile_energy_1d(const DoubleWell& well, const std::function<double(double)>& value,
                                const std::function<double(double)>& derivative, double half_width,
                                double step) {
  if (!(half_width > 0.0) || !(step > 0.0)) throw DomainError("profile energy: bad window");
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / step));
  const double dt = 2.0 * half_width / static_cast<double>(n);
  std::vector<double> total(n);
  std::vector<double> grad(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = -half_width + (static_cast<double>(k) + 0.5) * dt;
    const double dw = derivative(t);
    total[k] = well.value(value(t)) + 0.5 * dw * dw;
    grad[k] = dw * dw;
  }
  auto pairwise = [](auto&& self, const double* p, std::size_t len) -> double {
    if (len <= 8) {
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += p[i];
      return s;
    }
    return self(self, p, len / 2) + self(self, p + len / 2, len - len / 2);
  };
  return {dt * pairwise(pairwise, total.data(), n), dt * pairwise(pairwise, grad.data(), n)};
}

ProfileEnergy profile_energy_1d(const OptimalProfile& w, double half_width, double step) {
  return profile_energy_1d(
      w.potential(), [&](double t) { return w.value(t); }, [&](double t) { return w.derivative(t); },
      half_width, step);
}

ProfileEnergy profile_energy_1d(const TruncatedProfile& tp, double half_width, double step) {
  return profile_energy_1d(
      tp.profile().potential(), [&](double t) { return tp.value(t); },
      [&](double t) { return tp.derivative(t); }, half_width, step);
}

TruncationEstimates truncation_estimates(const TruncatedProfile& tp) {
  constexpr int kSamples = 10000;
  const double T = tp.truncation();
  const double eps = tp.epsilon();
  TruncationEstimates est;
  est.epsilon = eps;
  est.epsilon_squared = eps * eps;
  for (int k = 0; k < kSamples; ++k) {
    const double t = T + (k + 0.5) * T / kSamples;
    est.sup_derivative = std::max(est.sup_derivative, std::abs(tp.derivative(t)));
    est.sup_second_derivative = std::max(est.sup_second_derivative, std::abs(tp.second_derivative(t)));
    est.sup_gap = std::max(est.sup_gap, std::abs(tp.profile().value(t) - tp.value(t)));
  }
  est.sup_scaled_derivative = est.sup_derivative / eps;
  est.sup_scaled_second_derivative = est.sup_second_derivative / (eps * eps);
  return est;
}

}  // namespace memphase
