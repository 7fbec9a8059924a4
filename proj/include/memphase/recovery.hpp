#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memphase/energy.hpp"
#include "memphase/geometry.hpp"
#include "memphase/profile.hpp"

namespace memphase {

struct Box {
  int dim = 3;
  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};
};

/// Parameters of a recovery-sequence sweep. Each epsilon uses spacing
/// h = epsilon / q on a grid centred in `box`.
struct RecoveryConfig {
  Geometry geometry = Geometry::sphere(1.0, {0.0, 0.0, 0.0});
  DoubleWell potential = DoubleWell::quartic();
  Modulus modulus{1.0, 1.0};
  std::vector<double> epsilons;
  double q = 6.0;
  Box box;
};

/// Throws ConfigError unless the config is usable for every epsilon
/// (descending epsilons in (0,1), q >= 4, box large enough).
void validate(const RecoveryConfig& cfg);
/// The box must contain the tube {|d| <= 2 eps T} widened by 4h.
void check_box(const RecoveryConfig& cfg, double epsilon);
GridSpec recovery_grid(const RecoveryConfig& cfg, double epsilon);

/// u(x) = w_eps(d(x) / eps).
ScalarField build_u(const RecoveryConfig& cfg, double epsilon);
/// v(x) = w_eps(d_g(pi(x)) / eps), extended to the skeleton by its limit
/// along the positive polar axis.
ScalarField build_v(const RecoveryConfig& cfg, double epsilon);

/// F computed with the analytic Laplacian w'' - w' H^t of the recovery
/// field in place of the grid stencil.
double analytic_willmore(const RecoveryConfig& cfg, double epsilon);

struct RelativeErrors {
  std::optional<double> M, I, J, F;
};

struct SweepRow {
  double epsilon = 0.0;
  double h = 0.0;
  EnergyReport energies;
  RelativeErrors errors;
  double equidistribution = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SharpLimits limits;
  /// Least-squares slopes of log|error| against log(epsilon); filled only
  /// with three or more rows.
  std::map<std::string, double> rates;
  bool complete = true;
  std::string failure;
};

struct SweepOptions {
  std::optional<std::filesystem::path> fields_out;
  bool equidistribution = true;
  /// Called once per epsilon with the built fields (v may be null).
  std::function<void(const SweepRow&, const ScalarField& u, const ScalarField* v)> on_row;
};

SweepResult sweep(const RecoveryConfig& cfg, const SweepOptions& options = {});

/// Least-squares slope of log(y) against log(x); requires positive data.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace memphase
