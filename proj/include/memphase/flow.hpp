#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "memphase/recovery.hpp"

namespace memphase {

/// splitmix64 with its reference constants. uniform() returns the top 53
/// bits scaled to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Initial membrane phase field.
struct InitV {
  enum class Kind { Noise, Cap, Constant };
  Kind kind = Kind::Noise;
  double amplitude = 0.5;  // Noise: i.i.d. uniform in [-amplitude, amplitude]
  double theta0 = 0.0;     // Cap: recovery phase field of the polar cap
  double value = 1.0;      // Constant

  static InitV noise(double amplitude) { return {Kind::Noise, amplitude, 0.0, 1.0}; }
  static InitV cap(double theta0) { return {Kind::Cap, 0.5, theta0, 1.0}; }
  static InitV constant(double c) { return {Kind::Constant, 0.5, 0.0, c}; }
};

struct FlowConfig {
  double epsilon = 0.1;
  double lambda = 1.0;
  int steps = 100;
  std::optional<double> dt;  // empty selects the automatic rule
  bool mass_constraint = false;
  std::uint64_t seed = 0;
  Geometry init_u = Geometry::sphere(1.0, {0.0, 0.0, 0.0});
  InitV init_v;
  int log_every = 10;
  double c_safe = 0.4;
  /// Grid resolution h = epsilon / q on a grid centred in `box`.
  double q = 4.0;
  Box box;
  DoubleWell potential = DoubleWell::quartic();
  bool check_gradients = false;
};

/// Throws ConfigError on invalid settings.
void validate(const FlowConfig& cfg);

struct FlowLogRow {
  int step = 0;
  double time = 0.0;
  double M = 0.0;
  double I = 0.0;
  double E_total = 0.0;
  double mass_u = 0.0;
  double max_abs_v = 0.0;
  double layer_fraction = 0.0;  // share of {|u| < 0.9} with |v| > 0.9
};

/// Relative errors of the finite-difference directional-derivative checks.
struct GradientCheck {
  double variation_M = 0.0;
  double variation_I_u = 0.0;
  double variation_I_v = 0.0;
  double worst() const;
};

struct FlowLog {
  std::vector<FlowLogRow> rows;
  int backtracks = 0;
  /// Largest relative energy increase over accepted steps (<= 0 means
  /// monotone).
  double worst_increase = 0.0;
  std::optional<GradientCheck> gradient_check;
};

/// W'(u)/eps + eps * sum_a D_a^T D_a u, the exact gradient of the discrete
/// Modica-Mortola energy divided by the cell volume. D_a is the grid's
/// first-derivative stencil, so D_a^T D_a approximates -d_a^2 and the
/// result approximates W'(u)/eps - eps * laplacian(u).
ScalarField variation_M(const ScalarField& u, const DoubleWell& well, double epsilon);

/// Exact discrete gradients of I with respect to u and v, divided by the
/// cell volume: W'(u) q_v / eps + eps * sum_a D_a^T (q_v D_a u) with
/// q_v = mm_density(v), and the same with u and v exchanged.
std::pair<ScalarField, ScalarField> variation_I(const ScalarField& u, const ScalarField& v,
                                                const DoubleWell& well, double epsilon);

/// Central finite differences of M and I along five random smooth
/// directions, tau = 1e-5, against the variational formulas.
GradientCheck check_gradients(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                              double epsilon, std::uint64_t seed);

/// Fields and bookkeeping of an explicit Euler run with backtracking.
class FlowSolver {
 public:
  FlowSolver(const FlowConfig& cfg, ScalarField u, ScalarField v);

  /// One accepted step. Throws DomainError after 20 failed halvings.
  void step();

  int steps_taken() const { return step_; }
  double time() const { return time_; }
  double dt() const { return dt_; }
  int backtracks() const { return backtracks_; }
  double worst_increase() const { return worst_increase_; }
  const ScalarField& u() const { return u_; }
  const ScalarField& v() const { return v_; }
  FlowLogRow row() const;

 private:
  struct Stats {
    double M = 0.0;
    double I = 0.0;
    double mass = 0.0;
    double max_abs_v = 0.0;
    double layer = 0.0;
    double layer_separated = 0.0;
    double max_mu = 0.0;
    double max_mv = 0.0;
    double max_wpp_u = 0.0;
    double max_wpp_v = 0.0;
    double energy(double lambda) const { return M + lambda * I; }
  };

  Stats analyse(const ScalarField& u, const ScalarField& v);
  void update_gradients();
  void recompute_dt();

  FlowConfig cfg_;
  ScalarField u_, v_, trial_u_, trial_v_, grad_u_, grad_v_;
  // Per-node terms of the current state: the fluxes (1 + lambda m_v) D_a u
  // and lambda m_u D_a v, and the two densities.
  std::vector<ScalarField> flux_u_, flux_v_;
  ScalarField m_u_, m_v_;
  Stats stats_;
  double mass0_ = 0.0;
  double dt_ = 0.0;
  double time_ = 0.0;
  int step_ = 0;
  int backtracks_ = 0;
  double worst_increase_ = 0.0;
};

/// Initial fields of a run: u from the recovery construction, v from init_v.
std::pair<ScalarField, ScalarField> initial_fields(const FlowConfig& cfg);

struct FlowCallbacks {
  /// Called after every accepted step with the solver state.
  std::function<void(const FlowSolver&)> on_step;
};

FlowLog run(const FlowConfig& cfg, const FlowCallbacks& callbacks = {});

}  // namespace memphase
