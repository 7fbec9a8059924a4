#include "memphase/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "memphase/energy.hpp"
#include "memphase/errors.hpp"
#include "memphase/parallel.hpp"

namespace memphase {

namespace {

constexpr int kMaxHalvings = 20;
constexpr int kDtRefresh = 50;
constexpr double kDescentTolerance = 1e-10;
constexpr double kSeparated = 0.9;

double norm2(const Point& g) { return g[0] * g[0] + g[1] * g[1] + g[2] * g[2]; }

// Row j of D_a^T applied to g, where D_a is the stencil of partial_at.
double adjoint_partial_at(const GridSpec& spec, std::span<const double> g, std::size_t flat,
                          const Index& idx, int axis) {
  const std::size_t s = spec.strides()[axis];
  const std::size_t n = spec.dims[axis];
  const std::size_t j = idx[axis];
  double r = 0.0;
  if (j >= 2) r += g[flat - s];
  if (j + 1 <= n - 2) r -= g[flat + s];
  if (j == 0) r -= 3.0 * g[flat];
  if (j == 1) r += 4.0 * g[flat - s];
  if (j == 2) r -= g[flat - 2 * s];
  if (j == n - 1) r += 3.0 * g[flat];
  if (j + 2 == n) r -= 4.0 * g[flat + s];
  if (j + 3 == n) r += g[flat + 2 * s];
  return r / (2.0 * spec.spacing);
}

// W'(u) * weight / eps + eps * sum_a D_a^T (weight * D_a u); weight = 1 when
// absent.
ScalarField weighted_variation(const ScalarField& u, const ScalarField* weight,
                               const DoubleWell& well, double epsilon) {
  const GridSpec& spec = u.spec();
  require_stencil_shape(spec);
  std::vector<ScalarField> flux;
  for (int a = 0; a < spec.dim; ++a) flux.emplace_back(spec);
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index idx = spec.unflatten(i);
      const double w = weight ? (*weight)[i] : 1.0;
      for (int a = 0; a < spec.dim; ++a) flux[a][i] = w * partial_at(spec, u.values(), i, idx, a);
    }
  });
  ScalarField out(spec);
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index idx = spec.unflatten(i);
      const double w = weight ? (*weight)[i] : 1.0;
      double div = 0.0;
      for (int a = 0; a < spec.dim; ++a) div += adjoint_partial_at(spec, flux[a].values(), i, idx, a);
      out[i] = well.derivative(u[i]) * w / epsilon + epsilon * div;
    }
  });
  return out;
}

double inner(const ScalarField& a, const ScalarField& b) {
  return a.spec().cell_volume() * parallel::sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

ScalarField smooth_direction(const GridSpec& spec, SplitMix64& rng) {
  struct Mode {
    Point k;
    double phase;
    double amplitude;
  };
  std::array<Mode, 3> modes{};
  for (auto& m : modes) {
    for (int a = 0; a < 3; ++a) m.k[a] = a < spec.dim ? 6.0 * rng.uniform() - 3.0 : 0.0;
    m.phase = 2.0 * std::numbers::pi * rng.uniform();
    m.amplitude = 2.0 * rng.uniform() - 1.0;
  }
  return ScalarField::sample(spec, [&](const Point& x) {
    double z = 0.0;
    for (const auto& m : modes) z += m.amplitude * std::sin(m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase);
    return z;
  });
}

ScalarField shifted(const ScalarField& f, const ScalarField& dir, double tau) {
  ScalarField out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] + tau * dir[i];
  return out;
}

double relative_gap(double fd, double analytic, double scale) {
  const double denom = std::max(std::abs(fd), std::abs(analytic));
  if (denom <= 1e-9 * std::max(1.0, std::abs(scale))) return 0.0;
  return std::abs(fd - analytic) / denom;
}

}  // namespace

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double GradientCheck::worst() const {
  return std::max({variation_M, variation_I_u, variation_I_v});
}

void validate(const FlowConfig& cfg) {
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("flow: epsilon must lie in (0, 1)");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) throw ConfigError("flow: lambda must be >= 0");
  if (cfg.steps < 1) throw ConfigError("flow: steps must be >= 1");
  if (cfg.dt && !(*cfg.dt > 0.0 && std::isfinite(*cfg.dt))) throw ConfigError("flow: dt must be > 0");
  if (cfg.log_every < 1) throw ConfigError("flow: log_every must be >= 1");
  if (!(cfg.c_safe > 0.0 && cfg.c_safe <= 1.0)) throw ConfigError("flow: c_safe must lie in (0, 1]");
  if (cfg.init_v.kind == InitV::Kind::Noise &&
      !(cfg.init_v.amplitude > 0.0 && cfg.init_v.amplitude <= 1.0)) {
    throw ConfigError("flow: noise amplitude must lie in (0, 1]");
  }
  if (cfg.init_v.kind == InitV::Kind::Cap) {
    if (cfg.init_u.kind() != Geometry::Kind::Sphere3D) throw ConfigError("flow: cap init_v needs a sphere");
    if (!(cfg.init_v.theta0 > 0.0 && cfg.init_v.theta0 < std::numbers::pi)) {
      throw ConfigError("flow: cap theta0 must lie in (0, pi)");
    }
  }
  if (cfg.init_v.kind == InitV::Kind::Constant && !std::isfinite(cfg.init_v.value)) {
    throw ConfigError("flow: constant init_v must be finite");
  }
}

ScalarField variation_M(const ScalarField& u, const DoubleWell& well, double epsilon) {
  return weighted_variation(u, nullptr, well, epsilon);
}

std::pair<ScalarField, ScalarField> variation_I(const ScalarField& u, const ScalarField& v,
                                                const DoubleWell& well, double epsilon) {
  require_same_spec(u.spec(), v.spec(), "variation_I");
  const ScalarField qu = mm_density(u, well, epsilon);
  const ScalarField qv = mm_density(v, well, epsilon);
  return {weighted_variation(u, &qv, well, epsilon), weighted_variation(v, &qu, well, epsilon)};
}

GradientCheck check_gradients(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                              double epsilon, std::uint64_t seed) {
  require_same_spec(u.spec(), v.spec(), "check_gradients");
  constexpr double tau = 1e-5;
  const ScalarField gm = variation_M(u, well, epsilon);
  const auto [gu, gv] = variation_I(u, v, well, epsilon);
  const double m0 = modica_mortola(u, well, epsilon);
  const double i0 = coupling_energy(u, v, well, epsilon);
  SplitMix64 rng(seed);
  GradientCheck out;
  for (int k = 0; k < 5; ++k) {
    const ScalarField z = smooth_direction(u.spec(), rng);
    const ScalarField up = shifted(u, z, tau);
    const ScalarField um = shifted(u, z, -tau);
    const ScalarField vp = shifted(v, z, tau);
    const ScalarField vm = shifted(v, z, -tau);
    const double fd_m = (modica_mortola(up, well, epsilon) - modica_mortola(um, well, epsilon)) / (2 * tau);
    const double fd_iu = (coupling_energy(up, v, well, epsilon) - coupling_energy(um, v, well, epsilon)) / (2 * tau);
    const double fd_iv = (coupling_energy(u, vp, well, epsilon) - coupling_energy(u, vm, well, epsilon)) / (2 * tau);
    out.variation_M = std::max(out.variation_M, relative_gap(fd_m, inner(gm, z), m0));
    out.variation_I_u = std::max(out.variation_I_u, relative_gap(fd_iu, inner(gu, z), i0));
    out.variation_I_v = std::max(out.variation_I_v, relative_gap(fd_iv, inner(gv, z), i0));
  }
  return out;
}

FlowSolver::FlowSolver(const FlowConfig& cfg, ScalarField u, ScalarField v)
    : cfg_(cfg), u_(std::move(u)), v_(std::move(v)) {
  validate(cfg_);
  require_same_spec(u_.spec(), v_.spec(), "flow");
  const GridSpec& spec = u_.spec();
  require_stencil_shape(spec);
  trial_u_ = ScalarField(spec);
  trial_v_ = ScalarField(spec);
  grad_u_ = ScalarField(spec);
  grad_v_ = ScalarField(spec);
  m_u_ = ScalarField(spec);
  m_v_ = ScalarField(spec);
  for (int a = 0; a < spec.dim; ++a) {
    flux_u_.emplace_back(spec);
    flux_v_.emplace_back(spec);
  }
  stats_ = analyse(u_, v_);
  mass0_ = stats_.mass;
  recompute_dt();
}

FlowSolver::Stats FlowSolver::analyse(const ScalarField& u, const ScalarField& v) {
  const GridSpec& spec = u.spec();
  const double eps = cfg_.epsilon;
  const double lambda = cfg_.lambda;
  const DoubleWell& well = cfg_.potential;
  constexpr int kSums = 5;  // M, I, mass, layer, layer_separated
  constexpr int kMaxes = 5;  // |v|, m_u, m_v, |W''(u)|, |W''(v)|
  const std::size_t chunks = parallel::chunk_count(spec.size());
  std::vector<double> sums(chunks * kSums, 0.0);
  std::vector<double> maxes(chunks * kMaxes, 0.0);
  parallel::for_chunks(spec.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::array<std::vector<double>, kSums> buf;
    for (auto& b : buf) b.resize(end - begin);
    std::array<double, kMaxes> mx{};
    for (std::size_t i = begin; i < end; ++i) {
      const Index idx = spec.unflatten(i);
      const Point gu = gradient_at(spec, u.values(), i, idx);
      const Point gv = gradient_at(spec, v.values(), i, idx);
      const double mu = 0.5 * eps * norm2(gu) + well.value(u[i]) / eps;
      const double mv = 0.5 * eps * norm2(gv) + well.value(v[i]) / eps;
      m_u_[i] = mu;
      m_v_[i] = mv;
      const double pu = 1.0 + lambda * mv;
      const double pv = lambda * mu;
      for (int a = 0; a < spec.dim; ++a) {
        flux_u_[a][i] = pu * gu[a];
        flux_v_[a][i] = pv * gv[a];
      }
      const bool layer = std::abs(u[i]) < kSeparated;
      const std::size_t k = i - begin;
      buf[0][k] = mu;
      buf[1][k] = mu * mv;
      buf[2][k] = u[i];
      buf[3][k] = layer ? 1.0 : 0.0;
      buf[4][k] = layer && std::abs(v[i]) > kSeparated ? 1.0 : 0.0;
      mx[0] = std::max(mx[0], std::abs(v[i]));
      mx[1] = std::max(mx[1], mu);
      mx[2] = std::max(mx[2], mv);
      mx[3] = std::max(mx[3], std::abs(well.second_derivative(u[i])));
      mx[4] = std::max(mx[4], std::abs(well.second_derivative(v[i])));
    }
    for (int q = 0; q < kSums; ++q) sums[q * chunks + c] = parallel::pairwise_sum(buf[q]);
    for (int q = 0; q < kMaxes; ++q) maxes[c * kMaxes + q] = mx[q];
  });
  std::array<double, kSums> total{};
  for (int q = 0; q < kSums; ++q) {
    total[q] = parallel::pairwise_sum(std::span<const double>(sums).subspan(q * chunks, chunks));
  }
  std::array<double, kMaxes> mx{};
  for (std::size_t c = 0; c < chunks; ++c) {
    for (int q = 0; q < kMaxes; ++q) mx[q] = std::max(mx[q], maxes[c * kMaxes + q]);
  }
  const double vol = spec.cell_volume();
  Stats s;
  s.M = vol * total[0];
  s.I = vol * total[1];
  s.mass = vol * total[2];
  s.layer = total[3];
  s.layer_separated = total[4];
  s.max_abs_v = mx[0];
  s.max_mu = mx[1];
  s.max_mv = mx[2];
  s.max_wpp_u = mx[3];
  s.max_wpp_v = mx[4];
  if (!std::isfinite(s.M) || !std::isfinite(s.I)) throw DomainError("flow: energy became non-finite");
  return s;
}

void FlowSolver::update_gradients() {
  const GridSpec& spec = u_.spec();
  const double eps = cfg_.epsilon;
  const double lambda = cfg_.lambda;
  const DoubleWell& well = cfg_.potential;
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index idx = spec.unflatten(i);
      double div_u = 0.0;
      double div_v = 0.0;
      for (int a = 0; a < spec.dim; ++a) {
        div_u += adjoint_partial_at(spec, flux_u_[a].values(), i, idx, a);
        div_v += adjoint_partial_at(spec, flux_v_[a].values(), i, idx, a);
      }
      grad_u_[i] = well.derivative(u_[i]) * (1.0 + lambda * m_v_[i]) / eps + eps * div_u;
      grad_v_[i] = lambda * well.derivative(v_[i]) * m_u_[i] / eps + eps * div_v;
    }
  });
}

void FlowSolver::recompute_dt() {
  if (cfg_.dt) {
    dt_ = *cfg_.dt;
    return;
  }
  const GridSpec& spec = u_.spec();
  const double h = spec.spacing;
  const double eps = cfg_.epsilon;
  const double lambda = cfg_.lambda;
  // The u equation is weighted by 1 + lambda m_v, the v equation by
  // lambda m_u; the step has to respect the stiffer of the two.
  const double weight = std::max(1.0 + lambda * stats_.max_mv, lambda * stats_.max_mu);
  const double wpp = lambda > 0.0 ? std::max(stats_.max_wpp_u, stats_.max_wpp_v) : stats_.max_wpp_u;
  double dt = h * h / (2.0 * spec.dim * eps * weight);
  if (wpp > 0.0) dt = std::min(dt, eps / (wpp * weight));
  dt_ = cfg_.c_safe * dt;
}

void FlowSolver::step() {
  if (step_ > 0 && step_ % kDtRefresh == 0) recompute_dt();
  update_gradients();
  const GridSpec& spec = u_.spec();
  const double e0 = stats_.energy(cfg_.lambda);
  double dt = dt_;
  for (int attempt = 0; attempt <= kMaxHalvings; ++attempt) {
    parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        trial_u_[i] = u_[i] - dt * grad_u_[i];
        trial_v_[i] = v_[i] - dt * grad_v_[i];
      }
    });
    if (cfg_.mass_constraint) {
      const double m = mass(trial_u_);
      const double shift = (mass0_ - m) / (spec.cell_volume() * static_cast<double>(spec.size()));
      if (shift != 0.0) {
        parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) trial_u_[i] += shift;
        });
      }
    }
    const Stats trial = analyse(trial_u_, trial_v_);
    const double e1 = trial.energy(cfg_.lambda);
    if (e1 <= e0 + kDescentTolerance * std::abs(e0)) {
      std::swap(u_, trial_u_);
      std::swap(v_, trial_v_);
      stats_ = trial;
      if (e0 != 0.0) worst_increase_ = std::max(worst_increase_, (e1 - e0) / std::abs(e0));
      time_ += dt;
      ++step_;
      return;
    }
    ++backtracks_;
    dt *= 0.5;
  }
  // Restore the flux buffers of the current state before reporting.
  stats_ = analyse(u_, v_);
  throw DomainError("flow: energy descent stagnated after 20 step halvings");
}

FlowLogRow FlowSolver::row() const {
  FlowLogRow r;
  r.step = step_;
  r.time = time_;
  r.M = stats_.M;
  r.I = stats_.I;
  r.E_total = stats_.energy(cfg_.lambda);
  r.mass_u = stats_.mass;
  r.max_abs_v = stats_.max_abs_v;
  r.layer_fraction = stats_.layer > 0.0 ? stats_.layer_separated / stats_.layer : 0.0;
  return r;
}

std::pair<ScalarField, ScalarField> initial_fields(const FlowConfig& cfg) {
  validate(cfg);
  RecoveryConfig rc;
  rc.geometry = cfg.init_u;
  if (cfg.init_v.kind == InitV::Kind::Cap) {
    rc.geometry = Geometry::sphere(cfg.init_u.radius(), cfg.init_u.center(), PhaseSplit::cap(cfg.init_v.theta0));
  }
  rc.potential = cfg.potential;
  rc.epsilons = {cfg.epsilon};
  rc.q = cfg.q;
  rc.box = cfg.box;
  validate(rc);
  ScalarField u = build_u(rc, cfg.epsilon);
  ScalarField v(u.spec());
  switch (cfg.init_v.kind) {
    case InitV::Kind::Noise: {
      SplitMix64 rng(cfg.seed);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = cfg.init_v.amplitude * (2.0 * rng.uniform() - 1.0);
      break;
    }
    case InitV::Kind::Cap:
      v = build_v(rc, cfg.epsilon);
      break;
    case InitV::Kind::Constant:
      v = ScalarField(u.spec(), cfg.init_v.value);
      break;
  }
  return {std::move(u), std::move(v)};
}

FlowLog run(const FlowConfig& cfg, const FlowCallbacks& callbacks) {
  auto [u, v] = initial_fields(cfg);
  FlowLog log;
  if (cfg.check_gradients) log.gradient_check = check_gradients(u, v, cfg.potential, cfg.epsilon, cfg.seed);
  FlowSolver solver(cfg, std::move(u), std::move(v));
  log.rows.push_back(solver.row());
  for (int k = 0; k < cfg.steps; ++k) {
    solver.step();
    if (callbacks.on_step) callbacks.on_step(solver);
    if (solver.steps_taken() % cfg.log_every == 0 || solver.steps_taken() == cfg.steps) {
      log.rows.push_back(solver.row());
    }
  }
  log.backtracks = solver.backtracks();
  log.worst_increase = solver.worst_increase();
  return log;
}

}  // namespace memphase
