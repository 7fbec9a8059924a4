#include "memphase/recovery.hpp"

#include <cmath>
#include <sstream>

#include "memphase/errors.hpp"
#include "memphase/parallel.hpp"
#include "memphase/slicing.hpp"

namespace memphase {

namespace {

int geometry_dim(const RecoveryConfig& cfg) {
  const int d = cfg.geometry.dim();
  return d == 0 ? cfg.box.dim : d;
}

double relative_error(double value, double limit) { return (value - limit) / limit; }

}  // namespace

void validate(const RecoveryConfig& cfg) {
  if (cfg.epsilons.empty()) throw ConfigError("recovery: epsilon list is empty");
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double e = cfg.epsilons[k];
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("recovery: every epsilon must lie in (0, 1)");
    if (k > 0 && !(e < cfg.epsilons[k - 1])) throw ConfigError("recovery: epsilons must be descending");
  }
  if (!(cfg.q >= 4.0) || !std::isfinite(cfg.q)) throw ConfigError("recovery: q must be >= 4");
  const int gd = cfg.geometry.dim();
  if (gd != 0 && gd != cfg.box.dim) throw ConfigError("recovery: box dimension does not match geometry");
  for (int a = 0; a < cfg.box.dim; ++a) {
    if (!(cfg.box.lo[a] < cfg.box.hi[a])) throw ConfigError("recovery: box must have lo < hi");
  }
  for (double e : cfg.epsilons) check_box(cfg, e);
}

void check_box(const RecoveryConfig& cfg, double epsilon) {
  const double h = epsilon / cfg.q;
  const double reach = 2.0 * epsilon * std::abs(std::log(epsilon)) + 4.0 * h;
  const Geometry& g = cfg.geometry;
  Point need_lo = cfg.box.lo;
  Point need_hi = cfg.box.hi;
  if (g.kind() == Geometry::Kind::Plane1DInterface) {
    need_lo[0] = std::min(need_lo[0], g.position() - reach);
    need_hi[0] = std::max(need_hi[0], g.position() + reach);
  } else {
    const double r = g.radius() + reach;
    for (int a = 0; a < g.dim(); ++a) {
      need_lo[a] = std::min(need_lo[a], g.center()[a] - r);
      need_hi[a] = std::max(need_hi[a], g.center()[a] + r);
    }
  }
  if (need_lo != cfg.box.lo || need_hi != cfg.box.hi) {
    std::ostringstream msg;
    msg << "recovery: box too small for epsilon " << epsilon << "; required box lo=[";
    for (int a = 0; a < cfg.box.dim; ++a) msg << (a ? "," : "") << need_lo[a];
    msg << "] hi=[";
    for (int a = 0; a < cfg.box.dim; ++a) msg << (a ? "," : "") << need_hi[a];
    msg << "]";
    throw ConfigError(msg.str());
  }
}

GridSpec recovery_grid(const RecoveryConfig& cfg, double epsilon) {
  const double h = epsilon / cfg.q;
  GridSpec spec;
  spec.dim = geometry_dim(cfg);
  spec.spacing = h;
  spec.dims = {1, 1, 1};
  spec.origin = {0.0, 0.0, 0.0};
  for (int a = 0; a < spec.dim; ++a) {
    const double extent = cfg.box.hi[a] - cfg.box.lo[a];
    const auto n = static_cast<std::size_t>(std::ceil(extent / h - 1e-9));
    spec.dims[a] = std::max<std::size_t>(n, 3);
    const double centre = 0.5 * (cfg.box.lo[a] + cfg.box.hi[a]);
    spec.origin[a] = centre - 0.5 * static_cast<double>(spec.dims[a] - 1) * h;
  }
  spec.validate();
  return spec;
}

ScalarField build_u(const RecoveryConfig& cfg, double epsilon) {
  check_box(cfg, epsilon);
  const TruncatedProfile tp(cfg.potential, epsilon);
  const Geometry& g = cfg.geometry;
  return ScalarField::sample(recovery_grid(cfg, epsilon),
                             [&](const Point& x) { return tp.scaled(g.signed_distance(x)); });
}

ScalarField build_v(const RecoveryConfig& cfg, double epsilon) {
  if (cfg.geometry.split().kind == PhaseSplit::Kind::None) {
    throw ConfigError("recovery: build_v needs a phase split");
  }
  check_box(cfg, epsilon);
  const TruncatedProfile tp(cfg.potential, epsilon);
  const Geometry& g = cfg.geometry;
  return ScalarField::sample(recovery_grid(cfg, epsilon),
                             [&](const Point& x) { return tp.scaled(g.phase_coordinate(x)); });
}

double analytic_willmore(const RecoveryConfig& cfg, double epsilon) {
  check_box(cfg, epsilon);
  const TruncatedProfile tp(cfg.potential, epsilon);
  const GridSpec spec = recovery_grid(cfg, epsilon);
  const Geometry& g = cfg.geometry;
  const DoubleWell& w = cfg.potential;
  const double reach = tp.layer_half_width();
  const double sum = parallel::sum(spec.size(), [&](std::size_t i) {
    const Point x = spec.point(i);
    const double d = g.signed_distance(x);
    if (std::abs(d) >= reach) return 0.0;
    const double u = tp.scaled(d);
    const double lap = tp.scaled_second_derivative(d) - tp.scaled_derivative(d) * g.curvature_sum(x);
    const double r = w.derivative(u) / epsilon - epsilon * lap;
    return r * r / epsilon;
  });
  return spec.cell_volume() * sum;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return NAN;
  return (n * sxy - sx * sy) / denom;
}

SweepResult sweep(const RecoveryConfig& cfg, const SweepOptions& options) {
  if (cfg.epsilons.size() < 2) throw ConfigError("sweep: needs at least two epsilons");
  validate(cfg);
  SweepResult result;
  result.limits = sharp_limits(cfg.geometry, cfg.potential, cfg.modulus);
  const bool has_split = cfg.geometry.split().kind != PhaseSplit::Kind::None;

  for (double eps : cfg.epsilons) {
    try {
      SweepRow row;
      row.epsilon = eps;
      row.h = eps / cfg.q;
      ScalarField u = build_u(cfg, eps);
      std::optional<ScalarField> v;
      if (has_split) v = build_v(cfg, eps);
      row.energies = evaluate_energies(u, v ? &*v : nullptr, cfg.potential, cfg.modulus, eps);
      row.errors.M = relative_error(row.energies.M, result.limits.perimeter);
      if (result.limits.line && has_split) row.errors.I = relative_error(row.energies.I, *result.limits.line);
      if (result.limits.willmore) {
        row.errors.J = relative_error(row.energies.J, *result.limits.willmore);
        // F is compared with the unweighted limit sigma * integral |H|^2.
        const SharpLimits unit = sharp_limits(cfg.geometry, cfg.potential, Modulus(1.0, 1.0));
        row.errors.F = relative_error(row.energies.F, *unit.willmore);
      }
      if (options.equidistribution) {
        row.equidistribution = equidistribution_defect(u, cfg.potential, eps);
      }
      if (options.fields_out) {
        std::filesystem::create_directories(*options.fields_out);
        std::ostringstream tag;
        tag << "eps_" << eps;
        write_field(u, *options.fields_out / ("u_" + tag.str()));
        if (v) write_field(*v, *options.fields_out / ("v_" + tag.str()));
      }
      if (options.on_row) options.on_row(row, u, v ? &*v : nullptr);
      result.rows.push_back(row);
    } catch (const Error& e) {
      result.complete = false;
      result.failure = e.what();
      break;
    }
  }

  if (result.rows.size() >= 3) {
    std::vector<double> eps;
    for (const auto& r : result.rows) eps.push_back(r.epsilon);
    auto fit = [&](const char* name, auto member) {
      std::vector<double> err;
      for (const auto& r : result.rows) {
        const auto& e = r.errors.*member;
        if (!e || *e == 0.0) return;
        err.push_back(std::abs(*e));
      }
      result.rates[name] = loglog_slope(eps, err);
    };
    fit("M", &RelativeErrors::M);
    fit("I", &RelativeErrors::I);
    fit("J", &RelativeErrors::J);
    fit("F", &RelativeErrors::F);
  }
  return result;
}

}  // namespace memphase
