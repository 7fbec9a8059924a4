#include "memphase/energy.hpp"

#include <cmath>
#include <numbers>

#include "memphase/errors.hpp"
#include "memphase/parallel.hpp"

namespace memphase {

namespace {

double norm2(const Point& g) { return g[0] * g[0] + g[1] * g[1] + g[2] * g[2]; }

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("energy: epsilon must be > 0");
}

// (eps/2)|grad u|^2 and W(u)/eps at one grid point.
struct MMParts {
  double gradient;
  double potential;
};

MMParts mm_parts(const GridSpec& spec, std::span<const double> u, std::size_t i, const Index& idx,
                 const DoubleWell& well, double epsilon) {
  const Point g = gradient_at(spec, u, i, idx);
  return {0.5 * epsilon * norm2(g), well.value(u[i]) / epsilon};
}

double willmore_point(const GridSpec& spec, std::span<const double> u, std::size_t i,
                      const Index& idx, const DoubleWell& well, double epsilon) {
  const double r = well.derivative(u[i]) / epsilon - epsilon * laplacian_at(spec, u, i, idx);
  return r * r / epsilon;
}

template <class Point_fn>
ScalarField map_points(const ScalarField& u, Point_fn&& fn) {
  const GridSpec& spec = u.spec();
  require_stencil_shape(spec);
  ScalarField out(spec);
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = fn(i, spec.unflatten(i));
  });
  return out;
}

template <class Point_fn>
double integrate_points(const GridSpec& spec, Point_fn&& fn) {
  require_stencil_shape(spec);
  return spec.cell_volume() *
         parallel::sum(spec.size(), [&](std::size_t i) { return fn(i, spec.unflatten(i)); });
}

}  // namespace

LiYauFlags li_yau_admissible(double J, const DoubleWell& well, const Modulus& modulus) {
  LiYauFlags f;
  f.threshold = well.sigma() * 8.0 * std::numbers::pi * std::min(modulus.a1(), modulus.a2());
  f.sum_convention = J < f.threshold;
  f.mean_convention = 0.25 * J < f.threshold;
  return f;
}

nlohmann::json to_json(const EnergyReport& r) {
  nlohmann::json j;
  j["epsilon"] = r.epsilon;
  j["M"] = r.M;
  j["I"] = r.I;
  j["F"] = r.F;
  j["J"] = r.J;
  j["discrepancy_l1"] = r.discrepancy_l1;
  j["mu_total"] = r.mu_total;
  j["mass_u"] = r.mass_u;
  j["has_v"] = r.has_v;
  j["li_yau_threshold"] = r.admissible_li_yau.threshold;
  j["admissible_li_yau_sum"] = r.admissible_li_yau.sum_convention;
  j["admissible_li_yau_mean"] = r.admissible_li_yau.mean_convention;
  return j;
}

ScalarField mm_density(const ScalarField& u, const DoubleWell& well, double epsilon) {
  require_epsilon(epsilon);
  const auto vals = u.values();
  return map_points(u, [&](std::size_t i, const Index& idx) {
    const auto p = mm_parts(u.spec(), vals, i, idx, well, epsilon);
    return p.gradient + p.potential;
  });
}

ScalarField willmore_density(const ScalarField& u, const DoubleWell& well, double epsilon) {
  require_epsilon(epsilon);
  return map_points(u, [&](std::size_t i, const Index& idx) {
    return willmore_point(u.spec(), u.values(), i, idx, well, epsilon);
  });
}

ScalarField coarea_density(const ScalarField& u, const DoubleWell& well) {
  const auto vals = u.values();
  return map_points(u, [&](std::size_t i, const Index& idx) {
    return std::sqrt(2.0 * well.value(vals[i]) * norm2(gradient_at(u.spec(), vals, i, idx)));
  });
}

double modica_mortola(const ScalarField& u, const DoubleWell& well, double epsilon) {
  require_epsilon(epsilon);
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    const auto p = mm_parts(u.spec(), u.values(), i, idx, well, epsilon);
    return p.gradient + p.potential;
  });
}

double coupling_energy(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                       double epsilon) {
  require_epsilon(epsilon);
  require_same_spec(u.spec(), v.spec(), "coupling_energy");
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    const auto pu = mm_parts(u.spec(), u.values(), i, idx, well, epsilon);
    const double du = pu.gradient + pu.potential;
    if (du == 0.0) return 0.0;
    const auto pv = mm_parts(v.spec(), v.values(), i, idx, well, epsilon);
    return du * (pv.gradient + pv.potential);
  });
}

double willmore(const ScalarField& u, const DoubleWell& well, double epsilon) {
  require_epsilon(epsilon);
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    return willmore_point(u.spec(), u.values(), i, idx, well, epsilon);
  });
}

double weighted_willmore(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                         const Modulus& modulus, double epsilon) {
  require_epsilon(epsilon);
  require_same_spec(u.spec(), v.spec(), "weighted_willmore");
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    return modulus(v[i]) * willmore_point(u.spec(), u.values(), i, idx, well, epsilon);
  });
}

double discrepancy_l1(const ScalarField& u, const DoubleWell& well, double epsilon) {
  require_epsilon(epsilon);
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    const auto p = mm_parts(u.spec(), u.values(), i, idx, well, epsilon);
    return std::abs(p.gradient - p.potential);
  });
}

double mass(const ScalarField& u) { return integrate(u); }

double coarea_mass(const ScalarField& u, const DoubleWell& well) {
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    return std::sqrt(2.0 * well.value(u[i]) * norm2(gradient_at(u.spec(), u.values(), i, idx)));
  });
}

double sliced_coupling_bound(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                             double epsilon) {
  require_epsilon(epsilon);
  require_same_spec(u.spec(), v.spec(), "sliced_coupling_bound");
  return integrate_points(u.spec(), [&](std::size_t i, const Index& idx) {
    const double cu =
        std::sqrt(2.0 * well.value(u[i]) * norm2(gradient_at(u.spec(), u.values(), i, idx)));
    const auto pv = mm_parts(v.spec(), v.values(), i, idx, well, epsilon);
    return cu * (pv.gradient + pv.potential);
  });
}

EnergyReport evaluate_energies(const ScalarField& u, const ScalarField* v, const DoubleWell& well,
                               const Modulus& modulus, double epsilon) {
  require_epsilon(epsilon);
  const GridSpec& spec = u.spec();
  require_stencil_shape(spec);
  if (v) require_same_spec(spec, v->spec(), "evaluate_energies");
  const auto uv = u.values();

  // Slots: M, I, F, J, |xi|, mass.
  const auto sums = parallel::sum_n<6>(spec.size(), [&](std::size_t i) {
    const Index idx = spec.unflatten(i);
    const auto pu = mm_parts(spec, uv, i, idx, well, epsilon);
    const double mm_u = pu.gradient + pu.potential;
    const double will = willmore_point(spec, uv, i, idx, well, epsilon);
    double coupling = 0.0;
    double weighted = modulus.a1() * will;
    if (v) {
      if (mm_u != 0.0) {
        const auto pv = mm_parts(spec, v->values(), i, idx, well, epsilon);
        coupling = mm_u * (pv.gradient + pv.potential);
      }
      weighted = modulus((*v)[i]) * will;
    }
    return std::array<double, 6>{mm_u, coupling, will, weighted,
                                 std::abs(pu.gradient - pu.potential), uv[i]};
  });
  const double vol = spec.cell_volume();
  EnergyReport r;
  r.epsilon = epsilon;
  r.M = vol * sums[0];
  r.I = vol * sums[1];
  r.F = vol * sums[2];
  r.J = vol * sums[3];
  r.discrepancy_l1 = vol * sums[4];
  r.mu_total = r.M;
  r.mass_u = vol * sums[5];
  r.has_v = v != nullptr;
  r.admissible_li_yau = li_yau_admissible(r.J, well, modulus);
  return r;
}

}  // namespace memphase
