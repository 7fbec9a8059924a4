#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "memphase/energy.hpp"
#include "memphase/errors.hpp"
#include "memphase/recovery.hpp"
#include "memphase/slicing.hpp"
#include "oracles.hpp"

using namespace memphase;
using std::numbers::pi;

namespace {

// Points exactly on [-1, 1] along every active axis.
GridSpec symmetric(int dim, std::size_t n) {
  const double h = 2.0 / static_cast<double>(n - 1);
  GridSpec s;
  s.dim = dim;
  s.dims = {n, dim > 1 ? n : 1, dim > 2 ? n : 1};
  s.spacing = h;
  s.origin = {-1.0, dim > 1 ? -1.0 : 0.0, dim > 2 ? -1.0 : 0.0};
  return s;
}

RecoveryConfig equator_sphere() {
  RecoveryConfig cfg;
  cfg.geometry = Geometry::sphere(1.0, {0.0, 0.0, 0.0}, PhaseSplit::cap(pi / 2));
  cfg.q = 4.0;
  cfg.box = Box{3, {-1.75, -1.75, -1.75}, {1.75, 1.75, 1.75}};
  cfg.epsilons = {0.15};
  return cfg;
}

}  // namespace

TEST_CASE("planar level sets") {
  for (int dim : {2, 3}) {
    const GridSpec s = symmetric(dim, 21);
    const ScalarField U = ScalarField::sample(s, [](const Point& x) { return x[0]; });
    const IsoSurface surf = extract(U, 0.0);
    CHECK(surf.dim == dim);
    CHECK(surf.total_measure() == doctest::Approx(dim == 2 ? 2.0 : 4.0).epsilon(1e-6));
    for (const Point& p : surf.vertices) CHECK(std::abs(p[0]) < 1e-12);
    CHECK(extract(U, 5.0).simplices.empty());
    CHECK(extract(U, -1.5).simplices.empty());
  }
  CHECK_THROWS_AS(extract(ScalarField(GridSpec::box(1, {8, 1, 1}, 0.1, {0, 0, 0})), 0.0), ShapeError);
}

TEST_CASE("vertices are shared between cells") {
  const GridSpec s = symmetric(3, 17);
  const ScalarField U = ScalarField::sample(s, [](const Point& x) { return x[0] + 0.3 * x[1] - 0.2 * x[2]; });
  const IsoSurface surf = extract(U, 0.05);
  // A closed-form count: every vertex lies on a distinct cut edge, so the
  // mesh has Euler characteristic 1 (a disk).
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : surf.simplices) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k], b = t[(k + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  const long chi = static_cast<long>(surf.vertices.size()) - static_cast<long>(edges.size()) +
                   static_cast<long>(surf.simplices.size());
  CHECK(chi == 1);
}

TEST_CASE("sphere and circle level sets") {
  const double h = 0.02;
  const std::size_t n = 111;
  const GridSpec s3 = GridSpec::box(3, {n, n, n}, h, {-1.11, -1.11, -1.11});
  const ScalarField d3 = ScalarField::sample(s3, [](const Point& x) { return 1.0 - std::hypot(x[0], x[1], x[2]); });
  CHECK(extract(d3, 0.0).total_measure() == doctest::Approx(4.0 * pi).epsilon(0.01));
  // Closed triangle mesh: Euler characteristic 2.
  const IsoSurface sphere = extract(d3, 0.0);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& t : sphere.simplices)
    for (int k = 0; k < 3; ++k) edges.insert({std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])});
  CHECK(static_cast<long>(sphere.vertices.size()) - static_cast<long>(edges.size()) +
            static_cast<long>(sphere.simplices.size()) ==
        2);

  const GridSpec s2 = GridSpec::box(2, {200, 200, 1}, 0.0125, {-1.25, -1.25, 0.0});
  const ScalarField d2 = ScalarField::sample(s2, [](const Point& x) { return 1.0 - std::hypot(x[0], x[1]); });
  CHECK(extract(d2, 0.5).total_measure() == doctest::Approx(pi).epsilon(0.01));
  const std::array<double, 2> levels{0.0, 0.5};
  const auto per = level_integrals(d2, levels);
  CHECK(per[0] == doctest::Approx(extract(d2, 0.0).total_measure()).epsilon(1e-12));
  CHECK(per[1] == doctest::Approx(extract(d2, 0.5).total_measure()).epsilon(1e-12));
}

TEST_CASE("auxiliary integrands on level sets") {
  const GridSpec s = symmetric(2, 41);
  const ScalarField U = ScalarField::sample(s, [](const Point& x) { return x[0]; });
  // Integrate y^2 over the segment x = 0.3: exact 2/3, the interpolant of a
  // node function linear along cut edges gives the trapezoid value on y.
  const std::array<NodeFunction, 1> aux{[&](std::size_t, const Index& idx) {
    const double y = s.coordinate(1, idx[1]);
    return y * y;
  }};
  const IsoSurface surf = extract(U, 0.3, aux);
  double trap = 0.0;
  for (std::size_t j = 0; j + 1 < s.dims[1]; ++j) {
    const double a = s.coordinate(1, j), b = s.coordinate(1, j + 1);
    trap += 0.5 * (a * a + b * b) * (b - a);
  }
  CHECK(surf.integrate_aux(0) == doctest::Approx(trap).epsilon(1e-12));
  const std::array<double, 1> lv{0.3};
  CHECK(level_integrals(U, lv, aux, [](std::size_t, std::span<const double> a) { return a[0]; })[0] ==
        doctest::Approx(trap).epsilon(1e-12));
  const auto j = surf.to_json();
  CHECK(j.at("level").get<double>() == 0.3);
}

TEST_CASE("coarea identity") {
  const GridSpec s = symmetric(3, 30);
  const ScalarField lin = ScalarField::sample(s, [](const Point& x) { return x[0]; });
  CHECK(coarea_check(lin, 64).gap <= 1e-6);
  const CoareaResult flat = coarea_check(ScalarField(s, 0.3), 64);
  CHECK(flat.lhs == 0.0);
  CHECK(flat.gap == 0.0);
  CHECK_THROWS_AS(coarea_check(lin, 8), DomainError);

  const DoubleWell q = DoubleWell::quartic();
  RecoveryConfig cfg;
  cfg.geometry = Geometry::plane(0.0, 0.25);
  cfg.q = 8.0;
  cfg.box = Box{3, {-0.4, 0.0, 0.0}, {0.4, 0.5, 0.5}};
  const ScalarField u = build_u(cfg, 0.05);
  const CoareaResult r = coarea_check(phi_field(u, q), 64);
  CHECK(r.gap <= 0.02);
  const double area = std::pow((u.spec().dims[1] - 1) * u.spec().spacing, 2);
  CHECK(r.lhs == doctest::Approx(oracle::kSigma * area).epsilon(0.01));
}

TEST_CASE("phi field matches the closed form") {
  const GridSpec s = symmetric(2, 9);
  const ScalarField u = ScalarField::sample(s, [](const Point& x) { return 0.9 * x[0] * x[1]; });
  const ScalarField U = phi_field(u, DoubleWell::quartic());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(U[i] == doctest::Approx(oracle::quartic_phi(u[i])).epsilon(1e-14));
}

TEST_CASE("slice energies and equidistribution") {
  const DoubleWell q = DoubleWell::quartic();
  const RecoveryConfig cfg = equator_sphere();
  const ScalarField u = build_u(cfg, 0.15);
  const ScalarField v = build_v(cfg, 0.15);
  CHECK(per_slice_mm(u, ScalarField(u.spec(), 1.0), q, 0.15, oracle::kSigma / 2) == 0.0);
  CHECK(per_slice_mm(u, v, q, 0.15, 10.0) == 0.0);
  const double slice = per_slice_mm(u, v, q, 0.15, oracle::kSigma / 2);
  // The slice is a sphere of radius close to 1; its interface has length 2 pi.
  CHECK(slice == doctest::Approx(oracle::kSigma * 2.0 * pi).epsilon(0.25));

  // Exact planar profile: eps |grad u| equals sqrt(2 W(u)) up to stencil error.
  const GridSpec s = GridSpec::box(2, {160, 8, 1}, 0.0125, {-1.0, 0.0, 0.0});
  const ScalarField p = ScalarField::sample(s, [](const Point& x) { return oracle::tanh_profile(x[0] / 0.1); });
  CHECK(equidistribution_defect(p, q, 0.1) < 1e-2 * modica_mortola(p, q, 0.1));
}

TEST_CASE("test functions and quadrature") {
  const auto tests = builtin_test_functions();
  REQUIRE(tests.size() == 6);
  CHECK(tests[0].id == "c0_m0");
  CHECK(tests[5].id == "c1_m2");
  CHECK(TestFunction::zero()({0.1, 0.2, 0.3}, 0.5) == 0.0);
  const TestFunction& m2 = tests[2];
  CHECK(m2({0.0, 0.0, 0.0}, 3.0) == doctest::Approx(4.0));
  CHECK(m2({1.0, 0.0, 0.0}, -0.5) == doctest::Approx(std::exp(-0.5) * 0.25));

  std::vector<double> x, w;
  gauss_legendre(8, -1.0, 2.0, x, w);
  double integral = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) integral += w[k] * std::pow(x[k], 15);
  CHECK(integral == doctest::Approx((std::pow(2.0, 16) - 1.0) / 16.0).epsilon(1e-12));
}

TEST_CASE("reference integrals over the unit sphere") {
  const DoubleWell q = DoubleWell::quartic();
  const Geometry g = Geometry::sphere(1.0, {0.0, 0.0, 0.0}, PhaseSplit::cap(pi / 2));
  const auto tests = builtin_test_functions();
  const double s = oracle::kSigma;
  CHECK(reference_integral(g, q, tests[0]) == doctest::Approx(s * 4.0 * pi * std::exp(-0.5)).epsilon(1e-10));
  // Odd in the phase, symmetric in space.
  CHECK(std::abs(reference_integral(g, q, tests[1])) < 1e-10);
  CHECK(reference_integral(g, q, tests[2]) == doctest::Approx(s * 4.0 * pi * std::exp(-0.5)).epsilon(1e-10));
  // |x - c|^2 = 5/4 - x0 on the sphere with c = (1/2, 0, 0).
  const double shifted = std::exp(-5.0 / 8.0) * 2.0 * pi * 2.0 * (std::exp(0.5) - std::exp(-0.5));
  CHECK(reference_integral(g, q, tests[3]) == doctest::Approx(s * shifted).epsilon(1e-10));
  CHECK(reference_integral(g, q, TestFunction::zero()) == 0.0);

  const Geometry circle = Geometry::disk(1.0, 0.0, 0.0, PhaseSplit::two_arcs(0.0, pi));
  CHECK(reference_integral(circle, q, tests[0]) == doctest::Approx(s * 2.0 * pi * std::exp(-0.5)).epsilon(1e-10));
  CHECK(std::abs(reference_integral(circle, q, tests[1])) < 1e-10);
}

TEST_CASE("measure-function pair diagnostics") {
  const DoubleWell q = DoubleWell::quartic();
  const RecoveryConfig cfg = equator_sphere();
  const double eps = 0.15;
  const ScalarField u = build_u(cfg, eps);
  const ScalarField v = build_v(cfg, eps);
  const auto tests = builtin_test_functions();
  const auto res = mf_pair_diagnostics(u, v, q, eps, tests, cfg.geometry);
  REQUIRE(res.size() == tests.size());
  const GridSpec& s = u.spec();
  const auto grad = gradient(u);
  for (std::size_t k = 0; k < tests.size(); ++k) {
    const auto& r = res[k];
    CHECK(r.id == tests[k].id);
    CHECK(r.inequality_holds);
    CHECK(r.gap == doctest::Approx(std::abs(r.grad_version - r.reference)).epsilon(1e-12));
    CHECK(r.mu_gap == doctest::Approx(std::abs(r.mu_version - r.reference)).epsilon(1e-12));
    CHECK(r.version_difference <= r.sup_phi * r.discrepancy + 1e-10);
  }
  // s-independent test function: weighted measure of |grad U|, with
  // |grad U| = sqrt(2 W(u)) |grad u| by the chain rule.
  long double direct = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double n = std::sqrt(2.0 * oracle::quartic(u[i])) * std::hypot(grad[0][i], grad[1][i], grad[2][i]);
    direct += tests[0](s.point(i), v[i]) * n;
  }
  const double direct_d = static_cast<double>(direct) * s.cell_volume();
  CHECK(res[0].grad_version == doctest::Approx(direct_d).epsilon(1e-10));
  CHECK(mf_pair_gap(u, v, q, eps, tests[0], cfg.geometry) == doctest::Approx(res[0].gap).epsilon(1e-12));
  CHECK(mu_version_gap(u, v, q, eps, tests[4], cfg.geometry).mu_gap == doctest::Approx(res[4].mu_gap).epsilon(1e-12));
  const TestFunction zero = TestFunction::zero();
  CHECK(mf_pair_gap(u, v, q, eps, zero, cfg.geometry) == 0.0);
  CHECK(res[0].to_json().at("id") == "c0_m0");
}

TEST_CASE("density ratio") {
  const DoubleWell q = DoubleWell::quartic();
  const RecoveryConfig cfg = equator_sphere();
  const ScalarField u = build_u(cfg, 0.15);
  CHECK(density_ratio(u, q, 0.15, {0.0, 0.0, 0.0}, 0.25) == 0.0);
  const double on = density_ratio(u, q, 0.15, {0.0, 0.0, 1.0}, 0.5);
  CHECK(on > 0.7);
  CHECK(on < 1.3);
  CHECK_THROWS_AS(density_ratio(u, q, 0.15, {1.6, 0.0, 0.0}, 0.5), DomainError);
  CHECK_THROWS_AS(density_ratio(ScalarField(GridSpec::box(2, {8, 8, 1}, 0.1, {0, 0, 0})), q, 0.1, {0, 0, 0}, 0.1),
                  DomainError);
}
