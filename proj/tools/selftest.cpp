#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "cli.hpp"
#include "memphase/energy.hpp"
#include "memphase/errors.hpp"
#include "memphase/flow.hpp"
#include "memphase/geometry.hpp"
#include "memphase/parallel.hpp"
#include "memphase/profile.hpp"
#include "memphase/slicing.hpp"

namespace memphase::cli {

namespace {

struct Check {
  const char* name;
  std::function<bool()> body;
};

GridSpec cube(std::size_t n, double h) {
  return GridSpec::box(3, {n, n, n}, h, {-0.5 * n * h, -0.5 * n * h, -0.5 * n * h});
}

std::vector<Check> checks() {
  const DoubleWell q = DoubleWell::quartic();
  return {
      {"potential vanishes at the wells", [q] { return q.value(1.0) == 0.0 && q.value(-1.0) == 0.0; }},
      {"surface tension of the quartic well",
       [q] { return std::abs(q.sigma() - 4.0 * std::numbers::sqrt2 / 3.0) < 1e-12; }},
      {"smooth step end values", [] { return smooth_step(0.0) == 0.0 && smooth_step(1.0) == 1.0; }},
      {"modulus equals a1 at v = 1", [] { return Modulus(1.0, 2.0)(1.0) == 1.0; }},
      {"gradient of a constant is zero",
       [] {
         const ScalarField f(cube(6, 0.1), 7.0);
         for (const auto& c : gradient(f))
           for (double x : c.values())
             if (x != 0.0) return false;
         return true;
       }},
      {"gradient of an affine field",
       [] {
         const GridSpec s = cube(6, 0.1);
         const ScalarField f = ScalarField::sample(s, [](const Point& x) { return 3.0 * x[0]; });
         const auto g = gradient(f);
         const Index mid{2, 3, 3};
         return std::abs(g[0][s.flatten(mid)] - 3.0) < 1e-12 && std::abs(g[1][s.flatten(mid)]) < 1e-12;
       }},
      {"box volume by the midpoint rule",
       [] {
         const GridSpec s = GridSpec::box(2, {10, 10, 1}, 0.5, {0.0, 0.0, 0.0});
         return integrate(ScalarField(s, 1.0)) == 25.0;
       }},
      {"field file round trip",
       [] {
         const auto dir = std::filesystem::temp_directory_path() / "memphase_selftest";
         std::filesystem::create_directories(dir);
         const ScalarField f = ScalarField::sample(cube(4, 0.3), [](const Point& x) { return std::sin(x[0]) + x[2]; });
         write_field(f, dir / "f");
         const ScalarField g = read_field(dir / "f");
         std::filesystem::remove_all(dir);
         return g.spec() == f.spec() && std::equal(f.values().begin(), f.values().end(), g.values().begin());
       }},
      {"profile centre and truncated tail",
       [q] {
         const TruncatedProfile tp(q, 0.1);
         return tp.value(0.0) == 0.0 && tp.value(2.5 * tp.truncation()) == 1.0 && tp.value(-10.0) == -1.0;
       }},
      {"Modica-Mortola density vanishes on the wells",
       [q] {
         const ScalarField u(cube(5, 0.1), 1.0);
         const ScalarField v(cube(5, 0.1), -1.0);
         return modica_mortola(u, q, 0.1) == 0.0 && modica_mortola(v, q, 0.1) == 0.0 &&
                coupling_energy(u, v, q, 0.1) == 0.0;
       }},
      {"sphere signed distance at the centre",
       [] { return Geometry::sphere(1.5, {0.0, 0.0, 0.0}).signed_distance({0.0, 0.0, 0.0}) == 1.5; }},
      {"sphere perimeter limit",
       [q] {
         const SharpLimits s = sharp_limits(Geometry::sphere(1.0, {0.0, 0.0, 0.0}), q, Modulus(1.0, 1.0));
         return std::abs(s.perimeter - 4.0 * std::numbers::pi * q.sigma()) < 1e-12;
       }},
      {"variation of M vanishes on the wells",
       [q] {
         const ScalarField u(cube(5, 0.1), 1.0);
         const ScalarField g = variation_M(u, q, 0.1);
         for (double x : g.values())
           if (x != 0.0) return false;
         return true;
       }},
      {"flow fixed point at u = v = 1",
       [] {
         FlowConfig cfg;
         cfg.steps = 1;
         const ScalarField one(cube(5, 0.1), 1.0);
         FlowSolver s(cfg, one, one);
         s.step();
         return std::equal(one.values().begin(), one.values().end(), s.u().values().begin()) &&
                std::equal(one.values().begin(), one.values().end(), s.v().values().begin());
       }},
      {"level outside the field range gives an empty surface",
       [] {
         const ScalarField f = ScalarField::sample(cube(5, 0.1), [](const Point& x) { return x[0]; });
         return extract(f, 5.0).simplices.empty();
       }},
      {"splitmix64 reference output", [] { return SplitMix64(0).next() == 0xE220A8397B1DCDAFULL; }},
      {"reductions independent of the thread count",
       [] {
         std::vector<double> xs(50000);
         for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::sin(0.37 * static_cast<double>(i)) * 1e3;
         const unsigned saved = parallel::threads();
         parallel::set_threads(1);
         const double a = parallel::sum(xs.size(), [&](std::size_t i) { return xs[i]; });
         parallel::set_threads(4);
         const double b = parallel::sum(xs.size(), [&](std::size_t i) { return xs[i]; });
         parallel::set_threads(saved);
         return a == b;
       }},
  };
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  for (const auto& c : checks()) {
    bool ok = false;
    try {
      ok = c.body();
    } catch (const std::exception& e) {
      out << "  exception: " << e.what() << "\n";
    }
    out << (ok ? "PASS  " : "FAIL  ") << c.name << "\n";
    failures += ok ? 0 : 1;
  }
  out << (failures == 0 ? "selftest passed" : "selftest failed") << "\n";
  return failures;
}

}  // namespace memphase::cli
