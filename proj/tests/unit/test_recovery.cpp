#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "memphase/errors.hpp"
#include "memphase/recovery.hpp"
#include "oracles.hpp"

using namespace memphase;

namespace {

RecoveryConfig small_disk(bool split) {
  RecoveryConfig cfg;
  cfg.geometry = split ? Geometry::disk(0.5, 0.0, 0.0, PhaseSplit::two_arcs(0.0, std::numbers::pi))
                       : Geometry::disk(0.5, 0.0, 0.0);
  cfg.q = 4.0;
  cfg.box = Box{2, {-1.4, -1.4, 0.0}, {1.4, 1.4, 0.0}};
  cfg.epsilons = {0.2, 0.1};
  return cfg;
}

}  // namespace

TEST_CASE("recovery field values at known distances") {
  RecoveryConfig cfg;
  cfg.geometry = Geometry::sphere(1.0, {0.0, 0.0, 0.0}, PhaseSplit::cap(std::numbers::pi / 2));
  cfg.q = 4.0;
  cfg.box = Box{3, {-1.75, -1.75, -1.75}, {1.75, 1.75, 1.75}};
  const double eps = 0.15;
  const ScalarField u = build_u(cfg, eps);
  const ScalarField v = build_v(cfg, eps);
  const GridSpec& s = u.spec();
  const double T = std::abs(std::log(eps));
  for (std::size_t i = 0; i < s.size(); i += 97) {
    const Point x = s.point(i);
    const double d = 1.0 - std::hypot(x[0], x[1], x[2]);
    if (d >= 2.0 * eps * T) CHECK(u[i] == 1.0);
    if (d <= -2.0 * eps * T) CHECK(u[i] == -1.0);
    if (std::abs(d) < eps * T) CHECK(u[i] == doctest::Approx(oracle::tanh_profile(d / eps)).epsilon(1e-12));
  }
  // Points near the north pole sit deep inside F.
  const Index top{s.dims[0] / 2, s.dims[1] / 2, s.dims[2] - 2};
  CHECK(v[s.flatten(top)] == 1.0);
  CHECK(v.spec() == s);

  // Evaluate the construction directly at d = eps and on dF.
  const TruncatedProfile tp(cfg.potential, eps);
  CHECK(tp.scaled(eps) == doctest::Approx(std::tanh(std::numbers::sqrt2)).epsilon(1e-14));
  CHECK(tp.scaled(eps) == doctest::Approx(0.88839).epsilon(1e-5));
  CHECK(tp.scaled(cfg.geometry.phase_coordinate({1.0, 0.0, 0.0})) == 0.0);
  CHECK(tp.scaled(cfg.geometry.signed_distance({0.0, 1.0, 0.0})) == 0.0);
}

TEST_CASE("midpoint of the two-arc phase region is in the plus phase") {
  RecoveryConfig cfg = small_disk(true);
  const ScalarField v = build_v(cfg, 0.1);
  const GridSpec& s = v.spec();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Point x = s.point(i);
    if (std::abs(x[0]) < 0.02 && x[1] > 0.3) CHECK(v[i] == 1.0);
  }
}

TEST_CASE("recovery configuration checks") {
  RecoveryConfig cfg = small_disk(false);
  CHECK_NOTHROW(validate(cfg));
  cfg.box = Box{2, {-0.7, -0.7, 0.0}, {0.7, 0.7, 0.0}};
  try {
    validate(cfg);
    FAIL("small box accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("required box") != std::string::npos);
  }
  cfg = small_disk(false);
  cfg.epsilons = {0.1, 0.2};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.epsilons = {1.5};
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_disk(false);
  cfg.q = 3.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = small_disk(false);
  CHECK_THROWS_AS(build_v(cfg, 0.1), ConfigError);
  cfg.box.dim = 3;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("grid of the recovery sweep") {
  const RecoveryConfig cfg = small_disk(false);
  const GridSpec s = recovery_grid(cfg, 0.1);
  CHECK(s.spacing == doctest::Approx(0.025));
  CHECK(s.dims[0] == 112);
  CHECK(s.dims[2] == 1);
  // Centred in the box.
  CHECK(s.origin[0] + 0.5 * (s.dims[0] - 1) * s.spacing == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("small disk sweep") {
  RecoveryConfig cfg = small_disk(true);
  cfg.modulus = Modulus(2.0, 2.0);
  const auto dir = std::filesystem::temp_directory_path() / "memphase_unit_sweep";
  std::filesystem::remove_all(dir);
  int calls = 0;
  SweepOptions opt;
  opt.fields_out = dir;
  opt.on_row = [&](const SweepRow& row, const ScalarField& u, const ScalarField* v) {
    ++calls;
    CHECK(v != nullptr);
    CHECK(u.spec().spacing == doctest::Approx(row.h));
  };
  const SweepResult r = sweep(cfg, opt);
  CHECK(r.complete);
  CHECK(calls == 2);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.limits.perimeter == doctest::Approx(oracle::kSigma * std::numbers::pi));
  for (const auto& row : r.rows) {
    CHECK(row.errors.M);
    CHECK(row.errors.I);
    CHECK_FALSE(row.errors.J);
    CHECK(*row.errors.M == doctest::Approx((row.energies.M - r.limits.perimeter) / r.limits.perimeter));
    CHECK(row.energies.J == doctest::Approx(2.0 * row.energies.F).epsilon(1e-10));
    CHECK(row.equidistribution >= 0.0);
  }
  CHECK(std::abs(*r.rows[1].errors.M) < std::abs(*r.rows[0].errors.M));
  CHECK(r.rates.empty());
  CHECK(std::filesystem::exists(dir / "u_eps_0.1.json"));
  CHECK(std::filesystem::exists(dir / "v_eps_0.2.bin"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a failing epsilon leaves partial results") {
  RecoveryConfig cfg = small_disk(false);
  cfg.epsilons = {0.2, 0.1, 0.05};
  const std::size_t saved = memory_cap();
  set_memory_cap(20000);
  SweepOptions opt;
  opt.equidistribution = false;
  const SweepResult r = sweep(cfg, opt);
  set_memory_cap(saved);
  CHECK_FALSE(r.complete);
  CHECK(r.rows.size() == 2);
  CHECK_FALSE(r.failure.empty());
}

TEST_CASE("analytic Laplacian variant of the Willmore energy") {
  RecoveryConfig cfg;
  cfg.geometry = Geometry::sphere(1.0, {0.0, 0.0, 0.0});
  cfg.q = 4.0;
  cfg.box = Box{3, {-1.75, -1.75, -1.75}, {1.75, 1.75, 1.75}};
  // For the exact profile W'(w)/eps - eps w'' vanishes and the density is
  // eps w'^2 H^2 / eps^2; its integral tends to sigma * 16 pi.
  const double F = analytic_willmore(cfg, 0.15);
  CHECK(std::abs(F - oracle::kSigma * 16.0 * std::numbers::pi) < 0.1 * oracle::kSigma * 16.0 * std::numbers::pi);
}

TEST_CASE("log-log slope fit") {
  std::vector<double> x{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double e : x) y.push_back(3.0 * e * e);
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}
