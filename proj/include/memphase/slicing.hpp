#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "memphase/geometry.hpp"
#include "memphase/grid.hpp"
#include "memphase/potential.hpp"

namespace memphase {

/// Node-centred auxiliary quantity, evaluated at grid points adjacent to the
/// level set and interpolated linearly along cut edges.
using NodeFunction = std::function<double(std::size_t flat, const Index& idx)>;

/// Polyline (2D) or triangle mesh (3D) approximating {U = t}, with vertices
/// shared between adjacent cells.
struct IsoSurface {
  int dim = 3;
  double level = 0.0;
  std::vector<Point> vertices;
  std::vector<std::array<std::uint32_t, 3>> simplices;  // 2D segments use the first two
  std::vector<double> measures;                        // per simplex
  std::vector<std::vector<double>> aux;                // aux[k][vertex]

  double total_measure() const;
  /// Integral over the surface of the linear interpolant of aux[k].
  double integrate_aux(std::size_t k) const;
  nlohmann::json to_json() const;
};

/// Marching squares (2D) / marching cubes (3D) with linear edge
/// interpolation. Levels outside (min U, max U) give an empty surface.
IsoSurface extract(const ScalarField& U, double level, std::span<const NodeFunction> aux = {});

/// Integrates over each level set {U = levels[k]} the function
/// f(k, interpolated aux values), in a single pass over the grid. With no
/// aux and f empty the result is the surface measure of every level.
using VertexIntegrand = std::function<double(std::size_t level, std::span<const double> aux)>;
std::vector<double> level_integrals(const ScalarField& U, std::span<const double> levels,
                                    std::span<const NodeFunction> aux = {},
                                    const VertexIntegrand& f = {});

/// U = phi(u) pointwise.
ScalarField phi_field(const ScalarField& u, const DoubleWell& well);

struct CoareaResult {
  double lhs = 0.0;  // integral of |grad U| over the hull of the grid points
  double rhs = 0.0;  // integral over t of Per({U > t})
  double gap = 0.0;  // |lhs - rhs| / lhs
};

CoareaResult coarea_check(const ScalarField& U, int t_samples = 64);

/// Integral of W(v)/eps + (eps/2)|grad_tan v|^2 over {phi(u) = t}.
double per_slice_mm(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                    double epsilon, double t);

/// Integral over u-levels t in (-1, 1) of the level-set integral of
/// |eps |grad u| - sqrt(2 W(t))|, using midpoint samples in t.
double equidistribution_defect(const ScalarField& u, const DoubleWell& well, double epsilon,
                               int levels = 32);

/// phi(x, s) = exp(-|x - c|^2 / 2) * clamp(s, -2, 2)^m.
struct TestFunction {
  std::string id;
  Point center{0.0, 0.0, 0.0};
  int power = 0;  // negative: the zero function

  double operator()(const Point& x, double s) const;
  static TestFunction zero();
};

/// The six built-in functions: c in {0, (1/2, 0, 0)}, m in {0, 1, 2}.
std::vector<TestFunction> builtin_test_functions();

struct MfPairResult {
  std::string id;
  double grad_version = 0.0;  // integral of phi(x, v) |grad U|
  double mu_version = 0.0;    // integral of phi(x, v) d mu
  double reference = 0.0;     // sigma * integral over J_u of phi(x, v_limit)
  double gap = 0.0;           // |grad_version - reference|
  double mu_gap = 0.0;        // |mu_version - reference|
  double sup_phi = 0.0;       // max |phi(x, v(x))| over the grid
  double discrepancy = 0.0;   // discrepancy_l1 of u
  double version_difference = 0.0;
  bool inequality_holds = false;  // version_difference <= sup_phi * discrepancy + 1e-10

  nlohmann::json to_json() const;
};

/// sigma * integral over dE of phi(x, v_limit), v_limit = +-1 by the phase
/// split (+1 without a split). Sphere: Gauss-Legendre in the polar angle
/// split at theta0 (512 nodes) times 1024 uniform azimuths. Circle: 4096
/// Gauss-Legendre arc nodes split at the phase boundary.
double reference_integral(const Geometry& g, const DoubleWell& well, const TestFunction& phi);

/// All test functions in one pass over the grid.
std::vector<MfPairResult> mf_pair_diagnostics(const ScalarField& u, const ScalarField& v,
                                              const DoubleWell& well, double epsilon,
                                              std::span<const TestFunction> tests,
                                              const Geometry& reference);

double mf_pair_gap(const ScalarField& u, const ScalarField& v, const DoubleWell& well, double epsilon,
                   const TestFunction& phi, const Geometry& reference);
MfPairResult mu_version_gap(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                            double epsilon, const TestFunction& phi, const Geometry& reference);

/// mu(B_r(x0)) / (sigma pi r^2) with a sharp ball indicator (3D only).
double density_ratio(const ScalarField& u, const DoubleWell& well, double epsilon, const Point& x0,
                     double r);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace memphase
