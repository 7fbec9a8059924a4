#pragma once

#include <json.hpp>

#include "memphase/grid.hpp"
#include "memphase/potential.hpp"

namespace memphase {

/// Whether J stays below sigma * 8 pi * min(a1, a2). "sum" reads |H|^2 with
/// H the sum of principal curvatures (the convention used for J), "mean"
/// with H the arithmetic mean, i.e. J / 4.
struct LiYauFlags {
  double threshold = 0.0;
  bool sum_convention = false;
  bool mean_convention = false;
};

LiYauFlags li_yau_admissible(double J, const DoubleWell& well, const Modulus& modulus);

struct EnergyReport {
  double epsilon = 0.0;
  double M = 0.0;               // Modica-Mortola energy
  double I = 0.0;               // product coupling
  double F = 0.0;               // unweighted diffuse Willmore
  double J = 0.0;               // modulus-weighted diffuse Willmore
  double discrepancy_l1 = 0.0;  // mass of |xi|
  double mu_total = 0.0;        // mu(R^n), identical to M
  double mass_u = 0.0;
  bool has_v = false;
  LiYauFlags admissible_li_yau;
};

nlohmann::json to_json(const EnergyReport& r);

// Pointwise densities on the grid. The gradient and Laplacian are the grid
// stencils of grid.hpp.
ScalarField mm_density(const ScalarField& u, const DoubleWell& well, double epsilon);
ScalarField willmore_density(const ScalarField& u, const DoubleWell& well, double epsilon);
/// sqrt(2W(u)) |grad u|, the chain-rule form of |grad(phi o u)|.
ScalarField coarea_density(const ScalarField& u, const DoubleWell& well);

double modica_mortola(const ScalarField& u, const DoubleWell& well, double epsilon);
double coupling_energy(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                       double epsilon);
double willmore(const ScalarField& u, const DoubleWell& well, double epsilon);
double weighted_willmore(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                         const Modulus& modulus, double epsilon);
double discrepancy_l1(const ScalarField& u, const DoubleWell& well, double epsilon);
double mass(const ScalarField& u);
/// Integral of coarea_density.
double coarea_mass(const ScalarField& u, const DoubleWell& well);
/// Integral of mm_density(v) * coarea_density(u), the slicing lower bound
/// for the coupling energy.
double sliced_coupling_bound(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                             double epsilon);

/// All energies in one fused pass. Without v, I = 0 and J = a1 * F.
EnergyReport evaluate_energies(const ScalarField& u, const ScalarField* v, const DoubleWell& well,
                               const Modulus& modulus, double epsilon);

}  // namespace memphase
