#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaf/model.hpp"
#include "gaf/symbol.hpp"

namespace gaf {

// Conventions on the flat Fock model: the positive Laplacian is
// Delta = -pi * Delta_euclid = -4 pi d_z d_zbar, and the metric pairing is
// <dbar f, d g> = 2 pi f_zbar g_z.  Under these, p^{-1} T^2_{f,p}(x,x) =
// b0 + b1/p + b2/p^2 + O(p^-3).

struct BCoefficients {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
};

// Coefficient formulas evaluated on a jet.
BCoefficients b_coefficients(const Jet& j);

// Throws semiclassical.not_flat unless `space` is Fock.
BCoefficients b_coefficients(const SymbolDescriptor& f, cplx x, const ModelSpace& space = ModelSpace::fock(1));

// Local model f(x0 + z) = A|z|^2 + 2 Re(B z^2) + O(|z|^3) at a vanishing point.
// For dimension n > 1 only the formal family A = a Id, B = 0 is represented.
struct Order2Data {
  cplx x0;
  int dimension = 1;
  double A = 0.0;
  cplx B;
  double laplacian_at_x0 = 0.0;  // < -4 Tr A, positive-Laplacian convention in metric-flat coordinates
  double mu = 0.0;
  double K = 0.0;                // < K = k Id in one variable (and in the formal family)
  double taylor_constant = 0.0;  // < fitted C in |f - fhat| <= C|z|^3 on |z| <= 0.1

  double fhat(cplx z) const;
  // For n > 1, z stands for the point (z, 0, ..., 0); F is radial there.
  double F(cplx z) const;
};

// Throws semiclassical.not_order2 when f(x0), df(x0) are not ~0 or Delta f(x0) ~ 0.
Order2Data order2_data(const SymbolDescriptor& f, cplx x0);

// The formal family A = Id_n, B = 0.
Order2Data order2_identity(int n);

// Density of i ddbar log F against omega_0^n / n! (omega_0 = i sum dz dzbar).
// The analytic path is the rational function for A = Id, B = 0; other data throw.
double F_log_density(const Order2Data& data, cplx z, int n);
// Finite-difference path: Richardson 5-point Laplacian / 4 for n = 1,
// radial derivatives n (log F)' + s (log F)'' for the formal family.
double F_log_density_fd(const Order2Data& data, cplx z, double step = 1e-3);

// Basis order used for T^2 at x on Fock level p.
int default_n_rule(int p, cplx x);

struct GrowthFit {
  std::vector<int> levels;
  std::vector<double> t2;       // < T^2_{f,p}(x0,x0)
  double kappa = 0.0;           // < slope from log T^2 = a + kappa log p + c/p
  double kappa_naive = 0.0;     // < plain slope of log T^2 against log p
  double n_minus_kappa = 0.0;   // < order of vanishing read off the fit, n - kappa
};

GrowthFit t2_growth_exponent(const std::vector<int>& levels, const SymbolDescriptor& f, cplx x0,
                             const std::function<int(int, cplx)>& n_rule = default_n_rule);

// T^2_{f,p}(x,x) on Fock level p from the truncated Toeplitz spectrum.
double t2_at(int p, const SymbolDescriptor& f, cplx x, int N);

struct PlanckPairing {
  double numeric = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  double euclid_radius = 0.0;  // < radius of B(x0, R/sqrt p) in the z coordinate
  int basis_order = 0;
};

// numeric: phi (1/4pi) int Delta_e log T^2 over the geodesic ball B(x0, R/sqrt p),
// predicted: p^{-n+1} phi (1/4pi) int_{|v|<R} Delta_e log F.
// The metric of Theta = (i/2pi) dz dzbar makes the geodesic ball the
// Euclidean disc of radius sqrt(pi) R / sqrt(p).
// The numeric side alone, phi (1/4pi) int Delta_e log T^2 over B(x0, R/sqrt p);
// needs no vanishing at x0.
double planck_numeric(const SymbolDescriptor& f, cplx x0, double R, int p, double phi_value, int* basis_order = nullptr);

PlanckPairing planck_pairing(const SymbolDescriptor& f, cplx x0, double R, int p, double phi_value);

// phi (1/pi) int_{|v|<R} F_log_density dA, the prediction alone.
double planck_prediction(const Order2Data& data, double R, double phi_value);

enum class VanishingClass { order0, order1, order2_proper, improper };
std::string to_string(VanishingClass c);

struct VanishingReport {
  std::vector<cplx> points;
  std::vector<VanishingClass> classes;
  std::optional<int> kappa;  // < max order; empty when some point is improper
};

VanishingReport proper_vanishing_check(const SymbolDescriptor& f, const std::vector<cplx>& grid);

struct CalibrationRow {
  int p = 0;
  double exact = 0.0;    // < p^{-1} T^2(x,x)
  double formula = 0.0;  // < b0 + b1/p + b2/p^2
  double residual = 0.0;
};

std::vector<CalibrationRow> calibration_rows(const SymbolDescriptor& f, cplx x, const std::vector<int>& levels);
std::string calibration_csv(const std::vector<CalibrationRow>& rows);

struct CalibrationCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// The b1/b2 constant checks against exact diagonal sums.
std::vector<CalibrationCheck> calibration_suite();

nlohmann::json to_json(const Order2Data& d);

}  // namespace gaf
