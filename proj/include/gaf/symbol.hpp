#pragma once

#include <array>
#include <complex>
#include <functional>
#include <limits>
#include <string>

#include "json.hpp"

namespace gaf {

using cplx = std::complex<double>;

// Wirtinger derivatives of a real function up to total order 4, as needed by
// the flat semiclassical formulas. For real f, f_zbar = conj(f_z).
struct Jet {
  double f = 0.0;
  cplx fz;                   // < d f / dz
  cplx fzz;                  // < d^2 f / dz^2
  double fzzbar = 0.0;       // < d^2 f / dz dzbar = Euclidean Laplacian / 4
  cplx fzzzbar;              // < d^3 f / dz^2 dzbar
  double fzzzbarzbar = 0.0;  // < d^4 f / dz^2 dzbar^2 = bilaplacian / 16

  double euclid_laplacian() const { return 4.0 * fzzbar; }
};

// Real symbol f with derivative oracles and decay data.
// 
// A radial symbol is f(z) = g(|z|^2); its profile g and (when known) the
// derivatives g', ..., g'''' give the jet in closed form. Anything else falls
// back to Richardson-extrapolated central differences.
class SymbolDescriptor {
 public:
  using Profile = std::function<double(double)>;
  using ProfileDerivatives = std::function<std::array<double, 5>(double)>;

  static SymbolDescriptor constant(double c);
  // e^{-a |z|^2}
  static SymbolDescriptor gaussian(double a = 1.0);
  // |z|^2 e^{-|z|^2}
  static SymbolDescriptor r2_gaussian();
  // Re(z) e^{-|z|^2}, odd under z -> -z
  static SymbolDescriptor re_gaussian();
  // e^{-|z - c|^2}, a positive non-radial symbol
  static SymbolDescriptor shifted_gaussian(cplx center);
  // (1 - 2|z|^2) e^{-|z|^2}, radial and sign-changing
  static SymbolDescriptor laguerre_gaussian();
  // exp(1 - 1/(1 - |z|^2/R^2)) inside |z| < R, 0 outside
  static SymbolDescriptor bump(double radius);

  static SymbolDescriptor radial(std::string name, Profile g, ProfileDerivatives dg, double support_radius,
                                 double tail_bound, double sup_bound, bool nonnegative);
  static SymbolDescriptor general(std::string name, std::function<double(cplx)> f, double support_radius,
                                  double tail_bound, double sup_bound, bool nonnegative);

  // Symbol from a JSON description {"name": ..., parameters}.
  static SymbolDescriptor from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double operator()(cplx z) const { return eval_(z); }
  const std::string& name() const noexcept { return name_; }

  bool is_radial() const noexcept { return static_cast<bool>(profile_); }
  double profile(double s) const { return profile_(s); }

  bool is_constant() const noexcept { return constant_; }
  double constant_value() const noexcept { return constant_value_; }

  // |f(z)| <= tail_bound for |z| > support_radius.
  double support_radius() const noexcept { return support_radius_; }
  double tail_bound() const noexcept { return tail_bound_; }
  double sup_bound() const noexcept { return sup_bound_; }
  bool nonnegative() const noexcept { return nonnegative_; }

  bool has_analytic_jet() const noexcept { return static_cast<bool>(dprofile_); }

  // Analytic jet when available, finite differences otherwise.
  Jet jet(cplx z) const;

  // Central differences with one Richardson step. Orders <= 2 use `step`;
  // orders 3 and 4 use 20 * step to keep cancellation in check.
  Jet jet_fd(cplx z, double step = 1e-3) const;

 private:
  std::string name_;
  nlohmann::json params_;
  std::function<double(cplx)> eval_;
  Profile profile_;
  ProfileDerivatives dprofile_;
  double support_radius_ = std::numeric_limits<double>::infinity();
  double tail_bound_ = 0.0;
  double sup_bound_ = 0.0;
  bool nonnegative_ = false;
  bool constant_ = false;
  double constant_value_ = 0.0;
};

}  // namespace gaf
