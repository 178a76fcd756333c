#include "gaf/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gaf/error.hpp"
#include "gaf/quadrature.hpp"
#include "gaf/stats.hpp"
#include "gaf/toeplitz.hpp"

namespace gaf {

BCoefficients b_coefficients(const Jet& j) {
  BCoefficients b;
  b.b0 = j.f * j.f;
  // -(1/4pi) 2 f Delta f + (1/2pi) <dbar f, d f>
  const double lap = -kPi * j.euclid_laplacian();
  b.b1 = -(1.0 / (4 * kPi)) * 2.0 * j.f * lap + (1.0 / (2 * kPi)) * 2 * kPi * std::norm(j.fz);

  const double bilap = kPi * kPi * 16.0 * j.fzzzbarzbar;
  const cplx lap_z = -4.0 * kPi * j.fzzzbar;
  const double pair2 = 4 * kPi * kPi * std::norm(j.fzz);  // |ddf|^2 in the metric
  const double cross = 2 * kPi * std::real(std::conj(j.fz) * lap_z);  // <dbar f, d Delta f>
  b.b2 = (1.0 / (32 * kPi * kPi)) * 2.0 * j.f * bilap +
         (1.0 / (8 * kPi * kPi)) * (0.5 * lap * lap + pair2 - 2.0 * cross);
  return b;
}

BCoefficients b_coefficients(const SymbolDescriptor& f, cplx x, const ModelSpace& space) {
  if (space.kind() != ModelSpace::Kind::fock)
    throw argument_error("semiclassical.not_flat", "coefficient formulas are evaluated on the flat Fock model only");
  return b_coefficients(f.jet(x));
}

double Order2Data::fhat(cplx z) const { return A * std::norm(z) + 2.0 * std::real(B * z * z); }

double Order2Data::F(cplx z) const {
  const double h = fhat(z);
  const double grad = std::norm(A * std::conj(z) + 2.0 * B * z);
  return h * h - laplacian_at_x0 / (2 * kPi) * h + grad / kPi + mu;
}

namespace {

void fill_derived(Order2Data& d) {
  const double trA = d.dimension * d.A;
  d.laplacian_at_x0 = -4.0 * trA;
  d.mu = (trA * trA + 2.0 * std::norm(d.B)) / (kPi * kPi);
  d.K = (2.0 / kPi) * trA * d.A + (d.A * d.A + 4.0 * std::norm(d.B)) / kPi;
}

}  // namespace

Order2Data order2_data(const SymbolDescriptor& f, cplx x0) {
  const Jet j = f.jet(x0);
  const double scale = std::max(1.0, f.sup_bound());
  if (std::abs(j.f) > 1e-10 * scale)
    throw numeric_error("semiclassical.not_order2", "f(x0) does not vanish");
  if (std::abs(j.fz) > 1e-10 * scale)
    throw numeric_error("semiclassical.not_order2", "df(x0) does not vanish");
  if (std::abs(j.fzzbar) <= 1e-8 * scale)
    throw numeric_error("semiclassical.not_order2", "Laplacian of f vanishes at x0");

  Order2Data d;
  d.x0 = x0;
  d.A = j.fzzbar;
  d.B = 0.5 * j.fzz;
  fill_derived(d);

  double c = 0.0;
  for (double r : {0.0125, 0.025, 0.05, 0.1})
    for (int k = 0; k < 16; ++k) {
      const cplx z = std::polar(r, 2 * kPi * (k + 0.5) / 16);
      c = std::max(c, std::abs(f(x0 + z) - d.fhat(z)) / (r * r * r));
    }
  d.taylor_constant = c;
  return d;
}

Order2Data order2_identity(int n) {
  if (n < 1) throw argument_error("semiclassical.argument", "dimension must be >= 1");
  Order2Data d;
  d.dimension = n;
  d.A = 1.0;
  fill_derived(d);
  d.taylor_constant = 0.0;
  return d;
}

double F_log_density(const Order2Data& data, cplx z, int n) {
  if (n != data.dimension)
    throw argument_error("semiclassical.argument", "dimension does not match the order-2 data");
  if (data.B != cplx(0.0) || !(data.A > 0.0))
    throw argument_error("semiclassical.no_closed_form", "closed form needs A = a Id, B = 0");
  // F = a^2 F_1, so the log-density does not depend on a
  const double s = std::norm(z), pi = kPi;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  const double n2 = n * n, n3 = n2 * n, n4 = n3 * n;
  const double num = (2 * n - 2) * pi * pi * pi * s3 + (6 * n2 - n - 2) * pi * pi * s2 +
                     (6 * n3 + 2 * n2 - 3 * n - 1) * pi * s + 2 * n4 + n3;
  const double den = pi * pi * pi * pi * s4 + (4 * n + 2) * pi * pi * pi * s3 + (6 * n2 + 4 * n + 1) * pi * pi * s2 +
                     (4 * n3 + 2 * n2) * pi * s + n4;
  return pi * num / den;
}

double F_log_density_fd(const Order2Data& data, cplx z, double step) {
  if (data.dimension == 1) {
    auto logF = [&](cplx w) { return std::log(data.F(w)); };
    const double coarse = laplacian5(logF, z, step), fine = laplacian5(logF, z, step / 2);
    return 0.25 * (4.0 * fine - coarse) / 3.0;
  }
  // formal family: F depends on s = |z|^2 through a polynomial, so it can be
  // differenced across s = 0 as well
  const int n = data.dimension;
  const double a2 = data.A * data.A;
  auto L = [&](double s) { return std::log(a2 * (s * s + (2 * n + 1) * s / kPi + double(n) * n / (kPi * kPi))); };
  const double s = std::norm(z), h = step;
  const double d1 = (L(s + h) - L(s - h)) / (2 * h);
  const double d2 = (L(s + h) - 2 * L(s) + L(s - h)) / (h * h);
  const double d1h = (L(s + h / 2) - L(s - h / 2)) / h;
  const double d2h = (L(s + h / 2) - 2 * L(s) + L(s - h / 2)) / (h * h / 4);
  return n * (4 * d1h - d1) / 3 + s * (4 * d2h - d2) / 3;
}

int default_n_rule(int p, cplx x) {
  const double r = std::abs(x) + 6.0 / std::sqrt(static_cast<double>(p));
  const int n = truncation_order(ModelSpace::fock(p), r, 1e-14).order;
  return std::clamp(n, 8, 512);
}

double t2_at(int p, const SymbolDescriptor& f, cplx x, int N) {
  ToeplitzOperator op = build_toeplitz(ModelSpace::fock(p), f, N);
  spectrum(op);
  return t2_diag(op, x);
}

GrowthFit t2_growth_exponent(const std::vector<int>& levels, const SymbolDescriptor& f, cplx x0,
                             const std::function<int(int, cplx)>& n_rule) {
  if (levels.size() < 3) throw argument_error("semiclassical.argument", "growth fit needs at least 3 levels");
  GrowthFit g;
  g.levels = levels;
  std::vector<std::vector<double>> full, naive;
  std::vector<double> y;
  for (int p : levels) {
    if (p < 1) throw argument_error("semiclassical.argument", "levels must be positive");
    const double t = t2_at(p, f, x0, n_rule(p, x0));
    if (!(t > 0.0)) throw numeric_error("semiclassical.t2_nonpositive", "T^2 vanishes at the base point");
    g.t2.push_back(t);
    const double lp = std::log(static_cast<double>(p));
    full.push_back({1.0, lp, 1.0 / p});
    naive.push_back({1.0, lp});
    y.push_back(std::log(t));
  }
  g.kappa = least_squares(full, y).coefficients[1];
  g.kappa_naive = least_squares(naive, y).coefficients[1];
  g.n_minus_kappa = 1.0 - g.kappa;
  return g;
}

double planck_prediction(const Order2Data& data, double R, double phi_value) {
  if (data.B == cplx(0.0) && data.A > 0.0) {
    // radial: the disc integral of (log F)_{v vbar} is a flux, pi R^2 (d/ds) log F
    const int n = data.dimension;
    const double s = R * R;
    const double F = s * s + (2 * n + 1) * s / kPi + double(n) * n / (kPi * kPi);
    const double dF = 2 * s + (2 * n + 1) / kPi;
    return phi_value * (1.0 / kPi) * kPi * s * dF / F;
  }
  if (data.dimension != 1) throw argument_error("semiclassical.argument", "general order-2 data needs n = 1");
  // (1/4pi) int Delta log F = (1/4pi) oint d_r log F ds; trapezoid in theta
  const int m = 256;
  const double h = 1e-4 * std::max(R, 1e-3);
  double flux = 0.0;
  for (int k = 0; k < m; ++k) {
    const cplx u = std::polar(1.0, 2 * kPi * k / m);
    const double d = (std::log(data.F((R + h) * u)) - std::log(data.F((R - h) * u))) / (2 * h);
    flux += d * R * (2 * kPi / m);
  }
  return phi_value * flux / (4 * kPi);
}

double planck_numeric(const SymbolDescriptor& f, cplx x0, double R, int p, double phi_value, int* basis_order) {
  if (!(R > 0.0) || p < 1) throw argument_error("semiclassical.argument", "pairing needs R > 0 and p >= 1");
  const double rho = std::sqrt(kPi / p) * R;
  const int N = default_n_rule(p, cplx(std::abs(x0) + rho, 0.0));
  if (basis_order) *basis_order = N;

  ToeplitzOperator op = build_toeplitz(ModelSpace::fock(p), f, N);
  spectrum(op);
  const double chern = op.space().chern_density();
  const double fd = 1e-2 / std::sqrt(static_cast<double>(p));

  // polar Gauss-Legendre in r, midpoint in theta
  const GaussRule& g = gauss_legendre(32);
  const int m = 48;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double r = 0.5 * rho * (g.nodes[i] + 1.0);
    const double wr = 0.5 * rho * g.weights[i] * r;
    for (int k = 0; k < m; ++k) {
      const cplx z = x0 + std::polar(r, 2 * kPi * (k + 0.5) / m);
      // gamma_f_density is (1/4pi) Delta log of the frame sum; the weight contributes -chern
      sum += wr * (2 * kPi / m) * (gamma_f_density(op, z, fd) - chern);
    }
  }
  return phi_value * sum;
}

PlanckPairing planck_pairing(const SymbolDescriptor& f, cplx x0, double R, int p, double phi_value) {
  const Order2Data data = order2_data(f, x0);
  PlanckPairing out;
  out.euclid_radius = std::sqrt(kPi / p) * R;
  out.numeric = planck_numeric(f, x0, R, p, phi_value, &out.basis_order);
  out.predicted = planck_prediction(data, R, phi_value);  // p^{-n+1} = 1 for n = 1
  out.ratio = out.numeric / out.predicted;
  return out;
}

std::string to_string(VanishingClass c) {
  switch (c) {
    case VanishingClass::order0: return "ORDER0";
    case VanishingClass::order1: return "ORDER1";
    case VanishingClass::order2_proper: return "ORDER2_PROPER";
    case VanishingClass::improper: return "IMPROPER";
  }
  return "IMPROPER";
}

VanishingReport proper_vanishing_check(const SymbolDescriptor& f, const std::vector<cplx>& grid) {
  VanishingReport rep;
  rep.points = grid;
  const double scale = std::max(1.0, f.sup_bound());
  int kappa = 0;
  bool improper = false;
  for (cplx x : grid) {
    const Jet j = f.jet(x);
    VanishingClass c;
    if (std::abs(j.f) > 1e-10 * scale) {
      c = VanishingClass::order0;
    } else if (std::abs(j.fz) > 1e-8 * scale) {
      c = VanishingClass::order1;
    } else if (std::abs(j.fzzbar) <= 1e-8 * scale) {
      c = VanishingClass::improper;
    } else {
      // f Delta f <= 0 on small rings around x, Delta = -4 pi d dbar
      bool ok = true;
      for (double r : {1e-3, 3e-3, 1e-2})
        for (int k = 0; k < 16 && ok; ++k) {
          const cplx z = x + std::polar(r, 2 * kPi * k / 16);
          const double v = f(z) * (-4 * kPi * f.jet(z).fzzbar);
          if (v > 1e-12 * scale * scale) ok = false;
        }
      c = ok ? VanishingClass::order2_proper : VanishingClass::improper;
    }
    rep.classes.push_back(c);
    if (c == VanishingClass::improper) improper = true;
    kappa = std::max(kappa, c == VanishingClass::order0 ? 0 : c == VanishingClass::order1 ? 1 : 2);
  }
  if (!improper) rep.kappa = kappa;
  return rep;
}

std::vector<CalibrationRow> calibration_rows(const SymbolDescriptor& f, cplx x, const std::vector<int>& levels) {
  const BCoefficients b = b_coefficients(f, x);
  std::vector<CalibrationRow> rows;
  for (int p : levels) {
    CalibrationRow row;
    row.p = p;
    row.exact = t2_at(p, f, x, default_n_rule(p, x)) / p;
    row.formula = b.b0 + b.b1 / p + b.b2 / (double(p) * p);
    row.residual = row.exact - row.formula;
    rows.push_back(row);
  }
  return rows;
}

std::string calibration_csv(const std::vector<CalibrationRow>& rows) {
  std::ostringstream os;
  os << "p,exact,formula,residual\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.p, r.exact, r.formula, r.residual);
    os << buf;
  }
  return os.str();
}

std::vector<CalibrationCheck> calibration_suite() {
  std::vector<CalibrationCheck> out;
  auto check = [&](std::string name, double value, double expected, double tol) {
    out.push_back({std::move(name), value, expected, tol, std::abs(value - expected) <= tol});
  };

  const auto gauss = SymbolDescriptor::gaussian();
  const auto r2 = SymbolDescriptor::r2_gaussian();
  const BCoefficients g0 = b_coefficients(gauss, 0.0);
  check("gaussian_b0_origin", g0.b0, 1.0, 1e-12);
  check("gaussian_b1_origin", g0.b1, -2.0, 1e-12);
  check("gaussian_b2_origin", g0.b2, 3.0, 1e-12);
  const BCoefficients c0 = b_coefficients(SymbolDescriptor::constant(2.5), cplx(0.3, -0.2));
  check("constant_b0", c0.b0, 6.25, 1e-12);
  check("constant_b1", c0.b1, 0.0, 1e-12);
  check("constant_b2", c0.b2, 0.0, 1e-12);
  const BCoefficients r0 = b_coefficients(r2, 0.0);
  check("r2_b0_origin", r0.b0, 0.0, 1e-12);
  check("r2_b1_origin", r0.b1, 0.0, 1e-12);
  check("r2_b2_origin", r0.b2, 1.0, 1e-12);

  // b1 and b2 recovered from exact diagonal sums by Richardson in 1/p
  struct Case {
    const char* name;
    SymbolDescriptor f;
    cplx x;
  };
  const std::vector<Case> cases{{"gaussian", gauss, cplx(0.5, 0.0)},
                                {"r2", r2, cplx(0.0, 0.5)},
                                {"laguerre", SymbolDescriptor::laguerre_gaussian(), cplx(0.3, 0.25)}};
  for (const auto& c : cases) {
    const auto rows = calibration_rows(c.f, c.x, {50, 100, 200});
    const BCoefficients b = b_coefficients(c.f, c.x);
    auto e1 = [&](const CalibrationRow& r) { return r.p * (r.exact - b.b0); };
    auto e2 = [&](const CalibrationRow& r) { return double(r.p) * r.p * (r.exact - b.b0 - b.b1 / r.p); };
    // e1 = b1 + b2/p + ..., e2 = b2 + b3/p + ...
    const double b1_est = (8 * e1(rows[2]) - 6 * e1(rows[1]) + e1(rows[0])) / 3;
    const double b2_est = 2 * e2(rows[2]) - e2(rows[1]);
    check(std::string(c.name) + "_b1_diagonal", b1_est, b.b1, 1e-4 * std::max(1.0, std::abs(b.b1)));
    check(std::string(c.name) + "_b2_diagonal", b2_est, b.b2, 2e-2 * std::max(1.0, std::abs(b.b2)));
  }

  const Order2Data d = order2_data(r2, 0.0);
  check("r2_mu_origin", d.mu, 1.0 / (kPi * kPi), 1e-12);
  check("r2_mu_metric_coordinates", d.mu * kPi * kPi, r0.b2, 1e-12);
  return out;
}

nlohmann::json to_json(const Order2Data& d) {
  return {{"x0", {d.x0.real(), d.x0.imag()}},
          {"dimension", d.dimension},
          {"A", d.A},
          {"B", {d.B.real(), d.B.imag()}},
          {"laplacian_at_x0", d.laplacian_at_x0},
          {"mu", d.mu},
          {"K", d.K},
          {"taylor_constant", d.taylor_constant}};
}

}  // namespace gaf
