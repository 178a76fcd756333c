#include "gaf/symbol.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "gaf/error.hpp"

namespace gaf {

namespace {

Jet radial_jet(const std::array<double, 5>& g, cplx z) {
  const double s = std::norm(z);
  const cplx zb = std::conj(z);
  Jet j;
  j.f = g[0];
  j.fz = g[1] * zb;
  j.fzz = g[2] * zb * zb;
  j.fzzbar = g[1] + s * g[2];
  j.fzzzbar = zb * (2.0 * g[2] + s * g[3]);
  j.fzzzbarzbar = 2.0 * g[2] + 4.0 * s * g[3] + s * s * g[4];
  return j;
}

struct Partials {
  double fx, fy, fxx, fyy, fxy, lapx, lapy, bilap;
};

Partials partials_low(const std::function<double(cplx)>& f, cplx z, double h) {
  auto F = [&](double dx, double dy) { return f(z + cplx(dx * h, dy * h)); };
  const double c = F(0, 0);
  Partials p{};
  p.fx = (F(1, 0) - F(-1, 0)) / (2 * h);
  p.fy = (F(0, 1) - F(0, -1)) / (2 * h);
  p.fxx = (F(1, 0) - 2 * c + F(-1, 0)) / (h * h);
  p.fyy = (F(0, 1) - 2 * c + F(0, -1)) / (h * h);
  p.fxy = (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * h * h);
  return p;
}

Partials partials_high(const std::function<double(cplx)>& f, cplx z, double h) {
  auto F = [&](double dx, double dy) { return f(z + cplx(dx * h, dy * h)); };
  const double h3 = 2 * h * h * h;
  Partials p{};
  const double fxxx = (F(2, 0) - 2 * F(1, 0) + 2 * F(-1, 0) - F(-2, 0)) / h3;
  const double fxyy = (F(1, 1) - 2 * F(1, 0) + F(1, -1) - F(-1, 1) + 2 * F(-1, 0) - F(-1, -1)) / h3;
  const double fyyy = (F(0, 2) - 2 * F(0, 1) + 2 * F(0, -1) - F(0, -2)) / h3;
  const double fxxy = (F(1, 1) - 2 * F(0, 1) + F(-1, 1) - F(1, -1) + 2 * F(0, -1) - F(-1, -1)) / h3;
  p.lapx = fxxx + fxyy;
  p.lapy = fxxy + fyyy;
  p.bilap = (20 * F(0, 0) - 8 * (F(1, 0) + F(-1, 0) + F(0, 1) + F(0, -1)) +
             2 * (F(1, 1) + F(1, -1) + F(-1, 1) + F(-1, -1)) + (F(2, 0) + F(-2, 0) + F(0, 2) + F(0, -2))) /
            (h * h * h * h);
  return p;
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

void check_keys(const nlohmann::json& j, std::set<std::string> allowed) {
  allowed.insert("name");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw config_error("config.unknown_key", "unknown symbol parameter '" + it.key() + "'");
}

}  // namespace

SymbolDescriptor SymbolDescriptor::radial(std::string name, Profile g, ProfileDerivatives dg, double support_radius,
                                          double tail_bound, double sup_bound, bool nonnegative) {
  SymbolDescriptor s;
  s.name_ = std::move(name);
  s.params_ = {{"name", s.name_}};
  s.profile_ = g;
  s.dprofile_ = std::move(dg);
  s.eval_ = [g](cplx z) { return g(std::norm(z)); };
  s.support_radius_ = support_radius;
  s.tail_bound_ = tail_bound;
  s.sup_bound_ = sup_bound;
  s.nonnegative_ = nonnegative;
  return s;
}

SymbolDescriptor SymbolDescriptor::general(std::string name, std::function<double(cplx)> f, double support_radius,
                                           double tail_bound, double sup_bound, bool nonnegative) {
  SymbolDescriptor s;
  s.name_ = std::move(name);
  s.params_ = {{"name", s.name_}};
  s.eval_ = std::move(f);
  s.support_radius_ = support_radius;
  s.tail_bound_ = tail_bound;
  s.sup_bound_ = sup_bound;
  s.nonnegative_ = nonnegative;
  return s;
}

SymbolDescriptor SymbolDescriptor::constant(double c) {
  auto s = radial(
      "constant", [c](double) { return c; }, [c](double) { return std::array<double, 5>{c, 0, 0, 0, 0}; },
      std::numeric_limits<double>::infinity(), std::abs(c), std::abs(c), c >= 0.0);
  s.params_["c"] = c;
  s.constant_ = true;
  s.constant_value_ = c;
  return s;
}

SymbolDescriptor SymbolDescriptor::gaussian(double a) {
  if (!(a > 0.0)) throw argument_error("symbol.argument", "gaussian rate must be positive");
  auto s = radial(
      "gaussian", [a](double x) { return std::exp(-a * x); },
      [a](double x) {
        const double e = std::exp(-a * x);
        return std::array<double, 5>{e, -a * e, a * a * e, -a * a * a * e, a * a * a * a * e};
      },
      std::sqrt(40.0 / a), std::exp(-40.0), 1.0, true);
  s.params_["a"] = a;
  return s;
}

SymbolDescriptor SymbolDescriptor::r2_gaussian() {
  return radial(
      "r2_gaussian", [](double x) { return x * std::exp(-x); },
      [](double x) {
        const double e = std::exp(-x);
        return std::array<double, 5>{x * e, -(x - 1) * e, (x - 2) * e, -(x - 3) * e, (x - 4) * e};
      },
      std::sqrt(45.0), 45.0 * std::exp(-45.0), std::exp(-1.0), true);
}

SymbolDescriptor SymbolDescriptor::laguerre_gaussian() {
  return radial(
      "laguerre_gaussian", [](double x) { return (1 - 2 * x) * std::exp(-x); },
      [](double x) {
        std::array<double, 5> d{};
        const double e = std::exp(-x);
        for (int n = 0; n < 5; ++n) d[n] = (n % 2 ? -1.0 : 1.0) * e * (1 - 2 * x + 2 * n);
        return d;
      },
      7.0, 99.0 * std::exp(-49.0), 1.0, false);
}

SymbolDescriptor SymbolDescriptor::re_gaussian() {
  return general(
      "re_gaussian", [](cplx z) { return z.real() * std::exp(-std::norm(z)); }, std::sqrt(40.0),
      std::sqrt(40.0) * std::exp(-40.0), 1.0 / std::sqrt(2.0 * std::exp(1.0)), false);
}

SymbolDescriptor SymbolDescriptor::shifted_gaussian(cplx center) {
  auto s = general(
      "shifted_gaussian", [center](cplx z) { return std::exp(-std::norm(z - center)); },
      std::abs(center) + std::sqrt(40.0), std::exp(-40.0), 1.0, true);
  s.params_["center"] = {center.real(), center.imag()};
  return s;
}

SymbolDescriptor SymbolDescriptor::bump(double radius) {
  if (!(radius > 0.0)) throw argument_error("symbol.argument", "bump radius must be positive");
  const double r2 = radius * radius;
  auto s = radial(
      "bump",
      [r2](double x) {
        if (x >= r2) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - x / r2));
      },
      nullptr, radius, 0.0, 1.0, true);
  s.params_["radius"] = radius;
  return s;
}

SymbolDescriptor SymbolDescriptor::from_json(const nlohmann::json& j) {
  if (j.is_string()) return from_json(nlohmann::json{{"name", j}});
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    throw config_error("config.invalid_value", "symbol must be an object with a string 'name'");
  const std::string name = j["name"];
  auto num = [&](const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) throw config_error("config.invalid_value", std::string("symbol.") + key + " must be a number");
    return j[key].get<double>();
  };
  if (name == "constant") {
    check_keys(j, {"c"});
    return constant(num("c", 1.0));
  }
  if (name == "gaussian") {
    check_keys(j, {"a"});
    return gaussian(num("a", 1.0));
  }
  if (name == "r2_gaussian") {
    check_keys(j, {});
    return r2_gaussian();
  }
  if (name == "re_gaussian") {
    check_keys(j, {});
    return re_gaussian();
  }
  if (name == "laguerre_gaussian") {
    check_keys(j, {});
    return laguerre_gaussian();
  }
  if (name == "bump") {
    check_keys(j, {"radius"});
    return bump(num("radius", 1.0));
  }
  if (name == "shifted_gaussian") {
    check_keys(j, {"center"});
    cplx c = 0.0;
    if (j.contains("center")) {
      const auto& a = j["center"];
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw config_error("config.invalid_value", "symbol.center must be [re, im]");
      c = {a[0].get<double>(), a[1].get<double>()};
    }
    return shifted_gaussian(c);
  }
  throw config_error("config.invalid_value", "unknown symbol '" + name + "'");
}

nlohmann::json SymbolDescriptor::to_json() const {
  nlohmann::json j = params_;
  j["radial"] = is_radial();
  j["support_radius"] = std::isfinite(support_radius_) ? nlohmann::json(support_radius_) : nlohmann::json("inf");
  j["tail_bound"] = tail_bound_;
  j["sup_bound"] = sup_bound_;
  j["nonnegative"] = nonnegative_;
  return j;
}

Jet SymbolDescriptor::jet(cplx z) const {
  if (dprofile_) return radial_jet(dprofile_(std::norm(z)), z);
  return jet_fd(z);
}

Jet SymbolDescriptor::jet_fd(cplx z, double step) const {
  if (!(step > 0.0)) throw argument_error("symbol.argument", "finite-difference step must be positive");
  const Partials a = partials_low(eval_, z, step), b = partials_low(eval_, z, step / 2);
  const double H = 20.0 * step;
  const Partials c = partials_high(eval_, z, H), d = partials_high(eval_, z, H / 2);
  const double fx = richardson(a.fx, b.fx), fy = richardson(a.fy, b.fy);
  const double fxx = richardson(a.fxx, b.fxx), fyy = richardson(a.fyy, b.fyy), fxy = richardson(a.fxy, b.fxy);
  const double lapx = richardson(c.lapx, d.lapx), lapy = richardson(c.lapy, d.lapy);
  const double bilap = richardson(c.bilap, d.bilap);
  Jet j;
  j.f = eval_(z);
  j.fz = cplx(fx, -fy) / 2.0;
  j.fzz = cplx(fxx - fyy, -2.0 * fxy) / 4.0;
  j.fzzbar = (fxx + fyy) / 4.0;
  j.fzzzbar = cplx(lapx, -lapy) / 8.0;
  j.fzzzbarzbar = bilap / 16.0;
  return j;
}

}  // namespace gaf
