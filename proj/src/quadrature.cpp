#include "gaf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "gaf/error.hpp"

namespace gaf {

namespace {

GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

double panel(const std::function<double(double)>& f, double a, double b, const GaussRule& g, int& evals) {
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(m + h * g.nodes[i]);
  evals += static_cast<int>(g.nodes.size());
  return s * h;
}

struct Panel {
  double a, b, whole;
  int depth;
};

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw argument_error("quadrature.argument", "rule size must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(make_rule(n));
  return *slot;
}

GaussRule composite_rule(double a, double b, int panels, int order) {
  const GaussRule& g = gauss_legendre(order);
  GaussRule out;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < order; ++i) {
      out.nodes.push_back(lo + 0.5 * h * (g.nodes[i] + 1.0));
      out.weights.push_back(0.5 * h * g.weights[i]);
    }
  }
  return out;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const std::vector<double>& breakpoints, const QuadOptions& options) {
  QuadResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  const GaussRule& g = gauss_legendre(options.order);
  std::vector<double> cuts{a};
  for (double x : breakpoints)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());

  // Work list of panels; a panel is accepted once its halves agree with it to
  // a share of the global tolerance, where the global value is re-estimated as
  // the sum evolves.
  std::vector<Panel> open;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) open.push_back({cuts[i], cuts[i + 1], panel(f, cuts[i], cuts[i + 1], g, res.evaluations), 0});

  double accepted = 0.0, accepted_err = 0.0;
  bool ok = true;
  const double total_len = b - a;
  while (!open.empty()) {
    double estimate = accepted;
    for (const auto& p : open) estimate += p.whole;
    std::vector<Panel> next;
    for (const auto& p : open) {
      const double m = 0.5 * (p.a + p.b);
      const double l = panel(f, p.a, m, g, res.evaluations), r = panel(f, m, p.b, g, res.evaluations);
      const double err = std::abs(l + r - p.whole);
      const double share = (p.b - p.a) / total_len;
      // never ask for less than the evaluation noise of the panel sum (log-domain integrands lose ~1e-13)
      const double noise = 4096.0 * 2.2e-16 * (std::abs(l) + std::abs(r));
      const double tol = std::max({options.rel_tol * std::abs(estimate) * share, options.abs_floor * share, noise});
      if (err <= tol || err == 0.0) {
        accepted += l + r;
        accepted_err += err;
      } else if (p.depth + 1 >= options.max_depth || res.evaluations > options.max_evaluations) {
        ok = false;
        accepted += l + r;
        accepted_err += err;
      } else {
        next.push_back({p.a, m, l, p.depth + 1});
        next.push_back({m, p.b, r, p.depth + 1});
      }
    }
    open.swap(next);
  }
  res.value = accepted;
  res.error = accepted_err;
  res.converged = ok;
  return res;
}

}  // namespace gaf
