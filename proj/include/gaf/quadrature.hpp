#pragma once

#include <functional>
#include <vector>

namespace gaf {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached n-point rule (n >= 1).
const GaussRule& gauss_legendre(int n);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // < estimated absolute error
  int evaluations = 0;
  bool converged = false;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_floor = 0.0;  // < accept once the error is below this, whatever the value
  int max_depth = 40;
  int order = 20;
  int max_evaluations = 4000000;
};

// Adaptive composite Gauss-Legendre on [a, b]: each panel is compared with
// its two halves and bisected until the global relative tolerance is met.
// Breakpoints inside (a, b) seed the initial panels.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const std::vector<double>& breakpoints = {}, const QuadOptions& options = {});

// Nodes and weights of a fixed composite rule: `panels` equal panels of `order` points on [a, b].
GaussRule composite_rule(double a, double b, int panels, int order = 20);

}  // namespace gaf
