#include "gaf/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gaf/error.hpp"

namespace gaf {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct RootEval {
  cplx ratio;     // P/P'
  bool at_noise;  // |P| indistinguishable from rounding
};

RootEval eval_ratio(const std::vector<cplx>& c, int d, cplx z) {
  const double az = std::abs(z);
  if (az <= 1.0) {
    cplx v = c[d], dv = 0.0;
    double s = std::abs(c[d]);
    for (int k = d - 1; k >= 0; --k) {
      dv = dv * z + v;
      v = v * z + c[k];
      s = s * az + std::abs(c[k]);
    }
    return {v / dv, std::abs(v) <= 4.0 * d * kEps * s};
  }
  const cplx w = 1.0 / z;
  const double aw = 1.0 / az;
  cplx q = c[0], dq = 0.0;
  double s = std::abs(c[0]);
  for (int k = 1; k <= d; ++k) {
    dq = dq * w + q;
    q = q * w + c[k];
    s = s * aw + std::abs(c[k]);
  }
  return {z / (static_cast<double>(d) - w * dq / q), std::abs(q) <= 4.0 * d * kEps * s};
}

// Upper convex hull of (k, log|c_k|) gives one starting radius per edge.
std::vector<cplx> newton_polygon_start(const std::vector<cplx>& c, int d) {
  std::vector<int> idx;
  std::vector<double> lg(d + 1);
  for (int k = 0; k <= d; ++k) {
    const double a = std::abs(c[k]);
    lg[k] = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
  }
  std::vector<int> hull;
  for (int k = 0; k <= d; ++k) {
    if (!std::isfinite(lg[k])) continue;
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      // drop b if it lies on or below the segment a -> k
      const double cross = (b - a) * (lg[k] - lg[a]) - (k - a) * (lg[b] - lg[a]);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(k);
  }
  std::vector<cplx> z;
  z.reserve(d);
  const double sigma = 0.7;
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const int a = hull[e], b = hull[e + 1];
    const int cnt = b - a;
    const double u = std::exp((lg[a] - lg[b]) / cnt);
    for (int j = 0; j < cnt; ++j) {
      const double ang = 2.0 * kPi * j / cnt + 2.0 * kPi * a / d + sigma + 1e-3 * j;
      z.push_back(std::polar(u, ang));
    }
  }
  return z;
}

std::vector<Root> cluster(const std::vector<cplx>& roots, double tol) {
  const std::size_t n = roots.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= tol) parent[find(i)] = find(j);
  std::vector<Root> out;
  std::vector<std::size_t> slot(n, n);
  std::vector<cplx> sum;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.push_back({0.0, 0});
      sum.push_back(0.0);
    }
    sum[slot[r]] += roots[i];
    out[slot[r]].multiplicity += 1;
  }
  for (std::size_t s = 0; s < out.size(); ++s) out[s].position = sum[s] / static_cast<double>(out[s].multiplicity);
  return out;
}

struct ContourCount {
  int count = 0;
  double deviation = 0.0;
  double min_newton_distance = 0.0;
  double log_max_abs = 0.0;
  int closest_node = 0;
};

ContourCount contour_count(const ScaledPoly& poly, double r, int nodes) {
  const CircleValues cv = circle_values(poly, r, nodes, true);
  cplx sum = 0.0;
  int cc_node = 0;
  double min_dist = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const cplx v = cv.values[j];
    const double av = std::abs(v);
    max_abs = std::max(max_abs, av);
    if (av == 0.0) {
      min_dist = 0.0;
      continue;
    }
    const double ad = std::abs(cv.zderiv[j]);
    if (ad > 0.0 && r * av / ad < min_dist) {
      min_dist = r * av / ad;
      cc_node = j;
    }
    sum += cv.zderiv[j] / v;
  }
  ContourCount cc;
  cc.min_newton_distance = min_dist;
  cc.closest_node = cc_node;
  cc.log_max_abs = cv.log_scale + std::log(max_abs);
  if (min_dist <= 1e-8 * r) return cc;
  sum /= static_cast<double>(nodes);
  cc.count = static_cast<int>(std::lround(sum.real()));
  cc.deviation = std::abs(sum - cplx(cc.count, 0.0));
  return cc;
}

// Refines the node count until the argument-principle sum is resolved. A zero at
// distance d from the circle needs about 8 r / d nodes; the Newton distance at the
// closest node over-estimates d by at most half the node spacing, so the loop
// converges in a few rounds.
constexpr int kMaxContourNodes = 1 << 22;

ContourCount resolved_contour(const ScaledPoly& poly, double r, int nodes, int& used) {
  ContourCount cc = contour_count(poly, r, used = nodes);
  while (cc.min_newton_distance > 1e-8 * r && cc.deviation >= 0.1 && used < kMaxContourNodes) {
    const double want = 8.0 * r / cc.min_newton_distance;
    int next = used * 2;
    while (next < want && next < kMaxContourNodes) next *= 2;
    cc = contour_count(poly, r, used = std::min(next, kMaxContourNodes));
  }
  return cc;
}

// Newton from the node closest to a zero; true when that zero sits on the circle.
bool zero_on_contour(const ScaledPoly& poly, double r, int nodes, int node) {
  cplx z = std::polar(r, 2.0 * kPi * node / nodes);
  for (int it = 0; it < 60; ++it) {
    const cplx step = newton_ratio(poly, z);
    if (!std::isfinite(std::abs(step))) break;
    z -= step;
    if (std::abs(step) <= 1e-15 * std::max(std::abs(z), 1.0)) break;
  }
  return std::abs(std::abs(z) - r) <= 1e-8 * r;
}

}  // namespace

const char* to_string(ZeroStatus s) noexcept {
  switch (s) {
    case ZeroStatus::valid: return "VALID";
    case ZeroStatus::boundary_ambiguous: return "BOUNDARY_AMBIGUOUS";
    case ZeroStatus::nonconverged: return "NONCONVERGED";
    case ZeroStatus::count_mismatch: return "COUNT_MISMATCH";
    case ZeroStatus::contour_unresolved: return "CONTOUR_UNRESOLVED";
    case ZeroStatus::residual_fail: return "RESIDUAL_FAIL";
  }
  return "?";
}

int ZeroSet::total_multiplicity() const noexcept {
  int t = 0;
  for (const auto& r : roots) t += r.multiplicity;
  return t;
}

TestForm TestForm::bump(double radius, cplx center) {
  if (!(radius > 0.0)) throw argument_error("zeros.argument", "bump radius must be positive");
  TestForm t;
  t.support_radius = std::abs(center) + radius;
  t.name = "bump";
  t.eval = [radius, center](cplx z) {
    const double u = std::norm(z - center) / (radius * radius);
    return u >= 1.0 ? 0.0 : (1.0 - u) * (1.0 - u);
  };
  return t;
}

TestForm TestForm::zero(double radius) {
  TestForm t;
  t.support_radius = radius;
  t.name = "zero";
  t.eval = [](cplx) { return 0.0; };
  return t;
}

double TestForm::bump_area_integral(double radius) { return kPi * radius * radius / 3.0; }

AberthResult aberth_roots(const ScaledPoly& poly, const AberthOptions& options) {
  const int d = poly.degree();
  if (d < 0) throw argument_error("zeros.zero_section", "the polynomial vanishes identically");
  AberthResult res;
  if (d == 0) {
    res.converged = true;
    return res;
  }
  const auto& c = poly.coeffs;
  std::vector<cplx> z = newton_polygon_start(c, d);
  std::vector<char> done(d, 0);
  for (int it = 1; it <= options.max_iterations; ++it) {
    res.iterations = it;
    bool all = true;
    for (int i = 0; i < d; ++i) {
      if (done[i]) continue;
      const RootEval e = eval_ratio(c, d, z[i]);
      if (e.at_noise) {
        done[i] = 1;
        continue;
      }
      cplx s = 0.0;
      for (int j = 0; j < d; ++j)
        if (j != i) s += 1.0 / (z[i] - z[j]);
      const cplx w = e.ratio / (1.0 - e.ratio * s);
      z[i] -= w;
      if (std::abs(w) <= options.tolerance * std::max(std::abs(z[i]), 1e-300)) done[i] = 1;
      else all = false;
    }
    if (all) {
      res.converged = true;
      break;
    }
  }
  res.roots = std::move(z);
  return res;
}

int contour_nodes(int order) { return std::max(256, 32 * std::max(order, 1)); }

int count_zeros_argument(const ScaledPoly& poly, double r, int nodes) {
  if (!(r > 0.0)) throw argument_error("zeros.argument", "radius must be positive");
  if (poly.degree() < 0) throw argument_error("zeros.zero_section", "the section vanishes identically");
  int used = nodes;
  ContourCount cc = resolved_contour(poly, r, nodes, used);
  if (cc.deviation >= 0.1 && zero_on_contour(poly, r, used, cc.closest_node)) cc.min_newton_distance = 0.0;
  if (cc.min_newton_distance <= 1e-8 * r) {
    std::ostringstream os;
    os << "a zero lies within " << cc.min_newton_distance << " of the contour |z| = " << r;
    throw numeric_error("zeros.contour_near_zero", os.str());
  }
  if (cc.deviation >= 0.1) {
    std::ostringstream os;
    os << "argument-principle sum deviates by " << cc.deviation << " from an integer with " << used << " nodes";
    throw numeric_error("zeros.contour_unresolved", os.str());
  }
  return cc.count;
}

int count_zeros_argument(const SectionSample& sample, double r) {
  return count_zeros_argument(frame_polynomial(sample), r, contour_nodes(sample.order()));
}

ZeroSet roots_in_disk(const SectionSample& sample, double r) {
  if (!(r > 0.0)) throw argument_error("zeros.argument", "radius must be positive");
  ScaledPoly poly = frame_polynomial(sample);
  const int d = poly.degree();
  if (d < 0) throw argument_error("zeros.zero_section", "the section vanishes identically");
  if (d > kMaxDegree) throw argument_error("zeros.degree_cap", "degree above the cap of 512");

  ZeroSet zs;
  zs.domain_radius = r;

  // exact zeros at the origin
  int k0 = 0;
  while (poly.coeffs[k0] == cplx(0.0, 0.0)) ++k0;
  ScaledPoly reduced;
  reduced.log_scale = poly.log_scale;
  reduced.coeffs.assign(poly.coeffs.begin() + k0, poly.coeffs.begin() + d + 1);

  AberthResult ab = aberth_roots(reduced);
  for (auto& z : ab.roots) {
    // Newton polish, kept only while it reduces the step
    double last = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      const cplx step = newton_ratio(reduced, z);
      if (!(std::abs(step) < last) || !std::isfinite(std::abs(step))) break;
      last = std::abs(step);
      z -= step;
    }
  }
  std::vector<cplx> all = ab.roots;
  for (int i = 0; i < k0; ++i) all.push_back(0.0);

  const double tol = 1e-8 * r;
  std::vector<Root> clustered = cluster(all, tol);
  bool boundary = false;
  for (const auto& root : clustered) {
    const double a = std::abs(root.position);
    if (std::abs(a - r) <= tol) boundary = true;
    if (a <= r) zs.roots.push_back(root);
  }
  std::sort(zs.roots.begin(), zs.roots.end(), [](const Root& a, const Root& b) {
    return std::abs(a.position) < std::abs(b.position);
  });

  const int nodes = contour_nodes(sample.order());
  int used = nodes;
  ContourCount cc = resolved_contour(poly, r, nodes, used);
  if (cc.deviation >= 0.1 && zero_on_contour(poly, r, used, cc.closest_node)) boundary = true;

  double max_res = 0.0;
  for (const auto& root : zs.roots) {
    const PolyValue v = poly_log_eval(poly, root.position);
    if (std::isfinite(v.log_abs)) max_res = std::max(max_res, std::exp(v.log_abs - cc.log_max_abs));
  }
  zs.validation.max_newton_residual = max_res;
  zs.validation.argument_count = cc.count;

  if (boundary || cc.min_newton_distance <= tol) zs.validation.status = ZeroStatus::boundary_ambiguous;
  else if (!ab.converged) zs.validation.status = ZeroStatus::nonconverged;
  else if (cc.deviation >= 0.1) zs.validation.status = ZeroStatus::contour_unresolved;
  else if (cc.count != zs.total_multiplicity()) zs.validation.status = ZeroStatus::count_mismatch;
  else if (max_res > 1e-9) zs.validation.status = ZeroStatus::residual_fail;
  else zs.validation.status = ZeroStatus::valid;
  return zs;
}

Pairing pair_divisor(const ZeroSet& zs, const TestForm& phi) {
  if (!zs.valid())
    throw argument_error("zeros.invalid_zero_set", std::string("pairing needs a VALID zero set, got ") +
                                                       to_string(zs.validation.status));
  Pairing out;
  out.truncated_support = phi.support_radius > zs.domain_radius;
  for (const auto& r : zs.roots) out.value += r.multiplicity * phi.eval(r.position);
  return out;
}

bool hole_indicator(const SectionSample& sample, double r) { return count_zeros_argument(sample, r) == 0; }

double volume_codim1(const ZeroSet& zs, double region_radius) {
  if (!zs.valid()) throw argument_error("zeros.invalid_zero_set", "volume needs a VALID zero set");
  double v = 0.0;
  for (const auto& r : zs.roots)
    if (std::abs(r.position) <= region_radius) v += r.multiplicity;
  return v;
}

}  // namespace gaf
