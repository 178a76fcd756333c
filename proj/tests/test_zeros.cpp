#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gaf/error.hpp"
#include "gaf/rng.hpp"
#include "gaf/zeros.hpp"

using namespace gaf;

namespace {

// Frame polynomial equal to the coefficient vector: a custom span with unit weights.
SectionSample from_poly(std::vector<cplx> coeffs, double radius = 2.0) {
  const auto space = ModelSpace::custom(std::vector<double>(coeffs.size(), 1.0));
  TruncationCertificate cert{static_cast<int>(coeffs.size()) - 1, radius, 0.0};
  return section_from_coefficients(space, std::move(coeffs), cert);
}

std::vector<cplx> expand(const std::vector<cplx>& roots) {
  std::vector<cplx> c{1.0};
  for (cplx r : roots) {
    std::vector<cplx> n(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      n[k + 1] += c[k];
      n[k] -= r * c[k];
    }
    c = n;
  }
  return c;
}

double distance_to_set(cplx z, const std::vector<cplx>& set) {
  double d = INFINITY;
  for (cplx s : set) d = std::min(d, std::abs(z - s));
  return d;
}

}  // namespace

TEST_CASE("double root and simple root") {
  // (z - 0.3)^2 (z + 0.4) = z^3 - 0.2 z^2 - 0.15 z + 0.036
  const auto zs = roots_in_disk(from_poly({0.036, -0.15, -0.2, 1.0}), 1.0);
  REQUIRE(zs.valid());
  CHECK(zs.total_multiplicity() == 3);
  CHECK(zs.validation.argument_count == 3);
  REQUIRE(zs.roots.size() == 2);
  const Root& dbl = zs.roots[0].multiplicity == 2 ? zs.roots[0] : zs.roots[1];
  const Root& sgl = zs.roots[0].multiplicity == 2 ? zs.roots[1] : zs.roots[0];
  CHECK(dbl.multiplicity == 2);
  CHECK(std::abs(dbl.position - 0.3) < 1e-8);
  CHECK(std::abs(sgl.position + 0.4) < 1e-12);
}

TEST_CASE("disk restriction and argument count") {
  const std::vector<cplx> roots{{0.2, 0.1}, {-0.5, 0.3}, {0.0, -0.8}, {1.5, 0.2}, {-2.0, -1.0}};
  const auto s = from_poly(expand(roots), 3.0);
  const auto zs = roots_in_disk(s, 1.0);
  REQUIRE(zs.valid());
  CHECK(zs.total_multiplicity() == 3);
  for (const auto& r : zs.roots) CHECK(distance_to_set(r.position, roots) < 1e-12);
  CHECK(count_zeros_argument(s, 1.0) == 3);
  CHECK(count_zeros_argument(s, 0.3) == 1);
  CHECK(count_zeros_argument(s, 2.5) == 5);
  CHECK(hole_indicator(s, 0.1));
  CHECK_FALSE(hole_indicator(s, 0.3));
}

TEST_CASE("roots of unity and exact zeros at the origin") {
  std::vector<cplx> c(17, 0.0);
  c[16] = 1.0;
  c[0] = -0.5;
  const auto zs = roots_in_disk(from_poly(c), 1.0);
  REQUIRE(zs.valid());
  CHECK(zs.total_multiplicity() == 16);
  const double rad = std::pow(0.5, 1.0 / 16);
  for (const auto& r : zs.roots) CHECK(std::abs(std::abs(r.position) - rad) < 1e-13);

  std::vector<cplx> z3{0.0, 0.0, 0.0, 2.0, 1.0};  // z^3 (z + 2)
  const auto zo = roots_in_disk(from_poly(z3), 1.0);
  REQUIRE(zo.valid());
  REQUIRE(zo.roots.size() == 1);
  CHECK(zo.roots[0].multiplicity == 3);
  CHECK(zo.roots[0].position == cplx(0.0, 0.0));
}

TEST_CASE("boundary roots are flagged") {
  const auto zs = roots_in_disk(from_poly(expand({{0.6, 0.8}, {0.1, 0.0}})), 1.0);
  CHECK(zs.validation.status == ZeroStatus::boundary_ambiguous);
  CHECK_THROWS_AS(pair_divisor(zs, TestForm::bump(0.5)), Error);
  try {
    (void)count_zeros_argument(from_poly(expand({{0.6, 0.8}, {0.1, 0.0}})), 1.0);
    FAIL("expected contour_near_zero");
  } catch (const Error& e) {
    CHECK(e.reason() == "zeros.contour_near_zero");
  }
}

TEST_CASE("zeros just off the contour are resolved by refining the nodes") {
  for (double gap : {1e-3, 1e-4, 1e-5}) {
    const auto inside = from_poly(expand({std::polar(1.0 - gap, 0.3), {0.2, 0.1}, {-0.5, 0.4}}));
    const auto outside = from_poly(expand({std::polar(1.0 + gap, 0.3), {0.2, 0.1}, {-0.5, 0.4}}));
    CHECK(count_zeros_argument(inside, 1.0) == 3);
    CHECK(count_zeros_argument(outside, 1.0) == 2);
    const auto zs = roots_in_disk(inside, 1.0);
    CHECK(zs.valid());
    CHECK(zs.total_multiplicity() == 3);
  }
}

TEST_CASE("zero section is rejected") {
  CHECK_THROWS_AS(roots_in_disk(from_poly({0.0, 0.0}), 1.0), Error);
  CHECK_THROWS_AS(count_zeros_argument(from_poly({0.0}), 1.0), Error);
}

TEST_CASE("conjugation equivariance of random Fock sections") {
  const auto space = ModelSpace::fock(8);
  const auto cert = truncation_order(space, 1.0, 1e-12);
  for (int t = 0; t < 20; ++t) {
    RngStream s(17, t);
    auto a = sample_section(space, cert, s);
    auto coeffs = a.coefficients;
    for (auto& c : coeffs) c = std::conj(c);
    const auto b = section_from_coefficients(space, coeffs, cert);
    const auto za = roots_in_disk(a, 1.0), zb = roots_in_disk(b, 1.0);
    REQUIRE(za.valid());
    REQUIRE(zb.valid());
    CHECK(za.total_multiplicity() == zb.total_multiplicity());
    std::vector<cplx> conj_b;
    for (const auto& r : zb.roots) conj_b.push_back(std::conj(r.position));
    for (const auto& r : za.roots) CHECK(distance_to_set(r.position, conj_b) < 1e-10);
    CHECK(za.validation.max_newton_residual <= 1e-9);
  }
}

TEST_CASE("rotation equivariance of the zero set") {
  const auto space = ModelSpace::fock(5);
  const auto cert = truncation_order(space, 1.0, 1e-12);
  RngStream s(4, 4);
  const auto a = sample_section(space, cert, s);
  const cplx rot = std::polar(1.0, 0.37);
  auto coeffs = a.coefficients;
  // psi(rot^{-1} z) has coefficients eta_k rot^{-k}
  for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::pow(std::conj(rot), static_cast<int>(k));
  const auto za = roots_in_disk(a, 1.0), zb = roots_in_disk(section_from_coefficients(space, coeffs, cert), 1.0);
  REQUIRE(za.valid());
  REQUIRE(zb.valid());
  std::vector<cplx> rotated;
  for (const auto& r : za.roots) rotated.push_back(r.position * rot);
  for (const auto& r : zb.roots) CHECK(distance_to_set(r.position, rotated) < 1e-10);
}

TEST_CASE("high degree Fock sections stay valid") {
  const auto space = ModelSpace::fock(100);
  const auto cert = truncation_order(space, 1.0, 1e-12);
  CHECK(cert.order < kMaxDegree);
  int valid = 0;
  for (int t = 0; t < 5; ++t) {
    RngStream s(2025, t);
    const auto zs = roots_in_disk(sample_section(space, cert, s), 1.0);
    if (zs.valid()) ++valid;
    // expected count p r^2 = 100
    CHECK(std::abs(zs.validation.argument_count - 100) < 40);
  }
  CHECK(valid == 5);
}

TEST_CASE("pairing with a bump") {
  const auto s = from_poly(expand({{0.1, 0.0}, {0.0, 0.5}, {0.9, 0.0}}));
  const auto zs = roots_in_disk(s, 1.0);
  REQUIRE(zs.valid());
  const auto bump = TestForm::bump(0.6);
  const double expect = std::pow(1 - 0.01 / 0.36, 2) + std::pow(1 - 0.25 / 0.36, 2);
  const Pairing pr = pair_divisor(zs, bump);
  CHECK(pr.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK_FALSE(pr.truncated_support);
  CHECK(pair_divisor(zs, TestForm::bump(1.5)).truncated_support);
  CHECK(pair_divisor(zs, TestForm::zero(1.0)).value == 0.0);
  CHECK(volume_codim1(zs, 0.6) == 2.0);

  // closed-form area integral against a midpoint-rule oracle
  const double R = 0.7;
  const auto b = TestForm::bump(R);
  const int n = 800;
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = -R + (i + 0.5) * 2 * R / n, y = -R + (j + 0.5) * 2 * R / n;
      acc += b.eval({x, y});
    }
  acc *= (2 * R / n) * (2 * R / n);
  CHECK(acc == doctest::Approx(TestForm::bump_area_integral(R)).epsilon(1e-4));
}

TEST_CASE("Aberth on a Wilkinson-like cluster") {
  std::vector<cplx> roots;
  for (int k = 1; k <= 12; ++k) roots.push_back(0.05 * k);
  ScaledPoly p;
  p.coeffs = expand(roots);
  const double m = std::abs(*std::max_element(p.coeffs.begin(), p.coeffs.end(),
                                              [](cplx a, cplx b) { return std::abs(a) < std::abs(b); }));
  for (auto& c : p.coeffs) c /= m;
  p.log_scale = std::log(m);
  const auto res = aberth_roots(p);
  CHECK(res.converged);
  REQUIRE(res.roots.size() == 12);
  for (cplx z : res.roots) CHECK(distance_to_set(z, roots) < 1e-6);
}
