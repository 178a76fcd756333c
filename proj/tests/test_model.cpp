#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gaf/error.hpp"
#include "gaf/model.hpp"

using namespace gaf;

namespace {

// Radial L2 norm of a Fock basis element by composite Simpson on [0, 12].
double fock_radial_norm(int p, int k) {
  const int n = 20000;
  const double b = 12.0, h = b / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double f = std::exp((k + 1) * std::log(p) + 2 * k * std::log(std::max(r, 1e-300)) - std::lgamma(k + 1.0) -
                              p * r * r) * 2.0 * r;
    s += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("basis_eval reference values") {
  CHECK(std::abs(basis_eval(ModelSpace::fock(1), 0, {0.7, 0.2}) - 1.0) < 1e-15);
  CHECK(std::abs(basis_eval(ModelSpace::fock(4), 1, 1.0) - 4.0) < 1e-14);
  CHECK(fock_radial_norm(4, 1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(basis_eval(ModelSpace::disc(), 0, {0.3, -0.1}) - 0.5641895835477563) < 1e-15);
  // disc normalization: integral of |c|^2 over the unit disc is pi c^2 = 1
  CHECK(kPi * std::norm(basis_eval(ModelSpace::disc(), 0, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("basis_eval falls back to the log domain and reports overflow") {
  const auto space = ModelSpace::fock(1000);
  const LogValue lv = basis_log_eval(space, 2000, {10.0, 0.0});
  CHECK(std::isfinite(lv.log_abs));
  CHECK(lv.log_abs > 709.0);
  try {
    (void)basis_eval(space, 2000, {10.0, 0.0});
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.reason() == "model.overflow");
  }
  // large but representable values still come back as numbers
  const cplx v = basis_eval(ModelSpace::fock(200), 150, 1.0);
  CHECK(std::isfinite(v.real()));
}

TEST_CASE("frame_weight") {
  CHECK(frame_weight(ModelSpace::fock(1), 0.0) == 1.0);
  CHECK(frame_weight(ModelSpace::fock(2), std::polar(1.0, 0.4)) == doctest::Approx(std::exp(-2.0)));
  CHECK(frame_weight(ModelSpace::disc(), 0.5) == 1.0);
}

TEST_CASE("kernel_diag closed forms and truncation") {
  CHECK(kernel_diag(ModelSpace::fock(7), {1.3, -0.4}) == 7.0);
  CHECK(kernel_diag(ModelSpace::disc(), 0.0) == doctest::Approx(1.0 / kPi));
  const auto f1 = ModelSpace::fock(1);
  const auto cert = truncation_order(f1, 1.0, 1e-12);
  CHECK(std::abs(kernel_diag(f1, 1.0, KernelMode::truncated_at(cert.order)) - 1.0) <= 1e-12);
  // oracle: e^{-1} sum_{k<=N} 1/k!
  double s = 0.0, t = 1.0;
  for (int k = 0; k <= cert.order; ++k) {
    if (k > 0) t /= k;
    s += t;
  }
  CHECK(kernel_diag(f1, 1.0, KernelMode::truncated_at(cert.order)) == doctest::Approx(std::exp(-1.0) * s).epsilon(1e-14));

  CHECK_THROWS_AS(kernel_diag(ModelSpace::disc(), 1.0), Error);
}

TEST_CASE("truncated kernel increases monotonically to the closed form") {
  for (const auto& space : {ModelSpace::fock(1), ModelSpace::fock(5), ModelSpace::disc()}) {
    for (double rad : {0.0, 0.3, 0.8}) {
      const cplx z = std::polar(rad, 1.1);
      const double exact = kernel_diag(space, z);
      double prev = 0.0;
      for (int n = 0; n <= 400; n += 5) {
        const double v = kernel_diag(space, z, KernelMode::truncated_at(n));
        CHECK(v >= prev - 1e-15);
        CHECK(v <= exact * (1 + 1e-13));
        prev = v;
      }
      CHECK(prev == doctest::Approx(exact).epsilon(1e-10));
    }
  }
}

TEST_CASE("normalized kernel") {
  const auto f9 = ModelSpace::fock(9);
  CHECK(normalized_kernel(f9, {0.3, 0.2}, {0.3, 0.2}) == doctest::Approx(1.0));
  // oracle: |sum_k f_k(z) conj f_k(w)| e^{-phi(z)-phi(w)} at high truncation
  cplx off = 0.0;
  for (int k = 0; k <= 200; ++k) off += basis_eval(f9, k, 0.0) * std::conj(basis_eval(f9, k, 0.5));
  const double oracle = std::abs(off) * std::exp(-f9.weight_exponent(0.0) - f9.weight_exponent(0.5)) / 9.0;
  CHECK(normalized_kernel(f9, 0.0, 0.5) == doctest::Approx(std::exp(-1.125)).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(std::exp(-1.125)).epsilon(1e-12));

  // off-diagonal decay at p = 100: threshold distance where the closed form equals 1e-8
  const auto f100 = ModelSpace::fock(100);
  const double d = std::sqrt(2.0 * std::log(1e8) / 100.0);
  CHECK(normalized_kernel(f100, 0.0, d * 1.01) < 1e-8);
  CHECK(normalized_kernel(f100, 0.0, d * 0.99) > 1e-8);

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 50; ++i) {
    const cplx z(u(gen) * 0.7, u(gen) * 0.7), w(u(gen) * 0.7, u(gen) * 0.7);
    for (const auto& s : {ModelSpace::fock(3), ModelSpace::disc()}) {
      CHECK(normalized_kernel(s, z, w) == doctest::Approx(normalized_kernel(s, w, z)).epsilon(1e-14));
      CHECK(normalized_kernel(s, z, w) < 1.0 - 1e-12);
      CHECK(normalized_kernel(s, z, z) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("expected zero density") {
  CHECK(ek_density(ModelSpace::fock(1), {2.0, 1.0}) == doctest::Approx(1.0 / kPi));
  CHECK(ek_density(ModelSpace::disc(), 0.0) == doctest::Approx(2.0 / kPi));
  CHECK(ek_density_fd(ModelSpace::disc(), 0.0) == doctest::Approx(2.0 / kPi).epsilon(1e-5));
  CHECK(std::abs(ek_density_fd(ModelSpace::fock(1), {0.3, 0.1}, 1e-3) - 1.0 / kPi) < 1e-5);

  // closed form vs finite differences on an interior grid
  for (double x = -0.6; x <= 0.6; x += 0.3)
    for (double y = -0.6; y <= 0.6; y += 0.3) {
      // second-order stencil error grows like (1-|z|^2)^{-6}; the disc grid stays in |z| <= 0.6
      if (std::hypot(x, y) <= 0.6 + 1e-12)
        CHECK(std::abs(ek_density_fd(ModelSpace::disc(), {x, y}) - ek_density(ModelSpace::disc(), {x, y})) < 1e-5);
      CHECK(std::abs(ek_density_fd(ModelSpace::fock(4), {x, y}) - ek_density(ModelSpace::fock(4), {x, y})) < 1e-5);
      CHECK(ek_density(ModelSpace::fock(4), {x, y}) == 4.0 / kPi);
    }

  // custom span of truncated Fock weights behaves like Fock near the origin
  std::vector<double> w;
  for (int k = 0; k < 60; ++k) w.push_back(std::exp(-0.5 * std::lgamma(k + 1.0)));
  const auto custom = ModelSpace::custom(w);
  CHECK(ek_density(custom, {0.2, 0.1}) == doctest::Approx(1.0 / kPi).epsilon(1e-5));

  const auto based = ModelSpace::custom({0.0, 1.0});
  CHECK(based.warnings().size() == 1);
  try {
    (void)ek_density(based, 0.0);
    FAIL("expected base-point error");
  } catch (const Error& e) {
    CHECK(e.reason() == "model.base_point");
  }
}

TEST_CASE("truncation_order") {
  CHECK(truncation_order(ModelSpace::fock(1), 1.0, 1.0).order == 0);

  // oracle: 200-term summation of e^{-1} sum_{k>N} 1/k!
  std::vector<double> t(201);
  for (int k = 0; k <= 200; ++k) t[k] = std::exp(-1.0 - std::lgamma(k + 1.0));
  int expected = -1;
  for (int n = 0; n < 200 && expected < 0; ++n) {
    double tail = 0.0;
    for (int k = 200; k > n; --k) tail += t[k];
    if (tail <= 1e-12) expected = n;
  }
  const auto c = truncation_order(ModelSpace::fock(1), 1.0, 1e-12);
  CHECK(c.order == expected);
  CHECK(c.order == 14);
  CHECK(c.tail_bound <= 1e-12);

  // disc: geometric tail oracle sum_{k>N} (k+1) 0.25^k / pi
  int dexp = -1;
  for (int n = 0; n < 200 && dexp < 0; ++n) {
    double tail = 0.0;
    for (int k = 400; k > n; --k) tail += (k + 1) * std::pow(0.25, k) / kPi;
    if (tail <= 1e-10) dexp = n;
  }
  CHECK(truncation_order(ModelSpace::disc(), 0.5, 1e-10).order == dexp);

  CHECK_THROWS_AS(truncation_order(ModelSpace::fock(1), 1.0, 0.0), Error);
  CHECK_THROWS_AS(truncation_order(ModelSpace::disc(), 1.0, 1e-3), Error);

  // certificate holds when checked by direct summation to a much higher order
  for (int p : {1, 3, 10}) {
    const auto cert = truncation_order(ModelSpace::fock(p), 1.5, 1e-12);
    const double full = kernel_diag(ModelSpace::fock(p), 1.5, KernelMode::truncated_at(cert.order * 4 + 50));
    const double part = kernel_diag(ModelSpace::fock(p), 1.5, KernelMode::truncated_at(cert.order));
    CHECK(full - part <= 1e-12 + 1e-14 * p);
    const auto back = certificate_for_order(ModelSpace::fock(p), cert.order, 1e-12);
    CHECK(back.radius >= 1.5);
  }
}

TEST_CASE("basis orthonormality by polar quadrature") {
  const int nk = 21, nth = 64, nr = 3000;
  for (const auto& space : {ModelSpace::fock(1), ModelSpace::disc()}) {
    const bool fock = space.kind() == ModelSpace::Kind::fock;
    const double rmax = fock ? 12.0 : 1.0;
    std::vector<std::vector<cplx>> gram(nk, std::vector<cplx>(nk, 0.0));
    // Simpson in r, trapezoid in theta (exact for the occurring trig polynomials)
    const double h = rmax / nr;
    for (int i = 0; i <= nr; ++i) {
      const double r = i * h;
      const double wr = h / 3.0 * (i == 0 || i == nr ? 1 : (i % 2 ? 4 : 2)) * r *
                        (fock ? std::exp(-r * r) / kPi : 1.0);
      for (int j = 0; j < nth; ++j) {
        const cplx z = std::polar(r, 2 * kPi * j / nth);
        std::vector<cplx> b(nk);
        for (int k = 0; k < nk; ++k) b[k] = basis_eval(space, k, z);
        for (int a = 0; a < nk; ++a)
          for (int c = 0; c < nk; ++c) gram[a][c] += wr * (2 * kPi / nth) * b[a] * std::conj(b[c]);
      }
    }
    for (int a = 0; a < nk; ++a)
      for (int c = 0; c < nk; ++c) CHECK(std::abs(gram[a][c] - (a == c ? 1.0 : 0.0)) < 1e-8);
  }
}

TEST_CASE("base locus is empty for the model spaces") {
  for (double rad : {0.0, 0.5, 0.95})
    for (int j = 0; j < 8; ++j) {
      const cplx z = std::polar(rad, j * 0.8);
      CHECK(kernel_diag(ModelSpace::disc(), z) > 0.0);
      CHECK(kernel_diag(ModelSpace::fock(2), z, KernelMode::truncated_at(0)) > 0.0);
    }
  CHECK(ModelSpace::fock(3).chern_density() == doctest::Approx(3 / kPi));
  CHECK(ModelSpace::fock(1).bundle_curvature() == doctest::Approx(2 * kPi));
}
