#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gaf/error.hpp"
#include "gaf/quadrature.hpp"
#include "gaf/toeplitz.hpp"

using namespace gaf;

namespace {

// Simpson oracle for int_0^b h(s) ds.
template <class F>
double simpson(F h, double a, double b, int n = 200000) {
  const double dx = (b - a) / n;
  double s = h(a) + h(b);
  for (int i = 1; i < n; ++i) s += h(a + i * dx) * (i % 2 ? 4 : 2);
  return s * dx / 3.0;
}

double lambda_gauss(int p, int a) { return std::pow(double(p) / (p + 1), a + 1); }
double lambda_r2(int p, int a) { return (a + 1) * std::pow(double(p), a + 1) / std::pow(p + 1.0, a + 2); }

}  // namespace

TEST_CASE("Gauss-Legendre rules") {
  const auto& g = gauss_legendre(20);
  for (int k = 0; k < 40; ++k) {
    double s = 0.0;
    for (int i = 0; i < 20; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
    CHECK(s == doctest::Approx(k % 2 ? 0.0 : 2.0 / (k + 1)).epsilon(1e-14));
  }
  const QuadResult r = integrate([](double x) { return std::exp(-x); }, 0.0, 50.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 - std::exp(-50.0)).epsilon(1e-13));
  const QuadResult kink = integrate([](double x) { return std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, {0.3});
  CHECK(kink.value == doctest::Approx(2.0 / 3.0 * (std::pow(0.3, 1.5) + std::pow(0.7, 1.5))).epsilon(1e-10));
}

TEST_CASE("Hermitian Jacobi") {
  SUBCASE("2x2 closed form") {
    const double a = 1.3, c = -0.4;
    const cplx b(0.7, -0.2);
    const auto e = hermitian_eig({a, b, std::conj(b), c}, 2);
    const double disc = std::sqrt((a - c) * (a - c) + 4 * std::norm(b));
    CHECK(e.values[0] == doctest::Approx((a + c + disc) / 2).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx((a + c - disc) / 2).epsilon(1e-14));
  }
  SUBCASE("diagonal input is sorted") {
    const auto e = hermitian_eig({0.1, 0, 0, 0, 0.5, 0, 0, 0, 0.3}, 3);
    CHECK(e.sweeps == 0);
    CHECK(e.values == std::vector<double>{0.5, 0.3, 0.1});
    CHECK(std::abs(e.vector(1, 0)) == 1.0);
  }
  SUBCASE("random reconstruction and orthonormality") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> g;
    for (int n : {5, 17, 40}) {
      std::vector<cplx> a(n * n);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const cplx x = i == j ? cplx(g(gen), 0) : cplx(g(gen), g(gen));
          a[i * n + j] = x;
          a[j * n + i] = std::conj(x);
        }
      const auto e = hermitian_eig(a, n);
      double fro = 0.0, rec = 0.0, orth = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cplx s = 0.0, o = 0.0;
          for (int k = 0; k < n; ++k) {
            s += e.vector(i, k) * e.values[k] * std::conj(e.vector(j, k));
            o += std::conj(e.vector(k, i)) * e.vector(k, j);
          }
          rec += std::norm(s - a[i * n + j]);
          fro += std::norm(a[i * n + j]);
          orth = std::max(orth, std::abs(o - (i == j ? 1.0 : 0.0)));
        }
      CHECK(std::sqrt(rec) <= 1e-10 * std::sqrt(fro));
      CHECK(orth <= 1e-10);
      for (int k = 1; k < n; ++k) CHECK(e.values[k - 1] >= e.values[k]);
    }
  }
  CHECK_THROWS_AS(hermitian_eig({1.0, 2.0}, 2), Error);
}

TEST_CASE("symbol jets") {
  for (const auto& f : {SymbolDescriptor::gaussian(), SymbolDescriptor::r2_gaussian(),
                        SymbolDescriptor::laguerre_gaussian(), SymbolDescriptor::gaussian(2.5)}) {
    for (cplx z : {cplx(0, 0), cplx(0.4, -0.3), cplx(-1.1, 0.2)}) {
      const Jet a = f.jet(z), n = f.jet_fd(z);
      CHECK(std::abs(a.fz - n.fz) < 1e-8);
      CHECK(std::abs(a.fzz - n.fzz) < 1e-7);
      CHECK(std::abs(a.fzzbar - n.fzzbar) < 1e-7);
      CHECK(std::abs(a.fzzzbar - n.fzzzbar) < 1e-5);
      CHECK(std::abs(a.fzzzbarzbar - n.fzzzbarzbar) < 1e-5);
    }
  }
  // f = x e^{-|z|^2}: f_z = e^{-s}(1/2 - x zbar)
  const auto re = SymbolDescriptor::re_gaussian();
  const cplx z(0.3, 0.5);
  const cplx fz = std::exp(-std::norm(z)) * (0.5 - z.real() * std::conj(z));
  CHECK(std::abs(re.jet(z).fz - fz) < 1e-8);
  CHECK(re.jet(0.0).fzzbar == doctest::Approx(0.0).epsilon(1e-8));

  const auto r2 = SymbolDescriptor::r2_gaussian().jet(0.0);
  CHECK(r2.fzzbar == 1.0);
  CHECK(std::abs(r2.fzz) == 0.0);
  CHECK(r2.fzzzbarzbar == doctest::Approx(-4.0));

  CHECK(SymbolDescriptor::from_json({{"name", "gaussian"}, {"a", 2.0}})(1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(SymbolDescriptor::from_json("r2_gaussian").name() == "r2_gaussian");
  try {
    SymbolDescriptor::from_json({{"name", "gaussian"}, {"b", 2.0}});
    FAIL("expected unknown key");
  } catch (const Error& e) {
    CHECK(e.reason() == "config.unknown_key");
  }
}

TEST_CASE("closed-form eigenvalue oracles agree with radial integrals") {
  for (int p : {1, 5}) {
    for (int a : {0, 3, 10}) {
      const double lg = std::lgamma(a + 1.0);
      auto gauss = [&](double s) {
        return s <= 0 ? (a == 0 ? p * 1.0 : 0.0) : std::exp((a + 1) * std::log(p) + a * std::log(s) - lg - (p + 1) * s);
      };
      auto r2 = [&](double s) { return s * gauss(s); };
      CHECK(simpson(gauss, 0.0, 60.0) == doctest::Approx(lambda_gauss(p, a)).epsilon(1e-9));
      CHECK(simpson(r2, 0.0, 60.0) == doctest::Approx(lambda_r2(p, a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("radial Toeplitz eigenvalues") {
  const auto op = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 20);
  CHECK(op.diagnostics().path == "radial");
  for (int a = 0; a <= 20; ++a) {
    CHECK(std::abs(op.entry(a, a).real() - std::pow(2.0, -(a + 1))) <= 1e-12);
    if (a > 0) CHECK(op.entry(a, a - 1) == cplx(0.0));
  }
  for (int p : {1, 5, 25}) {
    const auto t = build_toeplitz(ModelSpace::fock(p), SymbolDescriptor::r2_gaussian(), 30);
    for (int a = 0; a <= 30; ++a) CHECK(std::abs(t.entry(a, a).real() - lambda_r2(p, a)) <= 1e-12);
  }
  // disc: int_0^1 e^{-s} (a+1) s^a ds
  const auto d = build_toeplitz(ModelSpace::disc(), SymbolDescriptor::gaussian(), 12);
  for (int a : {0, 5, 12}) {
    const double oracle = simpson([a](double s) { return std::exp(-s) * (a + 1) * std::pow(s, a); }, 0.0, 1.0, 20000);
    CHECK(d.entry(a, a).real() == doctest::Approx(oracle).epsilon(1e-11));
  }
  const auto id = build_toeplitz(ModelSpace::fock(3), SymbolDescriptor::constant(1.0), 10);
  for (int j = 0; j <= 10; ++j)
    for (int k = 0; k <= 10; ++k) CHECK(id.entry(j, k) == cplx(j == k ? 1.0 : 0.0));
  CHECK_THROWS_AS(build_toeplitz(ModelSpace::custom({1.0}), SymbolDescriptor::gaussian(), 0), Error);
  CHECK_THROWS_AS(build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 513), Error);
}

TEST_CASE("tensor quadrature path reproduces the radial oracle") {
  const auto g = SymbolDescriptor::general(
      "gaussian_via_tensor", [](cplx z) { return std::exp(-std::norm(z)); }, std::sqrt(40.0), std::exp(-40.0), 1.0, true);
  const auto op = build_toeplitz(ModelSpace::fock(1), g, 20);
  CHECK(op.diagnostics().path == "tensor");
  for (int j = 0; j <= 20; ++j)
    for (int k = 0; k <= 20; ++k) {
      const double expect = j == k ? std::pow(2.0, -(j + 1)) : 0.0;
      CHECK(std::abs(op.entry(j, k) - expect) <= 1e-10);
    }
  // shifted Gaussian: T[j,k] for Fock p=1 has the closed form via the Bargmann transform;
  // the oracle here is Hermitian structure, positivity and the trace identity
  auto sh = build_toeplitz(ModelSpace::fock(2), SymbolDescriptor::shifted_gaussian({0.5, -0.2}), 30);
  CHECK(hermitian_defect(sh.matrix(), sh.size()) <= 1e-12);
  spectrum(sh);
  CHECK(sh.eigenvalues().back() >= -1e-10);
  const auto th = trace_and_hs(sh);
  // p int e^{-|z-c|^2} dA/pi = p
  CHECK(th.independent_trace == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("trace and Hilbert-Schmidt identities") {
  const int N = 40;
  const auto op = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::gaussian(), N);
  const auto th = trace_and_hs(op);
  CHECK(th.trace == doctest::Approx(1.0 - std::pow(2.0, -(N + 1))).epsilon(1e-13));
  CHECK(std::abs(th.independent_trace - 1.0) < 1e-12);
  CHECK(std::abs(th.trace - th.independent_trace) <= 1e-8);
  CHECK(th.hs_norm * th.hs_norm == doctest::Approx((1.0 - std::pow(4.0, -(N + 1))) / 3.0).epsilon(1e-13));

  for (int p : {1, 3, 7}) {
    const auto r2 = build_toeplitz(ModelSpace::fock(p), SymbolDescriptor::r2_gaussian(), 320);
    const auto t = trace_and_hs(r2);
    CHECK(t.independent_trace == doctest::Approx(double(p)).epsilon(1e-11));
    CHECK(std::abs(t.trace - t.independent_trace) <= 1e-8);
  }
  const auto zero = trace_and_hs(build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::constant(0.0), 5));
  CHECK(zero.trace == 0.0);
  CHECK(zero.hs_norm == 0.0);
  CHECK(zero.independent_trace == 0.0);
}

TEST_CASE("T^2 diagonal and gamma_f density") {
  for (int p : {1, 4, 10}) {
    auto g = build_toeplitz(ModelSpace::fock(p), SymbolDescriptor::gaussian(), 60);
    auto r2 = build_toeplitz(ModelSpace::fock(p), SymbolDescriptor::r2_gaussian(), 60);
    spectrum(g);
    spectrum(r2);
    CHECK(t2_diag(g, 0.0) == doctest::Approx(std::pow(p, 3) / std::pow(p + 1.0, 2)).epsilon(1e-12));
    CHECK(t2_diag(r2, 0.0) == doctest::Approx(std::pow(p, 3) / std::pow(p + 1.0, 4)).epsilon(1e-12));
    // T^2 frame sum is proportional to exp(p^3 s/(p+1)^2): density p^3/(pi (p+1)^2)
    const double dens = std::pow(p, 3) / (kPi * std::pow(p + 1.0, 2));
    CHECK(std::abs(gamma_f_density(g, {0.3, 0.2}) - dens) < 1e-5);
    for (int a = 0; a < 6; ++a)
      CHECK(std::abs(gamma_f_density(r2, std::polar(0.5, a * 1.1)) - gamma_f_density(r2, 0.5)) < 1e-8);
  }
  // f = 1: weight and Chern terms cancel, density is p/pi
  auto one = build_toeplitz(ModelSpace::fock(6), SymbolDescriptor::constant(1.0), 80);
  spectrum(one);
  CHECK(std::abs(gamma_f_density(one, {0.3, -0.1}) - 6.0 / kPi) < 1e-5);
  CHECK(t2_diag(one, 0.4) == doctest::Approx(kernel_diag(ModelSpace::fock(6), 0.4, KernelMode::truncated_at(80))));

  const auto nospec = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 5);
  CHECK_THROWS_AS(t2_diag(nospec, 0.0), Error);
}

TEST_CASE("Wiener sections") {
  auto one = build_toeplitz(ModelSpace::fock(2), SymbolDescriptor::constant(1.0), 12);
  spectrum(one);
  RngStream a(5, 9), b(5, 9);
  const auto w = sample_wiener_section(one, a);
  const auto s = sample_section(ModelSpace::fock(2), one.certificate(), b);
  CHECK(w.coefficients == s.coefficients);

  auto op = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::shifted_gaussian({0.4, 0.1}), 16);
  spectrum(op);
  const int n = op.size(), draws = 20000;
  // (T^2)_{kk} oracle from the matrix itself
  std::vector<double> t2(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) t2[k] += std::norm(op.entry(k, j));
  std::vector<double> m1(n, 0.0), m2(n, 0.0);
  const double hs2 = trace_and_hs(op).hs_norm * trace_and_hs(op).hs_norm;
  for (int i = 0; i < draws; ++i) {
    RngStream st(77, i);
    const auto ws = sample_wiener_section(op, st);
    double l2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double v = std::norm(ws.coefficients[k]);
      m1[k] += v;
      m2[k] += v * v;
      l2 += v;
    }
    if (i < 1000) CHECK(l2 <= 10.0 * hs2);
  }
  for (int k = 0; k <= 10; ++k) {
    const double mean = m1[k] / draws, var = m2[k] / draws - mean * mean;
    CHECK(std::abs(mean - t2[k]) <= 3.0 * std::sqrt(var / draws));
  }
}

TEST_CASE("kernel split") {
  const auto pos = kernel_split(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 15);
  CHECK(pos.null_rank == 0);
  CHECK(pos.sandwich_ok);
  CHECK(pos.p_ker(0.3) == 0.0);

  const auto odd = kernel_split(ModelSpace::fock(1), SymbolDescriptor::re_gaussian(), 8);
  const auto th = trace_and_hs(*odd.op);
  CHECK(std::abs(th.trace) < 1e-12);
  CHECK(std::abs(th.independent_trace) < 1e-12);
  const auto& ev = odd.op->eigenvalues();
  for (int j = 0; j < odd.op->size(); ++j) CHECK(std::abs(ev[j] + ev[odd.op->size() - 1 - j]) < 1e-12);
  CHECK(odd.null_rank == 1);
  CHECK(odd.sandwich_ok);

  const auto one = kernel_split(ModelSpace::fock(3), SymbolDescriptor::constant(1.0), 60);
  CHECK(one.null_rank == 0);
  CHECK(std::abs(one.combined_density({0.2, 0.1}) - ek_density(ModelSpace::fock(3), 0.0)) < 1e-5);

  CHECK_THROWS_AS(kernel_split(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 40), Error);
}

TEST_CASE("truncation stability of the leading spectrum") {
  auto a = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::shifted_gaussian({0.3, 0.0}), 20);
  auto b = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::shifted_gaussian({0.3, 0.0}), 40);
  spectrum(a);
  spectrum(b);
  for (int j = 0; j <= 10; ++j) CHECK(std::abs(a.eigenvalues()[j] - b.eigenvalues()[j]) <= 1e-8);
}

TEST_CASE("operator JSON") {
  auto op = build_toeplitz(ModelSpace::fock(1), SymbolDescriptor::gaussian(), 3);
  spectrum(op);
  const auto j = to_json(op);
  CHECK(j["matrix"].size() == 16);
  CHECK(j["spectrum"]["eigenvalues"][0].get<double>() == doctest::Approx(0.5));
  CHECK(j["quadrature"]["path"] == "radial");
  CHECK(j["symbol"]["name"] == "gaussian");
}
