#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gaf/model.hpp"
#include "gaf/rng.hpp"
#include "gaf/section.hpp"

using namespace gaf;

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  std::set<std::uint64_t> all(va.begin(), va.end());
  all.insert(vc.begin(), vc.end());
  all.insert(vd.begin(), vd.end());
  CHECK(all.size() == 3 * 64);

  RngStream e = a.with_index(1);
  RngStream f(42, 1);
  CHECK(e.next_u64() == f.next_u64());
}

TEST_CASE("uniform_open0 never returns zero and stays in (0,1]") {
  RngStream s(1, 2);
  double mn = 1.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform_open0();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    mn = std::min(mn, u);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("complex Gaussian moments") {
  RngStream s(20240601, 5);
  const int n = 400000;
  cplx mean = 0.0, pseudo = 0.0;
  double second = 0.0, fourth = 0.0;
  std::vector<double> mod2(n);
  for (int i = 0; i < n; ++i) {
    const cplx g = s.complex_gaussian();
    mean += g;
    pseudo += g * g;
    const double m = std::norm(g);
    second += m;
    fourth += m * m;
    mod2[i] = m;
  }
  mean /= n;
  pseudo /= n;
  second /= n;
  fourth /= n;
  // E eta = 0 (Var of each part 1/2), E eta^2 = 0, E|eta|^2 = 1 (Var 1), E|eta|^4 = 2 (Var 20)
  const double se_part = std::sqrt(0.5 / n);
  CHECK(std::abs(mean.real()) < 3 * se_part);
  CHECK(std::abs(mean.imag()) < 3 * se_part);
  CHECK(std::abs(pseudo.real()) < 3 * std::sqrt(1.0 / n));
  CHECK(std::abs(pseudo.imag()) < 3 * std::sqrt(1.0 / n));
  CHECK(std::abs(second - 1.0) < 3 * std::sqrt(1.0 / n));
  CHECK(std::abs(fourth - 2.0) < 3 * std::sqrt(20.0 / n));

  // Kolmogorov-Smirnov against Exp(1); 1.63/sqrt(n) is the 1% critical value
  std::sort(mod2.begin(), mod2.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-mod2[i]);
    ks = std::max({ks, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("phase is uniform") {
  RngStream s(99, 0);
  const int n = 200000, bins = 16;
  std::vector<int> h(bins, 0);
  for (int i = 0; i < n; ++i) {
    const double a = std::arg(s.complex_gaussian()) + kPi;
    h[std::min(bins - 1, static_cast<int>(a / (2 * kPi) * bins))]++;
  }
  double chi2 = 0.0;
  const double e = double(n) / bins;
  for (int c : h) chi2 += (c - e) * (c - e) / e;
  // chi^2 with 15 dof: 99.9% quantile 37.7
  CHECK(chi2 < 37.7);
}

TEST_CASE("sample_section draws coefficients in ascending order") {
  const auto space = ModelSpace::fock(3);
  const auto cert = truncation_order(space, 1.0, 1e-10);
  RngStream s(7, 11), ref(7, 11);
  const auto sample = sample_section(space, cert, s);
  REQUIRE(sample.order() == cert.order);
  for (int k = 0; k <= cert.order; ++k) CHECK(sample.coefficients[k] == ref.complex_gaussian());
  CHECK(sample.provenance.seed == 7);
  CHECK(sample.provenance.stream == 11);

  RngStream again(7, 11);
  const auto twin = sample_section(space, cert, again);
  CHECK(twin.coefficients == sample.coefficients);
}

TEST_CASE("eval_section agrees with direct summation") {
  const auto space = ModelSpace::fock(2);
  const auto cert = truncation_order(space, 1.2, 1e-12);
  RngStream s(3, 4);
  const auto sample = sample_section(space, cert, s);
  for (double rad : {0.0, 0.4, 1.1}) {
    const cplx z = std::polar(rad, 0.7);
    cplx direct = 0.0;
    for (int k = 0; k <= sample.order(); ++k) direct += sample.coefficients[k] * basis_eval(space, k, z);
    const SectionValue v = eval_section(sample, z);
    CHECK(std::abs(v.frame_value - direct) < 1e-12 * std::max(1.0, std::abs(direct)));
    CHECK(v.metric_norm == doctest::Approx(std::abs(direct) * std::exp(-space.weight_exponent(z))).epsilon(1e-12));
    CHECK_FALSE(v.outside_certificate);
  }
  CHECK(eval_section(sample, 1.3).outside_certificate);
}

TEST_CASE("section covariance matches the truncated kernel") {
  const auto space = ModelSpace::fock(2);
  const auto cert = truncation_order(space, 1.0, 1e-12);
  const cplx z(0.3, 0.1), w(-0.2, 0.4);
  cplx kzw = 0.0;
  double kzz = 0.0;
  for (int k = 0; k <= cert.order; ++k) {
    kzw += basis_eval(space, k, z) * std::conj(basis_eval(space, k, w));
    kzz += std::norm(basis_eval(space, k, z));
  }
  const int n = 40000;
  cplx acc = 0.0;
  double acc2 = 0.0, acc_zz = 0.0, acc_zz2 = 0.0;
  for (int i = 0; i < n; ++i) {
    RngStream s(555, i);
    const auto sample = sample_section(space, cert, s);
    const cplx a = eval_section(sample, z).frame_value, b = eval_section(sample, w).frame_value;
    const cplx prod = a * std::conj(b);
    acc += prod;
    acc2 += std::norm(prod);
    acc_zz += std::norm(a);
    acc_zz2 += std::norm(a) * std::norm(a);
  }
  acc /= n;
  acc_zz /= n;
  const double se = std::sqrt(acc2 / n / n);
  const double se_zz = std::sqrt((acc_zz2 / n - acc_zz * acc_zz) / n);
  CHECK(std::abs(acc - kzw) < 3 * se);
  CHECK(std::abs(acc_zz - kzz) < 3 * se_zz);
}
