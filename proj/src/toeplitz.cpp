#include "gaf/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gaf/error.hpp"
#include "gaf/fft.hpp"
#include "gaf/quadrature.hpp"

namespace gaf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_model(const ModelSpace& space) {
  if (space.kind() == ModelSpace::Kind::custom)
    throw argument_error("toeplitz.space", "Toeplitz operators need a Fock or Disc model (no measure on a custom span)");
}

[[noreturn]] void quadrature_fail(const std::string& what, const QuadResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": estimate " << r.value << ", error bound " << r.error;
  throw numeric_error("toeplitz.quadrature_fail", os.str());
}

// Upper end (in s = r^2) beyond which the index-alpha Gamma density has mass below e^{-40}.
double fock_s_upper(int p, int alpha) {
  const double a = alpha + 1.0;
  return (a + 14.0 * std::sqrt(a) + 60.0) / p;
}

// lambda_alpha = int g(s) rho_alpha(s) ds, with rho_alpha the radial law of |S_alpha|^2
// (Gamma(alpha+1, p) for Fock, Beta(alpha+1, 1) for the disc).
double radial_eigenvalue(const ModelSpace& space, const SymbolDescriptor& f, int alpha) {
  const bool compact = f.tail_bound() == 0.0 && std::isfinite(f.support_radius());
  const double s_support = compact ? f.support_radius() * f.support_radius() : kInf;
  std::vector<double> cuts;
  std::function<double(double)> integrand;
  double hi;
  if (space.kind() == ModelSpace::Kind::fock) {
    const int p = space.level();
    hi = std::min(fock_s_upper(p, alpha), s_support);
    const double mean = (alpha + 1.0) / p, sd = std::sqrt(alpha + 1.0) / p;
    for (int k = -6; k <= 6; ++k) cuts.push_back(mean + k * sd);
    const double lognorm = (alpha + 1.0) * std::log(static_cast<double>(p)) - std::lgamma(alpha + 1.0);
    integrand = [&f, p, alpha, lognorm](double s) {
      if (s <= 0.0) return alpha == 0 ? f.profile(0.0) * p : 0.0;
      const double l = lognorm + alpha * std::log(s) - p * s;
      return l < -700.0 ? 0.0 : f.profile(s) * std::exp(l);
    };
  } else {
    hi = std::min(1.0, s_support);
    for (int k = 1; k <= 8; ++k) cuts.push_back(1.0 - k / (alpha + 1.0));
    integrand = [&f, alpha](double s) {
      if (s <= 0.0) return alpha == 0 ? f.profile(0.0) : 0.0;
      const double l = std::log(alpha + 1.0) + alpha * std::log(s);
      return l < -700.0 ? 0.0 : f.profile(s) * std::exp(l);
    };
  }
  if (compact) cuts.push_back(s_support);
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_floor = 1e-300;
  opt.max_depth = 50;
  const QuadResult r = integrate(integrand, 0.0, hi, cuts, opt);
  if (!r.converged && r.error > 1e-10 * std::max(std::abs(r.value), 1e-300))
    quadrature_fail("radial eigenvalue " + std::to_string(alpha), r);
  return r.value;
}

// Frame coefficient magnitudes times the square root of the weight, c_j r^j e^{-phi(r)}.
void weighted_radial_basis(const ModelSpace& space, int size, double r, std::vector<double>& e) {
  e.resize(size);
  const double phi = space.weight_exponent(r);
  const double lr = r > 0.0 ? std::log(r) : kNegInf;
  for (int j = 0; j < size; ++j) {
    const double lc = space.log_coeff(j);
    if (j == 0) e[j] = std::exp(lc - phi);
    else e[j] = r > 0.0 ? std::exp(lc + j * lr - phi) : 0.0;
  }
}

std::vector<cplx> tensor_matrix(const ModelSpace& space, const SymbolDescriptor& f, int size, int panels,
                                double r_hi, int m_theta) {
  const GaussRule rule = composite_rule(0.0, r_hi, panels);
  const double meas = space.kind() == ModelSpace::Kind::fock ? 1.0 / kPi : 1.0;
  std::vector<cplx> t(static_cast<std::size_t>(size) * size, 0.0);
  std::vector<cplx> samples(m_theta), modes;
  std::vector<double> e;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double r = rule.nodes[i];
    for (int l = 0; l < m_theta; ++l) samples[l] = f(std::polar(r, 2.0 * kPi * l / m_theta));
    fft_backward(m_theta, samples, modes);
    weighted_radial_basis(space, size, r, e);
    const double w = rule.weights[i] * meas * r * (2.0 * kPi / m_theta);
    for (int j = 0; j < size; ++j) {
      if (e[j] == 0.0) continue;
      for (int k = 0; k < size; ++k) {
        const int m = ((k - j) % m_theta + m_theta) % m_theta;
        t[static_cast<std::size_t>(j) * size + k] += w * e[j] * e[k] * modes[m];
      }
    }
  }
  return t;
}

double density_from_log(const std::function<double(cplx)>& logk, cplx z, double h) {
  auto checked = [&](cplx w) {
    const double v = logk(w);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "kernel sum vanishes near " << w;
      throw numeric_error("toeplitz.base_locus_near", os.str());
    }
    return v;
  };
  // one Richardson step removes the anisotropic h^2 term of the stencil
  const double coarse = laplacian5(checked, z, h), fine = laplacian5(checked, z, h / 2);
  return (4.0 * fine - coarse) / 3.0 / (4.0 * kPi);
}

void require_spectrum(const ToeplitzOperator& op) {
  if (!op.has_spectrum()) throw argument_error("toeplitz.no_spectrum", "spectrum(op) has not been computed");
}

}  // namespace

double log_weighted_frame(const ToeplitzOperator& op, const std::vector<double>& weights, cplx z) {
  const int n = op.size();
  std::vector<double> la(n);
  std::vector<double> ph(n);
  double m = kNegInf;
  for (int k = 0; k < n; ++k) {
    const LogValue v = basis_log_eval(op.space(), k, z);
    la[k] = v.log_abs;
    ph[k] = v.phase;
    m = std::max(m, la[k]);
  }
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  if (!op.unit_vectors_.empty()) {
    for (int j = 0; j < n; ++j) {
      const int k = op.unit_vectors_[j];
      if (weights[j] != 0.0 && la[k] != kNegInf) s += weights[j] * std::exp(2.0 * (la[k] - m));
    }
    return s > 0.0 ? 2.0 * m + std::log(s) : kNegInf;
  }
  std::vector<cplx> b(n);
  for (int k = 0; k < n; ++k) b[k] = la[k] == kNegInf ? cplx(0.0) : std::polar(std::exp(la[k] - m), ph[k]);
  for (int j = 0; j < n; ++j) {
    if (weights[j] == 0.0) continue;
    cplx g = 0.0;
    for (int k = 0; k < n; ++k) g += op.eigenvector(k, j) * b[k];
    s += weights[j] * std::norm(g);
  }
  if (!(s > 0.0)) return kNegInf;
  return 2.0 * m + std::log(s);
}

ToeplitzOperator::ToeplitzOperator(ModelSpace space, SymbolDescriptor symbol, int size)
    : space_(std::move(space)), symbol_(std::move(symbol)), size_(size) {}

const std::vector<double>& ToeplitzOperator::eigenvalues() const {
  require_spectrum(*this);
  return eig_.values;
}

cplx ToeplitzOperator::eigenvector(int k, int j) const { return eig_.vectors[static_cast<std::size_t>(k) * size_ + j]; }

const HermitianEig& ToeplitzOperator::eigen() const {
  require_spectrum(*this);
  return eig_;
}

ToeplitzOperator build_toeplitz(const ModelSpace& space, const SymbolDescriptor& f, int N) {
  require_model(space);
  if (N < 0 || N > 512) throw argument_error("toeplitz.argument", "truncation N must be in [0, 512]");
  ToeplitzOperator op(space, f, N + 1);
  const int n = N + 1;
  op.certificate_ = certificate_for_order(space, N, 1e-12);
  op.matrix_.assign(static_cast<std::size_t>(n) * n, 0.0);

  if (f.is_constant()) {
    for (int j = 0; j < n; ++j) op.matrix_[static_cast<std::size_t>(j) * n + j] = f.constant_value();
    op.diag_.path = "constant";
    return op;
  }

  if (f.is_radial()) {
    for (int a = 0; a < n; ++a) op.matrix_[static_cast<std::size_t>(a) * n + a] = radial_eigenvalue(space, f, a);
    op.diag_.path = "radial";
    op.diag_.angular_nodes = 0;
    return op;
  }

  const int m_theta = 4 * n;
  double r_hi;
  if (space.kind() == ModelSpace::Kind::fock) r_hi = std::sqrt(fock_s_upper(space.level(), N));
  else r_hi = 1.0;
  if (std::isfinite(f.support_radius())) {
    const double margin = space.kind() == ModelSpace::Kind::fock ? 3.0 / std::sqrt(space.level()) : 0.05;
    r_hi = std::min(r_hi, f.support_radius() + margin);
  }

  std::vector<cplx> prev = tensor_matrix(space, f, n, 8, r_hi, m_theta);
  int panels = 8;
  double change = kInf;
  while (true) {
    panels *= 2;
    std::vector<cplx> cur = tensor_matrix(space, f, n, panels, r_hi, m_theta);
    double scale = 0.0;
    change = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      scale = std::max(scale, std::abs(cur[i]));
      change = std::max(change, std::abs(cur[i] - prev[i]));
    }
    prev.swap(cur);
    if (change <= 1e-10 * std::max(scale, 1e-300)) break;
    if (panels >= 2048) {
      QuadResult r;
      r.value = scale;
      r.error = change;
      quadrature_fail("tensor quadrature did not settle", r);
    }
  }
  // exact Hermitian symmetrization; the defect is a quadrature diagnostic
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      const cplx a = prev[static_cast<std::size_t>(j) * n + k], b = prev[static_cast<std::size_t>(k) * n + j];
      const cplx h = 0.5 * (a + std::conj(b));
      op.matrix_[static_cast<std::size_t>(j) * n + k] = h;
      op.matrix_[static_cast<std::size_t>(k) * n + j] = std::conj(h);
    }
  for (int j = 0; j < n; ++j) {
    cplx& d = op.matrix_[static_cast<std::size_t>(j) * n + j];
    d = d.real();
  }
  op.diag_.path = "tensor";
  op.diag_.radial_nodes = panels * 20;
  op.diag_.angular_nodes = m_theta;
  op.diag_.error_estimate = change;
  op.diag_.upper_radius = r_hi;
  return op;
}

double integrate_against_kernel(const ModelSpace& space, const SymbolDescriptor& f) {
  require_model(space);
  const bool fock = space.kind() == ModelSpace::Kind::fock;
  const bool compact = f.tail_bound() == 0.0;
  double hi = f.support_radius();
  if (fock && !std::isfinite(hi)) return f.is_constant() && f.constant_value() == 0.0 ? 0.0 : kInf;
  if (!fock) {
    if (hi >= 1.0 && !(compact && hi <= 1.0)) return f.is_constant() && f.constant_value() == 0.0 ? 0.0 : kInf;
    hi = std::min(hi, 1.0);
  }
  auto angular = [&f](double r) {
    if (f.is_radial()) return 2.0 * kPi * f.profile(r * r);
    double prev = kInf;
    for (int m = 64; m <= 8192; m *= 2) {
      double s = 0.0;
      for (int l = 0; l < m; ++l) s += f(std::polar(r, 2.0 * kPi * l / m));
      s *= 2.0 * kPi / m;
      if (std::abs(s - prev) <= 1e-14 * std::max(std::abs(s), 1e-300)) return s;
      prev = s;
    }
    return prev;
  };
  std::function<double(double)> integrand;
  if (fock) {
    const double p = space.level();
    integrand = [&, p](double r) { return angular(r) * r * p / kPi; };
  } else {
    integrand = [&](double r) { return angular(r) * r / (kPi * (1.0 - r * r) * (1.0 - r * r)); };
  }
  std::vector<double> cuts;
  for (int k = 1; k < 16; ++k) cuts.push_back(hi * k / 16.0);
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_floor = 1e-15;
  const QuadResult r = integrate(integrand, 0.0, hi, cuts, opt);
  if (!r.converged) quadrature_fail("trace integral", r);
  return r.value;
}

TraceHs trace_and_hs(const ToeplitzOperator& op) {
  TraceHs out;
  double hs = 0.0;
  for (int j = 0; j < op.size(); ++j) {
    out.trace += op.entry(j, j).real();
    for (int k = 0; k < op.size(); ++k) hs += std::norm(op.entry(j, k));
  }
  out.hs_norm = std::sqrt(hs);
  out.independent_trace = integrate_against_kernel(op.space(), op.symbol());
  return out;
}

void spectrum(ToeplitzOperator& op) {
  op.eig_ = hermitian_eig(op.matrix_, op.size_, 1e-12, 100);
  // diagonal operators (radial and constant symbols) keep unit eigenvectors
  op.unit_vectors_.assign(op.size_, -1);
  for (int j = 0; j < op.size_ && !op.unit_vectors_.empty(); ++j)
    for (int k = 0; k < op.size_; ++k) {
      const cplx v = op.eigenvector(k, j);
      if (v == cplx(0.0)) continue;
      if (op.unit_vectors_[j] >= 0 || std::abs(std::abs(v) - 1.0) > 0.0) {
        op.unit_vectors_.clear();
        break;
      }
      op.unit_vectors_[j] = k;
    }
  if (op.symbol_.nonnegative()) {
    for (double& v : op.eig_.values) {
      if (v >= 0.0) continue;
      std::ostringstream os;
      os.precision(3);
      if (v >= -1e-10) {
        os << "clamped eigenvalue " << v << " to 0 for a nonnegative symbol";
        v = 0.0;
      } else {
        os << "eigenvalue " << v << " below -1e-10 for a nonnegative symbol";
      }
      op.warnings_.push_back(os.str());
    }
  }
}

double log_t2_frame(const ToeplitzOperator& op, cplx z) {
  require_spectrum(op);
  std::vector<double> w(op.size());
  for (int j = 0; j < op.size(); ++j) w[j] = op.eigenvalues()[j] * op.eigenvalues()[j];
  return log_weighted_frame(op, w, z);
}

double t2_diag(const ToeplitzOperator& op, cplx z) {
  const double l = log_t2_frame(op, z);
  if (l == kNegInf) return 0.0;
  return std::exp(l - 2.0 * op.space().weight_exponent(z));
}

double gamma_f_density(const ToeplitzOperator& op, cplx z, double fd_step) {
  require_spectrum(op);
  return density_from_log([&op](cplx w) { return log_t2_frame(op, w); }, z, fd_step);
}

SectionSample sample_wiener_section(const ToeplitzOperator& op, RngStream& stream) {
  require_spectrum(op);
  const int n = op.size();
  std::vector<cplx> eta(n);
  for (int j = 0; j < n; ++j) eta[j] = stream.complex_gaussian() * op.eigenvalues()[j];
  std::vector<cplx> c(n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) c[k] += op.eigenvector(k, j) * eta[j];
  return section_from_coefficients(op.space(), std::move(c), op.certificate(),
                                   {stream.master_seed(), stream.stream_index()});
}

double KernelSplit::log_combined_frame(cplx z) const {
  std::vector<double> w(op->size());
  for (int j = 0; j < op->size(); ++j) w[j] = op->eigenvalues()[j] * op->eigenvalues()[j];
  for (int j : null_indices) w[j] += 1.0;
  return log_weighted_frame(*op, w, z);
}

double KernelSplit::p_ker(cplx z) const {
  std::vector<double> w(op->size(), 0.0);
  for (int j : null_indices) w[j] = 1.0;
  const double l = log_weighted_frame(*op, w, z);
  if (l == kNegInf) return 0.0;
  return std::exp(l - 2.0 * op->space().weight_exponent(z));
}

double KernelSplit::combined_density(cplx z, double fd_step) const {
  return density_from_log([this](cplx w) { return log_combined_frame(w); }, z, fd_step);
}

KernelSplit kernel_split(const ModelSpace& space, const SymbolDescriptor& f, int N, double eps_null) {
  auto op = std::make_shared<ToeplitzOperator>(build_toeplitz(space, f, N));
  spectrum(*op);
  KernelSplit ks;
  double lmax = 0.0;
  for (double v : op->eigenvalues()) lmax = std::max(lmax, std::abs(v));
  ks.eps_null = eps_null > 0.0 ? eps_null : 1e-8 * lmax;
  double below = -1.0, above = kInf;
  for (int j = 0; j < op->size(); ++j) {
    const double a = std::abs(op->eigenvalues()[j]);
    if (a <= ks.eps_null) {
      ks.null_indices.push_back(j);
      below = std::max(below, a);
    } else {
      above = std::min(above, a);
    }
  }
  ks.null_rank = static_cast<int>(ks.null_indices.size());
  if (!std::isfinite(above)) ks.gap_ratio = kInf;
  else if (below < 0.0) ks.gap_ratio = above / ks.eps_null;
  else ks.gap_ratio = below > 0.0 ? above / below : kInf;
  if (ks.gap_ratio < 10.0) {
    std::ostringstream os;
    os << "no spectral gap around eps_null = " << ks.eps_null << " (ratio " << ks.gap_ratio << ")";
    throw numeric_error("toeplitz.split_ambiguous", os.str());
  }
  ks.op = op;

  // T^2 <= T^2 + P_ker <= max(sup f^2, 1) P_N pointwise
  const double bound = std::max(f.sup_bound() * f.sup_bound(), 1.0);
  const double rmax = space.kind() == ModelSpace::Kind::fock ? 0.9 * op->certificate().radius : 0.9;
  ks.sandwich_worst = -kInf;
  for (int i = 0; i <= 8; ++i)
    for (int a = 0; a < 12; ++a) {
      const cplx z = std::polar(rmax * i / 8.0, 2.0 * kPi * a / 12.0);
      const double t2 = t2_diag(*op, z);
      const double both = std::exp(ks.log_combined_frame(z) - 2.0 * space.weight_exponent(z));
      const double pn = kernel_diag(space, z, KernelMode::truncated_at(N));
      const double lower = (t2 - both) / std::max(both, 1e-300);
      const double upper = (both - bound * pn) / (bound * pn);
      ks.sandwich_worst = std::max({ks.sandwich_worst, lower, upper});
    }
  ks.sandwich_ok = ks.sandwich_worst <= 1e-10;
  return ks;
}

nlohmann::json to_json(const ToeplitzOperator& op) {
  nlohmann::json j;
  j["space"] = op.space().describe();
  j["symbol"] = op.symbol().to_json();
  j["order"] = op.order();
  nlohmann::json m = nlohmann::json::array();
  for (const cplx& x : op.matrix()) m.push_back({x.real(), x.imag()});
  j["matrix"] = std::move(m);
  if (op.has_spectrum()) {
    nlohmann::json s;
    s["eigenvalues"] = op.eigenvalues();
    nlohmann::json v = nlohmann::json::array();
    for (const cplx& x : op.eigen().vectors) v.push_back({x.real(), x.imag()});
    s["eigenvectors"] = std::move(v);
    s["layout"] = "row-major, column j is eigenvector j";
    s["sweeps"] = op.eigen().sweeps;
    s["off_diagonal_norm"] = op.eigen().off_norm;
    j["spectrum"] = std::move(s);
  }
  const auto& d = op.diagnostics();
  j["quadrature"] = {{"path", d.path},
                     {"radial_nodes", d.radial_nodes},
                     {"angular_nodes", d.angular_nodes},
                     {"error_estimate", d.error_estimate},
                     {"upper_radius", d.upper_radius}};
  j["certificate"] = {{"order", op.certificate().order},
                      {"radius", op.certificate().radius},
                      {"tail_bound", op.certificate().tail_bound}};
  j["warnings"] = op.warnings();
  return j;
}

}  // namespace gaf
