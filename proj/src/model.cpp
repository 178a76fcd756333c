#include "gaf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gaf/error.hpp"

namespace gaf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void require_domain(const ModelSpace& space, cplx z, const char* what) {
  if (!space.in_domain(z)) {
    std::ostringstream os;
    os << what << ": point " << z << " outside the domain of " << space.describe();
    throw argument_error("model.domain", os.str());
  }
}

// log of the k-th term of the frame kernel sum, 2 log c_k + 2k log|z|
double log_kernel_term(const ModelSpace& space, int k, double log_abs_z) {
  const double lc = space.log_coeff(k);
  if (lc == kNegInf) return kNegInf;
  if (k == 0) return 2.0 * lc;
  if (log_abs_z == kNegInf) return kNegInf;
  return 2.0 * lc + 2.0 * k * log_abs_z;
}

// log of p P(Poisson(lambda) = k) scaled as the metric Fock basis term p^{k+1} r^{2k} e^{-p r^2} / k!
double log_fock_term(int p, int k, double r) {
  const double lambda = p * r * r;
  if (r == 0.0) return k == 0 ? std::log(static_cast<double>(p)) : kNegInf;
  return std::log(static_cast<double>(p)) + k * std::log(lambda) - lambda - std::lgamma(k + 1.0);
}

// Metric basis terms t_k at radius r, computed until they are negligible relative to eps.
std::vector<double> metric_terms(const ModelSpace& space, double r, double eps) {
  std::vector<double> terms;
  switch (space.kind()) {
    case ModelSpace::Kind::custom: {
      const auto& w = space.weights();
      for (std::size_t k = 0; k < w.size(); ++k) terms.push_back(w[k] * w[k] * std::pow(r, 2.0 * k));
      return terms;
    }
    case ModelSpace::Kind::fock: {
      const int p = space.level();
      const double lambda = p * r * r;
      for (int k = 0; k < 1000000; ++k) {
        const double t = std::exp(log_fock_term(p, k, r));
        terms.push_back(t);
        if (k > lambda + 1 && t < eps * 1e-6) break;
      }
      return terms;
    }
    case ModelSpace::Kind::disc: {
      const double x = r * r;
      double t = 1.0 / kPi;
      for (int k = 0; k < 10000000; ++k) {
        terms.push_back(t);
        // ratio of consecutive terms is x (k+2)/(k+1); stop once the geometric rest is below the target
        const double ratio = x * (k + 2.0) / (k + 1.0);
        if (ratio < 1.0 && t * ratio / (1.0 - ratio) < eps * 1e-6) break;
        t *= ratio;
      }
      return terms;
    }
  }
  return terms;
}

}  // namespace

ModelSpace ModelSpace::fock(int level) {
  if (level < 1) throw argument_error("model.argument", "Fock level must be >= 1");
  ModelSpace s;
  s.kind_ = Kind::fock;
  s.level_ = level;
  return s;
}

ModelSpace ModelSpace::disc() {
  ModelSpace s;
  s.kind_ = Kind::disc;
  s.level_ = 1;
  return s;
}

ModelSpace ModelSpace::custom(std::vector<double> weights) {
  if (weights.empty()) throw argument_error("model.argument", "CustomSpan needs at least one weight");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw argument_error("model.argument", "CustomSpan weights must be finite and nonnegative");
  ModelSpace s;
  s.kind_ = Kind::custom;
  s.level_ = 1;
  s.weights_ = std::move(weights);
  if (s.weights_[0] == 0.0)
    s.warnings_.push_back("weight 0 at index 0: the span has a base point at the origin");
  return s;
}

int ModelSpace::max_index() const noexcept {
  return kind_ == Kind::custom ? static_cast<int>(weights_.size()) - 1 : -1;
}

double ModelSpace::domain_radius() const noexcept {
  return kind_ == Kind::disc ? 1.0 : std::numeric_limits<double>::infinity();
}

bool ModelSpace::in_domain(cplx z) const noexcept {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return kind_ != Kind::disc || std::abs(z) < 1.0;
}

double ModelSpace::log_coeff(int k) const {
  if (k < 0) throw argument_error("model.argument", "basis index must be >= 0");
  switch (kind_) {
    case Kind::fock:
      return 0.5 * (k + 1) * std::log(static_cast<double>(level_)) - 0.5 * std::lgamma(k + 1.0);
    case Kind::disc:
      return 0.5 * std::log((k + 1) / kPi);
    case Kind::custom:
      if (k >= static_cast<int>(weights_.size()) || weights_[k] == 0.0) return kNegInf;
      return std::log(weights_[k]);
  }
  return kNegInf;
}

double ModelSpace::weight_exponent(cplx z) const noexcept {
  return kind_ == Kind::fock ? 0.5 * level_ * std::norm(z) : 0.0;
}

double ModelSpace::bundle_curvature() const noexcept {
  return kind_ == Kind::fock ? 2.0 * kPi * level_ : 0.0;
}

double ModelSpace::chern_density() const noexcept {
  return kind_ == Kind::fock ? level_ / kPi : 0.0;
}

std::string ModelSpace::describe() const {
  switch (kind_) {
    case Kind::fock:
      return "fock(p=" + std::to_string(level_) + ")";
    case Kind::disc:
      return "disc";
    case Kind::custom:
      return "custom(" + std::to_string(weights_.size()) + " weights)";
  }
  return "?";
}

LogValue basis_log_eval(const ModelSpace& space, int k, cplx z) {
  const double lc = space.log_coeff(k);
  if (k == 0) return {lc, 0.0};
  const double az = std::abs(z);
  if (az == 0.0) return {kNegInf, 0.0};
  return {lc + k * std::log(az), k * std::arg(z)};
}

cplx basis_eval(const ModelSpace& space, int k, cplx z) {
  const LogValue lv = basis_log_eval(space, k, z);
  if (lv.log_abs == kNegInf) return {0.0, 0.0};
  if (lv.log_abs > std::log(std::numeric_limits<double>::max())) {
    std::ostringstream os;
    os << "basis element " << k << " of " << space.describe() << " at " << z
       << " has log-magnitude " << lv.log_abs << " beyond double range";
    throw numeric_error("model.overflow", os.str());
  }
  return std::polar(std::exp(lv.log_abs), lv.phase);
}

double frame_weight(const ModelSpace& space, cplx z) {
  return std::exp(-2.0 * space.weight_exponent(z));
}

double log_frame_kernel(const ModelSpace& space, cplx z, int order) {
  if (order < 0) {
    switch (space.kind()) {
      case ModelSpace::Kind::fock:
        return std::log(static_cast<double>(space.level())) + space.level() * std::norm(z);
      case ModelSpace::Kind::disc:
        require_domain(space, z, "kernel");
        return -std::log(kPi) - 2.0 * std::log1p(-std::norm(z));
      case ModelSpace::Kind::custom:
        order = space.max_index();
        break;
    }
  }
  if (space.max_index() >= 0) order = std::min(order, space.max_index());
  const double la = std::abs(z) == 0.0 ? kNegInf : std::log(std::abs(z));
  std::vector<double> terms(order + 1);
  for (int k = 0; k <= order; ++k) terms[k] = log_kernel_term(space, k, la);
  return log_sum_exp(terms);
}

double kernel_diag(const ModelSpace& space, cplx z, KernelMode mode) {
  require_domain(space, z, "kernel_diag");
  if (!mode.truncated) {
    switch (space.kind()) {
      case ModelSpace::Kind::fock:
        return space.level();
      case ModelSpace::Kind::disc: {
        const double d = 1.0 - std::norm(z);
        return 1.0 / (kPi * d * d);
      }
      case ModelSpace::Kind::custom:
        break;
    }
  }
  const int order = mode.truncated ? mode.order : -1;
  if (space.kind() == ModelSpace::Kind::fock && mode.truncated) {
    // p e^{-p|z|^2} sum_{k<=N} (p|z|^2)^k / k!, summed upward so the partial sums increase monotonically
    const double lambda = space.level() * std::norm(z);
    double term = space.level() * std::exp(-lambda);
    double sum = term;
    for (int k = 1; k <= order; ++k) {
      term *= lambda / k;
      sum += term;
    }
    return sum;
  }
  return std::exp(log_frame_kernel(space, z, order) - 2.0 * space.weight_exponent(z));
}

double normalized_kernel(const ModelSpace& space, cplx z, cplx w) {
  require_domain(space, z, "normalized_kernel");
  require_domain(space, w, "normalized_kernel");
  switch (space.kind()) {
    case ModelSpace::Kind::fock:
      return std::exp(-0.5 * space.level() * std::norm(z - w));
    case ModelSpace::Kind::disc:
      return (1.0 - std::norm(z)) * (1.0 - std::norm(w)) / std::norm(1.0 - z * std::conj(w));
    case ModelSpace::Kind::custom: {
      cplx off = 0.0;
      for (int k = 0; k <= space.max_index(); ++k)
        off += basis_eval(space, k, z) * std::conj(basis_eval(space, k, w));
      const double dz = std::exp(log_frame_kernel(space, z));
      const double dw = std::exp(log_frame_kernel(space, w));
      if (dz == 0.0 || dw == 0.0) throw argument_error("model.base_point", "kernel vanishes at a base point");
      return std::min(1.0, std::abs(off) / std::sqrt(dz * dw));
    }
  }
  return 0.0;
}

double ek_density(const ModelSpace& space, cplx z) {
  require_domain(space, z, "ek_density");
  switch (space.kind()) {
    case ModelSpace::Kind::fock:
      return space.level() / kPi;
    case ModelSpace::Kind::disc: {
      const double d = 1.0 - std::norm(z);
      return 2.0 / (kPi * d * d);
    }
    case ModelSpace::Kind::custom:
      return ek_density_fd(space, z);
  }
  return 0.0;
}

double ek_density_fd(const ModelSpace& space, cplx z, double step, int order) {
  require_domain(space, z, "ek_density_fd");
  auto logk = [&](cplx u) {
    const double v = log_frame_kernel(space, u, order);
    if (v == kNegInf)
      throw argument_error("model.base_point", "frame kernel vanishes inside the finite-difference stencil");
    return v;
  };
  return laplacian5(logk, z, step) / (4.0 * kPi);
}

double metric_tail(const ModelSpace& space, int order, double r) {
  if (space.kind() == ModelSpace::Kind::disc) {
    if (r >= 1.0) return std::numeric_limits<double>::infinity();
    const double x = r * r;
    const double n = order;
    return std::pow(x, n + 1) * ((n + 2) - (n + 1) * x) / ((1 - x) * (1 - x)) / kPi;
  }
  const auto terms = metric_terms(space, r, 1e-300);
  double tail = 0.0;
  for (std::size_t k = terms.size(); k-- > static_cast<std::size_t>(order + 1);) tail += terms[k];
  return tail;
}

TruncationCertificate truncation_order(const ModelSpace& space, double r, double eps) {
  if (!(eps > 0.0)) throw argument_error("model.argument", "truncation tolerance must be positive");
  if (!(r > 0.0)) throw argument_error("model.argument", "truncation radius must be positive");
  if (space.kind() == ModelSpace::Kind::disc && r >= 1.0)
    throw argument_error("model.domain", "disc truncation radius must be < 1");

  const auto terms = metric_terms(space, r, eps);
  // suffix[k] = sum_{j>=k} terms[j], accumulated from the smallest terms upward
  std::vector<double> suffix(terms.size() + 1, 0.0);
  for (std::size_t k = terms.size(); k-- > 0;) suffix[k] = suffix[k + 1] + terms[k];
  if (space.kind() == ModelSpace::Kind::disc) {
    for (std::size_t n = 0; n < terms.size(); ++n) {
      const double tail = metric_tail(space, static_cast<int>(n), r);
      if (tail <= eps) return {static_cast<int>(n), r, tail};
    }
  } else {
    for (std::size_t n = 0; n < terms.size(); ++n)
      if (suffix[n + 1] <= eps) return {static_cast<int>(n), r, suffix[n + 1]};
  }
  throw numeric_error("model.truncation", "no truncation order found within the search range");
}

TruncationCertificate certificate_for_order(const ModelSpace& space, int order, double eps) {
  if (order < 0) throw argument_error("model.argument", "order must be >= 0");
  if (space.max_index() >= 0 && order >= space.max_index()) {
    return {space.max_index(), std::numeric_limits<double>::infinity(), 0.0};
  }
  double lo = 0.0;
  double hi = space.kind() == ModelSpace::Kind::disc ? 1.0 : 1.0;
  if (space.kind() != ModelSpace::Kind::disc) {
    while (metric_tail(space, order, hi) <= eps) hi *= 2.0;
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (metric_tail(space, order, mid) <= eps) lo = mid;
    else hi = mid;
  }
  return {order, lo, metric_tail(space, order, lo)};
}

}  // namespace gaf
