#include "gaf/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#include "gaf/error.hpp"
#include "gaf/quadrature.hpp"
#include "gaf/stats.hpp"

#ifndef GAF_VERSION
#define GAF_VERSION "unknown"
#endif

namespace gaf {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxLevels = 16;

using Clock = std::chrono::steady_clock;

template <class T>
T get_checked(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw config_error("config.invalid_value", std::string("bad type for key '") + key + "'");
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw config_error("config.invalid_value", what);
}

double one_sided_upper(std::uint64_t successes, std::uint64_t trials) {
  return wilson_interval(successes, trials, 1.6448536269514722).hi;
}

// Per-probability JSON entry; zero-event rows report the one-sided upper bound.
json probability_json(std::uint64_t k, std::uint64_t n) {
  const Interval ci = wilson_interval(k, n);
  json j{{"events", k}, {"trials", n}, {"ci_lo", ci.lo}, {"ci_hi", ci.hi}};
  if (k == 0) {
    j["estimate_upper_bound"] = n ? one_sided_upper(k, n) : 1.0;
    j["censored"] = true;
  } else {
    j["estimate"] = static_cast<double>(k) / static_cast<double>(n);
  }
  return j;
}

bool resample_reason(const Error& e) { return e.reason().rfind("zeros.", 0) == 0 && e.category() == ErrorCategory::numeric; }

[[noreturn]] void exhausted(std::uint64_t i) {
  throw numeric_error("experiments.resample_exhausted",
                      "trial " + std::to_string(i) + " failed on every reserved resample stream");
}

ExperimentReport start_report(const ExperimentConfig& c) {
  ExperimentReport r;
  r.kind = c.kind;
  r.trials = c.trials;
  // the worker count only changes wall-clock time, so it stays out of the provenance
  json cj = c.to_json();
  cj.erase("threads");
  r.provenance = {{"config_hash", config_hash(cj)}, {"seed", c.seed}, {"version", GAF_VERSION}, {"config", cj}};
  return r;
}

void finish_report(ExperimentReport& r, Clock::time_point t0) {
  if (r.trials > 0 && static_cast<double>(r.discards) > 1e-3 * static_cast<double>(r.trials))
    r.flags.push_back("DISCARDS_ABOVE_0.1%");
  if (r.trials == 0) r.flags.push_back("NO_TRIALS");
  r.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

TruncationCertificate certificate(const ModelSpace& space, double r, double eps) {
  TruncationCertificate c = truncation_order(space, r, eps);
  if (c.order > kMaxDegree)
    throw config_error("config.invalid_value", "radius " + std::to_string(r) + " needs basis order " +
                                                   std::to_string(c.order) + " above the cap " +
                                                   std::to_string(kMaxDegree));
  return c;
}

std::vector<cplx> draw(RngStream& s, int n) {
  std::vector<cplx> eta(n);
  for (auto& e : eta) e = s.complex_gaussian();
  return eta;
}

// Section with coefficients eta_k c_k for k <= N, sharing the stream prefix across levels.
SectionSample prefix_section(const ModelSpace& space, const std::vector<cplx>& eta, const TruncationCertificate& cert,
                             const RngStream& s) {
  return section_from_coefficients(space, std::vector<cplx>(eta.begin(), eta.begin() + cert.order + 1), cert,
                                   {s.master_seed(), s.stream_index()});
}

void check_levels(const std::vector<int>& levels) {
  require(!levels.empty(), "at least one level is required");
  require(levels.size() <= static_cast<std::size_t>(kMaxLevels), "at most 16 levels");
  for (int p : levels) require(p >= 1, "levels must be >= 1");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw config_error("config.invalid_value", "config must be a JSON object");
  static const std::set<std::string> known{
      "kind",   "model",    "p",           "p_list",    "trials",  "seed",        "truncation_eps",
      "threads", "radius",  "radii",       "hole_mode", "r0",      "margin",      "root_crosscheck",
      "test_radius", "delta", "u_radius",  "sampler",   "symbol",  "basis_order", "ring_edges",
      "sectors"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw config_error("config.unknown_key", "unknown config key '" + item.key() + "'");

  ExperimentConfig c;
  c.kind = get_checked(j, "kind", c.kind);
  c.model = get_checked(j, "model", c.model);
  c.p = get_checked(j, "p", c.p);
  c.p_list = get_checked(j, "p_list", c.p_list);
  c.trials = get_checked(j, "trials", c.trials);
  c.seed = get_checked(j, "seed", c.seed);
  c.truncation_eps = get_checked(j, "truncation_eps", c.truncation_eps);
  c.threads = get_checked(j, "threads", c.threads);
  c.radius = get_checked(j, "radius", c.radius);
  c.radii = get_checked(j, "radii", c.radii);
  c.hole_mode = get_checked(j, "hole_mode", c.hole_mode);
  c.r0 = get_checked(j, "r0", c.r0);
  c.margin = get_checked(j, "margin", c.margin);
  c.root_crosscheck = get_checked(j, "root_crosscheck", c.root_crosscheck);
  c.test_radius = get_checked(j, "test_radius", c.test_radius);
  c.delta = get_checked(j, "delta", c.delta);
  c.u_radius = get_checked(j, "u_radius", c.u_radius);
  c.sampler = get_checked(j, "sampler", c.sampler);
  if (j.contains("symbol")) c.symbol = j.at("symbol");
  c.basis_order = get_checked(j, "basis_order", c.basis_order);
  c.ring_edges = get_checked(j, "ring_edges", c.ring_edges);
  c.sectors = get_checked(j, "sectors", c.sectors);

  static const std::set<std::string> kinds{"zero_count", "hole", "linstat", "tails", "densitymap"};
  require(kinds.count(c.kind), "unknown experiment kind '" + c.kind + "'");
  require(c.model == "fock" || c.model == "disc", "model must be fock or disc");
  require(c.p >= 1, "p must be >= 1");
  for (int p : c.p_list) require(p >= 1, "p_list entries must be >= 1");
  require(c.truncation_eps > 0.0 && c.truncation_eps < 1.0, "truncation_eps must lie in (0, 1)");
  require(c.threads >= 0, "threads must be >= 0");
  require(c.radius > 0.0, "radius must be positive");
  for (double r : c.radii) require(r > 0.0, "radii must be positive");
  require(c.hole_mode == "scaled" || c.hole_mode == "fixed", "hole_mode must be scaled or fixed");
  require(c.r0 > 0.0, "r0 must be positive");
  require(c.margin > 0.0, "margin must be positive");
  require(c.test_radius > 0.0, "test_radius must be positive");
  require(c.delta > 0.0, "delta must be positive");
  require(c.u_radius > 0.0, "u_radius must be positive");
  require(c.sampler == "standard" || c.sampler == "wiener", "sampler must be standard or wiener");
  require(c.basis_order >= 0 && c.basis_order <= kMaxDegree, "basis_order must lie in [0, 512]");
  require(c.ring_edges.size() >= 2, "ring_edges needs at least two entries");
  require(c.ring_edges.front() >= 0.0, "ring_edges must be nonnegative");
  for (std::size_t i = 1; i < c.ring_edges.size(); ++i)
    require(c.ring_edges[i] > c.ring_edges[i - 1], "ring_edges must increase");
  require(c.sectors >= 1 && c.sectors <= 360, "sectors must lie in [1, 360]");
  if (c.model == "disc") {
    if (c.kind == "zero_count") require(c.radius < 1.0, "disc radius must be < 1");
    if (c.kind == "densitymap") require(c.ring_edges.back() < 1.0, "disc ring_edges must stay below 1");
    require(c.kind == "zero_count" || c.kind == "densitymap", "the disc model supports zero_count and densitymap");
  }
  SymbolDescriptor::from_json(c.symbol);  // validates
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"kind", kind},
          {"model", model},
          {"p", p},
          {"p_list", p_list},
          {"trials", trials},
          {"seed", seed},
          {"truncation_eps", truncation_eps},
          {"threads", threads},
          {"radius", radius},
          {"radii", radii},
          {"hole_mode", hole_mode},
          {"r0", r0},
          {"margin", margin},
          {"root_crosscheck", root_crosscheck},
          {"test_radius", test_radius},
          {"delta", delta},
          {"u_radius", u_radius},
          {"sampler", sampler},
          {"symbol", symbol},
          {"basis_order", basis_order},
          {"ring_edges", ring_edges},
          {"sectors", sectors}};
}

ModelSpace ExperimentConfig::space(int level) const {
  return model == "disc" ? ModelSpace::disc() : ModelSpace::fock(level);
}

std::vector<int> ExperimentConfig::levels() const { return p_list.empty() ? std::vector<int>{p} : p_list; }

// ---------------------------------------------------------------- reports

json ExperimentReport::to_json(bool with_timing) const {
  json table = json::array();
  for (const auto& row : rows) {
    json r = json::object();
    for (std::size_t k = 0; k < columns.size() && k < row.size(); ++k) r[columns[k]] = row[k];
    table.push_back(r);
  }
  json j{{"kind", kind},       {"summary", summary},     {"columns", columns}, {"table", table},
         {"flags", flags},     {"trials", trials},       {"discards", discards},
         {"provenance", provenance}};
  if (with_timing) j["wall_seconds"] = wall_seconds;
  return j;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << fmt(row[k]);
    os << "\n";
  }
  return os.str();
}

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int resolve_threads(int hint) {
  if (hint > 0) return hint;
  if (const char* env = std::getenv("THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// ---------------------------------------------------------------- zero counts

ExperimentReport zero_count_stats(const ExperimentConfig& c) {
  const auto t0 = Clock::now();
  ExperimentReport rep = start_report(c);
  rep.columns = {"p", "radius", "mean", "variance", "standard_error", "analytic_mean", "trials", "discards"};
  const ModelSpace space = c.space(c.p);
  const double r = c.radius;

  auto analytic = integrate([&](double t) { return 2 * kPi * t * ek_density(space, cplx(t, 0.0)); }, 0.0, r);
  const double mean_exact = analytic.value;
  if (c.trials == 0) {
    finish_report(rep, t0);
    return rep;
  }
  const TruncationCertificate cert = certificate(space, r, c.truncation_eps);

  struct Out {
    int count = 0;
    int attempts = 0;
  };
  const auto results = run_trials<Out>(c.trials, resolve_threads(c.threads), [&](std::uint64_t i) {
    for (int a = 0; a < kMaxResamples; ++a) {
      RngStream s = trial_stream(c.seed, i, a);
      try {
        return Out{count_zeros_argument(sample_section(space, cert, s), r), a};
      } catch (const Error& e) {
        if (!resample_reason(e)) throw;
      }
    }
    exhausted(i);
  });

  RunningStats st;
  for (const auto& o : results) {
    st.add(o.count);
    rep.discards += o.attempts;
  }
  const double se = st.standard_error();
  rep.rows.push_back({double(c.p), r, st.mean(), st.variance(), se, mean_exact, double(c.trials), double(rep.discards)});
  rep.summary = {{"mean", st.mean()},
                 {"variance", st.variance()},
                 {"standard_error", se},
                 {"analytic_mean", mean_exact},
                 {"clt_interval", {st.mean() - 3 * se, st.mean() + 3 * se}},
                 {"consistent_3se", std::abs(st.mean() - mean_exact) <= 3 * se},
                 {"basis_order", cert.order}};
  finish_report(rep, t0);
  return rep;
}

// ---------------------------------------------------------------- hole probabilities

namespace {

double log_poisson_tail(double lambda, int k) {
  // log P(Poisson(lambda) >= k)
  if (k <= 0) return 0.0;
  const int start = k, stop = k + 80 + static_cast<int>(std::max(0.0, lambda - k) + 12 * std::sqrt(lambda + 1));
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> t;
  for (int j = start; j <= stop; ++j) {
    t.push_back(-lambda + j * std::log(lambda) - std::lgamma(j + 1.0));
    m = std::max(m, t.back());
  }
  double s = 0.0;
  for (double v : t) s += std::exp(v - m);
  return std::min(0.0, m + std::log(s));
}

struct CertPoint {
  bool valid = false;
  double log_bound = 0.0;
  double log_c = 0.0;
};

CertPoint cert_at(int p, double lambda, double margin, int q) {
  CertPoint c;
  // C' = (1/m^2) sum_{j >= q+2} lambda^j / j!  (second moment of the tail over B(0, r0) via the sub-mean inequality)
  c.log_c = lambda + log_poisson_tail(lambda, q + 2) - 2 * std::log(margin);
  const double x = 9.0 * std::exp(c.log_c) / p;
  if (!(x < 1.0)) return c;
  c.valid = true;
  c.log_bound = -1.0 + std::log1p(-x) + (q > 0 ? q * (-lambda - std::log(18.0 * q)) : 0.0);
  return c;
}

}  // namespace

HoleCertificate hole_lower_bound_certificate(int p, double r0, double margin) {
  if (p < 1 || !(r0 > 0.0) || !(margin > 0.0) || !std::isfinite(margin))
    throw argument_error("experiments.argument", "certificate needs p >= 1, r0 > 0, margin > 0");
  HoleCertificate h;
  const double R = r0 + margin;
  h.outer_radius = R;
  h.m_tilde = std::exp(-R * R / 2);
  const double lambda = p * R * R;

  // literal cutoff: sup_{|z|<=R} sum_{k>q} |S_k|_h^2 = p P(Poisson(pR^2) > q) <= M^{2p}
  int q = 0;
  while (std::log(static_cast<double>(p)) + log_poisson_tail(lambda, q + 1) > -lambda) ++q;
  h.literal_cutoff = q;
  const CertPoint lit = cert_at(p, lambda, margin, q);
  h.literal_vacuous = !lit.valid;
  h.literal_log_bound = lit.valid ? lit.log_bound : kNaN;

  const int qmax = static_cast<int>(4 * lambda) + 64;
  CertPoint best;
  int best_q = -1;
  for (int k = 0; k <= qmax; ++k) {
    const CertPoint cp = cert_at(p, lambda, margin, k);
    if (cp.valid && (best_q < 0 || cp.log_bound > best.log_bound)) {
      best = cp;
      best_q = k;
    }
  }
  std::ostringstream diag;
  diag << "R=" << R << " lambda=" << lambda << " literal_cutoff=" << q;
  if (best_q < 0) {
    h.vacuous = true;
    h.log_bound = kNaN;
    diag << " no cutoff in [0," << qmax << "] gives 9C'/p < 1";
  } else {
    h.log_bound = best.log_bound;
    h.cutoff = best_q;
    h.c_tilde = std::exp(best.log_c);
    diag << " optimal_cutoff=" << best_q;
  }
  h.diagnostics = diag.str();
  return h;
}

json to_json(const HoleCertificate& c) {
  json j{{"status", c.vacuous ? "CERT_VACUOUS" : "OK"},
         {"cutoff", c.cutoff},
         {"c_tilde", c.c_tilde},
         {"literal_cutoff", c.literal_cutoff},
         {"literal_status", c.literal_vacuous ? "CERT_VACUOUS" : "OK"},
         {"m_tilde", c.m_tilde},
         {"outer_radius", c.outer_radius},
         {"diagnostics", c.diagnostics}};
  j["log_bound"] = c.vacuous ? json(nullptr) : json(c.log_bound);
  j["literal_log_bound"] = c.literal_vacuous ? json(nullptr) : json(c.literal_log_bound);
  return j;
}

AffineP2Fit fit_minus_c_p2(const std::vector<int>& levels, const std::vector<double>& values) {
  std::vector<std::vector<double>> rows;
  for (int p : levels) rows.push_back({1.0, -double(p) * p});
  const LeastSquares ls = least_squares(rows, values);
  AffineP2Fit f;
  f.intercept = ls.coefficients[0];
  f.C = ls.coefficients[1];
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double fit = f.intercept - f.C * levels[i] * levels[i];
    f.max_relative_residual = std::max(f.max_relative_residual, std::abs(values[i] - fit) / std::abs(values[i]));
  }
  return f;
}

ExperimentReport hole_probability(const ExperimentConfig& c) {
  const auto t0 = Clock::now();
  ExperimentReport rep = start_report(c);
  const bool scaled = c.hole_mode == "scaled";
  rep.columns = {"p", "radius", "holes", "trials", "estimate", "ci_lo", "ci_hi", "upper_bound", "resolved",
                 "equivalent_holes", "equivalence_mismatches", "log_certificate"};

  std::vector<int> levels;
  std::vector<double> radii;
  if (scaled) {
    levels = c.levels();
    check_levels(levels);
    radii.assign(levels.size(), c.r0);
  } else {
    radii = c.radii.empty() ? std::vector<double>{c.radius} : c.radii;
    std::sort(radii.begin(), radii.end());
    require(radii.size() <= static_cast<std::size_t>(kMaxLevels), "at most 16 radii");
    levels.assign(radii.size(), c.p);
  }
  const std::size_t L = levels.size();
  std::vector<TruncationCertificate> cert(L), partner(L);
  int nmax = 0;
  for (std::size_t l = 0; l < L; ++l) {
    // fixed mode keeps one polynomial for all radii so the events are nested
    cert[l] = certificate(ModelSpace::fock(levels[l]), scaled ? radii[l] : radii.back(), c.truncation_eps);
    // level 1 at sqrt(p) r0 with the same coefficients is the rescaled section
    partner[l] = {cert[l].order, std::sqrt(double(levels[l])) * radii[l], cert[l].tail_bound};
    nmax = std::max(nmax, cert[l].order);
  }
  if (c.trials == 0) {
    finish_report(rep, t0);
    return rep;
  }

  struct Out {
    std::uint32_t hole = 0, partner = 0, crosscheck_mismatch = 0;
    int attempts = 0;
  };
  const ModelSpace one = ModelSpace::fock(1);
  const auto results = run_trials<Out>(c.trials, resolve_threads(c.threads), [&](std::uint64_t i) {
    for (int a = 0; a < kMaxResamples; ++a) {
      RngStream s = trial_stream(c.seed, i, a);
      const std::vector<cplx> eta = draw(s, nmax + 1);
      try {
        Out o;
        o.attempts = a;
        for (std::size_t l = 0; l < L; ++l) {
          const SectionSample sec = prefix_section(ModelSpace::fock(levels[l]), eta, cert[l], s);
          const bool hole = count_zeros_argument(sec, radii[l]) == 0;
          if (hole) o.hole |= 1u << l;
          if (scaled) {
            const SectionSample eq = prefix_section(one, eta, partner[l], s);
            if (count_zeros_argument(eq, partner[l].radius) == 0) o.partner |= 1u << l;
          }
          if (c.root_crosscheck) {
            const ZeroSet zs = roots_in_disk(sec, radii[l]);
            if (!zs.valid()) throw numeric_error("zeros.crosscheck_invalid", "root cross-check failed to validate");
            if ((zs.total_multiplicity() == 0) != hole) o.crosscheck_mismatch |= 1u << l;
          }
        }
        return o;
      } catch (const Error& e) {
        if (!resample_reason(e)) throw;
      }
    }
    exhausted(i);
  });

  std::vector<std::uint64_t> holes(L, 0), eq_holes(L, 0), mismatch(L, 0), cross(L, 0);
  for (const auto& o : results) {
    rep.discards += o.attempts;
    for (std::size_t l = 0; l < L; ++l) {
      const bool h = o.hole >> l & 1u, e = o.partner >> l & 1u;
      holes[l] += h;
      eq_holes[l] += e;
      mismatch[l] += scaled && h != e;
      cross[l] += o.crosscheck_mismatch >> l & 1u;
    }
  }

  json per = json::array();
  std::vector<Interval> ci(L);
  std::vector<bool> resolved(L);
  std::vector<double> est(L), xs, ys, ws;
  std::vector<int> fit_index;
  for (std::size_t l = 0; l < L; ++l) {
    const std::uint64_t n = c.trials;
    ci[l] = wilson_interval(holes[l], n);
    est[l] = static_cast<double>(holes[l]) / n;
    resolved[l] = holes[l] >= 25;
    const HoleCertificate hc = hole_lower_bound_certificate(levels[l], radii[l], c.margin);
    json e = probability_json(holes[l], n);
    e["p"] = levels[l];
    e["radius"] = radii[l];
    e["resolved"] = resolved[l];
    e["certificate"] = to_json(hc);
    if (resolved[l] && !hc.vacuous) e["certificate_below_ci"] = hc.log_bound <= std::log(ci[l].lo);
    if (scaled) {
      e["equivalent"] = probability_json(eq_holes[l], n);
      e["equivalence_mismatches"] = mismatch[l];
    }
    if (c.root_crosscheck) e["root_crosscheck_mismatches"] = cross[l];
    per.push_back(e);
    rep.rows.push_back({double(levels[l]), radii[l], double(holes[l]), double(n), est[l], ci[l].lo, ci[l].hi,
                        one_sided_upper(holes[l], n), resolved[l] ? 1.0 : 0.0, double(eq_holes[l]),
                        double(mismatch[l]), hc.vacuous ? kNaN : hc.log_bound});
    if (resolved[l] && holes[l] < n) {
      // y = log(-log P); the Wilson interval maps to an approximate standard error
      auto y = [](double q) { return std::log(-std::log(q)); };
      const double sd = std::abs(y(ci[l].lo) - y(std::min(ci[l].hi, 1.0 - 1e-15))) / (2 * 1.959963984540054);
      xs.push_back(std::log(scaled ? double(levels[l]) : radii[l]));
      ys.push_back(y(est[l]));
      ws.push_back(sd > 0 ? 1.0 / (sd * sd) : 1.0);
      fit_index.push_back(static_cast<int>(l));
    }
  }

  bool decreasing = true, separated = true;
  int last = -1;
  for (std::size_t l = 0; l < L; ++l) {
    if (!resolved[l]) continue;
    if (last >= 0) {
      decreasing = decreasing && est[l] < est[last];
      separated = separated && ci[l].hi < ci[last].lo;
    }
    last = static_cast<int>(l);
  }

  json fit = nullptr;
  if (xs.size() >= 2) {
    std::vector<std::vector<double>> rows;
    for (double x : xs) rows.push_back({1.0, x});
    const LeastSquares ls = least_squares(rows, ys, ws);
    json resid = json::array();
    for (std::size_t k = 0; k < xs.size(); ++k)
      resid.push_back(ys[k] - ls.coefficients[0] - ls.coefficients[1] * xs[k]);
    fit = {{"exponent", ls.coefficients[1]},
           {"exponent_se", ls.standard_errors[1]},
           {"intercept", ls.coefficients[0]},
           {"residuals", resid},
           {"points", xs.size()},
           {"target", scaled ? 2.0 : 4.0},
           {"note", "the asymptotic exponent is not certified at desk scale; censored and unresolved points are excluded"}};
  } else {
    rep.flags.push_back("FIT_UNAVAILABLE");
  }
  if (!resolved.back()) rep.flags.push_back("UNRESOLVED");

  std::uint64_t total_mismatch = 0;
  for (auto m : mismatch) total_mismatch += m;
  rep.summary = {{"mode", c.hole_mode},
                 {"levels", per},
                 {"strictly_decreasing", decreasing},
                 {"consecutive_ci_disjoint", separated},
                 {"fit", fit},
                 {"margin", c.margin}};
  if (scaled) rep.summary["rescaling_exact"] = total_mismatch == 0;
  finish_report(rep, t0);
  return rep;
}

// ---------------------------------------------------------------- linear statistics and tails

namespace {

struct LevelSetup {
  int p;
  ModelSpace space;
  TruncationCertificate cert;
};

std::vector<LevelSetup> fock_levels(const ExperimentConfig& c, double radius) {
  require(c.model == "fock", "this experiment runs on the Fock model");
  const auto levels = c.levels();
  check_levels(levels);
  std::vector<LevelSetup> out;
  for (int p : levels) {
    const ModelSpace s = ModelSpace::fock(p);
    out.push_back({p, s, certificate(s, radius, c.truncation_eps)});
  }
  return out;
}

int max_order(const std::vector<LevelSetup>& ls) {
  int n = 0;
  for (const auto& l : ls) n = std::max(n, l.cert.order);
  return n;
}

}  // namespace

ExperimentReport linear_statistic(const ExperimentConfig& c) {
  const auto t0 = Clock::now();
  ExperimentReport rep = start_report(c);
  rep.columns = {"p", "mean", "variance", "standard_error", "p2_variance", "target", "trials", "discards"};
  const TestForm phi = TestForm::bump(c.test_radius);
  const double R = phi.support_radius;
  const auto setup = fock_levels(c, R);
  const std::size_t L = setup.size();
  // E[(1/p) <Div, phi>] = (1/pi) int phi dA exactly on Fock
  const double target = TestForm::bump_area_integral(c.test_radius) / kPi;
  if (c.trials == 0) {
    finish_report(rep, t0);
    return rep;
  }
  const int nmax = max_order(setup);

  struct Out {
    std::array<double, kMaxLevels> y{};
    int attempts = 0;
  };
  const auto results = run_trials<Out>(c.trials, resolve_threads(c.threads), [&](std::uint64_t i) {
    for (int a = 0; a < kMaxResamples; ++a) {
      RngStream s = trial_stream(c.seed, i, a);
      const std::vector<cplx> eta = draw(s, nmax + 1);
      Out o;
      o.attempts = a;
      bool ok = true;
      for (std::size_t l = 0; l < L && ok; ++l) {
        try {
          const ZeroSet zs = roots_in_disk(prefix_section(setup[l].space, eta, setup[l].cert, s), R);
          if (!zs.valid()) {
            ok = false;
            break;
          }
          o.y[l] = pair_divisor(zs, phi).value / setup[l].p;
        } catch (const Error& e) {
          if (!resample_reason(e)) throw;
          ok = false;
        }
      }
      if (ok) return o;
    }
    exhausted(i);
  });

  std::vector<RunningStats> st(L);
  for (const auto& o : results) {
    rep.discards += o.attempts;
    for (std::size_t l = 0; l < L; ++l) st[l].add(o.y[l]);
  }
  json per = json::array();
  std::vector<std::vector<double>> trend_rows;
  std::vector<double> trend_y;
  bool all_clt = true;
  for (std::size_t l = 0; l < L; ++l) {
    const double p = setup[l].p, se = st[l].standard_error(), p2v = p * p * st[l].variance();
    const bool clt = std::abs(st[l].mean() - target) <= 3 * se;
    all_clt = all_clt && clt;
    per.push_back({{"p", setup[l].p},
                   {"mean", st[l].mean()},
                   {"standard_error", se},
                   {"clt_interval", {st[l].mean() - 3 * se, st[l].mean() + 3 * se}},
                   {"mean_within_clt", clt},
                   {"variance", st[l].variance()},
                   {"p2_variance", p2v},
                   {"basis_order", setup[l].cert.order}});
    rep.rows.push_back({p, st[l].mean(), st[l].variance(), se, p2v, target, double(c.trials), double(rep.discards)});
    if (p2v > 0) {
      trend_rows.push_back({1.0, std::log(p)});
      trend_y.push_back(std::log(p2v));
    }
  }
  json trend = nullptr;
  bool bounded = true;
  if (trend_rows.size() >= 3) {
    const LeastSquares ls = least_squares(trend_rows, trend_y);
    bounded = ls.coefficients[1] <= 2 * ls.standard_errors[1];
    trend = {{"log_slope", ls.coefficients[1]}, {"log_slope_se", ls.standard_errors[1]}};
  } else if (trend_rows.size() == 2) {
    bounded = trend_y[1] <= trend_y[0] + 0.5;
    trend = {{"log_slope", (trend_y[1] - trend_y[0]) / (trend_rows[1][1] - trend_rows[0][1])}};
  }
  rep.summary = {{"target", target},
                 {"levels", per},
                 {"all_means_within_clt", all_clt},
                 {"p2_variance_trend", trend},
                 {"p2_variance_bounded", bounded},
                 {"test_form", {{"name", phi.name}, {"radius", c.test_radius}}}};
  finish_report(rep, t0);
  return rep;
}

ExperimentReport deviation_and_supnorm_tails(const ExperimentConfig& c) {
  const auto t0 = Clock::now();
  ExperimentReport rep = start_report(c);
  rep.columns = {"p", "event", "count", "trials", "estimate", "ci_lo", "ci_hi", "upper_bound"};
  const TestForm phi = TestForm::bump(c.test_radius);
  const double R = phi.support_radius, U = c.u_radius;
  const auto setup = fock_levels(c, std::max(R, U));
  const std::size_t L = setup.size();
  const double target = TestForm::bump_area_integral(c.test_radius) / kPi;
  const double delta = c.delta;
  if (c.trials == 0) {
    finish_report(rep, t0);
    return rep;
  }
  const int nmax = max_order(setup);
  constexpr int kGrid = 64;

  // bits per level: 0..3 events (i)-(iv), 4 hole in the support, 5 deviation >= target
  struct Out {
    std::array<std::uint8_t, kMaxLevels> bits{};
    int attempts = 0;
  };
  const auto results = run_trials<Out>(c.trials, resolve_threads(c.threads), [&](std::uint64_t i) {
    for (int a = 0; a < kMaxResamples; ++a) {
      RngStream s = trial_stream(c.seed, i, a);
      const std::vector<cplx> eta = draw(s, nmax + 1);
      Out o;
      o.attempts = a;
      bool ok = true;
      for (std::size_t l = 0; l < L && ok; ++l) {
        const double p = setup[l].p;
        try {
          const SectionSample sec = prefix_section(setup[l].space, eta, setup[l].cert, s);
          const ZeroSet zs = roots_in_disk(sec, R);
          if (!zs.valid()) {
            ok = false;
            break;
          }
          const double y = pair_divisor(zs, phi).value / p;
          std::uint8_t b = 0;
          if (std::abs(y - target) >= delta) b |= 1;
          // polar grid: 64 radii (cell midpoints) x 64 angles
          const ScaledPoly poly = frame_polynomial(sec);
          double sup = -std::numeric_limits<double>::infinity(), mean_abs = 0.0;
          for (int k = 0; k < kGrid; ++k) {
            const double r = U * (k + 0.5) / kGrid;
            const CircleValues cv = circle_values(poly, r, kGrid, false);
            const double shift = cv.log_scale - setup[l].space.weight_exponent(cplx(r, 0.0));
            const double w = 2 * r * (U / kGrid) / (U * U) / kGrid;  // area fraction of each cell
            for (const cplx& v : cv.values) {
              const double lv = std::log(std::abs(v)) + shift;
              sup = std::max(sup, lv);
              mean_abs += w * std::abs(lv);
            }
          }
          if (sup >= delta * p) b |= 2;
          if (sup <= -delta * p) b |= 4;
          if (mean_abs >= delta * p) b |= 8;
          if (zs.total_multiplicity() == 0 || y == 0.0) b |= 16;
          if (std::abs(y - target) >= target) b |= 32;
          o.bits[l] = b;
        } catch (const Error& e) {
          if (!resample_reason(e)) throw;
          ok = false;
        }
      }
      if (ok) return o;
    }
    exhausted(i);
  });

  std::vector<std::array<std::uint64_t, 6>> counts(L, std::array<std::uint64_t, 6>{});
  std::uint64_t inclusion_violations = 0;
  for (const auto& o : results) {
    rep.discards += o.attempts;
    for (std::size_t l = 0; l < L; ++l) {
      for (int e = 0; e < 6; ++e) counts[l][e] += o.bits[l] >> e & 1u;
      if ((o.bits[l] & 16) && !(o.bits[l] & 32)) ++inclusion_violations;
    }
  }
  const char* names[4] = {"deviation", "sup_large", "sup_small", "log_mean_large"};
  json per = json::array();
  std::array<bool, 4> nonincreasing{true, true, true, true};
  for (std::size_t l = 0; l < L; ++l) {
    json lv{{"p", setup[l].p}};
    for (int e = 0; e < 4; ++e) {
      const std::uint64_t k = counts[l][e];
      const Interval ci = wilson_interval(k, c.trials);
      lv[names[e]] = probability_json(k, c.trials);
      rep.rows.push_back({double(setup[l].p), double(e + 1), double(k), double(c.trials),
                          double(k) / double(c.trials), ci.lo, ci.hi, one_sided_upper(k, c.trials)});
      if (l > 0 && setup[l - 1].p >= 2) {
        const Interval prev = wilson_interval(counts[l - 1][e], c.trials);
        if (ci.lo > prev.hi) nonincreasing[e] = false;
      }
    }
    lv["hole_in_support"] = probability_json(counts[l][4], c.trials);
    lv["deviation_at_target"] = probability_json(counts[l][5], c.trials);
    per.push_back(lv);
  }
  json mono = json::object();
  for (int e = 0; e < 4; ++e) mono[names[e]] = nonincreasing[e];
  rep.summary = {{"target", target},
                 {"delta", delta},
                 {"levels", per},
                 {"nonincreasing_from_p2", mono},
                 {"hole_implies_deviation_violations", inclusion_violations},
                 {"sup_norm", "grid sup-norm over a 64 x 64 polar grid; a lower estimate of the true sup"},
                 {"note", "decay in p is checked qualitatively; the exponent p^{n+1} is not certified"}};
  finish_report(rep, t0);
  return rep;
}

// ---------------------------------------------------------------- density maps

ExperimentReport empirical_density_map(const ExperimentConfig& c) {
  const auto t0 = Clock::now();
  ExperimentReport rep = start_report(c);
  rep.columns = {"ring", "sector", "r_lo", "r_hi", "rate", "standard_error", "expected", "z_score"};
  const ModelSpace space = c.space(c.p);
  const auto& edges = c.ring_edges;
  const double rmax = edges.back();
  const int rings = static_cast<int>(edges.size()) - 1, S = c.sectors, cells = rings * S;
  const bool wiener = c.sampler == "wiener";

  std::shared_ptr<ToeplitzOperator> op;
  TruncationCertificate cert = certificate(space, rmax, c.truncation_eps);
  if (wiener) {
    const int N = c.basis_order > 0 ? c.basis_order : cert.order;
    op = std::make_shared<ToeplitzOperator>(build_toeplitz(space, SymbolDescriptor::from_json(c.symbol), N));
    spectrum(*op);
  }

  // expected zeros per cell
  std::vector<double> expected(cells, 0.0);
  const GaussRule& g = gauss_legendre(12);
  for (int ri = 0; ri < rings; ++ri) {
    const double a = edges[ri], b = edges[ri + 1];
    for (int si = 0; si < S; ++si) {
      double v = 0.0;
      if (!wiener) {
        v = integrate([&](double t) { return t * ek_density(space, cplx(t, 0.0)); }, a, b).value * 2 * kPi / S;
      } else {
        const double th0 = 2 * kPi * si / S, th1 = 2 * kPi * (si + 1) / S;
        for (int i = 0; i < 12; ++i) {
          const double r = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i];
          for (int k = 0; k < 12; ++k) {
            const double th = 0.5 * (th0 + th1) + 0.5 * (th1 - th0) * g.nodes[k];
            v += g.weights[i] * g.weights[k] * 0.25 * (b - a) * (th1 - th0) * r * gamma_f_density(*op, std::polar(r, th));
          }
        }
      }
      expected[ri * S + si] = v;
    }
  }

  if (c.trials == 0) {
    rep.summary = {{"sampler", c.sampler}, {"cells", cells}};
    finish_report(rep, t0);
    return rep;
  }

  struct Out {
    std::vector<std::uint16_t> counts;
    int attempts = 0;
  };
  const auto results = run_trials<Out>(c.trials, resolve_threads(c.threads), [&](std::uint64_t i) {
    for (int a = 0; a < kMaxResamples; ++a) {
      RngStream s = trial_stream(c.seed, i, a);
      try {
        const SectionSample sec = wiener ? sample_wiener_section(*op, s) : sample_section(space, cert, s);
        const ZeroSet zs = roots_in_disk(sec, rmax);
        if (!zs.valid()) continue;
        Out o;
        o.attempts = a;
        o.counts.assign(cells, 0);
        for (const Root& z : zs.roots) {
          const double r = std::abs(z.position);
          if (r < edges.front() || r >= rmax) continue;
          const int ri = static_cast<int>(std::upper_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
          double th = std::arg(z.position);
          if (th < 0) th += 2 * kPi;
          const int si = std::min(S - 1, static_cast<int>(th / (2 * kPi) * S));
          o.counts[ri * S + si] += static_cast<std::uint16_t>(z.multiplicity);
        }
        return o;
      } catch (const Error& e) {
        if (!resample_reason(e)) throw;
      }
    }
    exhausted(i);
  });

  std::vector<RunningStats> st(cells);
  for (const auto& o : results) {
    rep.discards += o.attempts;
    for (int k = 0; k < cells; ++k) st[k].add(o.counts[k]);
  }
  double chi2 = 0.0, worst = 0.0;
  bool all = true;
  for (int ri = 0; ri < rings; ++ri)
    for (int si = 0; si < S; ++si) {
      const int k = ri * S + si;
      const double se = st[k].standard_error(), d = st[k].mean() - expected[k];
      const double z = se > 0 ? d / se : (d == 0 ? 0.0 : std::numeric_limits<double>::infinity());
      chi2 += z * z;
      worst = std::max(worst, std::abs(z));
      all = all && std::abs(z) <= 3.0;
      rep.rows.push_back({double(ri), double(si), edges[ri], edges[ri + 1], st[k].mean(), se, expected[k], z});
    }
  rep.summary = {{"sampler", c.sampler},
                 {"cells", cells},
                 {"chi_square", chi2},
                 {"degrees_of_freedom", cells},
                 {"max_abs_z", worst},
                 {"all_cells_within_3se", all},
                 {"basis_order", wiener ? op->order() : cert.order}};
  if (wiener) rep.summary["symbol"] = op->symbol().to_json();
  finish_report(rep, t0);
  return rep;
}

ExperimentReport wiener_covariance(const ToeplitzOperator& op, int max_index, std::uint64_t draws, std::uint64_t seed,
                                   int threads) {
  const auto t0 = Clock::now();
  if (!op.has_spectrum()) throw argument_error("experiments.argument", "operator needs its spectrum");
  const int J = std::min(max_index, op.order());
  ExperimentReport rep;
  rep.kind = "wiener_covariance";
  rep.trials = draws;
  rep.provenance = {{"seed", seed}, {"version", GAF_VERSION}, {"symbol", op.symbol().to_json()}, {"order", op.order()}};
  rep.columns = {"j", "mean_sq", "standard_error", "expected", "z_score"};
  struct Out {
    std::array<double, 64> sq{};
  };
  if (J >= 64) throw argument_error("experiments.argument", "max_index must be < 64");
  const auto results = run_trials<Out>(draws, resolve_threads(threads), [&](std::uint64_t i) {
    RngStream s(seed, i);
    const SectionSample sec = sample_wiener_section(op, s);
    Out o;
    for (int j = 0; j <= J; ++j) o.sq[j] = std::norm(sec.coefficients[j]);
    return o;
  });
  std::vector<RunningStats> st(J + 1);
  for (const auto& o : results)
    for (int j = 0; j <= J; ++j) st[j].add(o.sq[j]);
  bool all = true;
  for (int j = 0; j <= J; ++j) {
    double expect = 0.0;  // ||T S_j||^2 within the truncation
    for (int k = 0; k < op.size(); ++k) expect += std::norm(op.entry(k, j));
    const double se = st[j].standard_error();
    const double z = se > 0 ? (st[j].mean() - expect) / se : 0.0;
    all = all && std::abs(z) <= 3.0;
    rep.rows.push_back({double(j), st[j].mean(), se, expect, z});
  }
  rep.summary = {{"all_within_3se", all}, {"max_index", J}};
  finish_report(rep, t0);
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  if (c.kind == "zero_count") return zero_count_stats(c);
  if (c.kind == "hole") return hole_probability(c);
  if (c.kind == "linstat") return linear_statistic(c);
  if (c.kind == "tails") return deviation_and_supnorm_tails(c);
  if (c.kind == "densitymap") return empirical_density_map(c);
  throw config_error("config.invalid_value", "unknown experiment kind '" + c.kind + "'");
}

}  // namespace gaf
