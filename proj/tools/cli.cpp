#include "gaf/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gaf/error.hpp"
#include "gaf/experiments.hpp"
#include "gaf/model.hpp"
#include "gaf/section.hpp"
#include "gaf/semiclassical.hpp"
#include "gaf/toeplitz.hpp"
#include "gaf/zeros.hpp"

namespace gaf::cli {

using nlohmann::json;

namespace {

enum class Type { integer, count, real, boolean, string, int_list, real_list, point, points, symbol };

struct Field {
  std::string key;
  Type type;
  json fallback;  // null: required
  std::string help;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw config_error("config.invalid_value", "'" + key + "' " + what);
}

double parse_real(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    bad(key, "expects a number, got '" + s + "'");
  }
  if (used != s.size()) bad(key, "expects a number, got '" + s + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    bad(key, "expects an integer, got '" + s + "'");
  }
  if (used != s.size()) bad(key, "expects an integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

json parse_point(const std::string& key, const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) bad(key, "expects re,im");
  return json::array({parse_real(key, parts[0]), parse_real(key, parts[1])});
}

// Flag text -> JSON value of the field's type.
json from_flag(const Field& f, const std::vector<std::string>& values) {
  const std::string& s = values.back();
  switch (f.type) {
    case Type::integer:
      return parse_int(f.key, s);
    case Type::count: {
      const long long v = parse_int(f.key, s);
      if (v < 0) bad(f.key, "must be >= 0");
      return static_cast<std::uint64_t>(v);
    }
    case Type::real:
      return parse_real(f.key, s);
    case Type::boolean:
      if (s == "true" || s == "1") return true;
      if (s == "false" || s == "0") return false;
      bad(f.key, "expects true or false");
    case Type::string:
      return s;
    case Type::int_list: {
      json a = json::array();
      for (const auto& part : split(s, ',')) a.push_back(parse_int(f.key, part));
      return a;
    }
    case Type::real_list: {
      json a = json::array();
      for (const auto& part : split(s, ',')) a.push_back(parse_real(f.key, part));
      return a;
    }
    case Type::point:
      return parse_point(f.key, s);
    case Type::points: {
      json a = json::array();
      for (const auto& v : values) a.push_back(parse_point(f.key, v));
      return a;
    }
    case Type::symbol:
      if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
        try {
          return json::parse(s);
        } catch (const json::parse_error&) {
          bad(f.key, "is not valid JSON");
        }
      }
      return s;
  }
  return nullptr;
}

void check_type(const Field& f, const json& v) {
  auto is_point = [](const json& p) { return p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(); };
  bool ok = true;
  switch (f.type) {
    case Type::integer: ok = v.is_number_integer(); break;
    case Type::count: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0); break;
    case Type::real: ok = v.is_number(); break;
    case Type::boolean: ok = v.is_boolean(); break;
    case Type::string: ok = v.is_string(); break;
    case Type::int_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_number_integer();
      break;
    case Type::real_list:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && e.is_number();
      break;
    case Type::point: ok = is_point(v); break;
    case Type::points:
      ok = v.is_array();
      for (const auto& e : v) ok = ok && is_point(e);
      break;
    case Type::symbol: ok = v.is_string() || v.is_object(); break;
  }
  if (!ok) bad(f.key, "has the wrong type");
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s)
    if (c == '_') c = '-';
  return "--" + s;
}

struct Output {
  ExperimentReport report;
  std::optional<std::string> csv;  // replaces the numeric table when set
  std::vector<std::string> lines;  // printed to stdout
  std::optional<std::pair<std::string, std::string>> failure;  // numeric failure: reason, message
};

using Runner = std::function<Output(const json& config, int threads)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<Field> fields;
  Runner runner;
};

// ---------------------------------------------------------------- shared pieces

const Field kModel{"model", Type::string, "fock", "fock or disc"};
const Field kLevel{"p", Type::integer, 1, "Fock level"};
const Field kEps{"truncation_eps", Type::real, 1e-12, "basis truncation tolerance"};
const Field kSeed{"seed", Type::count, 1, "master seed"};

ModelSpace space_of(const json& c) {
  const std::string m = c.at("model");
  if (m == "fock") {
    const int p = c.at("p");
    if (p < 1) bad("p", "must be >= 1");
    return ModelSpace::fock(p);
  }
  if (m == "disc") return ModelSpace::disc();
  bad("model", "must be fock or disc");
}

cplx point(const json& p) { return {p[0].get<double>(), p[1].get<double>()}; }

ExperimentReport plain_report(const std::string& kind, const json& config) {
  ExperimentReport r;
  r.kind = kind;
  r.provenance = {{"config_hash", config_hash(config)}, {"version", GAF_VERSION}, {"config", config}};
  return r;
}

std::string zstr(cplx z) { return "(" + fmt(z.real()) + ", " + fmt(z.imag()) + ")"; }

// ---------------------------------------------------------------- commands

Output run_kernel(const json& c, int) {
  const ModelSpace space = space_of(c);
  const double eps = c.at("truncation_eps");
  Output o;
  o.report = plain_report("kernel", c);
  o.report.columns = {"re", "im", "closed_form", "truncated", "order", "abs_difference"};
  for (const auto& pj : c.at("z")) {
    const cplx z = point(pj);
    if (!space.in_domain(z)) bad("z", "point " + zstr(z) + " lies outside the domain");
    const TruncationCertificate cert = truncation_order(space, std::abs(z), eps);
    const double closed = kernel_diag(space, z);
    const double trunc = kernel_diag(space, z, KernelMode::truncated_at(cert.order));
    o.report.rows.push_back({z.real(), z.imag(), closed, trunc, double(cert.order), std::abs(closed - trunc)});
    o.lines.push_back("z=" + zstr(z) + " closed_form=" + fmt(closed) + " truncated=" + fmt(trunc) +
                      " order=" + std::to_string(cert.order));
  }
  o.report.summary = {{"space", space.describe()}, {"points", c.at("z").size()}};
  return o;
}

Output run_density(const json& c, int) {
  const ModelSpace space = space_of(c);
  const double h = c.at("fd_step");
  Output o;
  o.report = plain_report("density", c);
  o.report.columns = {"re", "im", "closed_form", "finite_difference", "abs_difference"};
  for (const auto& pj : c.at("z")) {
    const cplx z = point(pj);
    if (!space.in_domain(z)) bad("z", "point " + zstr(z) + " lies outside the domain");
    const double a = ek_density(space, z), b = ek_density_fd(space, z, h);
    o.report.rows.push_back({z.real(), z.imag(), a, b, std::abs(a - b)});
    o.lines.push_back("z=" + zstr(z) + " density=" + fmt(a) + " finite_difference=" + fmt(b));
  }
  o.report.summary = {{"space", space.describe()}, {"points", c.at("z").size()}};
  return o;
}

TruncationCertificate radius_certificate(const ModelSpace& space, const json& c) {
  const double r = c.at("radius");
  if (!(r > 0) || r >= space.domain_radius()) bad("radius", "must lie inside the domain");
  const TruncationCertificate cert = truncation_order(space, r, c.at("truncation_eps").get<double>());
  if (cert.order > kMaxDegree) bad("radius", "needs a basis order above " + std::to_string(kMaxDegree));
  return cert;
}

Output run_sample(const json& c, int) {
  const ModelSpace space = space_of(c);
  const TruncationCertificate cert = radius_certificate(space, c);
  const std::uint64_t seed = c.at("seed"), count = c.at("count");
  Output o;
  o.report = plain_report("sample", c);
  o.report.columns = {"sample", "k", "re", "im"};
  for (std::uint64_t i = 0; i < count; ++i) {
    RngStream s(seed, i);
    const SectionSample sec = sample_section(space, cert, s);
    for (int k = 0; k <= sec.order(); ++k)
      o.report.rows.push_back({double(i), double(k), sec.coefficients[k].real(), sec.coefficients[k].imag()});
  }
  o.report.trials = count;
  o.report.summary = {{"space", space.describe()},
                      {"order", cert.order},
                      {"tail_bound", cert.tail_bound},
                      {"radius", cert.radius},
                      {"streams", "sample i uses stream i of the master seed"}};
  o.lines.push_back(std::to_string(count) + " sections, basis order " + std::to_string(cert.order));
  return o;
}

Output run_zeros(const json& c, int threads) {
  if (c.at("mode") == "count") {
    json e = c;
    e.erase("mode");
    e.erase("count");
    e["kind"] = "zero_count";
    ExperimentConfig ec = ExperimentConfig::from_json(e);
    ec.threads = threads;
    Output o;
    o.report = zero_count_stats(ec);
    const auto& s = o.report.summary;
    if (!s.empty())
      o.lines.push_back("mean=" + fmt(s["mean"]) + " standard_error=" + fmt(s["standard_error"]) +
                        " analytic_mean=" + fmt(s["analytic_mean"]));
    return o;
  }
  if (c.at("mode") != "locate") bad("mode", "must be locate or count");
  const ModelSpace space = space_of(c);
  const TruncationCertificate cert = radius_certificate(space, c);
  const double r = c.at("radius");
  const std::uint64_t seed = c.at("seed"), count = c.at("count");
  Output o;
  o.report = plain_report("zeros", c);
  o.report.columns = {"sample", "re", "im", "multiplicity"};
  json per = json::array();
  int invalid = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    RngStream s(seed, i);
    const ZeroSet zs = roots_in_disk(sample_section(space, cert, s), r);
    for (const Root& z : zs.roots)
      o.report.rows.push_back({double(i), z.position.real(), z.position.imag(), double(z.multiplicity)});
    per.push_back({{"sample", i},
                   {"status", to_string(zs.validation.status)},
                   {"zeros", zs.total_multiplicity()},
                   {"argument_count", zs.validation.argument_count},
                   {"max_newton_residual", zs.validation.max_newton_residual}});
    if (!zs.valid()) ++invalid;
    o.lines.push_back("sample " + std::to_string(i) + ": " + std::to_string(zs.total_multiplicity()) + " zeros in |z| < " +
                      fmt(r) + " (" + to_string(zs.validation.status) + ")");
  }
  o.report.trials = count;
  o.report.summary = {{"space", space.describe()}, {"order", cert.order}, {"samples", per}};
  if (invalid) {
    o.report.flags.push_back("ZEROS_INVALID");
    o.failure = {{"numeric.zeros_invalid", std::to_string(invalid) + " zero sets failed validation"}};
  }
  return o;
}

ToeplitzOperator toeplitz_of(const json& c) {
  const int n = c.at("order");
  if (n < 0 || n > kMaxDegree) bad("order", "must lie in [0, 512]");
  return build_toeplitz(space_of(c), SymbolDescriptor::from_json(c.at("symbol")), n);
}

Output run_toeplitz(const json& c, int) {
  ToeplitzOperator op = toeplitz_of(c);
  spectrum(op);
  const TraceHs th = trace_and_hs(op);
  Output o;
  o.report = plain_report("toeplitz", c);
  o.report.columns = {"k", "eigenvalue", "diagonal_re", "diagonal_im"};
  const auto& ev = op.eigenvalues();
  for (int k = 0; k < op.size(); ++k)
    o.report.rows.push_back({double(k), ev[k], op.entry(k, k).real(), op.entry(k, k).imag()});
  o.report.summary = to_json(op);
  o.report.summary["trace"] = th.trace;
  o.report.summary["hs_norm"] = th.hs_norm;
  o.report.summary["independent_trace"] = th.independent_trace;
  o.lines.push_back("order " + std::to_string(op.order()) + " trace=" + fmt(th.trace) + " hs_norm=" + fmt(th.hs_norm) +
                    " independent_trace=" + fmt(th.independent_trace));
  return o;
}

Output run_wiener(const json& c, int threads) {
  ToeplitzOperator op = toeplitz_of(c);
  spectrum(op);
  Output o;
  o.report = wiener_covariance(op, c.at("max_index"), c.at("draws"), c.at("seed"), threads);
  o.report.kind = "wiener";
  o.report.provenance["config"] = c;
  o.report.provenance["config_hash"] = config_hash(c);
  o.lines.push_back(std::string("covariance within 3 SE: ") + (o.report.summary["all_within_3se"].get<bool>() ? "yes" : "no"));
  return o;
}

Output run_semiclassical(const json& c, int) {
  const SymbolDescriptor f = SymbolDescriptor::from_json(c.at("symbol"));
  const cplx x = point(c.at("x"));
  Output o;
  o.report = plain_report("semiclassical", c);
  json& s = o.report.summary;
  const BCoefficients b = b_coefficients(f, x);
  s["b"] = {b.b0, b.b1, b.b2};
  o.lines.push_back("b0=" + fmt(b.b0) + " b1=" + fmt(b.b1) + " b2=" + fmt(b.b2));
  try {
    const Order2Data d = order2_data(f, x);
    s["order2"] = to_json(d);
    try {
      s["F_log_density_at_x0"] = F_log_density(d, 0.0, 1);
    } catch (const Error& e) {
      s["F_log_density_at_x0"] = nullptr;
      s["F_log_density_note"] = e.reason();
    }
    s["F_log_density_fd_at_x0"] = F_log_density_fd(d, 0.0);
  } catch (const Error& e) {
    if (e.reason() != "semiclassical.not_order2") throw;
    s["order2"] = nullptr;
    s["order2_note"] = e.what();
  }
  const std::vector<int> levels = c.at("p_list");
  if (levels.size() >= 3) {
    const GrowthFit g = t2_growth_exponent(levels, f, x);
    s["growth"] = {{"kappa", g.kappa}, {"kappa_naive", g.kappa_naive}, {"n_minus_kappa", g.n_minus_kappa}};
    o.report.columns = {"p", "t2"};
    for (std::size_t i = 0; i < g.levels.size(); ++i) o.report.rows.push_back({double(g.levels[i]), g.t2[i]});
    o.lines.push_back("growth exponent " + fmt(g.kappa));
  } else if (!levels.empty()) {
    bad("p_list", "needs at least three levels for the growth fit");
  }
  const double R = c.at("planck_radius");
  if (R > 0) {
    const PlanckPairing pp = planck_pairing(f, x, R, c.at("planck_p"), c.at("phi"));
    s["planck"] = {{"numeric", pp.numeric},
                   {"predicted", pp.predicted},
                   {"ratio", pp.ratio},
                   {"euclid_radius", pp.euclid_radius},
                   {"basis_order", pp.basis_order}};
    o.lines.push_back("planck numeric=" + fmt(pp.numeric) + " predicted=" + fmt(pp.predicted) + " ratio=" + fmt(pp.ratio));
  }
  return o;
}

Output run_calibrate(const json& c, int) {
  Output o;
  o.report = plain_report("calibrate", c);
  const auto checks = calibration_suite();
  std::ostringstream csv;
  csv << "name,value,expected,tolerance,pass\n";
  json arr = json::array();
  int failed = 0;
  for (const auto& k : checks) {
    csv << k.name << "," << fmt(k.value) << "," << fmt(k.expected) << "," << fmt(k.tolerance) << "," << (k.pass ? 1 : 0)
        << "\n";
    arr.push_back({{"name", k.name}, {"value", k.value}, {"expected", k.expected}, {"tolerance", k.tolerance}, {"pass", k.pass}});
    o.lines.push_back(std::string(k.pass ? "PASS " : "FAIL ") + k.name + " value=" + fmt(k.value) +
                      " expected=" + fmt(k.expected));
    failed += !k.pass;
  }
  o.report.columns = {"name", "value", "expected", "tolerance", "pass"};
  o.report.summary = {{"checks", arr}, {"failed", failed}};
  o.csv = csv.str();
  if (failed) o.failure = {{"numeric.calibration_fail", std::to_string(failed) + " calibration checks failed"}};
  return o;
}

Runner experiment(const std::string& kind) {
  return [kind](const json& c, int threads) {
    json e = c;
    e["kind"] = kind;
    ExperimentConfig ec = ExperimentConfig::from_json(e);
    ec.threads = threads;
    Output o;
    o.report = run_experiment(ec);
    for (const auto& f : o.report.flags) {
      if (f == "UNRESOLVED") o.failure = {{"numeric.unresolved", "the largest level has fewer than 25 hole events"}};
    }
    std::string s = o.report.summary.dump();
    if (s.size() > 400) s = s.substr(0, 400) + "...";
    o.lines.push_back(s);
    return o;
  };
}

std::vector<Command> commands() {
  const Field z{"z", Type::points, nullptr, "evaluation point re,im (repeatable)"};
  const Field symbol{"symbol", Type::symbol, "gaussian", "symbol name or JSON object"};
  const Field order{"order", Type::integer, 30, "basis truncation order N"};
  const Field trials{"trials", Type::count, 1000, "number of trials"};
  const Field radius{"radius", Type::real, 1.0, "disk radius"};
  return {
      {"kernel", "Bergman kernel diagonal: closed form and certified truncation", {kModel, kLevel, z, kEps}, run_kernel},
      {"density",
       "expected zero density: closed form and finite differences",
       {kModel, kLevel, z, {"fd_step", Type::real, 1e-3, "finite-difference step"}},
       run_density},
      {"sample",
       "standard Gaussian sections (coefficients)",
       {kModel, kLevel, radius, kEps, kSeed, {"count", Type::count, 1, "number of sections"}},
       run_sample},
      {"zeros",
       "zeros in a disk (locate) or zero-count statistics (count)",
       {{"mode", Type::string, "locate", "locate or count"},
        kModel,
        kLevel,
        radius,
        kEps,
        kSeed,
        {"count", Type::count, 1, "sections to locate (locate mode)"},
        trials},
       run_zeros},
      {"toeplitz", "Toeplitz matrix, spectrum, trace and HS norm", {kModel, kLevel, symbol, order}, run_toeplitz},
      {"wiener",
       "covariance of Wiener-randomized sections",
       {kModel, kLevel, symbol, order, kSeed, {"draws", Type::count, 10000, "number of draws"},
        {"max_index", Type::integer, 10, "largest basis index j checked"}},
       run_wiener},
      {"semiclassical",
       "b coefficients, order-2 data, growth exponent and Planck-scale pairing",
       {{"symbol", Type::symbol, "r2_gaussian", "symbol name or JSON object"},
        {"x", Type::point, json::array({0.0, 0.0}), "base point re,im"},
        {"p_list", Type::int_list, json::array({20, 40, 80, 120, 160, 200}), "levels for the growth fit"},
        {"planck_radius", Type::real, 0.0, "R of the Planck-scale ball (0 skips the pairing)"},
        {"planck_p", Type::integer, 100, "level for the Planck-scale pairing"},
        {"phi", Type::real, 1.0, "value of the test form at x"}},
       run_semiclassical},
      {"hole",
       "hole probabilities with lower-bound certificates",
       {kLevel,
        {"p_list", Type::int_list, json::array({1, 4, 9, 16, 25}), "levels (scaled mode)"},
        trials,
        kSeed,
        kEps,
        {"hole_mode", Type::string, "scaled", "scaled or fixed"},
        {"r0", Type::real, 0.3, "hole radius in scaled mode"},
        radius,
        {"radii", Type::real_list, json::array(), "radii in fixed mode"},
        {"margin", Type::real, 0.2, "certificate margin m"},
        {"root_crosscheck", Type::boolean, false, "cross-check every indicator with located roots"}},
       experiment("hole")},
      {"linstat",
       "linear statistics of the zero divisor",
       {kLevel, {"p_list", Type::int_list, json::array({1, 2, 4, 8}), "levels"}, trials, kSeed, kEps,
        {"test_radius", Type::real, 3.0, "support radius of the bump test form"}},
       experiment("linstat")},
      {"tails",
       "deviation and sup-norm tail frequencies",
       {kLevel, {"p_list", Type::int_list, json::array({1, 2, 4, 8}), "levels"}, trials, kSeed, kEps,
        {"test_radius", Type::real, 3.0, "support radius of the bump test form"},
        {"delta", Type::real, 0.5, "deviation threshold"},
        {"u_radius", Type::real, 1.0, "radius of the sup-norm region"}},
       experiment("tails")},
      {"densitymap",
       "empirical zero density per annular sector",
       {kModel, kLevel, trials, kSeed, kEps,
        {"sampler", Type::string, "standard", "standard or wiener"},
        symbol,
        {"basis_order", Type::integer, 0, "Wiener truncation (0: certificate order)"},
        {"ring_edges", Type::real_list, json::array({0.0, 0.5, 1.0, 1.5, 2.0}), "ring radii"},
        {"sectors", Type::integer, 4, "angular sectors"}},
       experiment("densitymap")},
      {"calibrate", "semiclassical calibration oracle suite", {}, run_calibrate},
  };
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("io.read_failed", "cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("config.parse_error", "config file '" + path + "': " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("io.write_failed", "cannot open '" + path + "' for writing");
  f << text;
  f.close();
  if (!f) throw io_error("io.write_failed", "failed writing '" + path + "'");
}

int code_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::numeric: return kNumericFailure;
    case ErrorCategory::io: return kIoError;
    default: return kConfigError;
  }
}

void report_error(std::ostream& err, const std::string& reason, const std::string& message) {
  std::string m = message;
  for (char& ch : m)
    if (ch == '\n') ch = ' ';
  err << "gaflab: error: " << reason << ": " << m << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::vector<Command> cmds = commands();

  CLI::App app{"Numerical lab for Gaussian random holomorphic sections", "gaflab"};
  app.set_version_flag("--version", GAF_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_name, format = "both";
  int threads = 0;
  bool dump = false, timing = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_name, "output prefix (default: the subcommand name)");
  app.add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  app.add_option("--threads", threads, "worker threads (default: THREADS, else all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--dump-config", dump, "print the resolved config and exit");
  app.add_flag("--timing", timing, "include wall-clock time in the report");

  std::vector<std::map<std::string, std::vector<std::string>>> flags(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    for (const Field& f : cmds[i].fields) {
      auto* opt = sub->add_option(flag_name(f.key), flags[i][f.key], f.help);
      if (f.type != Type::points) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    subs.push_back(sub);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ExtrasError& e) {
    report_error(err, "config.unknown_key", e.what());
    return kConfigError;
  } catch (const CLI::RequiredError& e) {
    report_error(err, "config.missing_field", e.what());
    return kConfigError;
  } catch (const CLI::ParseError& e) {
    report_error(err, "config.invalid_value", e.what());
    return kConfigError;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Command& cmd = cmds[which];

  try {
    // defaults <- config file <- flags
    json file = json::object();
    if (!config_path.empty()) {
      file = read_config(config_path);
      if (!file.is_object()) throw config_error("config.invalid_value", "config file must hold a JSON object");
    }
    if (file.contains("command")) {
      if (file["command"] != cmd.name)
        throw config_error("config.invalid_value", "config is for '" + file["command"].dump() + "', not '" + cmd.name + "'");
      file.erase("command");
    }
    std::map<std::string, const Field*> known;
    for (const Field& f : cmd.fields) known[f.key] = &f;
    for (const auto& item : file.items())
      if (!known.count(item.key()))
        throw config_error("config.unknown_key", "unknown key '" + item.key() + "' for " + cmd.name);

    json config = json::object();
    for (const Field& f : cmd.fields) {
      const auto& fl = flags[which][f.key];
      if (!fl.empty()) {
        config[f.key] = from_flag(f, fl);
      } else if (file.contains(f.key)) {
        check_type(f, file[f.key]);
        config[f.key] = file[f.key];
      } else if (!f.fallback.is_null()) {
        config[f.key] = f.fallback;
      } else {
        throw config_error("config.missing_field", "missing required field '" + f.key + "' (" + flag_name(f.key) + ")");
      }
    }

    if (dump) {
      json d = config;
      d["command"] = cmd.name;
      out << d.dump(2) << "\n";
      return kOk;
    }

    const int workers = resolve_threads(threads);
    const auto t0 = std::chrono::steady_clock::now();
    Output o = cmd.runner(config, workers);
    if (o.report.provenance.contains("config")) o.report.provenance["config"]["command"] = cmd.name;
    o.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string base = out_name.empty() ? cmd.name : out_name;
    if (format != "csv") write_file(base + ".report.json", o.report.to_json(timing).dump(2) + "\n");
    if (format != "json") write_file(base + ".table.csv", o.csv ? *o.csv : o.report.to_csv());
    for (const auto& line : o.lines) out << line << "\n";
    if (o.failure) {
      report_error(err, o.failure->first, o.failure->second);
      return kNumericFailure;
    }
    return kOk;
  } catch (const Error& e) {
    report_error(err, e.reason(), e.what());
    return code_of(e.category());
  } catch (const json::exception& e) {
    report_error(err, "config.invalid_value", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    report_error(err, "internal.failure", e.what());
    return kNumericFailure;
  }
}

}  // namespace gaf::cli
