#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gaf/model.hpp"
#include "gaf/rng.hpp"
#include "gaf/section.hpp"
#include "gaf/symbol.hpp"
#include "gaf/toeplitz.hpp"
#include "gaf/zeros.hpp"

namespace gaf {

struct ExperimentConfig {
  std::string kind = "zero_count";  // < zero_count, hole, linstat, tails, densitymap
  std::string model = "fock";       // < fock or disc
  int p = 1;
  std::vector<int> p_list;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  double truncation_eps = 1e-12;
  int threads = 0;  // < 0: THREADS environment variable, else hardware concurrency

  // zero_count and hole (fixed mode)
  double radius = 1.0;
  std::vector<double> radii;
  // hole
  std::string hole_mode = "scaled";  // < scaled or fixed
  double r0 = 0.3;
  double margin = 0.2;
  bool root_crosscheck = false;
  // linstat, tails
  double test_radius = 3.0;
  double delta = 0.5;
  double u_radius = 1.0;
  // densitymap
  std::string sampler = "standard";  // < standard or wiener
  nlohmann::json symbol = "gaussian";
  int basis_order = 0;  // < Wiener truncation; 0 picks the certificate order
  std::vector<double> ring_edges{0.0, 0.5, 1.0, 1.5, 2.0};
  int sectors = 4;

  // Rejects unknown keys (config.unknown_key) and bad values (config.invalid_value).
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  ModelSpace space(int level) const;
  std::vector<int> levels() const;  // < p_list, or {p}
};

struct ExperimentReport {
  std::string kind;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> flags;
  std::uint64_t trials = 0;
  std::uint64_t discards = 0;
  nlohmann::json provenance = nlohmann::json::object();
  double wall_seconds = 0.0;

  // Full report; timing is left out when `with_timing` is false so reruns compare bit for bit.
  nlohmann::json to_json(bool with_timing = true) const;
  std::string to_csv() const;
};

// FNV-1a of the canonical config dump.
std::string config_hash(const nlohmann::json& config);

int resolve_threads(int hint);

inline constexpr std::uint64_t kResampleStride = std::uint64_t{1} << 32;
inline constexpr int kMaxResamples = 16;

// results[i] = task(i) for i < n on `threads` workers. Each index is handled
// by exactly one call, so per-trial streams make the output independent of
// the worker count. The exception of the lowest failing index is rethrown.
template <class R, class Task>
std::vector<R> run_trials(std::uint64_t n, int threads, Task&& task) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t begin = next.fetch_add(64);
      if (begin >= n) return;
      const std::uint64_t end = std::min<std::uint64_t>(n, begin + 64);
      for (std::uint64_t i = begin; i < end; ++i) {
        try {
          out[i] = task(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    }
  };
  const int t = std::max(1, threads);
  if (t == 1 || n < 128) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Stream for attempt `attempt` of trial `i`: i itself, then attempt * 2^32 + i.
inline RngStream trial_stream(std::uint64_t seed, std::uint64_t i, int attempt) {
  return RngStream(seed, attempt == 0 ? i : static_cast<std::uint64_t>(attempt) * kResampleStride + i);
}

ExperimentReport zero_count_stats(const ExperimentConfig& config);
ExperimentReport hole_probability(const ExperimentConfig& config);
ExperimentReport linear_statistic(const ExperimentConfig& config);
ExperimentReport deviation_and_supnorm_tails(const ExperimentConfig& config);
ExperimentReport empirical_density_map(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config);

struct HoleCertificate {
  bool vacuous = false;
  double log_bound = 0.0;   // < best valid bound (optimized cutoff)
  int cutoff = 0;           // < number of small coefficients q_p - 1 at the optimum
  double c_tilde = 0.0;     // < second-moment constant at the optimum
  double literal_log_bound = 0.0;  // < with the cutoff from the tail search; nan when vacuous
  int literal_cutoff = 0;
  bool literal_vacuous = false;
  double m_tilde = 0.0;
  double outer_radius = 0.0;
  std::string diagnostics;
};

// Explicit log lower bound for P(no zeros in |z| < r0) on Fock level p, built
// from the good event {|eta_0| >= 1, small middle coefficients, small tail}.
HoleCertificate hole_lower_bound_certificate(int p, double r0, double margin);

struct AffineP2Fit {
  double intercept = 0.0;
  double C = 0.0;  // < v ~ intercept - C p^2
  double max_relative_residual = 0.0;
};
AffineP2Fit fit_minus_c_p2(const std::vector<int>& levels, const std::vector<double>& values);

// E|<s, S_j>|^2 over Wiener draws against ||T_f S_j||^2 = (T^2)_{jj}.
ExperimentReport wiener_covariance(const ToeplitzOperator& op, int max_index, std::uint64_t draws, std::uint64_t seed,
                                   int threads);

nlohmann::json to_json(const HoleCertificate& c);

}  // namespace gaf
