#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "grdf/crossing.hpp"
#include "grdf/environment.hpp"
#include "grdf/forest.hpp"
#include "grdf/stats.hpp"

namespace grdf {

// Monte Carlo drivers. Trial i always runs on derive_trial_seed(cfg.seed, i),
// so every result is a function of (config, seed) alone, whatever `workers`.

inline EnvConfig trial_config(const EnvConfig& cfg, std::size_t trial) {
  EnvConfig c = cfg;
  c.seed = derive_trial_seed(cfg.seed, trial);
  return c;
}

/// First `count` renewals of the path from (0, 0), one row per trial.
std::vector<std::vector<RenewalRecord>> renewal_samples(const EnvConfig& cfg, std::int64_t trials,
                                                        std::int64_t count, std::int64_t horizon,
                                                        int workers);

struct ConstantsEstimate {
  double gamma_hat = 0.0;
  double gamma_stderr = 0.0;
  double sigma_hat = 0.0;
  double sigma_stderr = 0.0;
  double increment_mean = 0.0;  // mean of pi(T1) - pi(0), zero by symmetry
  double increment_stderr = 0.0;
  std::int64_t trials = 0;
};

/// gamma = E[T1], sigma = sd of pi(T1) - pi(0), from first renewals.
ConstantsEstimate constants_from_renewals(const std::vector<std::vector<RenewalRecord>>& runs);
ConstantsEstimate estimate_constants(const EnvConfig& cfg, std::int64_t trials,
                                     std::int64_t horizon, int workers);

/// pi(n^2 gamma) / (n sigma) for the path from (0, 0); time rounded to the
/// nearest integer.
std::vector<double> donsker_samples(const EnvConfig& cfg, long n, double gamma, double sigma,
                                    std::int64_t trials, int workers);

/// Y^m_n - m for n = 1..depth, one row per trial.
std::vector<std::vector<std::int64_t>> martingale_increments(const EnvConfig& cfg, std::int64_t m,
                                                             std::size_t depth,
                                                             std::int64_t trials,
                                                             std::int64_t horizon, int workers);

std::vector<CoalescenceResult> coalescence_samples(const EnvConfig& cfg, std::int64_t m,
                                                   std::int64_t trials, std::int64_t horizon,
                                                   int workers);

struct CoalescenceTail {
  SurvivalCurve theta, nu, T_nu;
  PowerLawFit theta_fit, nu_fit, T_nu_fit;
  /// log C for P[theta > k] = C k^(-1/2).
  double theta_log_intercept = 0.0;
  std::int64_t nu_fit_cap = 0;  // largest nu used in the nu fit
};

/// Survival curves on a log grid and power fits over [k_min, k_max]. Points
/// beyond horizon/10 are dropped; for nu the horizon is converted to renewal
/// counts with the mean joint renewal spacing.
CoalescenceTail coalescence_tail(const std::vector<CoalescenceResult>& samples, double k_min,
                                 double k_max, std::int64_t horizon);

/// Y at the first joint renewal with Y <= 0, or nothing if censored.
std::optional<std::int64_t> first_nonpositive_value(const Environment& env, std::int64_t m,
                                                    std::int64_t horizon);

struct OvershootRow {
  std::int64_t m = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t hits = 0;
  std::int64_t censored = 0;
};

struct OvershootReport {
  std::vector<OvershootRow> rows;
  double min_mean = 0.0;
  double min_mean_stderr = 0.0;
  LinearFit trend;  // weighted fit of mean on m
};

OvershootReport overshoot_report(const EnvConfig& cfg, const std::vector<std::int64_t>& ms,
                                 std::int64_t trials, std::int64_t horizon, int workers);

/// Lattice version of an interval in rescaled units.
struct LatticeScale {
  long n = 1;
  double gamma = 1.0;
  double sigma = 1.0;

  std::int64_t time(double t) const;   // round(n^2 gamma t), at least 1
  std::int64_t space(double x) const;  // round(n sigma x)
};

struct ConditionE {
  double mean = 0.0;
  double stderr_ = 0.0;
  double bound = 0.0;
  double margin_se = 0.0;  // (bound - mean) / stderr
  std::int64_t lattice_width = 0;
  std::int64_t lattice_time = 0;
  std::vector<std::int64_t> etas;
};

/// eta(0, t, 0, width) in rescaled units against 1 + width / sqrt(pi t).
ConditionE condition_E_check(const EnvConfig& cfg, const LatticeScale& scale, double t,
                             double width, std::int64_t trials, int workers);

struct ProportionCell {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
  bool low_sample = false;  // fewer than 30 successes or failures
};

ProportionCell make_cell(std::int64_t successes, std::int64_t trials);

/// P[eta(0, k, 0, m) > 1] on the lattice.
ProportionCell eta_exceeds_one(const EnvConfig& cfg, std::int64_t k, std::int64_t m,
                               std::int64_t trials, int workers);

struct ConditionBRow {
  double t = 0.0;
  double eps = 0.0;
  ProportionCell cell;
};

/// P[eta(0, t, -eps, eps) > 1] in rescaled units over the grid.
std::vector<ConditionBRow> condition_B_curve(const EnvConfig& cfg, const LatticeScale& scale,
                                             const std::vector<double>& ts,
                                             const std::vector<double>& eps,
                                             std::int64_t trials, int workers);

struct ConditionTRow {
  double t = 0.0;
  std::int64_t lattice_rho = 0;
  std::int64_t lattice_time = 0;
  ProportionCell cell;
  double ratio = 0.0;  // estimate / t
  double ratio_stderr = 0.0;
};

/// P[A+(0, 0; rho, t)] and P/t in rescaled units.
std::vector<ConditionTRow> condition_T_curve(const EnvConfig& cfg, const LatticeScale& scale,
                                             double rho, const std::vector<double>& ts,
                                             std::int64_t trials, int workers);

}  // namespace grdf
