#include "grdf/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "grdf/parallel.hpp"

namespace grdf {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t as_count(std::int64_t trials) {
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  return static_cast<std::size_t>(trials);
}

}  // namespace

std::vector<std::vector<RenewalRecord>> renewal_samples(const EnvConfig& cfg, std::int64_t trials,
                                                        std::int64_t count, std::int64_t horizon,
                                                        int workers) {
  return parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    return evolve_with_renewals(env, {0, 0}, {count, horizon}).renewals;
  });
}

ConstantsEstimate constants_from_renewals(const std::vector<std::vector<RenewalRecord>>& runs) {
  std::vector<double> gaps, incs;
  for (const auto& r : runs) {
    gaps.push_back(static_cast<double>(r.at(0).gap));
    incs.push_back(static_cast<double>(r.at(0).position));
  }
  const MeanEstimate g = mean_estimate(gaps);
  const MeanEstimate y = mean_estimate(incs);
  ConstantsEstimate c;
  c.trials = static_cast<std::int64_t>(runs.size());
  c.gamma_hat = g.mean;
  c.gamma_stderr = g.stderr_;
  c.increment_mean = y.mean;
  c.increment_stderr = y.stderr_;
  c.sigma_hat = y.sd;
  // Delta method for the sample sd: Var(s^2) ~ (m4 - s^4) / n.
  if (y.sd > 0.0 && y.n > 1) {
    double m4 = 0.0;
    for (double v : incs) m4 += std::pow(v - y.mean, 4);
    m4 /= static_cast<double>(y.n);
    const double var_s2 = std::max(0.0, m4 - std::pow(y.sd, 4)) / static_cast<double>(y.n);
    c.sigma_stderr = std::sqrt(var_s2) / (2.0 * y.sd);
  }
  return c;
}

ConstantsEstimate estimate_constants(const EnvConfig& cfg, std::int64_t trials,
                                     std::int64_t horizon, int workers) {
  if (trials < 100) throw ConfigError("trials", "constant estimation needs >= 100 trials");
  return constants_from_renewals(renewal_samples(cfg, trials, 1, horizon, workers));
}

std::int64_t LatticeScale::time(double t) const {
  const double nd = static_cast<double>(n);
  return std::max<std::int64_t>(1, std::llround(nd * nd * gamma * t));
}

std::int64_t LatticeScale::space(double x) const {
  return std::llround(static_cast<double>(n) * sigma * x);
}

std::vector<double> donsker_samples(const EnvConfig& cfg, long n, double gamma, double sigma,
                                    std::int64_t trials, int workers) {
  const LatticeScale scale{n, gamma, sigma};
  const std::int64_t t = scale.time(1.0);
  const double space = static_cast<double>(n) * sigma;
  return parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    return walk_position(env, {0, 0}, t).to_double() / space;
  });
}

std::vector<std::vector<std::int64_t>> martingale_increments(const EnvConfig& cfg, std::int64_t m,
                                                             std::size_t depth,
                                                             std::int64_t trials,
                                                             std::int64_t horizon, int workers) {
  return parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    const DifferenceSeries s = difference_process(env, m, depth, horizon);
    std::vector<std::int64_t> out;
    for (std::size_t n = 1; n <= depth; ++n) out.push_back(s.values[n] - m);
    return out;
  });
}

std::vector<CoalescenceResult> coalescence_samples(const EnvConfig& cfg, std::int64_t m,
                                                   std::int64_t trials, std::int64_t horizon,
                                                   int workers) {
  return parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    return coalescence_experiment(env, m, horizon);
  });
}

CoalescenceTail coalescence_tail(const std::vector<CoalescenceResult>& samples, double k_min,
                                 double k_max, std::int64_t horizon) {
  std::vector<double> theta, nu, tnu;
  std::vector<bool> theta_c, nu_c;
  double spacing_sum = 0.0;
  std::int64_t spacing_n = 0;
  for (const auto& s : samples) {
    theta.push_back(static_cast<double>(s.theta));
    theta_c.push_back(s.theta_censored);
    nu.push_back(static_cast<double>(s.nu));
    tnu.push_back(static_cast<double>(s.T_nu));
    nu_c.push_back(s.nu_censored);
    if (!s.nu_censored && s.nu > 0) {
      spacing_sum += static_cast<double>(s.T_nu) / static_cast<double>(s.nu);
      ++spacing_n;
    }
  }
  const double time_cap = static_cast<double>(horizon) / 10.0;
  const double spacing = spacing_n > 0 ? spacing_sum / static_cast<double>(spacing_n) : 1.0;
  const double nu_cap = std::floor(time_cap / std::max(1.0, spacing));
  const std::vector<double> grid = log_grid(1.0, std::max(k_max, 10.0), 10);

  CoalescenceTail out;
  out.theta = survival_curve(theta, theta_c, grid);
  out.nu = survival_curve(nu, nu_c, grid);
  out.T_nu = survival_curve(tnu, nu_c, grid);
  out.nu_fit_cap = static_cast<std::int64_t>(nu_cap);
  const double time_hi = std::min(k_max, time_cap);
  out.theta_fit = fit_power_tail(out.theta, k_min, time_hi);
  out.T_nu_fit = fit_power_tail(out.T_nu, k_min, time_hi);
  out.nu_fit = fit_power_tail(out.nu, k_min, std::min(k_max, nu_cap));
  out.theta_log_intercept = fit_fixed_slope_intercept(out.theta, -0.5, k_min, time_hi);
  return out;
}

std::optional<std::int64_t> first_nonpositive_value(const Environment& env, std::int64_t m,
                                                    std::int64_t horizon) {
  Forest f(env, {{0, 0}, {m, 0}});
  while (f.min_time() < horizon) {
    f.advance();
    if (!f.at_joint_renewal()) continue;
    const std::int64_t y = f.live_classes() == 1 ? 0 : f.current(1).x - f.current(0).x;
    if (y <= 0) return y;
  }
  return std::nullopt;
}

OvershootReport overshoot_report(const EnvConfig& cfg, const std::vector<std::int64_t>& ms,
                                 std::int64_t trials, std::int64_t horizon, int workers) {
  if (ms.empty()) throw ConfigError("m_grid", "must be nonempty");
  OvershootReport rep;
  std::vector<double> xs, ys, ses;
  for (std::size_t j = 0; j < ms.size(); ++j) {
    const std::int64_t m = ms[j];
    EnvConfig c = cfg;
    c.seed = derive_trial_seed(cfg.seed, 1'000'000 + j);
    const auto vals = parallel_map(as_count(trials), workers, [&](std::size_t i) {
      const Environment env(trial_config(c, i));
      return first_nonpositive_value(env, m, horizon);
    });
    std::vector<double> hit;
    OvershootRow row;
    row.m = m;
    for (const auto& v : vals) {
      if (v) hit.push_back(static_cast<double>(*v));
      else ++row.censored;
    }
    row.hits = static_cast<std::int64_t>(hit.size());
    const MeanEstimate e = mean_estimate(hit);
    row.mean = e.mean;
    row.stderr_ = e.stderr_;
    rep.rows.push_back(row);
    if (row.hits > 1 && e.stderr_ > 0.0) {
      xs.push_back(static_cast<double>(m));
      ys.push_back(e.mean);
      ses.push_back(e.stderr_);
    }
  }
  const auto lowest = std::min_element(rep.rows.begin(), rep.rows.end(),
                                       [](const auto& a, const auto& b) { return a.mean < b.mean; });
  rep.min_mean = lowest->mean;
  rep.min_mean_stderr = lowest->stderr_;
  if (xs.size() >= 2) rep.trend = weighted_linear_fit(xs, ys, ses);
  return rep;
}

ConditionE condition_E_check(const EnvConfig& cfg, const LatticeScale& scale, double t,
                             double width, std::int64_t trials, int workers) {
  ConditionE out;
  out.lattice_width = std::max<std::int64_t>(0, scale.space(width));
  out.lattice_time = scale.time(t);
  if (!(width > 0.0)) throw ConfigError("width", "must be positive");
  if (!(t > 0.0)) throw ConfigError("t", "must be positive");
  out.etas = parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    return eta_count(env, 0, out.lattice_time, 0, out.lattice_width).eta;
  });
  std::vector<double> v(out.etas.begin(), out.etas.end());
  const MeanEstimate e = mean_estimate(v);
  out.mean = e.mean;
  out.stderr_ = e.stderr_;
  out.bound = 1.0 + width / std::sqrt(kPi * t);
  out.margin_se = e.stderr_ > 0.0 ? (out.bound - e.mean) / e.stderr_ : INFINITY;
  return out;
}

ProportionCell make_cell(std::int64_t successes, std::int64_t trials) {
  ProportionCell c;
  c.successes = successes;
  c.trials = trials;
  c.estimate = trials > 0 ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  c.stderr_ = binomial_stderr(successes, trials);
  c.low_sample = successes < 30 || trials - successes < 30;
  return c;
}

ProportionCell eta_exceeds_one(const EnvConfig& cfg, std::int64_t k, std::int64_t m,
                               std::int64_t trials, int workers) {
  const auto hits = parallel_map(as_count(trials), workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg, i));
    return static_cast<std::int64_t>(eta_count(env, 0, k, 0, m).eta > 1);
  });
  std::int64_t s = 0;
  for (auto h : hits) s += h;
  return make_cell(s, trials);
}

std::vector<ConditionBRow> condition_B_curve(const EnvConfig& cfg, const LatticeScale& scale,
                                             const std::vector<double>& ts,
                                             const std::vector<double>& eps,
                                             std::int64_t trials, int workers) {
  if (ts.empty()) throw ConfigError("t_grid", "must be nonempty");
  if (eps.empty()) throw ConfigError("eps_grid", "must be nonempty");
  std::vector<ConditionBRow> out;
  for (double t : ts)
    for (double e : eps) {
      const std::int64_t half = std::max<std::int64_t>(0, scale.space(e));
      const std::int64_t k = scale.time(t);
      const auto hits = parallel_map(as_count(trials), workers, [&](std::size_t i) {
        const Environment env(trial_config(cfg, i));
        return static_cast<std::int64_t>(eta_count(env, 0, k, -half, half).eta > 1);
      });
      std::int64_t s = 0;
      for (auto h : hits) s += h;
      out.push_back({t, e, make_cell(s, trials)});
    }
  return out;
}

std::vector<ConditionTRow> condition_T_curve(const EnvConfig& cfg, const LatticeScale& scale,
                                             double rho, const std::vector<double>& ts,
                                             std::int64_t trials, int workers) {
  if (ts.empty()) throw ConfigError("t_grid", "must be nonempty");
  const std::int64_t lrho = std::max<std::int64_t>(1, scale.space(rho));
  std::vector<ConditionTRow> out;
  for (double t : ts) {
    const std::int64_t lt = scale.time(t);
    const auto hits = parallel_map(as_count(trials), workers, [&](std::size_t i) {
      const Environment env(trial_config(cfg, i));
      return static_cast<std::int64_t>(event_A_plus(env, 0, 0, lrho, lt));
    });
    std::int64_t s = 0;
    for (auto h : hits) s += h;
    ConditionTRow row;
    row.t = t;
    row.lattice_rho = lrho;
    row.lattice_time = lt;
    row.cell = make_cell(s, trials);
    row.ratio = row.cell.estimate / t;
    row.ratio_stderr = row.cell.stderr_ / t;
    out.push_back(row);
  }
  return out;
}

}  // namespace grdf
