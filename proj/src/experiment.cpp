#include "grdf/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "grdf/crossing.hpp"
#include "grdf/diagnostics.hpp"
#include "grdf/forest.hpp"
#include "grdf/metric.hpp"
#include "grdf/parallel.hpp"
#include "grdf/stats.hpp"
#include "grdf/walker.hpp"

namespace grdf {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

// Acceptance windows shared with the test suite.
constexpr double kSlopeLow = -0.65;
constexpr double kSlopeHigh = -0.40;
constexpr double kZ = 3.0;
constexpr double kPi = 3.14159265358979323846;

// Trials used to estimate gamma and sigma when the geometry does not fix
// them, and the seed offset that keeps that run apart from the main trials.
constexpr std::int64_t kConstantsTrials = 10'000;
constexpr std::uint64_t kConstantsStream = 2'000'000;

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote_csv(header[i]);
    }
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    static_assert(sizeof...(Ts) > 0);
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
    if (i != width_) throw std::logic_error("csv row width mismatch");
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return quote_csv(v); }
  static std::string cell(const char* v) { return quote_csv(v); }
  template <class T>
    requires std::is_integral_v<T>
  static std::string cell(T v) {
    return std::to_string(v);
  }

  std::size_t width_;
  std::ostringstream out_;
};

/// Typed, validated access to the geometry object. Every key read is
/// recorded so unknown keys can be rejected by name.
class Geometry {
 public:
  explicit Geometry(const json& g) : g_(g) {}

  std::int64_t integer(const std::string& key, std::int64_t fallback,
                       std::optional<std::int64_t> min = std::nullopt) {
    seen_.insert(key);
    if (!g_.contains(key)) return fallback;
    const json& v = g_.at(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (min && x < *min) fail(key, "must be >= " + std::to_string(*min));
    return x;
  }

  double number(const std::string& key, double fallback, bool positive = false) {
    seen_.insert(key);
    if (!g_.contains(key)) return fallback;
    const json& v = g_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    if (positive && !(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    seen_.insert(key);
    if (!g_.contains(key)) return std::nullopt;
    return number(key, 0.0, true);
  }

  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> fallback,
                                     std::int64_t min) {
    seen_.insert(key);
    if (!g_.contains(key)) return fallback;
    const json& v = g_.at(key);
    if (!v.is_array() || v.empty()) fail(key, "must be a nonempty array of integers");
    std::vector<std::int64_t> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) fail(key, "must be a nonempty array of integers");
      out.push_back(e.get<std::int64_t>());
      if (out.back() < min) fail(key, "entries must be >= " + std::to_string(min));
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    seen_.insert(key);
    if (!g_.contains(key)) return fallback;
    const json& v = g_.at(key);
    if (!v.is_array() || v.empty()) fail(key, "must be a nonempty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(key, "must be a nonempty array of numbers");
      out.push_back(e.get<double>());
      if (!(out.back() > 0.0) || !std::isfinite(out.back())) fail(key, "entries must be positive");
    }
    return out;
  }

  std::string choice(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed) {
    seen_.insert(key);
    if (!g_.contains(key)) return fallback;
    const json& v = g_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    const auto s = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) fail(key, "unknown value");
    return s;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : g_.items())
      if (!seen_.count(k)) fail(k, "unknown key for this experiment");
  }

 private:
  [[noreturn]] static void fail(const std::string& key, const std::string& msg) {
    throw ConfigError("geometry." + key, msg);
  }

  const json& g_;
  std::set<std::string> seen_;
};

Barrier parse_barrier(Geometry& g) {
  return g.choice("barrier", "open-box", {"open-box", "good-box"}) == "good-box"
             ? Barrier::kGoodBox
             : Barrier::kOpenBox;
}

struct Report {
  ojson estimates = ojson::object();
  ojson stderrs = ojson::object();
  ojson pass_flags = ojson::object();
};

/// Scale constants from the geometry, or estimated on a separate seed stream.
LatticeScale lattice_scale(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  LatticeScale s{cfg.n, 0.0, 0.0};
  const auto gamma = g.optional_number("gamma");
  const auto sigma = g.optional_number("sigma");
  const std::int64_t trials = g.integer("constants_trials", kConstantsTrials, 100);
  if (gamma && sigma) {
    s.gamma = *gamma;
    s.sigma = *sigma;
  } else {
    EnvConfig c = cfg.env;
    c.seed = derive_trial_seed(cfg.env.seed, kConstantsStream);
    const ConstantsEstimate est = estimate_constants(c, trials, cfg.horizon, cfg.workers);
    s.gamma = gamma.value_or(est.gamma_hat);
    s.sigma = sigma.value_or(est.sigma_hat);
    if (!gamma) rep.stderrs["gamma"] = est.gamma_stderr;
    if (!sigma) rep.stderrs["sigma"] = est.sigma_stderr;
  }
  rep.estimates["gamma"] = s.gamma;
  rep.estimates["sigma"] = s.sigma;
  return s;
}

std::size_t trial_count(const ExperimentConfig& cfg) { return static_cast<std::size_t>(cfg.trials); }

std::string run_probe_env(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t sites = g.integer("sites", 10, 1);
  const std::int64_t x0 = g.integer("x0", 0);
  const std::int64_t t0 = g.integer("t0", 0);
  g.reject_unknown();
  const Environment env(cfg.env);
  Csv csv({"x", "t", "u", "open", "w"});
  std::int64_t open = 0;
  for (std::int64_t i = 0; i < sites; ++i) {
    const Site v{x0 + i, t0};
    csv.row(v.x, v.t, env.uniform(v), env.is_open(v), env.w(v));
    open += env.is_open(v);
  }
  rep.estimates["open_fraction"] = static_cast<double>(open) / static_cast<double>(sites);
  return csv.str();
}

PathRecord path_until(const Environment& env, Site start, std::int64_t horizon) {
  WalkerState w = make_walker(start);
  while (w.current.t < start.t + horizon) step(env, w);
  return std::move(w.path);
}

std::string run_simulate_path(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const Site start{g.integer("x0", 0), g.integer("t0", 0)};
  g.reject_unknown();
  const Environment env(cfg.env);
  const RenewalRun run = evolve_with_renewals(env, start, {std::nullopt, cfg.horizon});
  std::ostringstream os;
  write_path_csv(os, run.path);
  rep.estimates["vertices"] = run.path.vertices.size();
  rep.estimates["end_time"] = run.path.vertices.back().t;
  rep.estimates["end_position"] = run.path.vertices.back().x;
  rep.estimates["renewals"] = run.renewals.size();
  return os.str();
}

struct TrialRenewals {
  std::vector<RenewalRecord> renewals;
  bool exhausted = false;
};

std::vector<TrialRenewals> collect_renewals(const ExperimentConfig& cfg, std::int64_t count) {
  return parallel_map(trial_count(cfg), cfg.workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg.env, i));
    TrialRenewals t;
    try {
      t.renewals = evolve_with_renewals(env, {0, 0}, {count, cfg.horizon}).renewals;
    } catch (const HorizonExhausted&) {
      t.exhausted = true;
    }
    return t;
  });
}

std::string run_renewals(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t count = g.integer("count", 5, 1);
  g.reject_unknown();
  const auto runs = collect_renewals(cfg, count);
  Csv csv({"trial", "seed", "j", "T_j", "position", "gap", "max_displacement"});
  std::vector<std::vector<RenewalRecord>> complete;
  std::vector<double> first_gap, last_gap;
  std::int64_t exhausted = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::uint64_t seed = derive_trial_seed(cfg.env.seed, i);
    if (runs[i].exhausted) {
      ++exhausted;
      continue;
    }
    for (const auto& r : runs[i].renewals)
      csv.row(i, seed, r.index, r.time, r.position, r.gap, r.max_displacement);
    complete.push_back(runs[i].renewals);
    first_gap.push_back(static_cast<double>(runs[i].renewals.front().gap));
    last_gap.push_back(static_cast<double>(runs[i].renewals.back().gap));
  }
  rep.estimates["exhausted_trials"] = exhausted;
  rep.pass_flags["all_trials_renewed"] = exhausted == 0;
  if (complete.size() < 2) throw InsufficientData("fewer than two trials reached all renewals");
  const ConstantsEstimate c = constants_from_renewals(complete);
  rep.estimates["gamma"] = c.gamma_hat;
  rep.stderrs["gamma"] = c.gamma_stderr;
  rep.estimates["sigma"] = c.sigma_hat;
  rep.stderrs["sigma"] = c.sigma_stderr;
  if (count >= 2) {
    const KsResult ks = ks_two_sample(first_gap, last_gap);
    rep.estimates["ks_first_last_gap"] = ks.statistic;
    rep.estimates["ks_first_last_gap_p_value"] = ks.p_value;
  }
  return csv.str();
}

std::vector<CoalescenceResult> coalescence_runs(const ExperimentConfig& cfg, std::int64_t m) {
  return coalescence_samples(cfg.env, m, cfg.trials, cfg.horizon, cfg.workers);
}

Csv coalescence_csv(const ExperimentConfig& cfg, std::int64_t m,
                    const std::vector<CoalescenceResult>& runs) {
  Csv csv({"trial", "seed", "m", "theta", "nu", "T_nu", "sign_changes", "theta_censored",
           "nu_censored"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    csv.row(i, derive_trial_seed(cfg.env.seed, i), m, r.theta, r.nu, r.T_nu, r.sign_changes,
            r.theta_censored, r.nu_censored);
  }
  return csv;
}

void put_fit(Report& rep, const std::string& name, const PowerLawFit& f) {
  rep.estimates[name + "_slope"] = f.slope;
  rep.stderrs[name + "_slope"] = f.slope_stderr;
  rep.estimates[name + "_intercept"] = f.intercept;
  rep.estimates[name + "_r_squared"] = f.r_squared;
  rep.estimates[name + "_points"] = f.points;
  rep.pass_flags[name + "_slope_in_window"] = f.slope >= kSlopeLow && f.slope <= kSlopeHigh;
}

std::string run_coalescence_tail(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t m = g.integer("m", 1, 1);
  const double k_min = g.number("k_min", 100.0, true);
  const double k_max = g.number("k_max", 10'000.0, true);
  g.reject_unknown();
  if (k_max <= k_min) throw ConfigError("geometry.k_max", "must exceed k_min");
  const auto runs = coalescence_runs(cfg, m);
  const CoalescenceTail tail = coalescence_tail(runs, k_min, k_max, cfg.horizon);
  put_fit(rep, "theta", tail.theta_fit);
  put_fit(rep, "nu", tail.nu_fit);
  put_fit(rep, "T_nu", tail.T_nu_fit);
  rep.estimates["theta_log_intercept_fixed_slope"] = tail.theta_log_intercept;
  rep.estimates["nu_fit_cap"] = tail.nu_fit_cap;
  rep.estimates["theta_censored"] = tail.theta.censored_count;
  rep.estimates["nu_censored"] = tail.nu.censored_count;
  return coalescence_csv(cfg, m, runs).str();
}

std::string run_crossings(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t m = g.integer("m", 1, 1);
  g.reject_unknown();
  const auto runs = coalescence_runs(cfg, m);
  std::vector<std::int64_t> counts;
  for (const auto& r : runs) counts.push_back(r.sign_changes);
  const GeometricFit fit = fit_geometric_tail(counts);
  rep.estimates["c"] = fit.c;
  rep.estimates["c_lower95"] = fit.c_lower95;
  rep.estimates["c_upper95"] = fit.c_upper95;
  rep.estimates["points"] = fit.points;
  rep.estimates["degenerate"] = fit.degenerate;
  rep.pass_flags["c_below_one"] = fit.c_upper95 < 1.0;
  return coalescence_csv(cfg, m, runs).str();
}

std::string run_constants(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t donsker = g.integer("donsker_trials", 0, 0);
  g.reject_unknown();
  const auto runs = collect_renewals(cfg, 1);
  Csv csv({"trial", "seed", "T1", "increment"});
  std::vector<std::vector<RenewalRecord>> complete;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].exhausted) throw InsufficientData("trial " + std::to_string(i) + " has no renewal");
    const auto& r = runs[i].renewals.front();
    csv.row(i, derive_trial_seed(cfg.env.seed, i), r.time, r.position);
    complete.push_back(runs[i].renewals);
  }
  if (complete.size() < 2) throw InsufficientData("constants need at least two trials");
  const ConstantsEstimate c = constants_from_renewals(complete);
  rep.estimates["gamma"] = c.gamma_hat;
  rep.stderrs["gamma"] = c.gamma_stderr;
  rep.estimates["sigma"] = c.sigma_hat;
  rep.stderrs["sigma"] = c.sigma_stderr;
  rep.estimates["increment_mean"] = c.increment_mean;
  rep.stderrs["increment_mean"] = c.increment_stderr;
  rep.pass_flags["increment_mean_zero"] =
      std::abs(c.increment_mean) <= kZ * c.increment_stderr;
  if (donsker > 0) {
    EnvConfig d = cfg.env;
    d.seed = derive_trial_seed(cfg.env.seed, kConstantsStream);
    const auto xs = donsker_samples(d, cfg.n, c.gamma_hat, c.sigma_hat, donsker, cfg.workers);
    const KsResult ks = ks_standard_normal(xs);
    rep.estimates["donsker_ks"] = ks.statistic;
    rep.estimates["donsker_ks_p_value"] = ks.p_value;
    rep.pass_flags["donsker_ks_below_0.05"] = ks.statistic < 0.05;
  }
  return csv.str();
}

std::string run_distance_preserved(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const auto ms = g.integers("m_grid", {1, 2, 5}, 1);
  g.reject_unknown();
  const double p = cfg.env.p;
  const double w1 = cfg.env.prob_w_one();
  const double lower = std::pow(p * w1, 2);
  const double upper = 1.0 - (1.0 - p / 2.0) * std::pow(p, 3) * std::pow(1.0 - p, 3) * std::pow(w1, 3);
  rep.estimates["lower_bound"] = lower;
  rep.estimates["upper_bound"] = upper;
  Csv csv({"m", "trial", "seed", "preserved"});
  for (std::int64_t m : ms) {
    const auto hits = parallel_map(trial_count(cfg), cfg.workers, [&](std::size_t i) {
      const Environment env(trial_config(cfg.env, i));
      return difference_process(env, m, 1, cfg.horizon).values[1] == m;
    });
    std::int64_t s = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      csv.row(m, i, derive_trial_seed(cfg.env.seed, i), static_cast<bool>(hits[i]));
      s += hits[i];
    }
    const ProportionCell cell = make_cell(s, cfg.trials);
    const std::string key = "m" + std::to_string(m);
    rep.estimates[key] = cell.estimate;
    rep.stderrs[key] = cell.stderr_;
    rep.pass_flags[key + "_within_bounds"] = cell.estimate >= lower - kZ * cell.stderr_ &&
                                            cell.estimate <= upper + kZ * cell.stderr_;
  }
  return csv.str();
}

std::string run_condition_b(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  Csv csv({"t", "eps", "k", "half_width", "trials", "successes", "estimate", "stderr",
           "scaled", "low_sample"});
  std::vector<double> scaled;
  if (g.choice("mode", "lattice", {"lattice", "rescaled"}) == "lattice") {
    const auto ks = g.integers("k_grid", {100, 1000, 10000}, 1);
    const auto ms = g.integers("m_grid", {1, 2, 4}, 1);
    g.reject_unknown();
    // Lattice mode counts paths through [0, m], so "half_width" holds m.
    for (std::int64_t k : ks)
      for (std::int64_t m : ms) {
        const ProportionCell c = eta_exceeds_one(cfg.env, k, m, cfg.trials, cfg.workers);
        const double s = c.estimate * std::sqrt(static_cast<double>(k)) / static_cast<double>(m);
        csv.row(std::string(), std::string(), k, m, c.trials, c.successes, c.estimate, c.stderr_,
                s, c.low_sample);
        scaled.push_back(s);
      }
  } else {
    const auto ts = g.numbers("t_grid", {0.01, 0.1, 1.0});
    const auto eps = g.numbers("eps_grid", {0.05, 0.1, 0.2});
    const LatticeScale scale = lattice_scale(cfg, g, rep);
    g.reject_unknown();
    const auto rows = condition_B_curve(cfg.env, scale, ts, eps, cfg.trials, cfg.workers);
    for (const auto& r : rows) {
      const double s = r.cell.estimate * std::sqrt(r.t) / r.eps;
      csv.row(r.t, r.eps, scale.time(r.t), scale.space(r.eps), r.cell.trials, r.cell.successes,
              r.cell.estimate, r.cell.stderr_, s, r.cell.low_sample);
      scaled.push_back(s);
    }
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  rep.estimates["scaled_min"] = *lo;
  rep.estimates["scaled_max"] = *hi;
  const double ratio = *lo > 0.0 ? *hi / *lo : INFINITY;
  rep.estimates["max_min_ratio"] = std::isfinite(ratio) ? ojson(ratio) : ojson(nullptr);
  rep.pass_flags["max_min_ratio_at_most_4"] = std::isfinite(ratio) && ratio <= 4.0;
  return csv.str();
}

std::string run_condition_e(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const double t = g.number("t", 1.0, true);
  const auto widths = g.numbers("widths", {0.5, 1.0});
  const LatticeScale scale = lattice_scale(cfg, g, rep);
  g.reject_unknown();
  Csv csv({"width", "trial", "seed", "lattice_time", "lattice_width", "eta"});
  for (double w : widths) {
    const ConditionE e = condition_E_check(cfg.env, scale, t, w, cfg.trials, cfg.workers);
    for (std::size_t i = 0; i < e.etas.size(); ++i)
      csv.row(w, i, derive_trial_seed(cfg.env.seed, i), e.lattice_time, e.lattice_width,
              e.etas[i]);
    const std::string key = "width_" + format_number(w);
    rep.estimates[key + "_mean_eta"] = e.mean;
    rep.stderrs[key + "_mean_eta"] = e.stderr_;
    rep.estimates[key + "_bound"] = 1.0 + w / std::sqrt(kPi * t);
    rep.pass_flags[key + "_below_bound"] = e.mean <= e.bound + kZ * e.stderr_;
  }
  return csv.str();
}

std::string run_condition_t(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const double rho = g.number("rho", 0.1, true);
  auto ts = g.numbers("t_grid", {0.4, 0.2, 0.1});
  const LatticeScale scale = lattice_scale(cfg, g, rep);
  g.reject_unknown();
  std::sort(ts.begin(), ts.end(), std::greater<>());
  const auto rows = condition_T_curve(cfg.env, scale, rho, ts, cfg.trials, cfg.workers);
  Csv csv({"t", "lattice_rho", "lattice_time", "trials", "successes", "estimate", "stderr",
           "ratio", "ratio_stderr", "low_sample"});
  bool trend = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv.row(r.t, r.lattice_rho, r.lattice_time, r.cell.trials, r.cell.successes, r.cell.estimate,
            r.cell.stderr_, r.ratio, r.ratio_stderr, r.cell.low_sample);
    const std::string key = "t_" + format_number(r.t);
    rep.estimates[key + "_ratio"] = r.ratio;
    rep.stderrs[key + "_ratio"] = r.ratio_stderr;
    if (i > 0) {
      const auto& prev = rows[i - 1];
      const double se = std::hypot(r.ratio_stderr, prev.ratio_stderr);
      trend = trend && r.ratio <= prev.ratio + kZ * se;
    }
  }
  rep.pass_flags["ratio_nonincreasing"] = trend;
  return csv.str();
}

std::string run_eta(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t t0 = g.integer("t0", 0);
  const std::int64_t t = g.integer("t", 100, 0);
  const std::int64_t a = g.integer("a", 0);
  const std::int64_t b = g.integer("b", 4);
  EtaOptions opts;
  opts.barrier = parse_barrier(g);
  g.reject_unknown();
  if (b < a) throw ConfigError("geometry.b", "must be >= a");
  const auto res = parallel_map(trial_count(cfg), cfg.workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg.env, i));
    return eta_count(env, t0, t, a, b, opts);
  });
  Csv csv({"trial", "t0", "t", "a", "b", "eta"});
  std::vector<double> etas, paths;
  for (std::size_t i = 0; i < res.size(); ++i) {
    csv.row(i, t0, t, a, b, res[i].eta);
    etas.push_back(static_cast<double>(res[i].eta));
    paths.push_back(static_cast<double>(res[i].paths));
  }
  const MeanEstimate e = mean_estimate(etas);
  const MeanEstimate q = mean_estimate(paths);
  rep.estimates["mean_eta"] = e.mean;
  rep.stderrs["mean_eta"] = e.stderr_;
  rep.estimates["mean_paths"] = q.mean;
  rep.stderrs["mean_paths"] = q.stderr_;
  return csv.str();
}

std::string run_metric_distance(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t m = g.integer("m", 1, 1);
  const double tol = g.number("tol", kDefaultTolerance, true);
  const LatticeScale scale = lattice_scale(cfg, g, rep);
  g.reject_unknown();
  const RescaleParams params{scale.n, scale.gamma, scale.sigma};
  params.validate();
  const auto ds = parallel_map(trial_count(cfg), cfg.workers, [&](std::size_t i) {
    const Environment env(trial_config(cfg.env, i));
    const MetricPath a = rescale(path_until(env, {0, 0}, cfg.horizon), params);
    const MetricPath b = rescale(path_until(env, {m, 0}, cfg.horizon), params);
    return path_distance(a, b, tol);
  });
  Csv csv({"trial", "seed", "m", "distance"});
  for (std::size_t i = 0; i < ds.size(); ++i)
    csv.row(i, derive_trial_seed(cfg.env.seed, i), m, ds[i]);
  const MeanEstimate e = mean_estimate(ds);
  rep.estimates["mean_distance"] = e.mean;
  rep.stderrs["mean_distance"] = e.stderr_;
  return csv.str();
}

void put_moments(Report& rep, const std::string& name, const MomentReport& r) {
  for (const auto& row : r.rows) {
    const std::string key = name + "_order" + std::to_string(row.order);
    rep.estimates[key + "_ratio_first"] = row.ratio_first;
    rep.estimates[key + "_ratio_second"] = row.ratio_second;
  }
  rep.pass_flags[name + "_stable"] = r.stable;
}

std::string run_moment_stability(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  const std::int64_t order = g.integer("max_order", 4, 1);
  g.reject_unknown();
  const auto runs = collect_renewals(cfg, 1);
  Csv csv({"trial", "seed", "T1", "max_displacement"});
  std::vector<double> times, disp;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].exhausted) throw InsufficientData("trial " + std::to_string(i) + " has no renewal");
    const auto& r = runs[i].renewals.front();
    csv.row(i, derive_trial_seed(cfg.env.seed, i), r.time, r.max_displacement);
    times.push_back(static_cast<double>(r.time));
    disp.push_back(static_cast<double>(r.max_displacement));
  }
  put_moments(rep, "T1", moment_stability(times, static_cast<int>(order)));
  put_moments(rep, "max_displacement", moment_stability(disp, static_cast<int>(order)));
  return csv.str();
}

std::string run_overshoot(const ExperimentConfig& cfg, Geometry& g, Report& rep) {
  std::vector<std::int64_t> def;
  for (std::int64_t m = 1; m <= 20; ++m) def.push_back(m);
  const auto ms = g.integers("m_grid", def, 1);
  g.reject_unknown();
  const OvershootReport r = overshoot_report(cfg.env, ms, cfg.trials, cfg.horizon, cfg.workers);
  Csv csv({"m", "trials", "hits", "censored", "mean", "stderr"});
  bool nonpositive = true;
  for (const auto& row : r.rows) {
    csv.row(row.m, cfg.trials, row.hits, row.censored, row.mean, row.stderr_);
    nonpositive = nonpositive && row.mean <= 0.0;
  }
  rep.estimates["min_mean"] = r.min_mean;
  rep.stderrs["min_mean"] = r.min_mean_stderr;
  rep.estimates["trend_slope"] = r.trend.slope;
  rep.stderrs["trend_slope"] = r.trend.slope_stderr;
  rep.pass_flags["means_nonpositive"] = nonpositive;
  rep.pass_flags["no_divergent_trend"] = std::abs(r.trend.slope) <= kZ * r.trend.slope_stderr;
  return csv.str();
}

using Runner = std::function<std::string(const ExperimentConfig&, Geometry&, Report&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"probe-env", run_probe_env},
      {"simulate-path", run_simulate_path},
      {"renewals", run_renewals},
      {"coalescence-tail", run_coalescence_tail},
      {"crossings", run_crossings},
      {"constants", run_constants},
      {"distance-preserved", run_distance_preserved},
      {"condition-b", run_condition_b},
      {"condition-e", run_condition_e},
      {"condition-t", run_condition_t},
      {"eta", run_eta},
      {"metric-distance", run_metric_distance},
      {"moment-stability", run_moment_stability},
      {"overshoot", run_overshoot},
  };
  return table;
}

ConfigError nest(const std::string& parent, const ConfigError& e) {
  std::string msg = e.what();
  const std::string prefix = e.field() + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  return ConfigError(parent + "." + e.field(), msg);
}

template <class T>
T read_field(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ExperimentConfig::validate() const {
  if (!runners().count(experiment)) throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
  try {
    env.validate();
  } catch (const ConfigError& e) {
    throw nest("env", e);
  }
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  if (out_prefix.empty()) throw ConfigError("out_prefix", "must be nonempty");
  if (!geometry.is_object()) throw ConfigError("geometry", "must be an object");
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  ojson j;
  j["experiment"] = experiment;
  j["env"] = env.to_json();
  j["trials"] = trials;
  j["horizon"] = horizon;
  j["n"] = n;
  j["workers"] = workers;
  j["out_prefix"] = out_prefix;
  j["geometry"] = ojson::parse(geometry.dump());
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
  static const std::set<std::string> known{"experiment", "env",     "trials",     "horizon",
                                           "n",          "workers", "out_prefix", "geometry"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError(k, "unknown key");
  ExperimentConfig c;
  c.experiment = read_field<std::string>(j, "experiment", "");
  if (j.contains("env")) {
    if (!j.at("env").is_object()) throw ConfigError("env", "must be an object");
    try {
      c.env = EnvConfig::from_json(j.at("env"));
    } catch (const ConfigError& e) {
      throw nest("env", e);
    }
  }
  c.trials = read_field<std::int64_t>(j, "trials", c.trials);
  c.horizon = read_field<std::int64_t>(j, "horizon", c.horizon);
  c.n = read_field<long>(j, "n", c.n);
  c.workers = read_field<int>(j, "workers", c.workers);
  c.out_prefix = read_field<std::string>(j, "out_prefix", c.out_prefix);
  if (j.contains("geometry")) c.geometry = j.at("geometry");
  return c;
}

ExperimentOutput execute(const ExperimentConfig& config) {
  config.validate();
  Geometry g(config.geometry);
  Report rep;
  ExperimentOutput out;
  out.csv = runners().at(config.experiment)(config, g, rep);
  // Worker count and output location do not affect results, so they are
  // left out of the echoed config to keep summaries comparable.
  ojson echo = config.to_json();
  echo.erase("workers");
  echo.erase("out_prefix");
  out.summary["experiment"] = config.experiment;
  out.summary["config"] = std::move(echo);
  out.summary["estimates"] = std::move(rep.estimates);
  out.summary["stderrs"] = std::move(rep.stderrs);
  out.summary["pass_flags"] = std::move(rep.pass_flags);
  return out;
}

int run(const ExperimentConfig& config, std::ostream& err) {
  try {
    const ExperimentOutput out = execute(config);
    std::ofstream csv(config.out_prefix + ".csv", std::ios::binary);
    std::ofstream summary(config.out_prefix + ".summary.json", std::ios::binary);
    if (!csv || !summary) {
      err << "error: cannot write outputs under '" << config.out_prefix << "'\n";
      return kExitFailure;
    }
    csv << out.csv;
    summary << out.summary.dump(2) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InsufficientData& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kExitInsufficientData;
  } catch (const HorizonExhausted& e) {
    err << "insufficient data: " << e.what() << '\n';
    return kExitInsufficientData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace grdf
