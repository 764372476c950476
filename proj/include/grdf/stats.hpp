#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace grdf {

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

/// Sample mean, standard deviation (n-1) and standard error.
MeanEstimate mean_estimate(const std::vector<double>& xs);

double binomial_stderr(std::int64_t successes, std::int64_t trials);
std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials,
                                          double z = 1.96);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of y on x. Needs at least two distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
/// Weighted least squares with known per-point standard errors; the slope
/// error comes from the weights alone.
LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& se);

/// P(X > k) on a grid of thresholds.
struct SurvivalCurve {
  std::vector<double> ks;
  std::vector<double> probs;
  std::vector<double> stderrs;
  std::int64_t censored_count = 0;
  std::int64_t samples = 0;
};

/// Kaplan-Meier estimate with Greenwood errors. A censored value c means the
/// sample is only known to exceed c. Without censoring this is the empirical
/// survival function.
SurvivalCurve survival_curve(const std::vector<double>& values, const std::vector<bool>& censored,
                             const std::vector<double>& ks);

/// Log-spaced integer thresholds from k_min to k_max, `per_decade` per factor 10.
std::vector<double> log_grid(double k_min, double k_max, int per_decade);

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // log C in log P = intercept + slope log k
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  double k_min = 0.0;
  double k_max = 0.0;
  std::size_t points = 0;
  /// Censored mass beyond the fit range, reported and never imputed.
  std::int64_t censored_count = 0;
};

inline constexpr double kLinearityThreshold = 0.98;

/// Least squares of log P on log k over curve points in [k_min, k_max] with
/// P > 0. Throws InsufficientData with fewer than five points.
PowerLawFit fit_power_tail(const SurvivalCurve& curve, double k_min, double k_max);

/// log C for P = C k^slope with the slope held fixed: mean of
/// log P - slope log k over the points in range.
double fit_fixed_slope_intercept(const SurvivalCurve& curve, double slope, double k_min,
                                 double k_max);

struct GeometricFit {
  double c = 0.0;
  double c_lower95 = 0.0;
  double c_upper95 = 0.0;  // one-sided 95% upper bound
  std::size_t points = 0;
  bool degenerate = false;  // every count zero
};

/// Fits P(count >= k) = A c^k by least squares of log P on k over the k with
/// at least 30 samples at or above k. Needs >= 1000 samples.
GeometricFit fit_geometric_tail(const std::vector<std::int64_t>& counts);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Limiting Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

/// One-sample KS of samples / (sample sd) against N(0, 1), asymptotic
/// p-value with Stephens' small-sample correction. Needs >= 1000 samples.
KsResult ks_normal(const std::vector<double>& samples);
/// KS against N(0, 1) without any rescaling.
KsResult ks_standard_normal(const std::vector<double>& samples);
KsResult ks_uniform(const std::vector<double>& samples);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MomentRow {
  int order = 0;
  double first_half = 0.0;   // moment of the first N samples
  double second_half = 0.0;  // moment of the last N samples
  double full = 0.0;         // moment of all 2N samples
  double ratio_first = 0.0;  // full / first_half
  double ratio_second = 0.0; // full / second_half
  bool stable = false;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  bool stable = false;
};

inline constexpr double kMomentRatioLow = 0.5;
inline constexpr double kMomentRatioHigh = 2.0;

/// Raw moments E|X|^k, k = 1..max_order, at sample size N (each half) and 2N
/// (all). An order is divergent when either ratio leaves [0.5, 2]. Needs
/// >= 1000 samples; an odd trailing sample is dropped.
MomentReport moment_stability(const std::vector<double>& samples, int max_order = 4);

}  // namespace grdf
