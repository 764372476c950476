#include "grdf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "grdf/site.hpp"

namespace grdf {

MeanEstimate mean_estimate(const std::vector<double>& xs) {
  MeanEstimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  e.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(e.n);
  if (e.n < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - e.mean) * (x - e.mean);
  e.sd = std::sqrt(ss / static_cast<double>(e.n - 1));
  e.stderr_ = e.sd / std::sqrt(static_cast<double>(e.n));
  return e;
}

double binomial_stderr(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) return 0.0;
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  const std::size_t n = x.size();
  LinearFit f;
  f.points = n;
  if (n < 2) throw InsufficientData("linear fit needs at least two points");
  const double nd = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nd;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nd;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("linear fit needs two distinct x values");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  if (n > 2) {
    const double s2 = sse / (nd - 2.0);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / nd + mx * mx / sxx));
  }
  return f;
}

LinearFit weighted_linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                              const std::vector<double>& se) {
  if (x.size() != y.size() || x.size() != se.size())
    throw std::invalid_argument("weighted_linear_fit: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InsufficientData("weighted fit needs at least two points");
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(se[i] > 0.0)) throw std::invalid_argument("weighted fit needs positive errors");
    const double w = 1.0 / (se[i] * se[i]);
    sw += w;
    swx += w * x[i];
    swy += w * y[i];
  }
  const double mx = swx / sw, my = swy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (se[i] * se[i]);
    sxx += w * (x[i] - mx) * (x[i] - mx);
    sxy += w * (x[i] - mx) * (y[i] - my);
    syy += w * (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("weighted fit needs two distinct x values");
  LinearFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.slope_stderr = std::sqrt(1.0 / sxx);
  f.intercept_stderr = std::sqrt(1.0 / sw + mx * mx / sxx);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r / (se[i] * se[i]);
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

SurvivalCurve survival_curve(const std::vector<double>& values, const std::vector<bool>& censored,
                             const std::vector<double>& ks) {
  if (!censored.empty() && censored.size() != values.size())
    throw std::invalid_argument("survival_curve: censor flags do not match values");
  std::vector<std::pair<double, bool>> data(values.size());
  SurvivalCurve c;
  c.samples = static_cast<std::int64_t>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool cen = !censored.empty() && censored[i];
    data[i] = {values[i], cen};
    c.censored_count += cen ? 1 : 0;
  }
  std::sort(data.begin(), data.end());
  std::vector<double> grid = ks;
  std::sort(grid.begin(), grid.end());

  double surv = 1.0, greenwood = 0.0;
  std::size_t i = 0;
  const std::size_t n = data.size();
  for (double k : grid) {
    while (i < n && data[i].first <= k) {
      const double tau = data[i].first;
      std::size_t j = i;
      std::int64_t events = 0;
      while (j < n && data[j].first == tau) {
        events += data[j].second ? 0 : 1;
        ++j;
      }
      const double at_risk = static_cast<double>(n - i);
      if (events > 0) {
        const double d = static_cast<double>(events);
        surv *= 1.0 - d / at_risk;
        if (at_risk > d) greenwood += d / (at_risk * (at_risk - d));
      }
      i = j;
    }
    c.ks.push_back(k);
    c.probs.push_back(surv);
    c.stderrs.push_back(surv * std::sqrt(greenwood));
  }
  return c;
}

std::vector<double> log_grid(double k_min, double k_max, int per_decade) {
  std::vector<double> out;
  const double step = std::log(10.0) / per_decade;
  const int count = static_cast<int>(std::floor(std::log(k_max / k_min) / step + 1e-9));
  for (int i = 0; i <= count; ++i) {
    const double k = std::round(k_min * std::exp(step * i));
    if (out.empty() || k > out.back()) out.push_back(k);
  }
  return out;
}

PowerLawFit fit_power_tail(const SurvivalCurve& curve, double k_min, double k_max) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    const double k = curve.ks[i];
    if (k < k_min || k > k_max || !(curve.probs[i] > 0.0)) continue;
    lx.push_back(std::log(k));
    ly.push_back(std::log(curve.probs[i]));
  }
  if (lx.size() < 5) throw InsufficientData("power-law fit needs at least five positive points");
  const LinearFit f = linear_fit(lx, ly);
  PowerLawFit out;
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.slope_stderr = f.slope_stderr;
  out.r_squared = f.r_squared;
  out.k_min = k_min;
  out.k_max = k_max;
  out.points = f.points;
  out.censored_count = curve.censored_count;
  return out;
}

double fit_fixed_slope_intercept(const SurvivalCurve& curve, double slope, double k_min,
                                 double k_max) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    const double k = curve.ks[i];
    if (k < k_min || k > k_max || !(curve.probs[i] > 0.0)) continue;
    sum += std::log(curve.probs[i]) - slope * std::log(k);
    ++count;
  }
  if (count == 0) throw InsufficientData("no positive curve points in the fit range");
  return sum / static_cast<double>(count);
}

GeometricFit fit_geometric_tail(const std::vector<std::int64_t>& counts) {
  if (counts.size() < 1000) throw InsufficientData("geometric fit needs at least 1000 samples");
  GeometricFit g;
  const std::int64_t top = *std::max_element(counts.begin(), counts.end());
  if (top <= 0) {
    g.degenerate = true;
    return g;
  }
  std::vector<std::int64_t> at_least(static_cast<std::size_t>(top) + 2, 0);
  for (std::int64_t c : counts) ++at_least[static_cast<std::size_t>(std::max<std::int64_t>(c, 0))];
  for (std::size_t k = at_least.size() - 1; k-- > 0;) at_least[k] += at_least[k + 1];
  const double n = static_cast<double>(counts.size());
  std::vector<double> ks, ly, se;
  for (std::size_t k = 1; k < at_least.size() && at_least[k] >= 30; ++k) {
    const double s = static_cast<double>(at_least[k]) / n;
    ks.push_back(static_cast<double>(k));
    ly.push_back(std::log(s));
    se.push_back(std::sqrt((1.0 - s) / (n * s)));
  }
  g.points = ks.size();
  if (ks.size() < 2) {
    // Only P(count >= 1) is usable: c = P(count >= 1).
    const auto total = static_cast<std::int64_t>(n);
    g.c = static_cast<double>(at_least[1]) / n;
    g.c_lower95 = wilson_interval(at_least[1], total).first;
    g.c_upper95 = wilson_interval(at_least[1], total, 1.645).second;
    return g;
  }
  const LinearFit f = weighted_linear_fit(ks, ly, se);
  g.c = std::exp(f.slope);
  // The cumulative points are correlated, so the regression error is too
  // small. Each step k -> k + 1 is a continue/stop trial; the pooled ratio
  // gives a binomial error for log c.
  double steps = 0.0, continued = 0.0;
  for (std::size_t k = 1; k + 1 < at_least.size(); ++k) {
    steps += static_cast<double>(at_least[k]);
    continued += static_cast<double>(at_least[k + 1]);
  }
  const double ratio = continued / steps;
  const double log_se = std::max(f.slope_stderr, std::sqrt((1.0 - ratio) / (ratio * steps)));
  g.c_lower95 = std::exp(f.slope - 1.96 * log_se);
  g.c_upper95 = std::exp(f.slope + 1.645 * log_se);
  return g;
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class Cdf>
KsResult ks_one_sample(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)};
}

}  // namespace

KsResult ks_standard_normal(const std::vector<double>& samples) {
  if (samples.empty()) throw InsufficientData("KS test needs samples");
  return ks_one_sample(samples, normal_cdf);
}

KsResult ks_normal(const std::vector<double>& samples) {
  if (samples.size() < 1000) throw InsufficientData("KS normality test needs at least 1000 samples");
  const MeanEstimate e = mean_estimate(samples);
  std::vector<double> z(samples.size(), 0.0);
  if (e.sd > 0.0)
    for (std::size_t i = 0; i < samples.size(); ++i) z[i] = samples[i] / e.sd;
  return ks_one_sample(std::move(z), normal_cdf);
}

KsResult ks_uniform(const std::vector<double>& samples) {
  if (samples.empty()) throw InsufficientData("KS test needs samples");
  return ks_one_sample(samples, [](double x) { return std::clamp(x, 0.0, 1.0); });
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("two-sample KS needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

MomentReport moment_stability(const std::vector<double>& samples, int max_order) {
  if (samples.size() < 1000) throw InsufficientData("moment stability needs at least 1000 samples");
  const std::size_t half = samples.size() / 2;
  MomentReport rep;
  rep.stable = true;
  for (int k = 1; k <= max_order; ++k) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) s1 += std::pow(std::fabs(samples[i]), k);
    for (std::size_t i = half; i < 2 * half; ++i) s2 += std::pow(std::fabs(samples[i]), k);
    MomentRow r;
    r.order = k;
    r.first_half = s1 / static_cast<double>(half);
    r.second_half = s2 / static_cast<double>(half);
    r.full = (s1 + s2) / static_cast<double>(2 * half);
    r.ratio_first = r.first_half > 0.0 ? r.full / r.first_half : (r.full > 0.0 ? INFINITY : 1.0);
    r.ratio_second = r.second_half > 0.0 ? r.full / r.second_half : (r.full > 0.0 ? INFINITY : 1.0);
    auto in_band = [](double q) { return q >= kMomentRatioLow && q <= kMomentRatioHigh; };
    r.stable = in_band(r.ratio_first) && in_band(r.ratio_second);
    rep.stable = rep.stable && r.stable;
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace grdf
