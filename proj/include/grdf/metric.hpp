#pragma once

#include <utility>
#include <vector>

#include "grdf/walker.hpp"
#include "json.hpp"

namespace grdf {

/// Point of the compactified plane; coordinates may be +-infinity.
struct CompactPoint {
  double x = 0.0;
  double t = 0.0;
};

/// tanh(x) / (1 + |t|), with tanh(+-inf) = +-1 and the value 0 at |t| = inf.
double phi(double x, double t);
/// tanh(t), with tanh(+-inf) = +-1.
double psi(double t);
double rho(CompactPoint p1, CompactPoint p2);

/// A path (f, t0) of the path space: f piecewise linear through `vertices`
/// (time, value) starting at t0, held at its first value before t0 and at its
/// last value after the final vertex.
class MetricPath {
 public:
  MetricPath() = default;
  /// `vertices` as (t, x) pairs with strictly increasing t.
  explicit MetricPath(std::vector<std::pair<double, double>> vertices);

  double t0() const noexcept { return vertices_.front().first; }
  double t_last() const noexcept { return vertices_.back().first; }
  const std::vector<std::pair<double, double>>& vertices() const noexcept { return vertices_; }

  /// Extended path value at t.
  double eval(double t) const;

  nlohmann::ordered_json to_json() const;
  static MetricPath from_json(const nlohmann::json& j);

 private:
  std::vector<std::pair<double, double>> vertices_;
};

inline constexpr double kDefaultTolerance = 1e-6;

/// d(a, b). The result r satisfies r <= d(a, b) <= r + tol/2.
double path_distance(const MetricPath& a, const MetricPath& b, double tol = kDefaultTolerance);

/// Hausdorff distance between finite nonempty path sets. Throws EmptySet.
double hausdorff(const std::vector<MetricPath>& A, const std::vector<MetricPath>& B,
                 double tol = kDefaultTolerance);

struct RescaleParams {
  long n = 1;
  double gamma = 1.0;
  double sigma = 1.0;

  void validate() const;
};

/// t -> t / (n^2 gamma), x -> x / (n sigma).
MetricPath rescale(const PathRecord& path, const RescaleParams& params);

}  // namespace grdf
