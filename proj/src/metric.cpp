#include "grdf/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "grdf/site.hpp"

namespace grdf {

double phi(double x, double t) {
  if (std::isinf(t)) return 0.0;
  return std::tanh(x) / (1.0 + std::fabs(t));
}

double psi(double t) { return std::tanh(t); }

double rho(CompactPoint p1, CompactPoint p2) {
  return std::max(std::fabs(phi(p1.x, p1.t) - phi(p2.x, p2.t)), std::fabs(psi(p1.t) - psi(p2.t)));
}

MetricPath::MetricPath(std::vector<std::pair<double, double>> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw std::invalid_argument("metric path needs a vertex");
  for (std::size_t i = 1; i < vertices_.size(); ++i)
    if (!(vertices_[i].first > vertices_[i - 1].first))
      throw std::invalid_argument("metric path times must increase");
}

double MetricPath::eval(double t) const {
  if (t <= vertices_.front().first) return vertices_.front().second;
  if (t >= vertices_.back().first) return vertices_.back().second;
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), t,
                             [](const auto& v, double tt) { return v.first < tt; });
  if (it->first == t) return it->second;
  const auto& [tb, xb] = *it;
  const auto& [ta, xa] = *(it - 1);
  return xa + (xb - xa) * (t - ta) / (tb - ta);
}

nlohmann::ordered_json MetricPath::to_json() const {
  nlohmann::ordered_json j;
  j["t0"] = t0();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [t, x] : vertices_) arr.push_back({x, t});
  j["vertices"] = std::move(arr);
  return j;
}

MetricPath MetricPath::from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> v;
  for (const auto& e : j.at("vertices")) v.emplace_back(e.at(1).get<double>(), e.at(0).get<double>());
  MetricPath p(std::move(v));
  if (j.contains("t0") && j.at("t0").get<double>() != p.t0())
    throw std::invalid_argument("t0 must equal the first vertex time");
  return p;
}

namespace {

struct Piece {
  double l, r;
  double al, ar;  // values of a at the ends
  double bl, br;
};

double gap_at(const Piece& p, double t) {
  const double w = (t - p.l) / (p.r - p.l);
  const double xa = p.al + (p.ar - p.al) * w;
  const double xb = p.bl + (p.br - p.bl) * w;
  return std::fabs(std::tanh(xa) - std::tanh(xb)) / (1.0 + std::fabs(t));
}

// Maximum of the gap over one piece on which both paths are linear and t
// keeps its sign; only subintervals that may beat best + tol/2 are refined.
void refine_piece(const Piece& p, double tol, double& best) {
  const double width = p.r - p.l;
  const double sa = (p.ar - p.al) / width, sb = (p.br - p.bl) / width;
  const double dx = std::max(std::fabs(p.al - p.bl), std::fabs(p.ar - p.br));
  const double m = std::min(std::fabs(p.l), std::fabs(p.r));
  const double g = 1.0 / (1.0 + m);
  // d/dt (tanh xa - tanh xb) is at most |sa - sb| + max|sech^2'| min(|sa|, |sb|) dx,
  // and |tanh xa - tanh xb| <= min(2, dx). Zero for coinciding pieces.
  constexpr double kSech2Lip = 0.7698004;  // 4 / (3 sqrt 3), rounded up
  const double lip = (std::fabs(sa - sb) + kSech2Lip * std::min(std::fabs(sa), std::fabs(sb)) * dx) * g +
                     std::min(2.0, dx) * g * g;
  struct Span {
    double u, v, hu, hv;
  };
  std::vector<Span> stack{{p.l, p.r, gap_at(p, p.l), gap_at(p, p.r)}};
  best = std::max({best, stack.back().hu, stack.back().hv});
  while (!stack.empty()) {
    const Span s = stack.back();
    stack.pop_back();
    const double slack = lip * (s.v - s.u) / 2.0;
    if (std::max(s.hu, s.hv) + slack <= best + tol / 2.0) continue;
    const double mid = 0.5 * (s.u + s.v);
    if (!(mid > s.u && mid < s.v)) continue;
    const double hm = gap_at(p, mid);
    best = std::max(best, hm);
    stack.push_back({mid, s.v, hm, s.hv});
    stack.push_back({s.u, mid, s.hu, hm});
  }
}

}  // namespace

double path_distance(const MetricPath& a, const MetricPath& b, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double lo = std::min(a.t0(), b.t0());
  std::vector<double> cuts;
  cuts.reserve(a.vertices().size() + b.vertices().size() + 1);
  for (const auto& v : a.vertices()) cuts.push_back(v.first);
  for (const auto& v : b.vertices()) cuts.push_back(v.first);
  if (lo < 0.0) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // Past the last cut both values are constant and t >= 0, so the gap only
  // decreases; the last cut carries the tail maximum.
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double l = cuts[i], r = cuts[i + 1];
    refine_piece({l, r, a.eval(l), a.eval(r), b.eval(l), b.eval(r)}, tol, best);
  }
  const double last = cuts.back();
  best = std::max(best, std::fabs(std::tanh(a.eval(last)) - std::tanh(b.eval(last))) /
                            (1.0 + std::fabs(last)));
  return std::max(best, std::fabs(psi(a.t0()) - psi(b.t0())));
}

double hausdorff(const std::vector<MetricPath>& A, const std::vector<MetricPath>& B, double tol) {
  if (A.empty() || B.empty()) throw EmptySet("hausdorff distance needs nonempty sets");
  auto directed = [tol](const std::vector<MetricPath>& X, const std::vector<MetricPath>& Y) {
    double worst = 0.0;
    for (const auto& x : X) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& y : Y) nearest = std::min(nearest, path_distance(x, y, tol));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(A, B), directed(B, A));
}

void RescaleParams::validate() const {
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma", "must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma", "must be positive");
}

MetricPath rescale(const PathRecord& path, const RescaleParams& params) {
  params.validate();
  const double nd = static_cast<double>(params.n);
  const double time_scale = nd * nd * params.gamma;
  const double space_scale = nd * params.sigma;
  std::vector<std::pair<double, double>> v;
  v.reserve(path.vertices.size());
  for (const Site& s : path.vertices)
    v.emplace_back(static_cast<double>(s.t) / time_scale, static_cast<double>(s.x) / space_scale);
  return MetricPath(std::move(v));
}

}  // namespace grdf
