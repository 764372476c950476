#include "grdf/environment.hpp"

#include <cmath>
#include <numeric>

namespace grdf {

void EnvConfig::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("p", "must lie in (0, 1)");
  if (w_pmf.empty()) throw ConfigError("w_pmf", "must have at least one entry");
  double total = 0.0;
  for (double q : w_pmf) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("w_pmf", "entries must be nonnegative");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("w_pmf", "entries must sum to 1");
  if (!(w_pmf.front() > 0.0)) throw ConfigError("w_pmf", "P[W=1] must be positive");
}

nlohmann::ordered_json EnvConfig::to_json() const {
  nlohmann::ordered_json j;
  j["p"] = p;
  j["w_pmf"] = w_pmf;
  j["seed"] = seed;
  return j;
}

EnvConfig EnvConfig::from_json(const nlohmann::json& j) {
  EnvConfig c;
  try {
    if (j.contains("p")) c.p = j.at("p").get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("p", "must be a number");
  }
  try {
    if (j.contains("w_pmf")) c.w_pmf = j.at("w_pmf").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("w_pmf", "must be an array of numbers");
  }
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("seed", "must be an unsigned 64-bit integer");
  }
  c.validate();
  return c;
}

Environment::Environment(EnvConfig config, SitePatches patches)
    : config_(std::move(config)), patches_(std::move(patches)) {
  config_.validate();
  cdf_.resize(config_.w_pmf.size());
  std::partial_sum(config_.w_pmf.begin(), config_.w_pmf.end(), cdf_.begin());
  cdf_.back() = 1.0;
  u_key_ = stream_key(config_.seed, SiteStream::kUniform);
  w_key_ = stream_key(config_.seed, SiteStream::kWeight);
}

SitePatches plant_window(std::int64_t x_lo, std::int64_t x_hi, std::int64_t t_lo,
                         std::int64_t t_hi, const std::vector<Site>& open_sites) {
  SitePatches patches;
  for (std::int64_t t = t_lo; t <= t_hi; ++t)
    for (std::int64_t x = x_lo; x <= x_hi; ++x) patches[{x, t}].u = kPlantedClosedU;
  double u = 1e-3;
  for (const Site& s : open_sites) {
    patches[s].u = u;
    u *= 0.5;
  }
  return patches;
}

void plant_good_box(SitePatches& patches, Site u, int K) {
  for (std::int64_t dx = 0; dx < K; ++dx)
    for (std::int64_t dt = 0; dt < K; ++dt) {
      auto& patch = patches[{u.x + dx, u.t - dt}];
      patch.u = kPlantedOpenU;
      patch.w = 1;
    }
}

}  // namespace grdf
