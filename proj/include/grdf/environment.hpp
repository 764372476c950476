#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "grdf/site.hpp"
#include "json.hpp"

namespace grdf {

/// Parameters of the i.i.d. site field.
///
/// `w_pmf[i]` is P[W = i + 1]; the support bound K is `w_pmf.size()`.
struct EnvConfig {
  double p = 0.5;
  std::vector<double> w_pmf{1.0};
  std::uint64_t seed = 0;

  int K() const noexcept { return static_cast<int>(w_pmf.size()); }
  double prob_w_one() const { return w_pmf.empty() ? 0.0 : w_pmf.front(); }

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  static EnvConfig from_json(const nlohmann::json& j);
};

/// Overrides for individual sites. Used to plant deterministic configurations
/// (figure setups, good boxes) on top of the hashed field.
struct SitePatch {
  std::optional<double> u;
  std::optional<int> w;
};

using SitePatches = std::unordered_map<Site, SitePatch, SiteHash>;

/// Counter-based mixing used by the site oracle and seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class SiteStream : std::uint64_t { kUniform = 1, kWeight = 2 };

constexpr std::uint64_t stream_key(std::uint64_t seed, SiteStream stream) noexcept {
  return mix64(seed ^ (static_cast<std::uint64_t>(stream) * 0x9E3779B97F4A7C15ULL));
}

constexpr std::uint64_t keyed_site_hash(std::uint64_t key, Site v) noexcept {
  const std::uint64_t h = mix64(key + static_cast<std::uint64_t>(v.x) * 0xD1B54A32D192ED03ULL);
  return mix64(h + static_cast<std::uint64_t>(v.t) * 0xABC98388FB8FAC03ULL);
}

constexpr std::uint64_t site_hash(std::uint64_t seed, Site v, SiteStream stream) noexcept {
  return keyed_site_hash(stream_key(seed, stream), v);
}

/// Maps the top 53 bits to the open interval (0, 1).
constexpr double to_open_unit(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// The random environment {(U_v, W_v)} as a pure function of (seed, site).
///
/// Immutable after construction; any number of threads may query it.
class Environment {
 public:
  explicit Environment(EnvConfig config, SitePatches patches = {});

  const EnvConfig& config() const noexcept { return config_; }
  double p() const noexcept { return config_.p; }
  int K() const noexcept { return config_.K(); }

  double uniform(Site v) const noexcept {
    if (!patches_.empty()) {
      if (auto it = patches_.find(v); it != patches_.end() && it->second.u) return *it->second.u;
    }
    return to_open_unit(keyed_site_hash(u_key_, v));
  }

  /// The tie U_v == p counts as closed.
  bool is_open(Site v) const noexcept { return uniform(v) < config_.p; }

  int w(Site v) const noexcept {
    if (!patches_.empty()) {
      if (auto it = patches_.find(v); it != patches_.end() && it->second.w) return *it->second.w;
    }
    const double r = to_open_unit(keyed_site_hash(w_key_, v));
    int k = 0;
    while (k + 1 < static_cast<int>(cdf_.size()) && !(r < cdf_[static_cast<std::size_t>(k)])) ++k;
    return k + 1;
  }

  const SitePatches& patches() const noexcept { return patches_; }

 private:
  EnvConfig config_;
  std::vector<double> cdf_;
  std::uint64_t u_key_ = 0;
  std::uint64_t w_key_ = 0;
  SitePatches patches_;
};

inline double site_uniform(const Environment& env, Site v) { return env.uniform(v); }
inline bool is_open(const Environment& env, Site v) { return env.is_open(v); }
inline int site_w(const Environment& env, Site v) { return env.w(v); }

// Helpers for planted configurations.

/// U value used for planted open / closed sites.
inline constexpr double kPlantedOpenU = 1e-9;
inline constexpr double kPlantedClosedU = 1.0 - 1e-9;

/// Marks every site of [x_lo, x_hi] x [t_lo, t_hi] closed, except `open_sites`
/// which become open (with distinct U values in listing order, largest first).
SitePatches plant_window(std::int64_t x_lo, std::int64_t x_hi, std::int64_t t_lo,
                         std::int64_t t_hi, const std::vector<Site>& open_sites);

/// Makes the K x K box Gamma(u) good: every site open with W = 1.
void plant_good_box(SitePatches& patches, Site u, int K);

/// Derives an independent per-trial seed; injective in `trial_index`.
constexpr std::uint64_t derive_trial_seed(std::uint64_t master_seed,
                                          std::uint64_t trial_index) noexcept {
  return mix64(master_seed + (trial_index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace grdf
