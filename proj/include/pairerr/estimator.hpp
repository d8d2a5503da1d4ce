// Copyright 2026 The pairerr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/builders.hpp"
#include "pairerr/copeland.hpp"
#include "pairerr/csv.hpp"
#include "pairerr/error.hpp"
#include "pairerr/parallel.hpp"
#include "pairerr/probmodel.hpp"
#include "pairerr/synth.hpp"

namespace pairerr {

/// Grid-search settings. Defaults are the full-resolution settings; see
/// desk_scale() for the coarse 2-D preset.
struct FitConfig {
  double grid_lo = 0.0;
  double grid_hi = 0.5;
  double grid_step = 0.005;
  std::size_t synth_replicates = 10;
  std::size_t curve_runs = 200;
  std::size_t n_stride = 1;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;

  static FitConfig paper_exact() { return {}; }
  static FitConfig desk_scale() {
    FitConfig c;
    c.grid_step = 0.01;
    c.synth_replicates = 3;
    c.curve_runs = 50;
    c.n_stride = 5;
    return c;
  }

  void validate() const {
    if (!(grid_step > 0)) throw Error(ErrorCode::kInvalidInput, "grid_step must be positive");
    if (grid_lo < 0 || grid_lo > grid_hi || grid_hi > 0.5)
      throw Error(ErrorCode::kInvalidInput, "grid must satisfy 0 <= lo <= hi <= 0.5");
    if (synth_replicates < 1 || curve_runs < 1 || n_stride < 1)
      throw Error(ErrorCode::kInvalidInput, "replicates, curve runs and stride must be >= 1");
  }

  std::vector<double> grid() const {
    validate();
    const auto count = static_cast<std::size_t>(std::floor((grid_hi - grid_lo) / grid_step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k) g[k] = std::round((grid_lo + k * grid_step) * 1e9) / 1e9;
    return g;
  }
};

inline nlohmann::json to_json(const FitConfig& c) {
  return {{"grid_lo", c.grid_lo},     {"grid_hi", c.grid_hi},           {"grid_step", c.grid_step},
          {"synth_replicates", c.synth_replicates}, {"curve_runs", c.curve_runs}, {"n_stride", c.n_stride},
          {"rng_seed", c.rng_seed}};
}

/// Sum over shared n of |mean_empirical(n) - mean_synthetic(n)|.
inline double misfit(const DeltaCurve& empirical, const DeltaCurve& synthetic) {
  if (empirical.points.size() != synthetic.points.size())
    throw Error(ErrorCode::kSupportMismatch, "curves have different n support");
  double total = 0;
  for (std::size_t k = 0; k < empirical.points.size(); ++k) {
    if (empirical.points[k].n != synthetic.points[k].n)
      throw Error(ErrorCode::kSupportMismatch, "curves have different n support");
    total += std::abs(empirical.points[k].mean - synthetic.points[k].mean);
  }
  return total;
}

namespace detail {
inline constexpr std::uint64_t kBankTag = 0x42414e4b00000001ull;
inline constexpr std::uint64_t kBankCurveTag = 0x42414e4b00000002ull;
inline constexpr std::uint64_t kEmpiricalTag = 0x454d504952494331ull;

inline double misfit_means(const std::vector<double>& a, const std::vector<double>& b) {
  double total = 0;
  for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(a[k] - b[k]);
  return total;
}
}  // namespace detail

/// Replicate-averaged synthetic Delta_S curves. A curve depends only on the
/// grid point, the repeat counts, N and the config, never on observed data,
/// so one bank can serve every fit sharing (N, config).
class SyntheticCurveBank {
 public:
  SyntheticCurveBank(std::size_t n, FitConfig cfg) : n_(n), cfg_(cfg), grid_(cfg.grid()) {
    support_ = curve_support(n, cfg.n_stride);
  }

  std::size_t size() const { return n_; }
  const FitConfig& config() const { return cfg_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<std::size_t>& support() const { return support_; }

  bool compatible(std::size_t n, const FitConfig& c) const {
    return n == n_ && c.grid_lo == cfg_.grid_lo && c.grid_hi == cfg_.grid_hi && c.grid_step == cfg_.grid_step &&
           c.synth_replicates == cfg_.synth_replicates && c.curve_runs == cfg_.curve_runs &&
           c.n_stride == cfg_.n_stride && c.rng_seed == cfg_.rng_seed;
  }

  /// Mean curve for a uniform-error grid point.
  const DeltaCurve& uniform(std::size_t a) { return get({0, 1, 1, a, a}); }

  /// Mean curve for a positional grid point (a indexes eps_plus, b eps_minus).
  const DeltaCurve& positional(const RepeatSpec& rep, std::size_t a, std::size_t b) {
    return get({1, rep.k_plus, rep.k_minus, a, b});
  }

  /// Fills every missing cell for the given repeat counts in parallel.
  void precompute_uniform() {
    std::vector<Key> keys;
    for (std::size_t a = 0; a < grid_.size(); ++a) keys.push_back({0, 1, 1, a, a});
    fill(keys);
  }
  void precompute_positional(const RepeatSpec& rep) {
    std::vector<Key> keys;
    for (std::size_t a = 0; a < grid_.size(); ++a)
      for (std::size_t b = 0; b < grid_.size(); ++b) keys.push_back({1, rep.k_plus, rep.k_minus, a, b});
    fill(keys);
  }

 private:
  using Key = std::tuple<int, int, int, std::size_t, std::size_t>;

  DeltaCurve compute(const Key& key) const {
    const auto [kind, kp, km, a, b] = key;
    std::vector<DeltaCurve> replicates;
    for (std::size_t r = 0; r < cfg_.synth_replicates; ++r) {
      const std::uint64_t seed =
          derive_seed(cfg_.rng_seed, {detail::kBankTag, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(kp),
                                      static_cast<std::uint64_t>(km), a, b, r});
      const auto curve_seed = derive_seed(seed, {detail::kBankCurveTag});
      if (kind == 0) {
        const auto z = synth_z(n_, ErrorSpec::uniform(grid_[a]), seed);
        replicates.push_back(delta_curve(z, cfg_.curve_runs, curve_seed, cfg_.n_stride));
      } else {
        const auto w = synth_w(n_, ErrorSpec::positional(grid_[a], grid_[b]), RepeatSpec{kp, km}, seed);
        replicates.push_back(delta_curve(w, cfg_.curve_runs, curve_seed, cfg_.n_stride));
      }
    }
    char label[96];
    if (kind == 0)
      std::snprintf(label, sizeof label, "synthetic(eps=%.3f)", grid_[a]);
    else
      std::snprintf(label, sizeof label, "synthetic(eps_plus=%.3f,eps_minus=%.3f,k_plus=%d,k_minus=%d)", grid_[a],
                    grid_[b], kp, km);
    return average_curves(replicates, label);
  }

  void fill(const std::vector<Key>& keys) {
    std::vector<Key> missing;
    {
      std::lock_guard lock(mutex_);
      for (const auto& k : keys)
        if (!cache_.count(k)) missing.push_back(k);
    }
    std::vector<DeltaCurve> computed(missing.size());
    parallel_for(missing.size(), cfg_.threads, [&](std::size_t i) { computed[i] = compute(missing[i]); });
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(computed[i]));
  }

  const DeltaCurve& get(const Key& key) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto curve = compute(key);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(curve)).first->second;
  }

  std::size_t n_;
  FitConfig cfg_;
  std::vector<double> grid_;
  std::vector<std::size_t> support_;
  std::map<Key, DeltaCurve> cache_;
  std::mutex mutex_;
};

struct SurfacePoint {
  double eps_plus = 0;
  double eps_minus = 0;
  double misfit = 0;
};

struct SubCellEstimate {
  int k_plus = 0;
  int k_minus = 0;
  double eps_plus = 0;
  double eps_minus = 0;
  double misfit = 0;
};

struct ErrorEstimate {
  ErrorSpec::Kind kind = ErrorSpec::Kind::kUniform;
  double best_eps_plus = 0;
  double best_eps_minus = 0;
  double misfit_at_best = 0;
  std::vector<SurfacePoint> misfit_surface;
  FitConfig config;
  std::vector<SubCellEstimate> sub_count_estimates;
  DeltaCurve empirical;
  DeltaCurve best_synthetic;
  std::optional<RepeatSpec> rep;

  double best_eps() const { return best_eps_plus; }
};

namespace detail {
inline std::size_t argmin(const std::vector<SurfacePoint>& surface) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < surface.size(); ++k)
    if (surface[k].misfit < surface[best].misfit) best = k;
  return best;
}

inline SyntheticCurveBank& resolve_bank(std::optional<SyntheticCurveBank>& local, SyntheticCurveBank* shared,
                                        std::size_t n, const FitConfig& cfg) {
  if (shared) {
    if (!shared->compatible(n, cfg)) throw Error(ErrorCode::kInvalidInput, "curve bank was built for another N or config");
    return *shared;
  }
  local.emplace(n, cfg);
  return *local;
}
}  // namespace detail

/// Empirical curve of an observed matrix under the fit's sampling settings.
inline DeltaCurve empirical_curve(const SkewMatrix& m, const FitConfig& cfg) {
  auto c = delta_curve(m, cfg.curve_runs, derive_seed(cfg.rng_seed, {detail::kEmpiricalTag}), cfg.n_stride, cfg.threads);
  c.source_label = "empirical";
  return c;
}

/// 1-D misfit surface of a matrix against uniform-error synthetic curves.
inline std::vector<SurfacePoint> uniform_surface(const DeltaCurve& empirical, SyntheticCurveBank& bank) {
  bank.precompute_uniform();
  const auto emp = empirical.means();
  std::vector<SurfacePoint> surface;
  for (std::size_t a = 0; a < bank.grid().size(); ++a) {
    const auto& syn = bank.uniform(a);
    if (syn.points.size() != emp.size()) throw Error(ErrorCode::kSupportMismatch, "curves have different n support");
    surface.push_back({bank.grid()[a], bank.grid()[a], detail::misfit_means(emp, syn.means())});
  }
  return surface;
}

/// 2-D misfit surface (eps_plus major) against positional synthetic curves.
inline std::vector<SurfacePoint> positional_surface(const DeltaCurve& empirical, const RepeatSpec& rep,
                                                    SyntheticCurveBank& bank) {
  bank.precompute_positional(rep);
  const auto emp = empirical.means();
  const auto& g = bank.grid();
  std::vector<SurfacePoint> surface;
  surface.reserve(g.size() * g.size());
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = 0; b < g.size(); ++b) {
      const auto& syn = bank.positional(rep, a, b);
      if (syn.points.size() != emp.size()) throw Error(ErrorCode::kSupportMismatch, "curves have different n support");
      surface.push_back({g[a], g[b], detail::misfit_means(emp, syn.means())});
    }
  return surface;
}

/// Fits a uniform error rate to an observed Z by grid search.
inline ErrorEstimate estimate_uniform(const ConsensusMatrixZ& z, const FitConfig& cfg,
                                      SyntheticCurveBank* shared_bank = nullptr) {
  cfg.validate();
  std::optional<SyntheticCurveBank> local;
  auto& bank = detail::resolve_bank(local, shared_bank, z.size(), cfg);
  ErrorEstimate est;
  est.kind = ErrorSpec::Kind::kUniform;
  est.config = cfg;
  est.empirical = empirical_curve(z, cfg);
  est.misfit_surface = uniform_surface(est.empirical, bank);
  const std::size_t best = detail::argmin(est.misfit_surface);
  est.best_eps_plus = est.best_eps_minus = est.misfit_surface[best].eps_plus;
  est.misfit_at_best = est.misfit_surface[best].misfit;
  est.best_synthetic = bank.uniform(best);
  return est;
}

/// Fits (eps_plus, eps_minus) on every sub-count matrix W^{ks+, ks-} with
/// 1 <= ks+ <= k_plus, 1 <= ks- <= k_minus, then takes the argmin of the
/// cell-averaged surface. Per-cell argmins are reported alongside.
inline ErrorEstimate estimate_positional(const std::vector<PreferenceRecord>& records, std::size_t n,
                                         const RepeatSpec& rep, const FitConfig& cfg,
                                         SyntheticCurveBank* shared_bank = nullptr) {
  cfg.validate();
  rep.validate();
  std::optional<SyntheticCurveBank> local;
  auto& bank = detail::resolve_bank(local, shared_bank, n, cfg);
  // fail fast before any grid work when the log cannot support the full counts
  const auto full = subselect_trials(records, rep.k_plus, rep.k_minus);
  (void)build_w(full, n, rep.k_plus, rep.k_minus);

  ErrorEstimate est;
  est.kind = ErrorSpec::Kind::kPositional;
  est.config = cfg;
  est.rep = rep;
  std::vector<SurfacePoint> averaged;
  std::size_t cells = 0;
  for (int kp = 1; kp <= rep.k_plus; ++kp) {
    for (int km = 1; km <= rep.k_minus; ++km) {
      const auto w = build_w(subselect_trials(records, kp, km), n, kp, km);
      auto emp = empirical_curve(w, cfg);
      const auto surface = positional_surface(emp, RepeatSpec{kp, km}, bank);
      const auto best = detail::argmin(surface);
      est.sub_count_estimates.push_back({kp, km, surface[best].eps_plus, surface[best].eps_minus, surface[best].misfit});
      if (averaged.empty()) {
        averaged = surface;
      } else {
        for (std::size_t k = 0; k < surface.size(); ++k) averaged[k].misfit += surface[k].misfit;
      }
      if (kp == rep.k_plus && km == rep.k_minus) est.empirical = std::move(emp);
      ++cells;
    }
  }
  for (auto& p : averaged) p.misfit /= static_cast<double>(cells);
  est.misfit_surface = std::move(averaged);
  const std::size_t best = detail::argmin(est.misfit_surface);
  est.best_eps_plus = est.misfit_surface[best].eps_plus;
  est.best_eps_minus = est.misfit_surface[best].eps_minus;
  est.misfit_at_best = est.misfit_surface[best].misfit;
  const std::size_t g = bank.grid().size();
  est.best_synthetic = bank.positional(rep, best / g, best % g);
  return est;
}

/// Report JSON. `surface_stride` > 1 keeps every k-th grid index per axis.
inline nlohmann::json to_json(const ErrorEstimate& e, std::size_t surface_stride = 1) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = e.kind == ErrorSpec::Kind::kUniform ? "uniform" : "positional";
  if (e.kind == ErrorSpec::Kind::kUniform) {
    j["best_eps"] = e.best_eps_plus;
  } else {
    j["best_eps_plus"] = e.best_eps_plus;
    j["best_eps_minus"] = e.best_eps_minus;
  }
  j["misfit_at_best"] = e.misfit_at_best;
  j["config"] = to_json(e.config);
  if (e.rep) j["rep"] = {{"k_plus", e.rep->k_plus}, {"k_minus", e.rep->k_minus}};
  const auto g = e.config.grid();
  nlohmann::json surface = nlohmann::json::array();
  const std::size_t stride = surface_stride == 0 ? 1 : surface_stride;
  for (std::size_t k = 0; k < e.misfit_surface.size(); ++k) {
    const std::size_t a = e.kind == ErrorSpec::Kind::kUniform ? k : k / g.size();
    const std::size_t b = e.kind == ErrorSpec::Kind::kUniform ? 0 : k % g.size();
    if (a % stride || b % stride) continue;
    const auto& p = e.misfit_surface[k];
    if (e.kind == ErrorSpec::Kind::kUniform)
      surface.push_back({p.eps_plus, p.misfit});
    else
      surface.push_back({p.eps_plus, p.eps_minus, p.misfit});
  }
  j["surface"] = std::move(surface);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : e.sub_count_estimates)
    cells.push_back({{"k_plus", c.k_plus}, {"k_minus", c.k_minus}, {"eps_plus", c.eps_plus}, {"eps_minus", c.eps_minus},
                     {"misfit", c.misfit}});
  j["sub_count_estimates"] = std::move(cells);
  return j;
}

inline void write_surface_csv(std::ostream& out, const ErrorEstimate& e) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"eps_plus", "eps_minus", "misfit"});
  for (const auto& p : e.misfit_surface)
    csv::write_row(out, {csv::fixed(p.eps_plus, 3), csv::fixed(p.eps_minus, 3), csv::fixed(p.misfit, 6)});
}

}  // namespace pairerr
