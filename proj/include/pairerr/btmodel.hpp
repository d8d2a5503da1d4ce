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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/copeland.hpp"
#include "pairerr/csv.hpp"
#include "pairerr/error.hpp"
#include "pairerr/matrices.hpp"
#include "pairerr/parallel.hpp"
#include "pairerr/rng.hpp"

namespace pairerr {

enum class DegeneratePolicy {
  kPeel,    // objects with no wins or no losses are ranked at the extremes and left out of the fit
  kReject,  // such objects raise DegenerateStrengths
};

struct BTOptions {
  std::size_t max_iters = 500;
  /// Stop once a sweep leaves the ranking unchanged; when false, iterate
  /// until the largest relative strength change drops below strength_tol.
  bool stop_on_ranking = true;
  double strength_tol = 1e-12;
  DegeneratePolicy degenerate = DegeneratePolicy::kPeel;
};

/// Biased Bradley-Terry fit: P(i beats j) = pi_i / (pi_i + e^eps pi_j).
struct BTFit {
  std::vector<double> strengths;  // NaN for peeled objects
  std::vector<double> scores;     // log strengths; NaN for peeled objects
  std::vector<std::size_t> ranking;
  std::size_t iterations_used = 0;
  double eps = 0;
  bool converged_ranking = false;
  bool converged_strengths = false;
  std::vector<std::size_t> peeled_top;
  std::vector<std::size_t> peeled_bottom;
  std::vector<std::string> warnings;

  bool fitted(std::size_t i) const { return std::isfinite(strengths[i]); }
};

namespace detail {

struct Peeling {
  std::vector<char> active;
  std::vector<std::vector<std::size_t>> top_rounds;
  std::vector<std::vector<std::size_t>> bottom_rounds;
};

// Repeatedly removes objects with no wins or no losses among the remaining
// ones (removing an unbeaten object can leave another one unbeaten).
inline Peeling peel(const StrengthMatrixX& x) {
  const std::size_t n = x.size();
  Peeling p;
  p.active.assign(n, 1);
  for (;;) {
    std::vector<std::size_t> top, bottom;
    for (std::size_t i = 0; i < n; ++i) {
      if (!p.active[i]) continue;
      long wins = 0, losses = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!p.active[j] || j == i) continue;
        wins += x.wins(i, j);
        losses += x.wins(j, i);
      }
      if (wins == 0)
        bottom.push_back(i);
      else if (losses == 0)
        top.push_back(i);
    }
    if (top.empty() && bottom.empty()) break;
    for (auto i : top) p.active[i] = 0;
    for (auto i : bottom) p.active[i] = 0;
    if (!top.empty()) p.top_rounds.push_back(std::move(top));
    if (!bottom.empty()) p.bottom_rounds.push_back(std::move(bottom));
  }
  return p;
}

inline std::vector<std::size_t> full_ranking(const Peeling& p, const std::vector<double>& scores) {
  std::vector<std::size_t> out;
  for (const auto& round : p.top_rounds) out.insert(out.end(), round.begin(), round.end());
  std::vector<std::size_t> fitted;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (p.active[i]) fitted.push_back(i);
  std::stable_sort(fitted.begin(), fitted.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  out.insert(out.end(), fitted.begin(), fitted.end());
  for (auto it = p.bottom_rounds.rbegin(); it != p.bottom_rounds.rend(); ++it) out.insert(out.end(), it->begin(), it->end());
  return out;
}

}  // namespace detail

/// Fixed-point iteration
///   pi_i <- [sum_j x_ij e^eps pi_j / (pi_i + e^eps pi_j)] / [sum_j x_ji / (pi_i + e^eps pi_j)]
/// applied to all objects at once (relaxed, see below), with strengths
/// renormalized to geometric mean 1 after every sweep.
inline BTFit bt_iterate(const StrengthMatrixX& x, double eps, const std::vector<double>& init,
                        const BTOptions& opts = {}) {
  const std::size_t n = x.size();
  if (init.size() != n) throw Error(ErrorCode::kLengthMismatch, "initial strengths do not match N");
  for (double v : init)
    if (!(v > 0) || !std::isfinite(v)) throw Error(ErrorCode::kNonPositiveInit, "initial strengths must be positive");

  const auto peeling = detail::peel(x);
  BTFit fit;
  fit.eps = eps;
  for (const auto& r : peeling.top_rounds) fit.peeled_top.insert(fit.peeled_top.end(), r.begin(), r.end());
  for (const auto& r : peeling.bottom_rounds) fit.peeled_bottom.insert(fit.peeled_bottom.end(), r.begin(), r.end());
  if (opts.degenerate == DegeneratePolicy::kReject && (!fit.peeled_top.empty() || !fit.peeled_bottom.empty()))
    throw Error(ErrorCode::kDegenerateStrengths, "some objects have no wins or no losses");
  if (!fit.peeled_top.empty() || !fit.peeled_bottom.empty())
    fit.warnings.push_back(std::to_string(fit.peeled_top.size() + fit.peeled_bottom.size()) +
                           " object(s) without wins or losses ranked at the extremes and excluded from the fit");

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i)
    if (peeling.active[i]) active.push_back(i);

  const double bias = std::exp(eps);
  std::vector<double> pi(n, std::numeric_limits<double>::quiet_NaN());
  for (auto i : active) pi[i] = init[i];

  auto normalize = [&] {
    if (active.empty()) return;
    double mean_log = 0;
    for (auto i : active) mean_log += std::log(pi[i]);
    mean_log /= static_cast<double>(active.size());
    const double scale = std::exp(mean_log);
    for (auto i : active) pi[i] /= scale;
  };
  auto log_scores = [&] {
    std::vector<double> s(n, std::numeric_limits<double>::quiet_NaN());
    for (auto i : active) s[i] = std::log(pi[i]);
    return s;
  };

  normalize();
  auto ranking = detail::full_ranking(peeling, log_scores());
  if (active.size() <= 1) {
    fit.converged_ranking = fit.converged_strengths = true;
  } else {
    // Relaxed in log space, s <- s/m + (m-1)/m log T(pi) with m fitted objects.
    // Fixed points are unchanged. The bare update oscillates when m = 2
    // (the ratio r flips to (w/l)^2 / r); this factor makes that case exact
    // in one sweep and cancels the -1/(m-1) mode of balanced designs.
    const double m = static_cast<double>(active.size());
    const double relax_keep = 1.0 / m, relax_step = (m - 1.0) / m;
    std::vector<double> previous(n);
    for (std::size_t sweep = 1; sweep <= opts.max_iters; ++sweep) {
      previous = pi;
      for (auto i : active) {
        double num = 0, den = 0;
        for (auto j : active) {
          if (j == i) continue;
          const double d = previous[i] + bias * previous[j];
          num += static_cast<double>(x.wins(i, j)) * bias * previous[j] / d;
          den += static_cast<double>(x.wins(j, i)) / d;
        }
        pi[i] = std::pow(previous[i], relax_keep) * std::pow(num / den, relax_step);
      }
      normalize();
      for (auto i : active)
        if (!(pi[i] > 0) || !std::isfinite(pi[i]))
          throw Error(ErrorCode::kDegenerateStrengths, "strengths diverged at sweep " + std::to_string(sweep));
      fit.iterations_used = sweep;
      auto next_ranking = detail::full_ranking(peeling, log_scores());
      double max_rel = 0;
      for (auto i : active) max_rel = std::max(max_rel, std::abs(pi[i] - previous[i]) / previous[i]);
      const bool same_ranking = next_ranking == ranking;
      ranking = std::move(next_ranking);
      if (max_rel < opts.strength_tol) fit.converged_strengths = true;
      if (same_ranking) fit.converged_ranking = true;
      if (opts.stop_on_ranking ? same_ranking : fit.converged_strengths) break;
    }
  }
  fit.strengths = pi;
  fit.scores = log_scores();
  fit.ranking = std::move(ranking);
  return fit;
}

inline BTFit bt_iterate(const StrengthMatrixX& x, double eps, const std::vector<double>& init, std::size_t max_iters) {
  BTOptions opts;
  opts.max_iters = max_iters;
  return bt_iterate(x, eps, init, opts);
}

/// max_i |LHS_i / RHS_i - 1| of the stationarity condition
///   (1/pi_i) sum_j x_ij e^eps pi_j / (pi_i + e^eps pi_j) = sum_j x_ji / (pi_i + e^eps pi_j)
/// over fitted objects. Only eps = 0 has exact solutions in general; for eps > 0
/// the iteration converges to a common ratio LHS_i / RHS_i instead.
inline double bt_stationarity_residual(const StrengthMatrixX& x, const BTFit& fit) {
  const double bias = std::exp(fit.eps);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!fit.fitted(i)) continue;
    double lhs = 0, rhs = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j == i || !fit.fitted(j)) continue;
      const double d = fit.strengths[i] + bias * fit.strengths[j];
      lhs += static_cast<double>(x.wins(i, j)) * bias * fit.strengths[j] / d;
      rhs += static_cast<double>(x.wins(j, i)) / d;
    }
    lhs /= fit.strengths[i];
    worst = std::max(worst, std::abs(lhs / rhs - 1.0));
  }
  return worst;
}

/// max(s) - min(s) over fitted objects.
inline double score_spread(const BTFit& fit) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double s : fit.scores) {
    if (!std::isfinite(s)) continue;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi >= lo ? hi - lo : 0.0;
}

enum class SpreadObjective { kMinSpread, kMaxSpread };

struct BTSearchConfig {
  double grid_lo = 0.0;
  double grid_hi = 0.5;
  double grid_step = 0.005;
  double bin_width = 0.02;
  std::size_t max_iters = 500;
  std::uint64_t rng_seed = 0;
  unsigned threads = 1;

  std::vector<double> grid() const {
    if (!(grid_step > 0) || grid_lo < 0 || grid_hi > 0.5 || grid_lo > grid_hi)
      throw Error(ErrorCode::kInvalidInput, "BT grid must lie within [0, 0.5] with positive step");
    const auto count = static_cast<std::size_t>(std::floor((grid_hi - grid_lo) / grid_step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k) g[k] = std::round((grid_lo + k * grid_step) * 1e9) / 1e9;
    return g;
  }
};

struct SeedResult {
  std::size_t seed = 0;
  double eps_opt = std::numeric_limits<double>::quiet_NaN();
  double spread_at_opt = std::numeric_limits<double>::quiet_NaN();
  std::size_t failed_cells = 0;
  std::vector<double> spreads;  // per grid point; NaN marks a failed cell
};

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

struct BTSearchResult {
  SpreadObjective objective = SpreadObjective::kMinSpread;
  std::vector<double> grid;
  std::vector<SeedResult> seeds;
  std::vector<HistogramBin> histogram;
  std::size_t modal_bin = 0;
  /// Fraction of seeds whose eps_opt falls in the lowest bin.
  double lowest_bin_fraction = 0;
  bool every_seed_in_lowest_bin = false;
  bool modal_bin_is_lowest = false;
};

namespace detail {
inline constexpr std::uint64_t kBtInitTag = 0x4254494e49540001ull;
}

/// Initial strengths for one seed: scores uniform on [0, 1), strengths e^score.
inline std::vector<double> bt_initial_strengths(std::size_t n, std::uint64_t master_seed, std::size_t seed) {
  CounterRng rng(derive_seed(master_seed, {detail::kBtInitTag}), seed);
  std::vector<double> init(n);
  for (auto& v : init) v = std::exp(rng.uniform());
  return init;
}

inline std::vector<HistogramBin> make_bins(const BTSearchConfig& cfg) {
  const auto count = static_cast<std::size_t>(std::llround((cfg.grid_hi - cfg.grid_lo) / cfg.bin_width));
  std::vector<HistogramBin> bins(std::max<std::size_t>(count, 1));
  for (std::size_t k = 0; k < bins.size(); ++k) {
    bins[k].lo = std::round((cfg.grid_lo + k * cfg.bin_width) * 1e9) / 1e9;
    bins[k].hi = std::round((cfg.grid_lo + (k + 1) * cfg.bin_width) * 1e9) / 1e9;
  }
  return bins;
}

inline std::size_t bin_index(double eps, const BTSearchConfig& cfg, std::size_t bins) {
  const double pos = (eps - cfg.grid_lo) / cfg.bin_width;
  const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(pos + 1e-9)));
  return std::min(k, bins - 1);
}

/// For each seed, fits every grid eps from the same random start and keeps the
/// eps whose fitted scores have the smallest (or largest) spread.
inline BTSearchResult bt_eps_search(const StrengthMatrixX& x, SpreadObjective objective, std::size_t seeds,
                                    const BTSearchConfig& cfg = {}) {
  BTSearchResult res;
  res.objective = objective;
  res.grid = cfg.grid();
  res.seeds.resize(seeds);
  BTOptions opts;
  opts.max_iters = cfg.max_iters;
  parallel_for(seeds, cfg.threads, [&](std::size_t s) {
    SeedResult sr;
    sr.seed = s;
    const auto init = bt_initial_strengths(x.size(), cfg.rng_seed, s);
    for (std::size_t g = 0; g < res.grid.size(); ++g) {
      double spread = std::numeric_limits<double>::quiet_NaN();
      try {
        spread = score_spread(bt_iterate(x, res.grid[g], init, opts));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateStrengths) throw;
        ++sr.failed_cells;
      }
      sr.spreads.push_back(spread);
      if (std::isnan(spread)) continue;
      const bool better = std::isnan(sr.spread_at_opt) ||
                          (objective == SpreadObjective::kMinSpread ? spread < sr.spread_at_opt : spread > sr.spread_at_opt);
      if (better) {
        sr.spread_at_opt = spread;
        sr.eps_opt = res.grid[g];
      }
    }
    res.seeds[s] = std::move(sr);
  });
  res.histogram = make_bins(cfg);
  std::size_t in_lowest = 0, valid = 0;
  for (const auto& sr : res.seeds) {
    if (std::isnan(sr.eps_opt)) continue;
    ++valid;
    const auto k = bin_index(sr.eps_opt, cfg, res.histogram.size());
    ++res.histogram[k].count;
    if (k == 0) ++in_lowest;
  }
  for (std::size_t k = 1; k < res.histogram.size(); ++k)
    if (res.histogram[k].count > res.histogram[res.modal_bin].count) res.modal_bin = k;
  res.lowest_bin_fraction = valid ? static_cast<double>(in_lowest) / static_cast<double>(valid) : 0.0;
  res.every_seed_in_lowest_bin = valid > 0 && in_lowest == valid;
  res.modal_bin_is_lowest = valid > 0 && res.modal_bin == 0;
  return res;
}

struct BTRankResult {
  std::vector<std::size_t> ranking;  // modal ranking across seeds
  std::vector<double> stability;     // per position: fraction of seeds agreeing with the modal ranking
  std::size_t seeds = 0;
  BTFit representative;              // fit of the first seed producing the modal ranking
};

/// Ranks objects with a fixed bias eps from several random starts.
inline BTRankResult bt_rank_with_eps(const StrengthMatrixX& x, double eps, std::size_t seeds,
                                     std::uint64_t master_seed = 0, std::size_t max_iters = 500) {
  if (seeds < 1) throw Error(ErrorCode::kInvalidInput, "seeds must be >= 1");
  std::vector<BTFit> fits;
  for (std::size_t s = 0; s < seeds; ++s)
    fits.push_back(bt_iterate(x, eps, bt_initial_strengths(x.size(), master_seed, s), max_iters));
  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::size_t modal = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto c = ++counts[fits[s].ranking];
    if (c > counts[fits[modal].ranking]) modal = s;
  }
  BTRankResult r;
  r.seeds = seeds;
  r.ranking = fits[modal].ranking;
  r.representative = fits[modal];
  r.stability.assign(r.ranking.size(), 0.0);
  for (const auto& f : fits)
    for (std::size_t p = 0; p < r.ranking.size(); ++p)
      if (f.ranking[p] == r.ranking[p]) r.stability[p] += 1.0 / static_cast<double>(seeds);
  return r;
}

inline nlohmann::json to_json(const BTFit& f) {
  auto nullable = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double d : v) a.push_back(std::isfinite(d) ? nlohmann::json(d) : nlohmann::json(nullptr));
    return a;
  };
  return {{"schema_version", kSchemaVersion},
          {"eps", f.eps},
          {"strengths", nullable(f.strengths)},
          {"scores", nullable(f.scores)},
          {"ranking", f.ranking},
          {"iterations", f.iterations_used},
          {"converged_ranking", f.converged_ranking},
          {"peeled_top", f.peeled_top},
          {"peeled_bottom", f.peeled_bottom},
          {"warnings", f.warnings}};
}

inline void write_histogram_csv(std::ostream& out, const BTSearchResult& r) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"bin_lo", "bin_hi", "count"});
  for (const auto& b : r.histogram) csv::write_row(out, {csv::fixed(b.lo, 2), csv::fixed(b.hi, 2), std::to_string(b.count)});
}

inline void write_seed_table_csv(std::ostream& out, const BTSearchResult& r) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"seed", "eps_opt", "spread_at_opt", "failed_cells"});
  for (const auto& s : r.seeds)
    csv::write_row(out, {std::to_string(s.seed), std::isnan(s.eps_opt) ? "" : csv::fixed(s.eps_opt, 3),
                         std::isnan(s.spread_at_opt) ? "" : csv::fixed(s.spread_at_opt, 9), std::to_string(s.failed_cells)});
}

/// Long format: one row per (seed, eps) with the fitted spread.
inline void write_spread_csv(std::ostream& out, const BTSearchResult& r) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"seed", "eps", "spread"});
  for (const auto& s : r.seeds)
    for (std::size_t g = 0; g < r.grid.size(); ++g)
      csv::write_row(out, {std::to_string(s.seed), csv::fixed(r.grid[g], 3),
                           std::isnan(s.spreads[g]) ? "" : csv::fixed(s.spreads[g], 9)});
}

}  // namespace pairerr
