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
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pairerr/error.hpp"
#include "pairerr/matrices.hpp"
#include "pairerr/records.hpp"

namespace pairerr {

/// Chooses which records of an ordered pair feed a single-order matrix.
/// `all()` expects exactly one record per ordered pair; `occurrence(r)` takes
/// the r-th trial (by trial index) of each ordered pair, i.e. the r-th
/// both-order run inside a repeated log.
struct TrialSelector {
  bool take_all = true;
  std::size_t occurrence_index = 0;

  static TrialSelector all() { return {}; }
  static TrialSelector occurrence(std::size_t r) { return {false, r}; }
};

namespace detail {

inline void check_indices(const PreferenceRecord& r, std::size_t n) {
  if (r.first_index >= n || r.second_index >= n)
    throw Error(ErrorCode::kInvalidInput, "record index out of range for N=" + std::to_string(n));
  if (r.first_index == r.second_index) throw Error(ErrorCode::kInvalidInput, "record compares a text with itself");
}

inline std::string pair_label(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

// Ordered pair -> records sorted by trial index. Rejects (pair, trial) repeats.
inline std::map<std::pair<std::size_t, std::size_t>, std::vector<const PreferenceRecord*>> group_ordered(
    const std::vector<PreferenceRecord>& records, std::size_t n) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const PreferenceRecord*>> groups;
  for (const auto& r : records) {
    check_indices(r, n);
    groups[{r.first_index, r.second_index}].push_back(&r);
  }
  for (auto& [key, list] : groups) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto* a, const auto* b) { return a->trial_index < b->trial_index; });
    for (std::size_t k = 1; k < list.size(); ++k)
      if (list[k]->trial_index == list[k - 1]->trial_index)
        throw Error(ErrorCode::kDuplicatePair, "two records for ordered pair " + pair_label(key.first, key.second) +
                                                   " at trial " + std::to_string(list[k]->trial_index));
  }
  return groups;
}

}  // namespace detail

inline PreferenceMatrixY build_y(const std::vector<PreferenceRecord>& records, std::size_t n,
                                 TrialSelector selector = TrialSelector::all()) {
  const auto groups = detail::group_ordered(records, n);
  PreferenceMatrixY y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto it = groups.find({i, j});
      if (it == groups.end())
        throw Error(ErrorCode::kMissingPair, "no record for ordered pair " + detail::pair_label(i, j));
      const auto& list = it->second;
      if (selector.take_all) {
        if (list.size() > 1)
          throw Error(ErrorCode::kDuplicatePair,
                      std::to_string(list.size()) + " records for ordered pair " + detail::pair_label(i, j));
        y.set(i, j, list.front()->outcome());
      } else {
        if (selector.occurrence_index >= list.size())
          throw Error(ErrorCode::kMissingPair, "ordered pair " + detail::pair_label(i, j) + " has no trial occurrence " +
                                                   std::to_string(selector.occurrence_index));
        y.set(i, j, list[selector.occurrence_index]->outcome());
      }
    }
  }
  return y;
}

inline ConsensusMatrixZ build_z(const PreferenceMatrixY& y) {
  y.require_complete();
  ConsensusMatrixZ z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = i + 1; j < y.size(); ++j) z.set_entry(i, j, (y.at(i, j) - y.at(j, i)) / 2);
  return z;
}

/// Pairs are oriented canonically: for {i, j} with i < j, "i first" trials
/// count toward k_plus and "j first" trials toward k_minus.
inline RepeatedMatrixW build_w(const std::vector<PreferenceRecord>& records, std::size_t n, int k_plus, int k_minus) {
  RepeatedMatrixW w(n, k_plus, k_minus);
  const auto groups = detail::group_ordered(records, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto fwd = groups.find({i, j});
      const auto rev = groups.find({j, i});
      const std::size_t n_fwd = fwd == groups.end() ? 0 : fwd->second.size();
      const std::size_t n_rev = rev == groups.end() ? 0 : rev->second.size();
      if (n_fwd < static_cast<std::size_t>(k_plus) || n_rev < static_cast<std::size_t>(k_minus))
        throw Error(ErrorCode::kMissingTrials, "pair " + detail::pair_label(i, j) + " has " + std::to_string(n_fwd) +
                                                   "/" + std::to_string(n_rev) + " trials, expected " +
                                                   std::to_string(k_plus) + "/" + std::to_string(k_minus));
      if (n_fwd > static_cast<std::size_t>(k_plus) || n_rev > static_cast<std::size_t>(k_minus))
        throw Error(ErrorCode::kInconsistentCounts,
                    "pair " + detail::pair_label(i, j) + " has " + std::to_string(n_fwd) + "/" + std::to_string(n_rev) +
                        " trials, expected " + std::to_string(k_plus) + "/" + std::to_string(k_minus));
      int numerator = 0;
      for (const auto* r : fwd->second) numerator += r->outcome();
      for (const auto* r : rev->second) numerator -= r->outcome();
      w.set_numerator(i, j, numerator);
    }
  }
  return w;
}

inline StrengthMatrixX build_x(const std::vector<PreferenceRecord>& records, std::size_t n) {
  StrengthMatrixX x(n);
  for (const auto& r : records) {
    detail::check_indices(r, n);
    x.add_win(r.winner(), r.loser());
  }
  return x;
}

/// Keeps, per canonical pair, the first k_plus_s lower-first trials and the
/// first k_minus_s higher-first trials (by trial index). Input order is kept.
inline std::vector<PreferenceRecord> subselect_trials(const std::vector<PreferenceRecord>& records, int k_plus_s,
                                                      int k_minus_s) {
  if (k_plus_s < 1 || k_minus_s < 1) throw Error(ErrorCode::kInvalidInput, "sub-counts must be >= 1");
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::pair<std::size_t, std::size_t>>> by_pair;
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    by_pair[{r.first_index, r.second_index}].push_back({r.trial_index, k});
  }
  std::set<std::pair<std::size_t, std::size_t>> canonical;
  for (const auto& [key, list] : by_pair) canonical.insert({std::min(key.first, key.second), std::max(key.first, key.second)});

  std::vector<char> keep(records.size(), 0);
  for (const auto& [lo, hi] : canonical) {
    for (int dir = 0; dir < 2; ++dir) {
      const auto key = dir == 0 ? std::make_pair(lo, hi) : std::make_pair(hi, lo);
      const auto want = static_cast<std::size_t>(dir == 0 ? k_plus_s : k_minus_s);
      auto it = by_pair.find(key);
      const std::size_t have = it == by_pair.end() ? 0 : it->second.size();
      if (have < want)
        throw Error(ErrorCode::kInsufficientTrials, "pair " + detail::pair_label(lo, hi) + " has " +
                                                        std::to_string(have) + (dir == 0 ? " lower-first" : " higher-first") +
                                                        " trials, need " + std::to_string(want));
      auto& list = it->second;
      std::stable_sort(list.begin(), list.end());
      for (std::size_t t = 0; t < want; ++t) keep[list[t].second] = 1;
    }
  }
  std::vector<PreferenceRecord> out;
  for (std::size_t k = 0; k < records.size(); ++k)
    if (keep[k]) out.push_back(records[k]);
  return out;
}

/// Fraction of unordered pairs whose preference is the same under both
/// presentation orders (and therefore self-contradictory).
inline double commutativity_score(const PreferenceMatrixY& y) {
  y.require_complete();
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (y.at(i, j) == y.at(j, i)) ++violations;
  return static_cast<double>(violations) / static_cast<double>(n * (n - 1) / 2);
}

/// Records belonging to one run.
inline std::vector<PreferenceRecord> filter_run(const std::vector<PreferenceRecord>& records, const std::string& run_id) {
  std::vector<PreferenceRecord> out;
  for (const auto& r : records)
    if (r.run_id == run_id) out.push_back(r);
  return out;
}

/// Smallest N that covers every index mentioned in the records.
inline std::size_t infer_size(const std::vector<PreferenceRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) n = std::max({n, r.first_index + 1, r.second_index + 1});
  return n;
}

/// Per-pair (k_plus, k_minus) counts, required to agree across all pairs.
inline std::pair<int, int> infer_repeat_counts(const std::vector<PreferenceRecord>& records, std::size_t n) {
  const auto groups = detail::group_ordered(records, n);
  int kp = -1, km = -1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto f = groups.find({i, j});
      const auto b = groups.find({j, i});
      const int cf = f == groups.end() ? 0 : static_cast<int>(f->second.size());
      const int cb = b == groups.end() ? 0 : static_cast<int>(b->second.size());
      if (kp < 0) {
        kp = cf;
        km = cb;
      } else if (cf != kp || cb != km) {
        throw Error(ErrorCode::kInconsistentCounts, "pair " + detail::pair_label(i, j) + " has " + std::to_string(cf) +
                                                        "/" + std::to_string(cb) + " trials, others have " +
                                                        std::to_string(kp) + "/" + std::to_string(km));
      }
    }
  }
  return {std::max(kp, 0), std::max(km, 0)};
}

}  // namespace pairerr
