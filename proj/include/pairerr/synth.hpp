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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/csv.hpp"
#include "pairerr/matrices.hpp"
#include "pairerr/probmodel.hpp"
#include "pairerr/records.hpp"
#include "pairerr/rng.hpp"

namespace pairerr {

// Synthetic ground truth is the identity order: text i beats text j iff i < j.

namespace detail {
inline constexpr std::uint64_t kSynthMatrixTag = 0x53594e54484d4154ull;
inline constexpr std::uint64_t kSynthRecordTag = 0x53594e5448524543ull;

inline std::uint64_t pair_index(std::size_t i, std::size_t j) { return (static_cast<std::uint64_t>(i) << 32) | j; }

// Numerator of a repeated entry for pair (i < j): k_plus lower-first trials
// flip with eps_plus, then k_minus higher-first trials flip with eps_minus.
inline int simulate_pair(CounterRng& rng, const ErrorSpec& spec, const RepeatSpec& rep) {
  int flips = 0;
  for (int t = 0; t < rep.k_plus; ++t) flips += rng.uniform() < spec.eps_plus;
  for (int t = 0; t < rep.k_minus; ++t) flips += rng.uniform() < spec.eps_minus;
  return rep.total() - 2 * flips;
}

inline void fill_synthetic(SkewMatrix& m, const ErrorSpec& spec, const RepeatSpec& rep, std::uint64_t seed) {
  const std::uint64_t key = derive_seed(seed, {kSynthMatrixTag});
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      CounterRng rng(key, pair_index(i, j));
      m.set_numerator(i, j, simulate_pair(rng, spec, rep));
    }
}
}  // namespace detail

/// Z drawn by simulating one judgment in each order per pair.
inline ConsensusMatrixZ synth_z(std::size_t n, const ErrorSpec& spec, std::uint64_t seed) {
  spec.validate();
  ConsensusMatrixZ z(n);
  detail::fill_synthetic(z, spec, RepeatSpec{1, 1}, seed);
  return z;
}

inline RepeatedMatrixW synth_w(std::size_t n, const ErrorSpec& spec, const RepeatSpec& rep, std::uint64_t seed) {
  spec.validate();
  rep.validate();
  RepeatedMatrixW w(n, rep.k_plus, rep.k_minus);
  detail::fill_synthetic(w, spec, rep, seed);
  return w;
}

/// Judgment log of a simulated judge. `sequence` is the order pattern applied
/// to every pair: '+' puts the lower (better) index first, '-' puts it second.
inline std::vector<PreferenceRecord> synth_records(std::size_t n, const ErrorSpec& spec, const std::string& sequence,
                                                   std::uint64_t seed, const std::string& run_id = "synthetic",
                                                   const std::string& model_id = "simulated") {
  spec.validate();
  if (sequence.empty()) throw Error(ErrorCode::kInvalidInput, "order sequence must be nonempty");
  for (char c : sequence)
    if (c != '+' && c != '-') throw Error(ErrorCode::kInvalidInput, "order sequence uses only '+' and '-'");
  const std::uint64_t key = derive_seed(seed, {detail::kSynthRecordTag});
  std::vector<PreferenceRecord> out;
  out.reserve(n * (n - 1) / 2 * sequence.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      CounterRng rng(key, detail::pair_index(i, j));
      for (std::size_t t = 0; t < sequence.size(); ++t) {
        const bool better_first = sequence[t] == '+';
        const bool flipped = rng.uniform() < (better_first ? spec.eps_plus : spec.eps_minus);
        PreferenceRecord r;
        r.run_id = run_id;
        r.model_id = model_id;
        r.first_index = better_first ? i : j;
        r.second_index = better_first ? j : i;
        r.trial_index = t;
        r.parsed_choice = (better_first != flipped) ? Choice::kFirst : Choice::kSecond;
        r.raw_response = r.parsed_choice == Choice::kFirst ? "1" : "2";
        r.temperature = 0.0;
        r.timestamp = "1970-01-01T00:00:00Z";
        out.push_back(std::move(r));
      }
    }
  return out;
}

struct McEstimate {
  double estimate = 0;
  double standard_error = 0;
  /// Frequency of the looser event "score exactly perfect" that also admits
  /// rows containing cancelling partial entries (e.g. zeros in Z).
  double any_path_estimate = 0;
  double any_path_standard_error = 0;
  std::size_t trials = 0;
};

/// Monte-Carlo frequency, over synthetic matrices, that the text of rank m
/// gets its perfect score through a row made only of true and inverse
/// outcomes, which is the event the closed form enumerates.
inline McEstimate mc_p_correct(std::size_t m_rank, std::size_t n, const ErrorSpec& spec,
                               std::optional<RepeatSpec> rep, std::size_t trials, std::uint64_t seed) {
  if (m_rank < 1 || m_rank > n) throw Error(ErrorCode::kRankOutOfRange, "rank outside 1..N");
  if (trials < 1) throw Error(ErrorCode::kInvalidInput, "trials must be >= 1");
  const RepeatSpec r = rep.value_or(RepeatSpec{1, 1});
  const std::size_t row = m_rank - 1;
  const long long perfect = static_cast<long long>(r.total()) * (static_cast<long long>(n) + 1 - 2 * static_cast<long long>(m_rank));
  std::size_t hits = 0, any_hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto w = synth_w(n, spec, r, derive_seed(seed, {t}));
    long long score = 0;
    bool saturated = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == row) continue;
      const int v = w.numerator(row, j);
      score += v;
      if (v != r.total() && v != -r.total()) saturated = false;
    }
    if (score == perfect) {
      ++any_hits;
      if (saturated) ++hits;
    }
  }
  auto se = [trials](double p) { return std::sqrt(p * (1 - p) / static_cast<double>(trials)); };
  McEstimate e;
  e.trials = trials;
  e.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  e.standard_error = se(e.estimate);
  e.any_path_estimate = static_cast<double>(any_hits) / static_cast<double>(trials);
  e.any_path_standard_error = se(e.any_path_estimate);
  return e;
}

inline nlohmann::json to_json(const ErrorSpec& spec) {
  return {{"kind", spec.kind == ErrorSpec::Kind::kUniform ? "uniform" : "positional"},
          {"eps_plus", spec.eps_plus},
          {"eps_minus", spec.eps_minus}};
}

/// Sidecar written next to an exported synthetic matrix.
inline nlohmann::json synth_provenance(std::size_t n, const ErrorSpec& spec, const RepeatSpec& rep, std::uint64_t seed) {
  return {{"schema_version", kSchemaVersion},
          {"n", n},
          {"spec", to_json(spec)},
          {"rep", {{"k_plus", rep.k_plus}, {"k_minus", rep.k_minus}}},
          {"seed", seed}};
}

}  // namespace pairerr
