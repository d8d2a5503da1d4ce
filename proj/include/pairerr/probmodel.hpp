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
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pairerr/csv.hpp"
#include "pairerr/error.hpp"

namespace pairerr {

/// Per-judgment flip probabilities. Uniform error uses one rate for both
/// presentation orders; positional bias distinguishes the better text being
/// placed first (eps_plus) or second (eps_minus).
struct ErrorSpec {
  enum class Kind { kUniform, kPositional };

  Kind kind = Kind::kUniform;
  double eps_plus = 0;
  double eps_minus = 0;

  static ErrorSpec uniform(double eps) {
    ErrorSpec s{Kind::kUniform, eps, eps};
    s.validate();
    return s;
  }
  static ErrorSpec positional(double eps_plus, double eps_minus) {
    ErrorSpec s{Kind::kPositional, eps_plus, eps_minus};
    s.validate();
    return s;
  }

  double eps() const { return eps_plus; }

  void validate() const {
    auto ok = [](double e) { return e >= 0.0 && e < 1.0; };
    if (!ok(eps_plus) || !ok(eps_minus))
      throw Error(ErrorCode::kInvalidRate, "error rates must lie in [0, 1), got (" + std::to_string(eps_plus) + ", " +
                                               std::to_string(eps_minus) + ")");
    if (kind == Kind::kUniform && eps_plus != eps_minus)
      throw Error(ErrorCode::kInvalidRate, "uniform spec with distinct rates");
  }
};

struct RepeatSpec {
  int k_plus = 1;
  int k_minus = 1;

  int total() const { return k_plus + k_minus; }
  void validate() const {
    if (k_plus < 1 || k_minus < 1) throw Error(ErrorCode::kInvalidInput, "k_plus and k_minus must be >= 1");
  }
};

struct ZValueProbs {
  double p_zero = 0;
  double p_true = 0;     // entry equals the ground truth
  double p_inverse = 0;  // entry equals the negated ground truth
};

inline ZValueProbs z_value_probs(const ErrorSpec& spec) {
  spec.validate();
  const double ep = spec.eps_plus, em = spec.eps_minus;
  return {ep * (1 - em) + em * (1 - ep), (1 - ep) * (1 - em), ep * em};
}

namespace detail {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  if (n <= 62) {
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(c);
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

inline double log_binomial(int n, int k) {
  if (n <= 62) return std::log(binomial(n, k));
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

struct WValueProb {
  int m = 0;           // number of flipped trials
  double value = 0;    // (K - 2m) / K
  double probability = 0;
};

/// Distribution of a repeated-comparison entry over its 1 + K grid values,
/// ordered from the true outcome (m = 0) to the inverse outcome (m = K).
inline std::vector<WValueProb> w_value_probs(const ErrorSpec& spec, const RepeatSpec& rep) {
  spec.validate();
  rep.validate();
  const int kp = rep.k_plus, km = rep.k_minus, total = kp + km;
  const double ep = spec.eps_plus, em = spec.eps_minus;
  std::vector<WValueProb> out;
  for (int m = 0; m <= total; ++m) {
    double p = 0;
    for (int mp = std::max(0, m - km); mp <= std::min(kp, m); ++mp) {
      const int mm = m - mp;
      p += detail::binomial(kp, mp) * detail::binomial(km, mm) * std::pow(1 - ep, kp - mp) * std::pow(1 - em, km - mm) *
           std::pow(ep, mp) * std::pow(em, mm);
    }
    out.push_back({m, static_cast<double>(total - 2 * m) / total, p});
  }
  return out;
}

/// Probability that the text of ground-truth rank m (1-based) receives
/// exactly its perfect Copeland score, counting rows in which every entry is
/// a true or an inverse outcome and the c flipped wins are balanced by c
/// flipped losses. Without `rep` this is the Z formulation (k_plus = k_minus = 1).
inline double p_correct_copeland(std::size_t m_rank, std::size_t n, const ErrorSpec& spec,
                                 std::optional<RepeatSpec> rep = std::nullopt) {
  spec.validate();
  if (n < 1 || m_rank < 1 || m_rank > n)
    throw Error(ErrorCode::kRankOutOfRange, "rank " + std::to_string(m_rank) + " outside 1.." + std::to_string(n));
  const RepeatSpec r = rep.value_or(RepeatSpec{1, 1});
  r.validate();
  const int above = static_cast<int>(m_rank) - 1;
  const int below = static_cast<int>(n - m_rank);
  const int others = static_cast<int>(n) - 1;
  const int last = std::min(above, below);
  double total = 0;
  if (n <= 62) {
    // exact binomials; direct products keep ties between table cells exact
    const double p_to = std::pow(1 - spec.eps_plus, r.k_plus) * std::pow(1 - spec.eps_minus, r.k_minus);
    const double p_io = std::pow(spec.eps_plus, r.k_plus) * std::pow(spec.eps_minus, r.k_minus);
    for (int c = 0; c <= last; ++c)
      total += detail::binomial(above, c) * detail::binomial(below, c) * std::pow(p_to, others - 2 * c) *
               std::pow(p_io, 2 * c);
    return total;
  }
  // log space: C(99, 49) times rates^98 under- and overflows term by term
  const double log_to = r.k_plus * std::log1p(-spec.eps_plus) + r.k_minus * std::log1p(-spec.eps_minus);
  const bool io_zero = spec.eps_plus == 0.0 || spec.eps_minus == 0.0;
  const double log_io = io_zero ? -std::numeric_limits<double>::infinity()
                                : r.k_plus * std::log(spec.eps_plus) + r.k_minus * std::log(spec.eps_minus);
  for (int c = 0; c <= last; ++c) {
    if (c > 0 && io_zero) break;
    double log_term = detail::log_binomial(above, c) + detail::log_binomial(below, c) + (others - 2 * c) * log_to;
    if (c > 0) log_term += 2 * c * log_io;
    total += std::exp(log_term);
  }
  return total;
}

struct ScalabilityRow {
  std::size_t m = 0;
  std::size_t n = 0;
  double probability = 0;
};

struct ScalabilityTable {
  ErrorSpec spec;
  RepeatSpec rep;
  std::vector<ScalabilityRow> rows;
  /// Per rank: true when the probability strictly decreases at every step of
  /// the N range.
  std::map<std::size_t, bool> strictly_decreasing;
};

inline ScalabilityTable scalability_table(const ErrorSpec& spec, const RepeatSpec& rep,
                                          const std::vector<std::size_t>& m_ranks,
                                          const std::vector<std::size_t>& n_range) {
  for (std::size_t k = 1; k < n_range.size(); ++k)
    if (n_range[k] <= n_range[k - 1]) throw Error(ErrorCode::kInvalidInput, "N range must be ascending");
  ScalabilityTable t{spec, rep, {}, {}};
  for (std::size_t m : m_ranks) {
    bool decreasing = true;
    std::optional<double> prev;
    for (std::size_t n : n_range) {
      if (n < m) continue;
      const double p = p_correct_copeland(m, n, spec, rep);
      t.rows.push_back({m, n, p});
      if (prev && !(p < *prev)) decreasing = false;
      prev = p;
    }
    t.strictly_decreasing[m] = decreasing;
  }
  return t;
}

inline void write_scalability_header(std::ostream& out) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"m", "n", "probability", "kind", "eps_plus", "eps_minus", "k_plus", "k_minus"});
}

inline void write_scalability_rows(std::ostream& out, const ScalabilityTable& t) {
  const std::string kind = t.spec.kind == ErrorSpec::Kind::kUniform ? "uniform" : "positional";
  for (const auto& r : t.rows) {
    char prob[40];
    std::snprintf(prob, sizeof prob, "%.17g", r.probability);
    csv::write_row(out, {std::to_string(r.m), std::to_string(r.n), prob, kind, csv::fixed(t.spec.eps_plus, 6),
                         csv::fixed(t.spec.eps_minus, 6), std::to_string(t.rep.k_plus), std::to_string(t.rep.k_minus)});
  }
}

}  // namespace pairerr
