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
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "pairerr/csv.hpp"
#include "pairerr/error.hpp"
#include "pairerr/matrices.hpp"
#include "pairerr/parallel.hpp"
#include "pairerr/rng.hpp"

namespace pairerr {

/// Row sums of a Z or W matrix, held exactly as numerators over the matrix
/// denominator.
struct CopelandScores {
  std::vector<long long> numerators;
  int denominator = 1;

  std::size_t size() const { return numerators.size(); }
  double operator[](std::size_t i) const { return static_cast<double>(numerators[i]) / denominator; }
  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) v.push_back((*this)[i]);
    return v;
  }
};

inline CopelandScores copeland_scores(const SkewMatrix& m) {
  CopelandScores s;
  s.denominator = m.denominator();
  s.numerators.assign(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) s.numerators[i] += m.numerator(i, j);
  return s;
}

/// Scores of an error-free transitive ensemble: N-1, N-3, ..., 1-N.
inline std::vector<double> perfect_sequence(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::kInvalidInput, "perfect sequence needs n >= 2");
  std::vector<double> seq(n);
  for (std::size_t m = 0; m < n; ++m) seq[m] = static_cast<double>(n) - 1.0 - 2.0 * static_cast<double>(m);
  return seq;
}

/// Delta_S in numerator units: scores are sorted descending in place and
/// matched element by element against denominator * perfect_sequence.
inline long long delta_s_numerator(std::vector<long long>& scores, int denominator) {
  std::sort(scores.begin(), scores.end(), std::greater<>());
  const auto n = static_cast<long long>(scores.size());
  long long total = 0;
  for (long long m = 0; m < n; ++m) total += std::llabs(scores[m] - denominator * (n - 1 - 2 * m));
  return total;
}

/// Sorted-L1 distance between the observed scores and the perfect sequence.
inline double delta_s(const CopelandScores& scores) {
  auto copy = scores.numerators;
  return static_cast<double>(delta_s_numerator(copy, scores.denominator)) / scores.denominator;
}

/// Strict ranking: indices by descending score, ties broken by ascending index.
template <typename Score>
std::vector<std::size_t> ranking_by_score(const std::vector<Score>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

/// Bit-sliced copy of a skew matrix for fast principal-submatrix scoring.
/// Entry (i, j) is stored as c = (numerator + D) / 2 in [0, D], split into
/// binary planes; the score of i over a subset S (i in S, |S| = n) is
/// 2 * sum_{j in S} c_ij - D * (n - 1), with c_ii = 0.
class PackedSkewMatrix {
 public:
  explicit PackedSkewMatrix(const SkewMatrix& m)
      : n_(m.size()),
        words_((m.size() + 63) / 64),
        denominator_(m.denominator()),
        planes_(std::bit_width(static_cast<unsigned>(m.denominator()))),
        bits_(n_ * static_cast<std::size_t>(planes_) * words_, 0) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (i == j) continue;
        const auto c = static_cast<unsigned>((m.numerator(i, j) + denominator_) / 2);
        for (int b = 0; b < planes_; ++b)
          if (c >> b & 1u) plane(i, b)[j / 64] |= std::uint64_t{1} << (j % 64);
      }
  }

  std::size_t size() const { return n_; }
  std::size_t words() const { return words_; }
  int denominator() const { return denominator_; }

  long long subset_score(std::size_t i, const std::uint64_t* mask, std::size_t subset_size) const {
    long long weighted = 0;
    for (int b = 0; b < planes_; ++b) {
      const std::uint64_t* p = plane(i, b);
      long long count = 0;
      for (std::size_t w = 0; w < words_; ++w) count += std::popcount(p[w] & mask[w]);
      weighted += count << b;
    }
    return 2 * weighted - static_cast<long long>(denominator_) * static_cast<long long>(subset_size - 1);
  }

 private:
  std::uint64_t* plane(std::size_t i, int b) { return &bits_[(i * planes_ + b) * words_]; }
  const std::uint64_t* plane(std::size_t i, int b) const { return &bits_[(i * planes_ + b) * words_]; }

  std::size_t n_;
  std::size_t words_;
  int denominator_;
  int planes_;
  std::vector<std::uint64_t> bits_;
};

struct CurvePoint {
  std::size_t n = 0;
  double mean = 0;
  double sd = 0;
  std::size_t runs = 0;
};

/// Mean Delta_S of random n-subsets against n, for n = 2..N.
struct DeltaCurve {
  std::vector<CurvePoint> points;
  std::string source_label = "empirical";

  std::vector<double> means() const {
    std::vector<double> m;
    for (const auto& p : points) m.push_back(p.mean);
    return m;
  }
};

/// Subset sizes sampled for a curve: 2, 2 + stride, ..., always ending at N.
inline std::vector<std::size_t> curve_support(std::size_t n, std::size_t stride) {
  std::vector<std::size_t> sizes;
  if (n < 2) return sizes;
  if (stride == 0) throw Error(ErrorCode::kInvalidInput, "n_stride must be >= 1");
  for (std::size_t k = 2; k <= n; k += stride) sizes.push_back(k);
  if (sizes.back() != n) sizes.push_back(n);
  return sizes;
}

namespace detail {
inline constexpr std::uint64_t kSubsetStreamTag = 0x5355425345545321ull;

// Integer moments of Delta_S numerators for one subset size.
struct Moments {
  long long sum = 0;
  long double sum_sq = 0;  // up to runs * (D N^2)^2, beyond 64-bit for large inputs
};

inline CurvePoint finish_point(std::size_t n, std::size_t runs, const Moments& mo, int denominator) {
  CurvePoint p;
  p.n = n;
  p.runs = runs;
  const long double r = static_cast<long double>(runs);
  p.mean = static_cast<double>(static_cast<long double>(mo.sum) / (r * denominator));
  if (runs > 1) {
    const long double centered = r * mo.sum_sq - static_cast<long double>(mo.sum) * mo.sum;
    const long double var = centered <= 0 ? 0 : centered / (r * (r - 1)) / (static_cast<long double>(denominator) * denominator);
    p.sd = static_cast<double>(std::sqrt(var));
  }
  return p;
}
}  // namespace detail

/// Samples `runs` uniform n-subsets for every n in the support and records
/// the mean and sample standard deviation of Delta_S on the induced
/// submatrices. Each (n, run) cell draws from its own counter-based stream,
/// so the result is independent of thread count.
inline DeltaCurve delta_curve(const PackedSkewMatrix& packed, std::size_t runs, std::uint64_t seed,
                              std::size_t n_stride = 1, unsigned threads = 1) {
  if (runs < 1) throw Error(ErrorCode::kInvalidInput, "curve runs must be >= 1");
  const std::size_t total = packed.size();
  const auto sizes = curve_support(total, n_stride);
  DeltaCurve curve;
  curve.points.resize(sizes.size());
  const std::uint64_t key = derive_seed(seed, {detail::kSubsetStreamTag});
  const int denom = packed.denominator();

  parallel_for(sizes.size(), threads, [&](std::size_t slot) {
    const std::size_t n = sizes[slot];
    std::vector<std::uint32_t> perm(total);
    std::vector<std::uint64_t> mask(packed.words());
    std::vector<long long> scores(n);
    detail::Moments mo;
    auto one_run = [&](std::size_t run) {
      std::iota(perm.begin(), perm.end(), 0u);
      if (n < total) {
        CounterRng rng(key, (static_cast<std::uint64_t>(n) << 32) | run);
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t r = k + rng.below(static_cast<std::uint32_t>(total - k));
          std::swap(perm[k], perm[r]);
        }
      }
      std::fill(mask.begin(), mask.end(), 0);
      for (std::size_t k = 0; k < n; ++k) mask[perm[k] / 64] |= std::uint64_t{1} << (perm[k] % 64);
      for (std::size_t k = 0; k < n; ++k) scores[k] = packed.subset_score(perm[k], mask.data(), n);
      return delta_s_numerator(scores, denom);
    };
    if (n == total) {
      // one possible subset
      const long long d = one_run(0);
      mo.sum = d * static_cast<long long>(runs);
      mo.sum_sq = static_cast<long double>(d) * d * runs;
    } else {
      for (std::size_t run = 0; run < runs; ++run) {
        const long long d = one_run(run);
        mo.sum += d;
        mo.sum_sq += static_cast<long double>(d) * d;
      }
    }
    curve.points[slot] = detail::finish_point(n, runs, mo, denom);
  });
  return curve;
}

inline DeltaCurve delta_curve(const SkewMatrix& m, std::size_t runs, std::uint64_t seed, std::size_t n_stride = 1,
                              unsigned threads = 1) {
  return delta_curve(PackedSkewMatrix(m), runs, seed, n_stride, threads);
}

/// Pointwise average of curves sharing the same support.
inline DeltaCurve average_curves(const std::vector<DeltaCurve>& curves, std::string label) {
  if (curves.empty()) throw Error(ErrorCode::kInvalidInput, "no curves to average");
  DeltaCurve out;
  out.source_label = std::move(label);
  out.points = curves.front().points;
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    double mean = 0, var = 0;
    for (const auto& c : curves) {
      if (c.points.size() != out.points.size() || c.points[k].n != out.points[k].n)
        throw Error(ErrorCode::kSupportMismatch, "curves have different n support");
      mean += c.points[k].mean;
      var += c.points[k].sd * c.points[k].sd;
    }
    out.points[k].mean = mean / static_cast<double>(curves.size());
    out.points[k].sd = std::sqrt(var / static_cast<double>(curves.size()));
  }
  return out;
}

inline void write_curves_csv(std::ostream& out, const std::vector<DeltaCurve>& curves) {
  csv::write_schema_comment(out);
  csv::write_row(out, {"n", "mean_delta_s", "std_delta_s", "runs", "source_label"});
  for (const auto& c : curves)
    for (const auto& p : c.points)
      csv::write_row(out, {std::to_string(p.n), csv::fixed(p.mean, 6), csv::fixed(p.sd, 6), std::to_string(p.runs),
                           c.source_label});
}

/// Spearman rank correlation of two strict rankings, each given as item
/// indices ordered best first.
inline double spearman_rho(const std::vector<std::size_t>& rank_a, const std::vector<std::size_t>& rank_b) {
  if (rank_a.size() != rank_b.size())
    throw Error(ErrorCode::kLengthMismatch, "rankings have lengths " + std::to_string(rank_a.size()) + " and " +
                                                std::to_string(rank_b.size()));
  const std::size_t n = rank_a.size();
  if (n < 2) throw Error(ErrorCode::kInvalidInput, "Spearman correlation needs at least two items");
  auto positions = [n](const std::vector<std::size_t>& ranking) {
    std::vector<long long> pos(n, -1);
    for (std::size_t p = 0; p < n; ++p) {
      if (ranking[p] >= n || pos[ranking[p]] != -1)
        throw Error(ErrorCode::kInvalidInput, "ranking is not a permutation of 0..N-1");
      pos[ranking[p]] = static_cast<long long>(p);
    }
    return pos;
  };
  const auto pa = positions(rank_a);
  const auto pb = positions(rank_b);
  long double d2 = 0;
  for (std::size_t i = 0; i < n; ++i) d2 += static_cast<long double>((pa[i] - pb[i]) * (pa[i] - pb[i]));
  const long double nn = static_cast<long double>(n);
  return static_cast<double>(1.0L - 6.0L * d2 / (nn * (nn * nn - 1.0L)));
}

}  // namespace pairerr
