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

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "pairerr/copeland.hpp"
#include "pairerr/synth.hpp"

namespace pairerr {
namespace {

ConsensusMatrixZ transitive_z(std::size_t n) {
  ConsensusMatrixZ z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) z.set_entry(i, j, 1);
  return z;
}

TEST(Copeland, TransitiveThreeTexts) {
  const auto s = copeland_scores(transitive_z(3));
  EXPECT_EQ(s.values(), (std::vector<double>{2, 0, -2}));
  EXPECT_EQ(delta_s(s), 0.0);
}

TEST(Copeland, PerfectSequence) {
  EXPECT_EQ(perfect_sequence(4), (std::vector<double>{3, 1, -1, -3}));
  EXPECT_EQ(perfect_sequence(2), (std::vector<double>{1, -1}));
  EXPECT_THROW(perfect_sequence(1), Error);
  for (std::size_t n = 2; n < 30; ++n) {
    const auto seq = perfect_sequence(n);
    EXPECT_EQ(std::accumulate(seq.begin(), seq.end(), 0.0), 0.0);
    EXPECT_EQ(copeland_scores(transitive_z(n)).values(), seq);
  }
}

TEST(Copeland, AllTiesDistance) {
  // all-zero Z: the distance is the L1 norm of the perfect sequence
  const std::vector<double> expected{0, 0, 2, 4, 8, 12, 18};
  for (std::size_t n = 2; n <= 6; ++n) EXPECT_EQ(delta_s(copeland_scores(ConsensusMatrixZ(n))), expected[n]);
}

TEST(Copeland, ScoresSumToZeroAndDistanceIsRelabelingInvariant) {
  const auto z = synth_z(15, ErrorSpec::uniform(0.3), 8);
  const auto s = copeland_scores(z);
  EXPECT_EQ(std::accumulate(s.numerators.begin(), s.numerators.end(), 0LL), 0);
  std::vector<std::size_t> idx(15);
  std::iota(idx.rbegin(), idx.rend(), 0);
  EXPECT_EQ(delta_s(copeland_scores(z.submatrix(idx))), delta_s(s));
}

TEST(Copeland, CyclicTripleIsFarFromPerfect) {
  ConsensusMatrixZ z(3);
  z.set_entry(0, 1, 1);
  z.set_entry(1, 2, 1);
  z.set_entry(2, 0, 1);
  EXPECT_EQ(copeland_scores(z).values(), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(delta_s(copeland_scores(z)), 4.0);
}

TEST(Copeland, WScoresUseFractionalEntries) {
  RepeatedMatrixW w(3, 2, 1);
  w.set_numerator(0, 1, 1);
  w.set_numerator(0, 2, 3);
  w.set_numerator(1, 2, -1);
  const auto s = copeland_scores(w);
  EXPECT_DOUBLE_EQ(s[0], 4.0 / 3);
  EXPECT_DOUBLE_EQ(s[1], -2.0 / 3);
  EXPECT_DOUBLE_EQ(s[2], -2.0 / 3);
  // sorted (4/3, -2/3, -2/3) against (2, 0, -2)
  EXPECT_DOUBLE_EQ(delta_s(s), 2.0 / 3 + 2.0 / 3 + 4.0 / 3);
}

TEST(Ranking, StableIndexTieBreak) {
  EXPECT_EQ(ranking_by_score(std::vector<double>{1, 3, 3, -1}), (std::vector<std::size_t>{1, 2, 0, 3}));
  EXPECT_EQ(ranking_by_score(std::vector<long long>{0, 0, 0}), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Curve, SupportAndEndpoints) {
  EXPECT_EQ(curve_support(10, 4), (std::vector<std::size_t>{2, 6, 10}));
  EXPECT_EQ(curve_support(11, 4), (std::vector<std::size_t>{2, 6, 10, 11}));
  EXPECT_THROW(curve_support(10, 0), Error);

  const auto c = delta_curve(transitive_z(20), 30, 1);
  ASSERT_EQ(c.points.size(), 19u);
  for (const auto& p : c.points) {
    EXPECT_EQ(p.mean, 0.0);
    EXPECT_EQ(p.sd, 0.0);
    EXPECT_EQ(p.runs, 30u);
  }
  const auto ties = delta_curve(ConsensusMatrixZ(6), 10, 1);
  EXPECT_EQ(ties.points.back().mean, 18.0);
  EXPECT_EQ(ties.points.front().mean, 2.0);
}

TEST(Curve, PackedScoresMatchDirectScores) {
  const auto w = synth_w(70, ErrorSpec::positional(0.3, 0.1), RepeatSpec{3, 3}, 2);
  const PackedSkewMatrix packed(w);
  std::vector<std::uint64_t> mask(packed.words(), 0);
  std::vector<std::size_t> subset{0, 3, 17, 63, 64, 69};
  for (auto k : subset) mask[k / 64] |= std::uint64_t{1} << (k % 64);
  const auto direct = copeland_scores(w.submatrix(subset));
  for (std::size_t a = 0; a < subset.size(); ++a)
    EXPECT_EQ(packed.subset_score(subset[a], mask.data(), subset.size()), direct.numerators[a]);
}

TEST(Curve, DeterministicAcrossThreadCounts) {
  const auto z = synth_z(40, ErrorSpec::uniform(0.2), 5);
  const auto a = delta_curve(z, 50, 9, 3, 1);
  const auto b = delta_curve(z, 50, 9, 3, 4);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_EQ(a.points[k].mean, b.points[k].mean);
    EXPECT_EQ(a.points[k].sd, b.points[k].sd);
  }
  const auto c = delta_curve(z, 50, 10, 3, 1);
  EXPECT_NE(a.means(), c.means());
}

TEST(Curve, AverageRequiresSharedSupport) {
  const auto z = synth_z(12, ErrorSpec::uniform(0.2), 5);
  const auto a = delta_curve(z, 20, 1);
  const auto b = delta_curve(z, 20, 2);
  const auto avg = average_curves({a, b}, "avg");
  EXPECT_EQ(avg.source_label, "avg");
  EXPECT_DOUBLE_EQ(avg.points[3].mean, (a.points[3].mean + b.points[3].mean) / 2);
  EXPECT_THROW(average_curves({a, delta_curve(z, 20, 1, 2)}, "x"), Error);
  std::stringstream ss;
  write_curves_csv(ss, {avg});
  const auto rows = csv::read(ss);
  EXPECT_EQ(rows.front(), (std::vector<std::string>{"n", "mean_delta_s", "std_delta_s", "runs", "source_label"}));
  EXPECT_EQ(rows.size(), 1 + avg.points.size());
}

TEST(Spearman, KnownValues) {
  const std::vector<std::size_t> id{0, 1, 2, 3, 4};
  const std::vector<std::size_t> rev{4, 3, 2, 1, 0};
  EXPECT_DOUBLE_EQ(spearman_rho(id, id), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho(id, rev), -1.0);
  // one adjacent swap: d^2 sum = 2, rho = 1 - 12/120
  EXPECT_DOUBLE_EQ(spearman_rho(id, {1, 0, 2, 3, 4}), 0.9);
  EXPECT_THROW(spearman_rho(id, {0, 1, 2}), Error);
  EXPECT_THROW(spearman_rho(id, {0, 0, 2, 3, 4}), Error);
}

}  // namespace
}  // namespace pairerr
