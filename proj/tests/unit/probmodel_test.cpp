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

#include <cmath>
#include <sstream>

#include "pairerr/csv.hpp"
#include "pairerr/probmodel.hpp"

// Frozen values come from tests/oracles/enumerate.py, which enumerates trial
// outcomes with exact rationals.

namespace pairerr {
namespace {

TEST(ZProbs, OracleValues) {
  const auto u = z_value_probs(ErrorSpec::uniform(0.1));
  EXPECT_NEAR(u.p_zero, 0.18, 1e-15);
  EXPECT_NEAR(u.p_true, 0.81, 1e-15);
  EXPECT_NEAR(u.p_inverse, 0.01, 1e-15);
  const auto p = z_value_probs(ErrorSpec::positional(0.2, 0.1));
  EXPECT_NEAR(p.p_zero, 0.26, 1e-15);
  EXPECT_NEAR(p.p_true, 0.72, 1e-15);
  EXPECT_NEAR(p.p_inverse, 0.02, 1e-15);
}

TEST(WProbs, OracleValuesTwoOne) {
  const auto d = w_value_probs(ErrorSpec::positional(0.2, 0.1), RepeatSpec{2, 1});
  ASSERT_EQ(d.size(), 4u);
  // ordered m = 0..3, value (3 - 2m)/3
  EXPECT_NEAR(d[0].probability, 72.0 / 125, 1e-15);
  EXPECT_NEAR(d[1].probability, 44.0 / 125, 1e-15);
  EXPECT_NEAR(d[2].probability, 17.0 / 250, 1e-15);
  EXPECT_NEAR(d[3].probability, 1.0 / 250, 1e-15);
  EXPECT_DOUBLE_EQ(d[0].value, 1.0);
  EXPECT_DOUBLE_EQ(d[1].value, 1.0 / 3);
  EXPECT_DOUBLE_EQ(d[3].value, -1.0);
}

TEST(WProbs, SumsToOneAndEndpointsExact) {
  for (double ep : {0.0, 0.05, 0.155, 0.3, 0.5, 0.8})
    for (double em : {0.0, 0.1, 0.25, 0.5})
      for (int kp = 1; kp <= 5; ++kp)
        for (int km = 1; km <= 5; ++km) {
          const auto d = w_value_probs(ErrorSpec::positional(ep, em), RepeatSpec{kp, km});
          ASSERT_EQ(d.size(), static_cast<std::size_t>(kp + km + 1));
          double sum = 0;
          for (const auto& v : d) sum += v.probability;
          EXPECT_NEAR(sum, 1.0, 1e-12);
          EXPECT_NEAR(d.front().probability, std::pow(1 - ep, kp) * std::pow(1 - em, km), 1e-15);
          EXPECT_NEAR(d.back().probability, std::pow(ep, kp) * std::pow(em, km), 1e-15);
        }
  const auto d = w_value_probs(ErrorSpec::positional(0.155, 0.1), RepeatSpec{3, 3});
  EXPECT_NEAR(d.front().probability, 0.439842970125, 1e-14);
}

TEST(WProbs, OneOneMatchesZ) {
  const auto spec = ErrorSpec::positional(0.3, 0.15);
  const auto d = w_value_probs(spec, RepeatSpec{1, 1});
  const auto z = z_value_probs(spec);
  EXPECT_NEAR(d[0].probability, z.p_true, 1e-15);
  EXPECT_NEAR(d[1].probability, z.p_zero, 1e-15);
  EXPECT_NEAR(d[2].probability, z.p_inverse, 1e-15);
}

struct Case {
  std::size_t m, n;
  double ep, em;
  int kp, km;
  double expected;
};

TEST(PCorrect, OracleValues) {
  const Case cases[] = {
      {1, 3, 0.1, 0.1, 1, 1, 0.6561},
      {2, 4, 0.5, 0.5, 1, 1, 0.046875},
      {2, 5, 0.3, 0.3, 1, 1, 0.06348244},
      {3, 6, 0.1, 0.1, 1, 1, 0.348997329},
      {2, 5, 0.2, 0.1, 2, 1, 0.110091239424},
      {3, 6, 0.2, 0.1, 2, 2, 0.037439196167791414},
      {1, 4, 0.1, 0.15, 3, 2, 0.14611544976955065},
      {1, 4, 0.15, 0.1, 2, 3, 0.14611544976955065},
  };
  for (const auto& c : cases)
    EXPECT_NEAR(p_correct_copeland(c.m, c.n, ErrorSpec::positional(c.ep, c.em), RepeatSpec{c.kp, c.km}), c.expected,
                1e-12)
        << "m=" << c.m << " n=" << c.n;
}

TEST(PCorrect, UniformDefaultEqualsOneOne) {
  const auto u = ErrorSpec::uniform(0.2);
  EXPECT_DOUBLE_EQ(p_correct_copeland(3, 9, u), p_correct_copeland(3, 9, u, RepeatSpec{1, 1}));
}

TEST(PCorrect, BoundaryCases) {
  EXPECT_DOUBLE_EQ(p_correct_copeland(1, 1, ErrorSpec::uniform(0.3)), 1.0);
  EXPECT_DOUBLE_EQ(p_correct_copeland(4, 10, ErrorSpec::uniform(0.0)), 1.0);
  EXPECT_THROW(p_correct_copeland(0, 5, ErrorSpec::uniform(0.1)), Error);
  EXPECT_THROW(p_correct_copeland(6, 5, ErrorSpec::uniform(0.1)), Error);
  EXPECT_THROW(ErrorSpec::uniform(1.0), Error);
  EXPECT_THROW(ErrorSpec::positional(-0.1, 0.2), Error);
  EXPECT_THROW(w_value_probs(ErrorSpec::uniform(0.1), RepeatSpec{0, 1}), Error);
}

TEST(PCorrect, RankReflectionSymmetryUnderUniformErrors) {
  // rank m and rank N+1-m face mirrored neighbourhoods
  for (std::size_t n = 2; n <= 12; ++n)
    for (std::size_t m = 1; m <= n; ++m)
      EXPECT_NEAR(p_correct_copeland(m, n, ErrorSpec::uniform(0.25)),
                  p_correct_copeland(n + 1 - m, n, ErrorSpec::uniform(0.25)), 1e-14);
}

TEST(PCorrect, LargeNStaysFiniteAndInRange) {
  for (std::size_t n : {63u, 100u, 400u}) {
    const double p = p_correct_copeland(n / 2, n, ErrorSpec::uniform(0.1));
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  // the log-space branch agrees with the direct sum around the switchover
  const double direct = p_correct_copeland(30, 62, ErrorSpec::uniform(0.2));
  const double logspace = p_correct_copeland(31, 63, ErrorSpec::uniform(0.2));
  EXPECT_GT(direct, logspace);
  EXPECT_LT(direct / logspace, 2.0);
}

TEST(Scalability, DecreasingFlagAndCsv) {
  const auto t = scalability_table(ErrorSpec::uniform(0.1), RepeatSpec{1, 1}, {1, 3}, {2, 3, 4, 5, 6, 7, 8});
  EXPECT_TRUE(t.strictly_decreasing.at(1));
  EXPECT_TRUE(t.strictly_decreasing.at(3));
  EXPECT_EQ(t.rows.size(), 7u + 6u);  // rank 3 starts at N = 3
  EXPECT_THROW(scalability_table(ErrorSpec::uniform(0.1), RepeatSpec{1, 1}, {1}, {4, 3}), Error);
  std::stringstream ss;
  write_scalability_header(ss);
  write_scalability_rows(ss, t);
  const auto rows = csv::read(ss);
  ASSERT_EQ(rows.size(), 14u);
  EXPECT_EQ(rows[0][2], "probability");
  EXPECT_EQ(csv::parse_double(rows[2][2]), t.rows[1].probability);
}

}  // namespace
}  // namespace pairerr
