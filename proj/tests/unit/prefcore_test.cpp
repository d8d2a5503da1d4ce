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

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <vector>

#include "pairerr/builders.hpp"
#include "pairerr/matrices.hpp"
#include "pairerr/records.hpp"
#include "pairerr/rng.hpp"
#include "pairerr/synth.hpp"

namespace pairerr {
namespace {

PreferenceRecord rec(std::size_t first, std::size_t second, int outcome, std::size_t trial = 0) {
  PreferenceRecord r;
  r.run_id = "r";
  r.model_id = "m";
  r.first_index = first;
  r.second_index = second;
  r.trial_index = trial;
  r.parsed_choice = outcome > 0 ? Choice::kFirst : Choice::kSecond;
  r.raw_response = outcome > 0 ? "1" : "2";
  r.timestamp = "1970-01-01T00:00:00Z";
  return r;
}

// Both orders for every pair of n texts, outcome chosen by f(first, second).
template <typename F>
std::vector<PreferenceRecord> both_orders(std::size_t n, F f) {
  std::vector<PreferenceRecord> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.push_back(rec(i, j, f(i, j), i < j ? 0 : 1));
  return out;
}

TEST(Records, JsonRoundTripKeepsEveryField) {
  auto r = rec(3, 1, -1, 4);
  r.prompt_variant = PromptVariant::kV3;
  r.tie_randomized = true;
  r.raw_response = "no preference";
  r.temperature = 0.25;
  std::stringstream ss;
  write_record(ss, r);
  const auto back = read_records(ss);
  ASSERT_EQ(back.size(), 1u);
  const auto& b = back[0];
  EXPECT_EQ(b.first_index, 3u);
  EXPECT_EQ(b.second_index, 1u);
  EXPECT_EQ(b.trial_index, 4u);
  EXPECT_EQ(b.parsed_choice, Choice::kSecond);
  EXPECT_EQ(b.prompt_variant, PromptVariant::kV3);
  EXPECT_TRUE(b.tie_randomized);
  EXPECT_EQ(b.raw_response, "no preference");
  EXPECT_DOUBLE_EQ(b.temperature, 0.25);
  EXPECT_EQ(b.winner(), 1u);
  EXPECT_EQ(b.loser(), 3u);
}

TEST(Records, RejectsMalformedLinesWithLineNumber) {
  std::stringstream ss;
  write_record(ss, rec(0, 1, 1));
  ss << "{\"run_id\": 5}\n";
  try {
    read_records(ss);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Records, RejectsSelfComparisonAndUnknownChoice) {
  nlohmann::json j = rec(0, 1, 1);
  j["second_index"] = 0;
  EXPECT_THROW(j.get<PreferenceRecord>(), Error);
  j = rec(0, 1, 1);
  j["parsed_choice"] = "third";
  EXPECT_THROW(j.get<PreferenceRecord>(), Error);
}

TEST(BuildY, EncodesFirstPlacedChoice) {
  const std::vector<PreferenceRecord> records{rec(0, 1, +1), rec(1, 0, -1, 1)};
  const auto y = build_y(records, 2);
  EXPECT_EQ(y.at(0, 1), 1);
  EXPECT_EQ(y.at(1, 0), -1);
}

TEST(BuildY, ThreeTextsAllChoosingFirst) {
  const auto y = build_y(both_orders(3, [](auto, auto) { return 1; }), 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        EXPECT_EQ(y.at(i, j), 1);
      }
}

TEST(BuildY, MissingAndDuplicatePairs) {
  try {
    build_y({rec(0, 1, 1)}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPair);
  }
  try {
    build_y({rec(0, 1, 1), rec(0, 1, -1), rec(1, 0, 1, 1)}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicatePair);
  }
}

TEST(BuildY, OccurrenceSelectsNthTrialOfEachOrder) {
  // 2/2 run: trials 0 and 2 have 0 first, 1 and 3 have 1 first
  const std::vector<PreferenceRecord> records{rec(0, 1, 1, 0), rec(1, 0, 1, 1), rec(0, 1, -1, 2), rec(1, 0, -1, 3)};
  EXPECT_EQ(build_y(records, 2, TrialSelector::occurrence(0)).at(0, 1), 1);
  EXPECT_EQ(build_y(records, 2, TrialSelector::occurrence(1)).at(0, 1), -1);
  EXPECT_EQ(build_y(records, 2, TrialSelector::occurrence(1)).at(1, 0), -1);
  EXPECT_THROW(build_y(records, 2, TrialSelector::occurrence(2)), Error);
}

TEST(BuildZ, ConsensusCases) {
  PreferenceMatrixY y(2);
  y.set(0, 1, 1);
  y.set(1, 0, -1);
  EXPECT_EQ(build_z(y).entry(0, 1), 1);
  y.set(1, 0, 1);
  EXPECT_EQ(build_z(y).entry(0, 1), 0);
  y.set(0, 1, -1);
  y.set(1, 0, 1);
  EXPECT_EQ(build_z(y).entry(0, 1), -1);
  EXPECT_EQ(build_z(y).entry(1, 0), 1);
}

TEST(BuildZ, IncompleteMatrixThrows) {
  PreferenceMatrixY y(3);
  y.set(0, 1, 1);
  try {
    build_z(y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteMatrix);
  }
}

TEST(BuildW, HandEvaluatedEntries) {
  // k+ = 2 (0 first), k- = 1 (1 first)
  const std::vector<PreferenceRecord> a{rec(0, 1, 1, 0), rec(0, 1, 1, 1), rec(1, 0, -1, 2)};
  const auto wa = build_w(a, 2, 2, 1);
  EXPECT_EQ(wa.numerator(0, 1), 3);
  EXPECT_DOUBLE_EQ(wa.value(0, 1), 1.0);
  const std::vector<PreferenceRecord> b{rec(0, 1, 1, 0), rec(0, 1, -1, 1), rec(1, 0, 1, 2)};
  const auto wb = build_w(b, 2, 2, 1);
  EXPECT_EQ(wb.numerator(0, 1), -1);
  EXPECT_DOUBLE_EQ(wb.value(0, 1), -1.0 / 3.0);
  EXPECT_DOUBLE_EQ(wb.value(1, 0), 1.0 / 3.0);
}

TEST(BuildW, CountErrors) {
  const std::vector<PreferenceRecord> a{rec(0, 1, 1, 0), rec(1, 0, -1, 1)};
  try {
    build_w(a, 2, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTrials);
  }
  const std::vector<PreferenceRecord> b{rec(0, 1, 1, 0), rec(0, 1, 1, 1), rec(1, 0, -1, 2)};
  try {
    build_w(b, 2, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentCounts);
  }
}

TEST(BuildW, OneOneEqualsZOnSameRecords) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto records = synth_records(12, ErrorSpec::positional(0.3, 0.2), "+-", seed);
    const auto w = build_w(records, 12, 1, 1);
    const auto z = build_z(build_y(records, 12));
    EXPECT_TRUE(static_cast<const SkewMatrix&>(w) == static_cast<const SkewMatrix&>(z));
    EXPECT_TRUE(w.antisymmetric());
    EXPECT_TRUE(z.antisymmetric());
  }
}

TEST(BuildW, EntriesOnQuantizedGrid) {
  const auto records = synth_records(10, ErrorSpec::positional(0.3, 0.2), "+-+--", 3);
  const auto w = build_w(records, 10, 2, 3);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      if (i == j) {
        EXPECT_EQ(w.numerator(i, j), 0);
        continue;
      }
      EXPECT_LE(std::abs(w.numerator(i, j)), 5);
      EXPECT_EQ((w.numerator(i, j) + 5) % 2, 0);
      EXPECT_EQ(w.numerator(i, j), -w.numerator(j, i));
    }
}

TEST(BuildX, Counting) {
  const std::vector<PreferenceRecord> three{rec(0, 1, 1, 0), rec(1, 0, -1, 1), rec(0, 1, -1, 2)};
  const auto x = build_x(three, 2);
  EXPECT_EQ(x.wins(0, 1), 2);
  EXPECT_EQ(x.wins(1, 0), 1);
  const auto empty = build_x({}, 3);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(empty.total_wins(i), 0);
  const auto full = build_x(synth_records(4, ErrorSpec::uniform(0.0), "+-+-+-", 1), 4);
  EXPECT_EQ(full.wins(0, 1), 6);
  EXPECT_EQ(full.wins(1, 0), 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_EQ(full.wins(i, j) + full.wins(j, i), 6);
}

TEST(Subselect, PrefixSelection) {
  const auto records = synth_records(5, ErrorSpec::positional(0.2, 0.1), "+-+-+-", 9);
  const auto one = subselect_trials(records, 1, 1);
  EXPECT_EQ(one.size(), 10u * 2);
  for (const auto& r : one) EXPECT_LE(r.trial_index, 1u);
  const auto all = subselect_trials(records, 3, 3);
  ASSERT_EQ(all.size(), records.size());
  for (std::size_t k = 0; k < all.size(); ++k) EXPECT_EQ(all[k].trial_index, records[k].trial_index);
  const auto five = subselect_trials(records, 2, 3);
  EXPECT_EQ(five.size(), 10u * 5);
  try {
    subselect_trials(records, 4, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientTrials);
  }
}

TEST(Commutativity, ExtremesAndRelabeling) {
  const auto consistent = build_y(both_orders(6, [](auto i, auto j) { return i < j ? 1 : -1; }), 6);
  EXPECT_EQ(commutativity_score(consistent), 0.0);
  const auto inconsistent = build_y(both_orders(6, [](auto, auto) { return 1; }), 6);
  EXPECT_EQ(commutativity_score(inconsistent), 1.0);

  CounterRng rng(3, 0);
  PreferenceMatrixY y(9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      if (i != j) y.set(i, j, rng.below(2) ? 1 : -1);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[2], perm[5]);
  PreferenceMatrixY relabeled(9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      if (i != j) relabeled.set(perm[i], perm[j], y.at(i, j));
  EXPECT_DOUBLE_EQ(commutativity_score(y), commutativity_score(relabeled));
}

TEST(Commutativity, RandomYAveragesOneHalf) {
  double sum = 0;
  const int draws = 400;
  for (int d = 0; d < draws; ++d) {
    CounterRng rng(77, d);
    PreferenceMatrixY y(20);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 20; ++j)
        if (i != j) y.set(i, j, rng.below(2) ? 1 : -1);
    sum += commutativity_score(y);
  }
  // SE of the mean: sqrt(0.25 / 190 / 400) ~ 0.0018
  EXPECT_NEAR(sum / draws, 0.5, 0.01);
}

TEST(Infer, SizeAndRepeatCounts) {
  const auto records = synth_records(7, ErrorSpec::uniform(0.2), "++-", 2);
  EXPECT_EQ(infer_size(records), 7u);
  EXPECT_EQ(infer_repeat_counts(records, 7), std::make_pair(2, 1));
  auto broken = records;
  broken.pop_back();
  EXPECT_THROW(infer_repeat_counts(broken, 7), Error);
}

}  // namespace
}  // namespace pairerr
