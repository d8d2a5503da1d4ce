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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "pairerr/builders.hpp"
#include "pairerr/harness/corpus.hpp"
#include "pairerr/harness/plan.hpp"
#include "pairerr/harness/prompt.hpp"
#include "pairerr/harness/provider.hpp"
#include "pairerr/harness/runner.hpp"

namespace pairerr::harness {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("pairerr_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

RunPlan small_plan(std::size_t n, const std::string& sequence = "+-") {
  RunPlan p;
  p.run_id = "unit";
  p.text_type = "short poems";
  for (std::size_t i = 0; i < n; ++i) p.texts.push_back({"t" + std::to_string(i), "text number " + std::to_string(i)});
  p.sequence = sequence;
  p.provider.endpoint = "mock:eps=0.2,seed=3";
  p.provider.concurrency = 1;
  p.provider.backoff_base_s = 0;
  return p;
}

RunOptions quiet(const std::string& log) {
  RunOptions o;
  o.log_path = log;
  o.sleep = [](double) {};
  o.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Scripted replies, one per call; repeats the last when exhausted.
class ScriptedProvider : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const ChatRequest& r) override {
    last = r;
    const auto k = std::min(calls++, replies_.size() - 1);
    if (replies_[k] == "!auth") throw Error(ErrorCode::kAuthError, "denied");
    if (replies_[k] == "!429") throw Error(ErrorCode::kRateLimited, "slow down");
    return replies_[k];
  }
  std::string model_id() const override { return "scripted"; }
  std::size_t calls = 0;
  ChatRequest last;

 private:
  std::vector<std::string> replies_;
};

TEST(Prompt, BaselineRendering) {
  const auto p = render_prompt(PromptVariant::kBaseline, "short poems", "Roses.", "Violets.");
  ASSERT_TRUE(p.system);
  EXPECT_EQ(p.system->rfind("You are a senior short poems evaluation expert", 0), 0u);
  EXPECT_EQ(p.user,
            "Compare the following two short poems and indicate which one is better. Output only the number: 1 if "
            "Text 1 is better, 2 if Text 2 is better. Text 1: Roses.. Text 2: Violets..");
}

TEST(Prompt, VariantsDifferAsIntended) {
  const auto v1 = render_prompt(PromptVariant::kV1, "short poems", "a", "b");
  EXPECT_EQ(v1.user.find("short poems"), std::string::npos);
  EXPECT_EQ(v1.system->find("short poems"), std::string::npos);
  EXPECT_NE(v1.system->find("senior text evaluation expert"), std::string::npos);

  const auto v2 = render_prompt(PromptVariant::kV2, "short poems", "a", "b");
  EXPECT_EQ(v2.user.rfind("比较以下两篇短诗", 0), 0u);
  EXPECT_NE(v2.system->find("short poems"), std::string::npos);
  EXPECT_EQ(chinese_text_type("pseudo words"), "文本材料");
  EXPECT_EQ(chinese_text_type("academic abstracts"), "文献摘要");

  const auto v3 = render_prompt(PromptVariant::kV3, "short poems", "a", "b");
  EXPECT_FALSE(v3.system.has_value());
  EXPECT_EQ(v3.user, render_prompt(PromptVariant::kBaseline, "short poems", "a", "b").user);
}

TEST(Prompt, TextsAreSubstitutedVerbatim) {
  const auto p = render_prompt(PromptVariant::kBaseline, "texts", "has {text2} and {text_type}", "B");
  EXPECT_NE(p.user.find("Text 1: has {text2} and {text_type}. Text 2: B."), std::string::npos);
  try {
    render_prompt(PromptVariant::kBaseline, "texts", "", "B");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyText);
  }
}

TEST(Prompt, StrictParsing) {
  EXPECT_EQ(parse_choice("1"), Choice::kFirst);
  EXPECT_EQ(parse_choice(" 2\n"), Choice::kSecond);
  EXPECT_FALSE(parse_choice("Text 1"));
  EXPECT_FALSE(parse_choice("12"));
  EXPECT_FALSE(parse_choice("1."));
  EXPECT_FALSE(parse_choice(""));
  EXPECT_FALSE(parse_choice("3"));
}

TEST(Plan, RequestCountsAndSchedule) {
  auto p = small_plan(100);
  EXPECT_EQ(p.request_count(), 9900u);
  p.sequence = "+-+-+-";
  EXPECT_EQ(p.request_count(), 29700u);
  EXPECT_EQ(schedule(p).size(), 29700u);
  const auto tasks = schedule(small_plan(3, "+-+"));
  ASSERT_EQ(tasks.size(), 9u);
  EXPECT_EQ(tasks[0].first, 0u);
  EXPECT_EQ(tasks[1].first, 1u);
  EXPECT_EQ(tasks[2].trial, 2u);
}

TEST(Plan, JsonForms) {
  TempDir dir;
  {
    std::ofstream f(dir.file("texts.txt"));
    f << "first line\n\nsecond line\nthird line\n";
  }
  const auto j = nlohmann::json::parse(R"({"run_id": "p1", "texts_file": "texts.txt", "sequence": ["+", "-"],
                                           "variant": "V3", "provider": {"endpoint": "mock:eps=0.1"}})");
  const auto p = plan_from_json(j, dir.file(""));
  EXPECT_EQ(p.run_id, "p1");
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.sequence, "+-");
  EXPECT_EQ(p.variant, PromptVariant::kV3);
  EXPECT_TRUE(p.provider.is_mock());
  const auto back = plan_from_json(to_json(p));
  EXPECT_EQ(back.texts[2].body, "third line");
  EXPECT_EQ(back.sequence, "+-");

  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"texts": ["only one"]})")), Error);
  EXPECT_THROW(plan_from_json(nlohmann::json::parse(R"({"texts": ["a", "b"], "sequence": "+x"})")), Error);
  EXPECT_THROW(read_plan(dir.file("missing.json")), Error);
}

TEST(Provider, MockIsDeterministicAndConfigurable) {
  MockProvider a("mock:eps=0.3,seed=1"), b("mock:eps=0.3,seed=1");
  ChatRequest r;
  std::size_t firsts = 0;
  for (std::size_t t = 0; t < 400; ++t) {
    r.first_index = 0;
    r.second_index = 1;
    r.trial_index = t;
    EXPECT_EQ(a.complete(r), b.complete(r));
    firsts += a.complete(r) == "1";
  }
  EXPECT_NEAR(firsts / 400.0, 0.7, 0.1);
  EXPECT_THROW(MockProvider("mock:bogus=1"), Error);
  EXPECT_THROW(MockProvider("mock:eps=1.5"), Error);
  MockProvider denied("mock:auth=fail");
  EXPECT_THROW(denied.complete(r), Error);
}

TEST(Provider, HttpHelpers) {
  ChatRequest r;
  r.system = "sys";
  r.user = "hello";
  r.model = "m";
  const auto body = chat_request_body(r);
  EXPECT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][1]["content"], "hello");
  r.system.reset();
  EXPECT_EQ(chat_request_body(r)["messages"].size(), 1u);
  EXPECT_EQ(chat_reply_text(R"({"choices":[{"message":{"content":" 1"}}]})"), " 1");
  EXPECT_THROW(chat_reply_text("not json"), Error);
  EXPECT_EQ(classify_http_status(401, "").code(), ErrorCode::kAuthError);
  EXPECT_EQ(classify_http_status(429, "").code(), ErrorCode::kRateLimited);
  EXPECT_EQ(classify_http_status(500, "").code(), ErrorCode::kNetworkError);

  ProviderConfig cfg;
  cfg.provider_id = "acme";
  EXPECT_EQ(cfg.credential_key(), "PAIRERR_API_KEY_ACME");
  cfg.credential_env_key = "PAIRERR_TEST_KEY_THAT_IS_NEVER_SET";
  try {
    require_credential(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAuthError);
  }
}

TEST(Runner, BackoffIsCapped) {
  ProviderConfig cfg;
  EXPECT_EQ(backoff_delay(cfg, 0), 2.0);
  EXPECT_EQ(backoff_delay(cfg, 2), 8.0);
  EXPECT_EQ(backoff_delay(cfg, 10), 60.0);
}

TEST(Runner, CollectsEveryComparisonOnce) {
  TempDir dir;
  const auto plan = small_plan(6, "+-+");
  MockProvider mock(plan.provider.endpoint);
  const auto s = run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  EXPECT_EQ(s.planned, 45u);
  EXPECT_EQ(s.records_written, 45u);
  EXPECT_EQ(s.requests_issued, 45u);
  const auto records = read_records(dir.file("log.jsonl"));
  ASSERT_EQ(records.size(), 45u);
  EXPECT_EQ(infer_repeat_counts(records, 6), std::make_pair(2, 1));
  EXPECT_EQ(records[0].model_id, "mock-judge");
  EXPECT_EQ(records[0].timestamp, "2026-01-01T00:00:00Z");
  EXPECT_FALSE(fs::exists(dir.file("log.jsonl.failures.jsonl")));
}

TEST(Runner, ResumeAfterAbortDoesNotDuplicate) {
  TempDir dir;
  const auto plan = small_plan(5);
  std::vector<std::string> replies(7, "1");
  replies.push_back("!auth");
  ScriptedProvider flaky(replies);
  EXPECT_THROW(run_comparisons(plan, flaky, quiet(dir.file("log.jsonl"))), Error);
  EXPECT_EQ(read_records(dir.file("log.jsonl")).size(), 7u);

  MockProvider mock(plan.provider.endpoint);
  const auto s = run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  EXPECT_EQ(s.already_done, 7u);
  EXPECT_EQ(s.records_written, 13u);
  const auto records = read_records(dir.file("log.jsonl"));
  ASSERT_EQ(records.size(), 20u);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> keys;
  for (const auto& r : records) keys.insert({r.first_index, r.second_index, r.trial_index});
  EXPECT_EQ(keys.size(), 20u);

  const auto again = run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  EXPECT_EQ(again.records_written, 0u);
  EXPECT_EQ(again.requests_issued, 0u);
}

TEST(Runner, TornLastLineIsRepaired) {
  TempDir dir;
  const auto plan = small_plan(3);
  MockProvider mock(plan.provider.endpoint);
  run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  auto content = slurp(dir.file("log.jsonl"));
  content.resize(content.size() - 20);  // cut into the last record
  {
    std::ofstream out(dir.file("log.jsonl"), std::ios::binary | std::ios::trunc);
    out << content;
  }
  const auto s = run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  EXPECT_EQ(s.records_written, 1u);
  // the fragment is cut away, so the whole log parses again
  std::stringstream ss(slurp(dir.file("log.jsonl")));
  std::string line;
  std::size_t good = 0, bad = 0;
  while (std::getline(ss, line)) {
    try {
      (void)nlohmann::json::parse(line).get<PreferenceRecord>();
      ++good;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  EXPECT_EQ(good, 6u);
  EXPECT_EQ(bad, 0u);
  EXPECT_EQ(read_records(dir.file("log.jsonl")).size(), 6u);
}

TEST(Runner, OtherRunIdsAreNotSkipped) {
  TempDir dir;
  auto plan = small_plan(3);
  MockProvider mock(plan.provider.endpoint);
  run_comparisons(plan, mock, quiet(dir.file("log.jsonl")));
  plan.run_id = "second";
  EXPECT_EQ(run_comparisons(plan, mock, quiet(dir.file("log.jsonl"))).records_written, 6u);
  EXPECT_EQ(read_records(dir.file("log.jsonl")).size(), 12u);
}

TEST(Runner, TransientErrorsRetryThenFail) {
  TempDir dir;
  auto plan = small_plan(2, "+");
  std::vector<double> sleeps;
  auto opts = quiet(dir.file("log.jsonl"));
  opts.sleep = [&](double s) { sleeps.push_back(s); };
  plan.provider.backoff_base_s = 1;
  ScriptedProvider recovers({"!429", "!429", "2"});
  auto s = run_comparisons(plan, recovers, opts);
  EXPECT_EQ(s.records_written, 1u);
  EXPECT_EQ(s.transient_retries, 2u);
  EXPECT_EQ(sleeps, (std::vector<double>{1.0, 2.0}));

  plan.run_id = "never";
  ScriptedProvider never({"!429"});
  s = run_comparisons(plan, never, opts);
  EXPECT_EQ(s.failed, 1u);
  EXPECT_EQ(never.calls, 4u);  // one try plus max_retries
  const auto failures = slurp(dir.file("log.jsonl.failures.jsonl"));
  EXPECT_NE(failures.find("RateLimited"), std::string::npos);
}

TEST(Runner, UnparseableRepliesRetryThenFailOutsideV3) {
  TempDir dir;
  const auto plan = small_plan(2, "+");
  ScriptedProvider chatty({"I prefer the first one", "1"});
  auto s = run_comparisons(plan, chatty, quiet(dir.file("a.jsonl")));
  EXPECT_EQ(s.records_written, 1u);
  EXPECT_EQ(s.parse_retries, 1u);
  EXPECT_EQ(chatty.last.attempt, 1u);

  ScriptedProvider hopeless({"neither"});
  s = run_comparisons(plan, hopeless, quiet(dir.file("b.jsonl")));
  EXPECT_EQ(s.records_written, 0u);
  EXPECT_EQ(s.parse_failures, 1u);
  EXPECT_TRUE(to_json(s).contains("note"));
  EXPECT_NE(slurp(dir.file("b.jsonl.failures.jsonl")).find("ParseFailure"), std::string::npos);
}

TEST(Runner, V3RandomizesPersistentTiesDeterministically) {
  TempDir dir;
  auto plan = small_plan(8, "+-");
  plan.variant = PromptVariant::kV3;
  plan.rng_seed = 11;
  ScriptedProvider undecided({"Both are equal."});
  const auto s = run_comparisons(plan, undecided, quiet(dir.file("a.jsonl")));
  EXPECT_EQ(s.records_written, 56u);
  EXPECT_EQ(s.tie_randomized, 56u);
  const auto a = read_records(dir.file("a.jsonl"));
  std::size_t firsts = 0;
  for (const auto& r : a) {
    EXPECT_TRUE(r.tie_randomized);
    EXPECT_EQ(r.prompt_variant, PromptVariant::kV3);
    firsts += r.parsed_choice == Choice::kFirst;
  }
  EXPECT_GT(firsts, 10u);
  EXPECT_LT(firsts, 46u);
  ScriptedProvider again({"Both are equal."});
  run_comparisons(plan, again, quiet(dir.file("b.jsonl")));
  const auto b = read_records(dir.file("b.jsonl"));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].parsed_choice, b[k].parsed_choice);
}

TEST(Runner, ConcurrentCollectionMatchesSerial) {
  TempDir dir;
  auto plan = small_plan(10, "+-");
  MockProvider mock(plan.provider.endpoint);
  run_comparisons(plan, mock, quiet(dir.file("serial.jsonl")));
  plan.provider.concurrency = 4;
  run_comparisons(plan, mock, quiet(dir.file("parallel.jsonl")));
  const auto y1 = build_y(read_records(dir.file("serial.jsonl")), 10, TrialSelector::occurrence(0));
  const auto y2 = build_y(read_records(dir.file("parallel.jsonl")), 10, TrialSelector::occurrence(0));
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(y1.at(i, j), y2.at(i, j));
}

TEST(Corpus, ExactWordCountsAndDeterminism) {
  const auto a = generate_pseudo_corpus(CorpusKind::kPseudoWord, 20, 100, nullptr, 4);
  EXPECT_EQ(a, generate_pseudo_corpus(CorpusKind::kPseudoWord, 20, 100, nullptr, 4));
  EXPECT_NE(a, generate_pseudo_corpus(CorpusKind::kPseudoWord, 20, 100, nullptr, 5));
  ASSERT_EQ(a.size(), 20u);
  for (const auto& text : a) {
    std::stringstream ss(text);
    std::string w;
    std::size_t count = 0;
    while (ss >> w) ++count;
    EXPECT_EQ(count, 100u);
  }
}

TEST(Corpus, PseudoWordsAvoidLexiconWords) {
  const std::vector<std::string> lexicon{"abcd", "test", "word", "the", "ab"};
  // short lexicon words may collide by chance; longer ones must never appear
  const auto texts = generate_pseudo_corpus(CorpusKind::kPseudoWord, 200, 100, &lexicon, 1);
  for (const auto& text : texts) {
    std::stringstream ss(text);
    std::string w;
    while (ss >> w) {
      std::string letters;
      for (char c : w)
        if (std::isalpha(static_cast<unsigned char>(c))) letters += static_cast<char>(std::tolower(c));
      EXPECT_NE(letters, "abcd");
      EXPECT_NE(letters, "test");
      EXPECT_NE(letters, "word");
    }
  }
}

TEST(Corpus, ParagraphsNeedLexicon) {
  try {
    generate_pseudo_corpus(CorpusKind::kPseudoParagraph, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLexicon);
  }
  try {
    read_lexicon("/nonexistent/lexicon.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingLexicon);
  }
  const std::vector<std::string> lexicon{"apple", "river", "stone", "light"};
  const auto texts = generate_pseudo_corpus(CorpusKind::kPseudoParagraph, 3, 30, &lexicon, 0);
  for (const auto& t : texts) EXPECT_NE(t.find_first_of(".?"), std::string::npos);
  EXPECT_THROW(parse_corpus_kind("poetry"), Error);
  EXPECT_EQ(parse_corpus_kind("pseudo-word"), CorpusKind::kPseudoWord);
}

}  // namespace
}  // namespace pairerr::harness
