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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/error.hpp"
#include "pairerr/harness/plan.hpp"
#include "pairerr/harness/prompt.hpp"
#include "pairerr/harness/provider.hpp"
#include "pairerr/parallel.hpp"
#include "pairerr/records.hpp"
#include "pairerr/rng.hpp"

namespace pairerr::harness {

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunOptions {
  std::string log_path;
  std::string failures_path;  // defaults to <log_path>.failures.jsonl
  std::function<void(double)> sleep = [](double s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
  std::function<std::string()> clock = utc_now;
};

struct RunSummary {
  std::size_t planned = 0;
  std::size_t already_done = 0;
  std::size_t requests_issued = 0;
  std::size_t records_written = 0;
  std::size_t failed = 0;
  std::size_t tie_randomized = 0;
  std::size_t parse_retries = 0;
  std::size_t transient_retries = 0;
  std::size_t parse_failures = 0;  // outside V3: judgments left missing
};

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j = {{"schema_version", 1},
                      {"planned", s.planned},
                      {"already_done", s.already_done},
                      {"requests_issued", s.requests_issued},
                      {"records_written", s.records_written},
                      {"failed", s.failed},
                      {"tie_randomized", s.tie_randomized},
                      {"parse_retries", s.parse_retries},
                      {"transient_retries", s.transient_retries},
                      {"parse_failures", s.parse_failures}};
  if (s.parse_failures > 0)
    j["note"] = "unparseable replies outside V3 were retried and then recorded as failures, not randomized";
  return j;
}

/// Spaces request starts at least 60/rate seconds apart across all workers.
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute) : interval_(per_minute > 0 ? 60.0 / per_minute : 0.0) {}

  void acquire(const std::function<void(double)>& sleep) {
    if (interval_ <= 0) return;
    double wait = 0;
    {
      std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      if (next_ < now) next_ = now;
      wait = std::chrono::duration<double>(next_ - now).count();
      next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(interval_));
    }
    if (wait > 0) sleep(wait);
  }

 private:
  double interval_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

inline double backoff_delay(const ProviderConfig& cfg, std::size_t retry) {
  return std::min(cfg.backoff_cap_s, cfg.backoff_base_s * std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(retry, 30))));
}

struct ComparisonTask {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t trial = 0;
};

/// Every unordered pair once per sequence position, in the indicated order.
inline std::vector<ComparisonTask> schedule(const RunPlan& plan) {
  std::vector<ComparisonTask> tasks;
  tasks.reserve(plan.request_count());
  for (std::size_t i = 0; i < plan.size(); ++i)
    for (std::size_t j = i + 1; j < plan.size(); ++j)
      for (std::size_t t = 0; t < plan.sequence.size(); ++t)
        tasks.push_back(plan.sequence[t] == '+' ? ComparisonTask{i, j, t} : ComparisonTask{j, i, t});
  return tasks;
}

namespace detail {

inline constexpr std::uint64_t kTieTag = 0x5449454252454b31ull;

struct LogState {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> done;
  bool needs_newline = false;
  std::optional<std::size_t> torn_at;  // byte offset of an unfinished final line
};

// Keys already present for this run. A torn final line (crash mid-write) is
// reported for truncation and re-requested; damage anywhere else is an input
// error.
inline LogState scan_log(const std::string& path, const std::string& run_id) {
  LogState state;
  std::ifstream in(path, std::ios::binary);
  if (!in) return state;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  state.needs_newline = !content.empty() && content.back() != '\n';
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    const bool last = end == std::string::npos;
    if (last) end = content.size();
    const auto line = content.substr(start, end - start);
    const std::size_t line_start = start;
    ++line_no;
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto r = nlohmann::json::parse(line).get<PreferenceRecord>();
      if (r.run_id == run_id) state.done.insert({r.first_index, r.second_index, r.trial_index});
    } catch (const std::exception& e) {
      if (last && state.needs_newline) {
        state.torn_at = line_start;
        state.needs_newline = false;
        continue;
      }
      throw Error(ErrorCode::kInvalidInput, "record log '" + path + "' line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return state;
}

}  // namespace detail

/// Collects the judgments of `plan` into the append-only log at
/// options.log_path, skipping those already recorded for the same run_id.
inline RunSummary run_comparisons(const RunPlan& plan, ChatProvider& provider, const RunOptions& options) {
  plan.validate();
  if (options.log_path.empty()) throw Error(ErrorCode::kInvalidInput, "no record log path given");
  const std::string failures_path =
      options.failures_path.empty() ? options.log_path + ".failures.jsonl" : options.failures_path;
  const auto tpl = prompt_template(plan.variant);
  const auto& cfg = plan.provider;

  auto state = detail::scan_log(options.log_path, plan.run_id);
  std::vector<ComparisonTask> pending;
  RunSummary summary;
  for (const auto& task : schedule(plan)) {
    ++summary.planned;
    if (state.done.count({task.first, task.second, task.trial}))
      ++summary.already_done;
    else
      pending.push_back(task);
  }
  if (pending.empty()) return summary;

  if (state.torn_at) std::filesystem::resize_file(options.log_path, *state.torn_at);
  std::ofstream log(options.log_path, std::ios::app | std::ios::binary);
  if (!log) throw Error(ErrorCode::kInvalidInput, "cannot append to record log '" + options.log_path + "'");
  if (state.needs_newline) log << '\n';
  std::ofstream failures;
  std::mutex sink_mutex;
  RateLimiter limiter(cfg.rate_limit);
  std::atomic<bool> aborted{false};

  auto write_failure = [&](const ComparisonTask& t, const Error& e, const std::string& raw) {
    std::lock_guard lock(sink_mutex);
    if (!failures.is_open()) failures.open(failures_path, std::ios::app | std::ios::binary);
    failures << nlohmann::json{{"run_id", plan.run_id},       {"first_index", t.first},
                               {"second_index", t.second},    {"trial_index", t.trial},
                               {"error", to_string(e.code())}, {"message", e.what()},
                               {"raw_response", raw},         {"timestamp", options.clock()}}
                    .dump()
             << '\n';
    failures.flush();
    ++summary.failed;
  };

  parallel_for(pending.size(), static_cast<unsigned>(cfg.concurrency), [&](std::size_t k) {
    if (aborted) return;
    const auto& task = pending[k];
    const auto prompt = render_prompt(tpl, plan.text_type, plan.texts[task.first].body, plan.texts[task.second].body);
    ChatRequest request{prompt.system, prompt.user, cfg.temperature, cfg.model_name, task.first, task.second, task.trial, 0};

    std::size_t parse_retries = 0, transient_retries = 0, issued = 0;
    std::string raw;
    std::optional<Choice> choice;
    bool randomized = false;
    std::optional<Error> failure;
    for (std::size_t attempt = 0;; ++attempt) {
      if (aborted) return;
      limiter.acquire(options.sleep);
      request.attempt = attempt;
      ++issued;
      try {
        raw = provider.complete(request);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kRateLimited || e.code() == ErrorCode::kNetworkError) {
          if (transient_retries < cfg.max_retries) {
            options.sleep(backoff_delay(cfg, transient_retries++));
            continue;
          }
          failure = e;
          break;
        }
        aborted = true;
        throw;
      }
      choice = parse_choice(raw);
      if (choice) break;
      if (parse_retries < cfg.max_retries) {
        ++parse_retries;
        continue;
      }
      if (plan.variant == PromptVariant::kV3) {
        CounterRng rng(derive_seed(plan.rng_seed, {detail::kTieTag, task.first, task.second}), task.trial);
        choice = rng.below(2) == 0 ? Choice::kFirst : Choice::kSecond;
        randomized = true;
      } else {
        failure = Error(ErrorCode::kParseFailure, "no '1' or '2' after " + std::to_string(attempt + 1) + " attempts");
      }
      break;
    }

    {
      std::lock_guard lock(sink_mutex);
      summary.requests_issued += issued;
      summary.parse_retries += parse_retries;
      summary.transient_retries += transient_retries;
      if (failure && failure->code() == ErrorCode::kParseFailure) ++summary.parse_failures;
    }
    if (failure) {
      write_failure(task, *failure, raw);
      return;
    }
    PreferenceRecord rec;
    rec.run_id = plan.run_id;
    rec.model_id = provider.model_id();
    rec.prompt_variant = plan.variant;
    rec.first_index = task.first;
    rec.second_index = task.second;
    rec.trial_index = task.trial;
    rec.parsed_choice = *choice;
    rec.tie_randomized = randomized;
    rec.raw_response = raw;
    rec.temperature = cfg.temperature;
    rec.timestamp = options.clock();
    std::lock_guard lock(sink_mutex);
    write_record(log, rec);
    log.flush();
    ++summary.records_written;
    if (randomized) ++summary.tie_randomized;
  });
  return summary;
}

}  // namespace pairerr::harness
