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

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/error.hpp"

namespace pairerr {

enum class PromptVariant { kBaseline, kV1, kV2, kV3 };
enum class Choice { kFirst, kSecond };

inline std::string to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::kBaseline: return "baseline";
    case PromptVariant::kV1: return "V1";
    case PromptVariant::kV2: return "V2";
    case PromptVariant::kV3: return "V3";
  }
  return "baseline";
}

inline PromptVariant parse_variant(const std::string& s) {
  if (s == "baseline") return PromptVariant::kBaseline;
  if (s == "V1" || s == "V1_no_type") return PromptVariant::kV1;
  if (s == "V2" || s == "V2_chinese") return PromptVariant::kV2;
  if (s == "V3" || s == "V3_no_system") return PromptVariant::kV3;
  throw Error(ErrorCode::kInvalidInput, "unknown prompt variant '" + s + "'");
}

/// One judgment for the ordered pair (first_index placed first, second_index
/// placed second) at position `trial_index` of the comparison sequence.
struct PreferenceRecord {
  std::string run_id;
  std::string model_id;
  PromptVariant prompt_variant = PromptVariant::kBaseline;
  std::size_t first_index = 0;
  std::size_t second_index = 0;
  std::size_t trial_index = 0;
  Choice parsed_choice = Choice::kFirst;
  bool tie_randomized = false;
  std::string raw_response;
  double temperature = 0.1;
  std::string timestamp;

  /// +1 when the first-placed text was preferred.
  int outcome() const { return parsed_choice == Choice::kFirst ? 1 : -1; }
  std::size_t winner() const { return parsed_choice == Choice::kFirst ? first_index : second_index; }
  std::size_t loser() const { return parsed_choice == Choice::kFirst ? second_index : first_index; }
};

inline void to_json(nlohmann::json& j, const PreferenceRecord& r) {
  j = nlohmann::json{{"run_id", r.run_id},
                     {"model_id", r.model_id},
                     {"prompt_variant", to_string(r.prompt_variant)},
                     {"first_index", r.first_index},
                     {"second_index", r.second_index},
                     {"trial_index", r.trial_index},
                     {"parsed_choice", r.parsed_choice == Choice::kFirst ? "first" : "second"},
                     {"tie_randomized", r.tie_randomized},
                     {"raw_response", r.raw_response},
                     {"temperature", r.temperature},
                     {"timestamp", r.timestamp}};
}

inline void from_json(const nlohmann::json& j, PreferenceRecord& r) {
  j.at("run_id").get_to(r.run_id);
  j.at("model_id").get_to(r.model_id);
  r.prompt_variant = parse_variant(j.at("prompt_variant").get<std::string>());
  j.at("first_index").get_to(r.first_index);
  j.at("second_index").get_to(r.second_index);
  j.at("trial_index").get_to(r.trial_index);
  const auto choice = j.at("parsed_choice").get<std::string>();
  if (choice == "first") {
    r.parsed_choice = Choice::kFirst;
  } else if (choice == "second") {
    r.parsed_choice = Choice::kSecond;
  } else {
    throw Error(ErrorCode::kInvalidInput, "parsed_choice must be 'first' or 'second', got '" + choice + "'");
  }
  j.at("tie_randomized").get_to(r.tie_randomized);
  j.at("raw_response").get_to(r.raw_response);
  j.at("temperature").get_to(r.temperature);
  j.at("timestamp").get_to(r.timestamp);
  if (r.first_index == r.second_index)
    throw Error(ErrorCode::kInvalidInput, "record compares text " + std::to_string(r.first_index) + " with itself");
}

inline std::vector<PreferenceRecord> read_records(std::istream& in) {
  std::vector<PreferenceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<PreferenceRecord>());
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kInvalidInput, "record log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<PreferenceRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open record log '" + path + "'");
  return read_records(in);
}

inline void write_record(std::ostream& out, const PreferenceRecord& r) {
  out << nlohmann::json(r).dump() << '\n';
}

inline void write_records(const std::string& path, const std::vector<PreferenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidInput, "cannot write record log '" + path + "'");
  for (const auto& r : records) write_record(out, r);
}

}  // namespace pairerr
