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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairerr/error.hpp"
#include "pairerr/harness/provider.hpp"
#include "pairerr/records.hpp"

namespace pairerr::harness {

struct Text {
  std::string id;
  std::string body;
};

/// Everything needed to collect one judgment log.
struct RunPlan {
  std::string run_id = "run";
  std::string text_type = "texts";
  std::vector<Text> texts;
  std::string sequence = "+-+-+-";  // '+' : lower index first, '-' : lower index second
  PromptVariant variant = PromptVariant::kBaseline;
  ProviderConfig provider;
  std::uint64_t rng_seed = 0;  // tie randomization under V3

  std::size_t size() const { return texts.size(); }
  std::size_t request_count() const { return sequence.size() * texts.size() * (texts.size() - 1) / 2; }

  void validate() const {
    if (texts.size() < 2) throw Error(ErrorCode::kInvalidInput, "a run needs at least two texts");
    if (sequence.empty()) throw Error(ErrorCode::kInvalidInput, "comparison sequence is empty");
    for (char c : sequence)
      if (c != '+' && c != '-') throw Error(ErrorCode::kInvalidInput, "comparison sequence may only contain '+' and '-'");
    for (const auto& t : texts)
      if (t.body.empty()) throw Error(ErrorCode::kEmptyText, "text '" + t.id + "' is empty");
  }
};

/// Texts from a file: a JSON array (strings or {"id", "text"} objects) or
/// plain text with one text per line.
inline std::vector<Text> read_texts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open text file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  std::vector<Text> texts;
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '[') {
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(content);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kInvalidInput, "text file '" + path + "': " + e.what());
    }
    for (const auto& item : arr) {
      if (item.is_string())
        texts.push_back({"t" + std::to_string(texts.size()), item.get<std::string>()});
      else
        texts.push_back({item.value("id", "t" + std::to_string(texts.size())), item.at("text").get<std::string>()});
    }
    return texts;
  }
  std::string line;
  std::stringstream lines(content);
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    texts.push_back({"t" + std::to_string(texts.size()), line});
  }
  return texts;
}

inline nlohmann::json to_json(const RunPlan& p) {
  nlohmann::json texts = nlohmann::json::array();
  for (const auto& t : p.texts) texts.push_back({{"id", t.id}, {"text", t.body}});
  return {{"schema_version", 1},       {"run_id", p.run_id},   {"text_type", p.text_type},
          {"texts", texts},            {"sequence", p.sequence}, {"variant", to_string(p.variant)},
          {"provider", p.provider},    {"rng_seed", p.rng_seed}};
}

/// Parses a plan; relative "texts_file" paths resolve against `base_dir`.
inline RunPlan plan_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  RunPlan p;
  try {
    p.run_id = j.value("run_id", p.run_id);
    p.text_type = j.value("text_type", p.text_type);
    if (j.contains("texts")) {
      for (const auto& item : j.at("texts")) {
        if (item.is_string())
          p.texts.push_back({"t" + std::to_string(p.texts.size()), item.get<std::string>()});
        else
          p.texts.push_back({item.value("id", "t" + std::to_string(p.texts.size())), item.at("text").get<std::string>()});
      }
    } else if (j.contains("texts_file")) {
      std::filesystem::path file = j.at("texts_file").get<std::string>();
      if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
      p.texts = read_texts(file.string());
    }
    if (j.contains("sequence")) {
      const auto& s = j.at("sequence");
      if (s.is_string()) {
        p.sequence = s.get<std::string>();
      } else {
        p.sequence.clear();
        for (const auto& c : s) p.sequence += c.get<std::string>();
      }
    }
    p.variant = parse_variant(j.value("variant", std::string("baseline")));
    if (j.contains("provider")) p.provider = j.at("provider").get<ProviderConfig>();
    p.rng_seed = j.value("rng_seed", p.rng_seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed run plan: ") + e.what());
  }
  p.validate();
  return p;
}

inline RunPlan read_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open run plan '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidInput, "run plan '" + path + "': " + e.what());
  }
  return plan_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace pairerr::harness
