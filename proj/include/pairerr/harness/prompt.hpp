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

#include <map>
#include <optional>
#include <string>

#include "pairerr/error.hpp"
#include "pairerr/records.hpp"

namespace pairerr::harness {

struct PromptTemplate {
  PromptVariant variant = PromptVariant::kBaseline;
  std::optional<std::string> system_text;  // may contain {text_type}
  std::string user_text_pattern;           // slots {text_type}, {text1}, {text2}
};

struct RenderedPrompt {
  std::optional<std::string> system;
  std::string user;
};

namespace detail {

inline constexpr const char* kSystemPattern =
    "You are a senior {text_type} evaluation expert with rich experience in literary appreciation and judgment. "
    "Please conduct comprehensive text evaluations based on quality, creativity, expression effectiveness, and other "
    "dimensions. Only respond with 1 or 2; no explanation needed.";

inline constexpr const char* kBaselineUser =
    "Compare the following two {text_type} and indicate which one is better. Output only the number: 1 if Text 1 is "
    "better, 2 if Text 2 is better. Text 1: {text1}. Text 2: {text2}.";

inline constexpr const char* kNoTypeUser =
    "Compare the following two texts and indicate the better one. Output only the number: 1 if Text 1 is better, 2 "
    "if Text 2 is better. Text 1: {text1}. Text 2: {text2}.";

inline constexpr const char* kChineseUser =
    "比较以下两篇{text_type}，指出哪一篇更优。仅输出数字：输出1如果文本1更好，输出2如果文本2更好。文本1: {text1}. 文本2: {text2}.";

inline void replace_all(std::string& s, const std::string& slot, const std::string& value) {
  for (std::size_t pos = s.find(slot); pos != std::string::npos; pos = s.find(slot, pos + value.size()))
    s.replace(pos, slot.size(), value);
}

}  // namespace detail

inline PromptTemplate prompt_template(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kBaseline: return {variant, detail::kSystemPattern, detail::kBaselineUser};
    // The system prompt would otherwise reintroduce the type.
    case PromptVariant::kV1: return {variant, std::string(detail::kSystemPattern), detail::kNoTypeUser};
    case PromptVariant::kV2: return {variant, detail::kSystemPattern, detail::kChineseUser};
    case PromptVariant::kV3: return {variant, std::nullopt, detail::kBaselineUser};
  }
  return {variant, detail::kSystemPattern, detail::kBaselineUser};
}

/// Chinese noun used by the translated prompt. Meaningless text types have no
/// dedicated term and fall back to the generic "text material".
inline std::string chinese_text_type(const std::string& text_type) {
  static const std::map<std::string, std::string> names = {
      {"advertising slogans", "广告语"}, {"slogans", "广告语"},       {"short poems", "短诗"},
      {"poems", "短诗"},                 {"academic abstracts", "文献摘要"}, {"abstracts", "文献摘要"},
  };
  const auto it = names.find(text_type);
  return it == names.end() ? "文本材料" : it->second;
}

inline RenderedPrompt render_prompt(const PromptTemplate& tpl, const std::string& text_type, const std::string& text_a,
                                    const std::string& text_b) {
  if (text_a.empty() || text_b.empty()) throw Error(ErrorCode::kEmptyText, "cannot compare an empty text");
  std::string type_en = text_type;
  std::string type_user = text_type;
  if (tpl.variant == PromptVariant::kV1) type_en = "text";
  if (tpl.variant == PromptVariant::kV2) type_user = chinese_text_type(text_type);

  RenderedPrompt out;
  if (tpl.system_text) {
    std::string system = *tpl.system_text;
    detail::replace_all(system, "{text_type}", type_en);
    out.system = std::move(system);
  }
  // Texts go in last so that a literal "{text_type}" inside a text survives.
  out.user = tpl.user_text_pattern;
  detail::replace_all(out.user, "{text_type}", type_user);
  const auto split = out.user.find("{text1}");
  std::string head = out.user.substr(0, split), tail = out.user.substr(split + 7);
  detail::replace_all(tail, "{text2}", text_b);
  out.user = head + text_a + tail;
  return out;
}

inline RenderedPrompt render_prompt(PromptVariant variant, const std::string& text_type, const std::string& text_a,
                                    const std::string& text_b) {
  return render_prompt(prompt_template(variant), text_type, text_a, text_b);
}

/// Strict reading of a reply: after trimming whitespace it must be exactly
/// "1" or "2".
inline std::optional<Choice> parse_choice(const std::string& raw) {
  const auto first = raw.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  const auto last = raw.find_last_not_of(" \t\r\n");
  const auto body = raw.substr(first, last - first + 1);
  if (body == "1") return Choice::kFirst;
  if (body == "2") return Choice::kSecond;
  return std::nullopt;
}

}  // namespace pairerr::harness
