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

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pairerr/error.hpp"
#include "pairerr/probmodel.hpp"
#include "pairerr/rng.hpp"

namespace pairerr::harness {

struct ProviderConfig {
  std::string provider_id = "mock";
  std::string endpoint = "mock:";  // base URL, or "mock:<options>" for the built-in simulator
  std::string model_name = "mock-judge";
  double temperature = 0.1;
  std::size_t max_retries = 3;
  double rate_limit = 0;  // requests per minute; 0 = unlimited
  std::string credential_env_key;
  std::size_t concurrency = 4;
  double timeout_s = 60;
  double backoff_base_s = 2;
  double backoff_cap_s = 60;

  bool is_mock() const { return endpoint.rfind("mock:", 0) == 0; }

  /// PAIRERR_API_KEY_<PROVIDER> unless overridden.
  std::string credential_key() const {
    if (!credential_env_key.empty()) return credential_env_key;
    std::string key = "PAIRERR_API_KEY_";
    for (char c : provider_id) key += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_';
    return key;
  }
};

inline void to_json(nlohmann::json& j, const ProviderConfig& c) {
  j = {{"provider_id", c.provider_id},       {"endpoint", c.endpoint},           {"model_name", c.model_name},
       {"temperature", c.temperature},       {"max_retries", c.max_retries},     {"rate_limit", c.rate_limit},
       {"credential_env_key", c.credential_key()}, {"concurrency", c.concurrency}, {"timeout_s", c.timeout_s},
       {"backoff_base_s", c.backoff_base_s}, {"backoff_cap_s", c.backoff_cap_s}};
}

inline void from_json(const nlohmann::json& j, ProviderConfig& c) {
  c.provider_id = j.value("provider_id", c.provider_id);
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model_name = j.value("model_name", c.model_name);
  c.temperature = j.value("temperature", c.temperature);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.rate_limit = j.value("rate_limit", c.rate_limit);
  c.credential_env_key = j.value("credential_env_key", c.credential_env_key);
  c.concurrency = j.value("concurrency", c.concurrency);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.backoff_base_s = j.value("backoff_base_s", c.backoff_base_s);
  c.backoff_cap_s = j.value("backoff_cap_s", c.backoff_cap_s);
  if (c.concurrency < 1) throw Error(ErrorCode::kInvalidInput, "provider concurrency must be >= 1");
  if (c.temperature < 0) throw Error(ErrorCode::kInvalidInput, "temperature must be >= 0");
}

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  double temperature = 0.1;
  std::string model;
  // Scheduling metadata; real providers ignore it, the simulator keys on it.
  std::size_t first_index = 0;
  std::size_t second_index = 0;
  std::size_t trial_index = 0;
  std::size_t attempt = 0;
};

/// One chat-completion round trip. Implementations throw Error with
/// kAuthError, kRateLimited or kNetworkError; any returned text is the raw reply.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string model_id() const = 0;
};

/// Offline judge whose ground truth is the index order (lower index = better).
/// Options: eps, eps_plus, eps_minus, garbage (probability of an unparseable
/// reply), rate_limited (probability of a 429), seed, auth=fail.
class MockProvider : public ChatProvider {
 public:
  explicit MockProvider(const std::string& options, std::string model = "mock-judge") : model_(std::move(model)) {
    std::string spec = options.rfind("mock:", 0) == 0 ? options.substr(5) : options;
    std::stringstream ss(spec);
    std::string item;
    double eps_plus = 0, eps_minus = 0;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidInput, "mock option '" + item + "' lacks '='");
      const auto key = item.substr(0, eq), value = item.substr(eq + 1);
      auto number = [&] {
        try {
          return std::stod(value);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kInvalidInput, "mock option '" + key + "' is not a number");
        }
      };
      if (key == "eps") {
        eps_plus = eps_minus = number();
      } else if (key == "eps_plus") {
        eps_plus = number();
      } else if (key == "eps_minus") {
        eps_minus = number();
      } else if (key == "garbage") {
        garbage_ = number();
      } else if (key == "rate_limited") {
        rate_limited_ = number();
      } else if (key == "seed") {
        seed_ = static_cast<std::uint64_t>(std::stoull(value));
      } else if (key == "auth") {
        auth_fail_ = value == "fail";
      } else {
        throw Error(ErrorCode::kInvalidInput, "unknown mock option '" + key + "'");
      }
    }
    spec_ = ErrorSpec::positional(eps_plus, eps_minus);
    spec_.validate();
  }

  std::string complete(const ChatRequest& r) override {
    if (auth_fail_) throw Error(ErrorCode::kAuthError, "mock provider rejected the credentials");
    CounterRng rng(derive_seed(seed_, {r.first_index, r.second_index, r.trial_index}), r.attempt);
    if (rng.uniform() < rate_limited_) throw Error(ErrorCode::kRateLimited, "mock provider: too many requests");
    if (rng.uniform() < garbage_) return "Both texts are equally good.";
    const bool better_first = r.first_index < r.second_index;
    const double eps = better_first ? spec_.eps_plus : spec_.eps_minus;
    const bool flip = rng.uniform() < eps;
    return (better_first != flip) ? "1" : "2";
  }

  std::string model_id() const override { return model_; }

 private:
  std::string model_;
  ErrorSpec spec_;
  double garbage_ = 0;
  double rate_limited_ = 0;
  std::uint64_t seed_ = 0;
  bool auth_fail_ = false;
};

inline std::string require_credential(const ProviderConfig& cfg) {
  const auto key = cfg.credential_key();
  const char* value = std::getenv(key.c_str());
  if (value == nullptr || *value == '\0')
    throw Error(ErrorCode::kAuthError, "credential environment variable " + key + " is not set");
  return value;
}

/// Body of an OpenAI-compatible chat completion request.
inline nlohmann::json chat_request_body(const ChatRequest& r) {
  nlohmann::json messages = nlohmann::json::array();
  if (r.system) messages.push_back({{"role", "system"}, {"content", *r.system}});
  messages.push_back({{"role", "user"}, {"content", r.user}});
  return {{"model", r.model}, {"temperature", r.temperature}, {"messages", messages}};
}

inline std::string chat_reply_text(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kNetworkError, std::string("malformed chat completion response: ") + e.what());
  }
}

inline Error classify_http_status(int status, const std::string& body) {
  const auto excerpt = body.substr(0, 200);
  if (status == 401 || status == 403)
    return Error(ErrorCode::kAuthError, "provider rejected credentials (HTTP " + std::to_string(status) + ")");
  if (status == 429) return Error(ErrorCode::kRateLimited, "provider rate limit (HTTP 429)");
  return Error(ErrorCode::kNetworkError, "provider returned HTTP " + std::to_string(status) + ": " + excerpt);
}

}  // namespace pairerr::harness
