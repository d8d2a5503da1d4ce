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

// Network client for OpenAI-compatible endpoints. Kept apart from provider.hpp
// so offline users do not pull in the HTTP stack; define
// CPPHTTPLIB_OPENSSL_SUPPORT (and link OpenSSL) for https endpoints.

#include <string>

#include <httplib.h>

#include "pairerr/harness/provider.hpp"

namespace pairerr::harness {

class HttpProvider : public ChatProvider {
 public:
  explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)), api_key_(require_credential(cfg_)) {
    // "https://host/v1" -> scheme+host and path prefix
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos)
      throw Error(ErrorCode::kInvalidInput, "endpoint must be an http(s) URL: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    host_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "" : cfg_.endpoint.substr(path_start);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    path_ += "/chat/completions";
  }

  std::string complete(const ChatRequest& request) override {
    ChatRequest r = request;
    r.model = cfg_.model_name;
    httplib::Client client(host_);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    client.set_bearer_token_auth(api_key_);
    const auto res = client.Post(path_, chat_request_body(r).dump(), "application/json");
    if (!res) throw Error(ErrorCode::kNetworkError, "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw classify_http_status(res->status, res->body);
    return chat_reply_text(res->body);
  }

  std::string model_id() const override { return cfg_.model_name; }

 private:
  ProviderConfig cfg_;
  std::string api_key_;
  std::string host_;
  std::string path_;
};

}  // namespace pairerr::harness
