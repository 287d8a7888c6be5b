/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "revlabel/gateway.hpp"

#include <cstdlib>

namespace revlabel {

namespace {

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash, e.g. "/v1"
};

BaseUrl split_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ValidationError,
                "base_url '" + url + "' lacks a scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  BaseUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

// OpenAI-compatible POST <base_url>/chat/completions.
class HttpBackend final : public Backend {
 public:
  std::string complete(const EndpointConfig& endpoint, const PromptSpec& prompt,
                       const RequestContext&) override {
    const auto base = split_base_url(endpoint.base_url);
    httplib::Client client(base.origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(180);
    client.set_write_timeout(60);

    httplib::Headers headers;
    if (!endpoint.auth_env_var.empty()) {
      const char* key = std::getenv(endpoint.auth_env_var.c_str());
      if (key == nullptr || *key == '\0') {
        throw Error(ErrorCode::AuthMissing,
                    "environment variable " + endpoint.auth_env_var +
                        " is not set");
      }
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto result = client.Post(base.prefix + "/chat/completions", headers,
                              chat_request_body(endpoint, prompt),
                              "application/json");
    if (!result) {
      throw RetryableError(ErrorCode::TransportError,
                           endpoint.model_id + ": " +
                               httplib::to_string(result.error()));
    }
    const int status = result->status;
    if (status == 429) {
      throw RetryableError(ErrorCode::RateLimited,
                           endpoint.model_id + ": throttled (HTTP 429)");
    }
    if (status >= 500) {
      throw RetryableError(ErrorCode::TransportError,
                           endpoint.model_id + ": HTTP " +
                               std::to_string(status));
    }
    if (status == 401 || status == 403) {
      throw Error(ErrorCode::AuthMissing, endpoint.model_id +
                                              ": credentials rejected (HTTP " +
                                              std::to_string(status) + ")");
    }
    if (status != 200) {
      throw Error(ErrorCode::TransportError,
                  endpoint.model_id + ": HTTP " + std::to_string(status) +
                      ": " + result->body.substr(0, 200));
    }
    return parse_chat_response(result->body);
  }
};

class MockBackend final : public Backend {
 public:
  std::string complete(const EndpointConfig& endpoint, const PromptSpec& prompt,
                       const RequestContext& context) override {
    if (!endpoint.mock) {
      throw Error(ErrorCode::InvalidArgument,
                  endpoint.model_id + " is not a mock endpoint");
    }
    static const Scheme kEmpty;
    const Scheme& scheme = context.scheme ? *context.scheme : kEmpty;
    return mock_classify(*endpoint.mock, scheme, context.truth_label,
                         prompt.sample_record_id, endpoint.model_id);
  }
};

}  // namespace

std::shared_ptr<Backend> make_http_backend() {
  return std::make_shared<HttpBackend>();
}

std::shared_ptr<Backend> make_mock_backend() {
  return std::make_shared<MockBackend>();
}

}  // namespace revlabel
