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

#ifndef REVLABEL_GATEWAY_HPP
#define REVLABEL_GATEWAY_HPP

// Chat-completion access: OpenAI-compatible HTTP endpoints or deterministic
// mocks, behind a content-addressed response cache, with per-endpoint
// concurrency and request-rate ceilings.

#include "revlabel/error.hpp"
#include "revlabel/prompt.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revlabel {

struct MockBehavior {
  enum class Mode { FixtureTable, SeededConfusion };

  Mode mode = Mode::SeededConfusion;
  std::map<std::string, std::string> fixture;
  // Row-stochastic, rows = truth class, columns = emitted class, both in
  // scheme class order.
  std::vector<std::vector<double>> confusion;
  // Shorthand for a confusion matrix with this diagonal and errors spread
  // uniformly over the other classes. Lets one mock serve any scheme size.
  std::optional<double> accuracy;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<std::vector<double>> confusion_for(std::size_t classes) const;
};

// FixtureTable: the fixture text for `record_id` (FixtureMiss otherwise).
// SeededConfusion: draws an emitted class from the truth row with a stream
// keyed by (seed, record_id, model_id) and renders "Category: <name>".
std::string mock_classify(const MockBehavior& behavior, const Scheme& scheme,
                          const std::optional<std::string>& truth_label,
                          std::string_view record_id,
                          std::string_view model_id);

struct EndpointConfig {
  std::string model_id;
  std::string base_url;
  std::string auth_env_var;
  // Model name sent on the wire; defaults to model_id.
  std::string api_model;
  int max_concurrency = 1;
  int requests_per_minute = 60;
  int max_retries = 3;
  double temperature = 0.0;
  int max_tokens = 64;
  std::optional<MockBehavior> mock;

  bool is_mock() const noexcept { return mock.has_value(); }
  void validate() const;
};

struct RawResponse {
  std::string record_id;
  std::string model_id;
  std::string prompt_hash;
  std::string output_text;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
};

struct RequestContext {
  std::optional<std::string> truth_label;  // mocks only
  const Scheme* scheme = nullptr;          // mocks only
};

// Throttling or transient server failure; the gateway retries these.
class RetryableError : public Error {
 public:
  using Error::Error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const EndpointConfig& endpoint,
                               const PromptSpec& prompt,
                               const RequestContext& context) = 0;
};

std::shared_ptr<Backend> make_http_backend();
std::shared_ptr<Backend> make_mock_backend();

// Wire format helpers for the chat-completion shape.
std::string chat_request_body(const EndpointConfig& endpoint,
                              const PromptSpec& prompt);
// Throws MalformedResponse.
std::string parse_chat_response(std::string_view body);

// Hex SHA-256 over model id, temperature and prompt bytes.
std::string prompt_hash(std::string_view model_id, const PromptSpec& prompt,
                        double temperature);

// One JSON file per entry at <root>/<model_id>/<prompt_hash>.json, written
// via rename so a crash never leaves a torn entry.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root);

  std::optional<RawResponse> get(const std::string& model_id,
                                 const std::string& hash) const;
  void put(const RawResponse& response);
  std::filesystem::path entry_path(const std::string& model_id,
                                   const std::string& hash) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

// Sliding-window limiter: at most `requests_per_minute` issues in any
// trailing 60 s window.
class RateLimiter {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleep = std::function<void(std::chrono::nanoseconds)>;

  RateLimiter(int requests_per_minute, Clock clock, Sleep sleep);

  void acquire();

 private:
  int limit_;
  Clock clock_;
  Sleep sleep_;
  std::mutex mutex_;
  std::deque<std::chrono::steady_clock::time_point> issued_;
};

struct BatchRequest {
  PromptSpec prompt;
  std::optional<std::string> truth_label;
};

struct ItemError {
  ErrorCode code = ErrorCode::Internal;
  std::string message;
};

struct BatchItem {
  std::string record_id;
  std::optional<RawResponse> response;
  std::optional<ItemError> error;
};

struct EndpointStats {
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t peak_in_flight = 0;
};

class Gateway {
 public:
  struct Options {
    std::filesystem::path cache_dir;
    // Replaces both default backends when set (tests, instrumentation).
    std::shared_ptr<Backend> backend;
    RateLimiter::Clock clock;
    RateLimiter::Sleep sleep;
    std::uint64_t jitter_seed = 0;
  };

  explicit Gateway(Options options);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Throws AuthMissing, RateLimited, TransportError, MalformedResponse,
  // FixtureMiss.
  RawResponse submit(const EndpointConfig& endpoint, const PromptSpec& prompt,
                     const RequestContext& context = {});

  // Output is in input order; one failing item never aborts the batch.
  std::vector<BatchItem> run_batch(const EndpointConfig& endpoint,
                                   std::span<const BatchRequest> requests,
                                   const Scheme* scheme = nullptr);

  EndpointStats stats(const std::string& model_id) const;

 private:
  struct EndpointState;
  EndpointState& state_for(const EndpointConfig& endpoint);
  std::string call_with_retries(const EndpointConfig& endpoint,
                                const PromptSpec& prompt,
                                const RequestContext& context,
                                EndpointState& state);

  Options options_;
  ResponseCache cache_;
  std::shared_ptr<Backend> http_;
  std::shared_ptr<Backend> mock_;
  mutable std::mutex states_mutex_;
  std::map<std::string, std::unique_ptr<EndpointState>> states_;
};

}  // namespace revlabel

#endif  // REVLABEL_GATEWAY_HPP
