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

#include "revlabel/gateway.hpp"

#include "revlabel/random.hpp"
#include "util.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace revlabel {

using json = nlohmann::ordered_json;

// ---- mocks -----------------------------------------------------------------

void MockBehavior::validate() const {
  if (mode == Mode::FixtureTable) {
    if (!confusion.empty() || accuracy) {
      throw Error(ErrorCode::ValidationError,
                  "fixture mock must not carry a confusion matrix");
    }
    return;
  }
  if (!fixture.empty()) {
    throw Error(ErrorCode::ValidationError,
                "seeded-confusion mock must not carry a fixture table");
  }
  if (confusion.empty() == !accuracy.has_value()) {
    throw Error(ErrorCode::ValidationError,
                "seeded-confusion mock needs exactly one of confusion or "
                "accuracy");
  }
  if (accuracy && (*accuracy < 0.0 || *accuracy > 1.0)) {
    throw Error(ErrorCode::ValidationError, "mock accuracy outside [0, 1]");
  }
  for (const auto& row : confusion) {
    if (row.size() != confusion.size()) {
      throw Error(ErrorCode::ValidationError, "confusion matrix is not square");
    }
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) {
        throw Error(ErrorCode::ValidationError,
                    "confusion matrix has a negative entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw Error(ErrorCode::ValidationError,
                  "confusion matrix row does not sum to 1");
    }
  }
}

std::vector<std::vector<double>> MockBehavior::confusion_for(
    std::size_t classes) const {
  if (accuracy) {
    const double off =
        classes > 1 ? (1.0 - *accuracy) / static_cast<double>(classes - 1) : 0.0;
    std::vector<std::vector<double>> m(classes,
                                       std::vector<double>(classes, off));
    for (std::size_t i = 0; i < classes; ++i) m[i][i] = classes > 1 ? *accuracy : 1.0;
    return m;
  }
  if (confusion.size() != classes) {
    throw Error(ErrorCode::ValidationError,
                "confusion matrix has " + std::to_string(confusion.size()) +
                    " classes, scheme has " + std::to_string(classes));
  }
  return confusion;
}

std::string mock_classify(const MockBehavior& behavior, const Scheme& scheme,
                          const std::optional<std::string>& truth_label,
                          std::string_view record_id,
                          std::string_view model_id) {
  if (behavior.mode == MockBehavior::Mode::FixtureTable) {
    auto it = behavior.fixture.find(std::string(record_id));
    if (it == behavior.fixture.end()) {
      throw Error(ErrorCode::FixtureMiss,
                  "mock fixture has no entry for '" + std::string(record_id) +
                      "'");
    }
    return it->second;
  }
  if (!truth_label) {
    throw Error(ErrorCode::InvalidArgument,
                "seeded-confusion mock needs the truth label of '" +
                    std::string(record_id) + "'");
  }
  auto truth = scheme.index_of(*truth_label);
  if (!truth) {
    throw Error(ErrorCode::UnknownClass, "truth label '" + *truth_label +
                                             "' is not in scheme " + scheme.id);
  }
  const auto matrix = behavior.confusion_for(scheme.categories.size());
  const auto& row = matrix[*truth];

  std::string key(record_id);
  key.push_back('\x1f');
  key.append(model_id);
  Rng rng(derive_seed(behavior.seed, key));
  const double u = rng.uniform01();
  double cumulative = 0.0;
  std::size_t emitted = row.size() - 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    cumulative += row[j];
    if (u < cumulative) {
      emitted = j;
      break;
    }
  }
  // Zero-probability trailing columns must never be emitted through
  // rounding slack in the cumulative sum.
  while (emitted > 0 && row[emitted] == 0.0) --emitted;
  return "Category: " + scheme.categories[emitted].category_name;
}

void EndpointConfig::validate() const {
  if (model_id.empty()) {
    throw Error(ErrorCode::ValidationError, "endpoint without model_id");
  }
  if (max_concurrency < 1 || requests_per_minute < 1 || max_retries < 0) {
    throw Error(ErrorCode::ValidationError,
                "endpoint " + model_id +
                    ": max_concurrency and requests_per_minute must be >= 1");
  }
  if (mock) {
    mock->validate();
  } else if (base_url.empty()) {
    throw Error(ErrorCode::ValidationError,
                "endpoint " + model_id + " has neither base_url nor mock");
  }
}

// ---- wire format -----------------------------------------------------------

std::string chat_request_body(const EndpointConfig& endpoint,
                              const PromptSpec& prompt) {
  json body;
  body["model"] = endpoint.api_model.empty() ? endpoint.model_id
                                             : endpoint.api_model;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", prompt.context}},
      json{{"role", "user"}, {"content", prompt.instruction}},
  });
  body["temperature"] = endpoint.temperature;
  body["max_tokens"] = endpoint.max_tokens;
  return body.dump();
}

std::string parse_chat_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse,
                std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) {
      throw Error(ErrorCode::MalformedResponse,
                  "message content is not a string");
    }
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse,
                std::string("response lacks choices[0].message.content: ") +
                    e.what());
  }
}

std::string prompt_hash(std::string_view model_id, const PromptSpec& prompt,
                        double temperature) {
  std::string material(model_id);
  material.push_back('\0');
  material += detail::format_double(temperature);
  material.push_back('\0');
  material += prompt.full_text();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(material.data(), material.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::Internal, "SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// ---- cache -----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path root)
    : root_(std::move(root)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& model_id,
                                                const std::string& hash) const {
  return root_ / detail::path_component(model_id) / (hash + ".json");
}

std::optional<RawResponse> ResponseCache::get(const std::string& model_id,
                                              const std::string& hash) const {
  std::lock_guard lock(mutex_);
  auto path = entry_path(model_id, hash);
  if (!std::filesystem::is_regular_file(path)) return std::nullopt;
  try {
    auto doc = json::parse(detail::read_file(path));
    RawResponse r;
    r.record_id = doc.at("record_id").get<std::string>();
    r.model_id = doc.at("model_id").get<std::string>();
    r.prompt_hash = doc.at("prompt_hash").get<std::string>();
    r.output_text = doc.at("output_text").get<std::string>();
    if (r.prompt_hash != hash || r.model_id != model_id) return std::nullopt;
    r.from_cache = true;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable entry: treat as a miss and rewrite
  }
}

void ResponseCache::put(const RawResponse& response) {
  json doc;
  doc["model_id"] = response.model_id;
  doc["prompt_hash"] = response.prompt_hash;
  doc["record_id"] = response.record_id;
  doc["output_text"] = response.output_text;
  std::lock_guard lock(mutex_);
  detail::write_file(entry_path(response.model_id, response.prompt_hash),
                     doc.dump(2) + "\n");
}

// ---- rate limiting ---------------------------------------------------------

RateLimiter::RateLimiter(int requests_per_minute, Clock clock, Sleep sleep)
    : limit_(std::max(1, requests_per_minute)),
      clock_(std::move(clock)),
      sleep_(std::move(sleep)) {}

void RateLimiter::acquire() {
  using namespace std::chrono;
  std::lock_guard lock(mutex_);
  for (;;) {
    const auto now = clock_();
    while (!issued_.empty() && issued_.front() + minutes(1) <= now) {
      issued_.pop_front();
    }
    if (static_cast<int>(issued_.size()) < limit_) {
      issued_.push_back(now);
      return;
    }
    sleep_(issued_.front() + minutes(1) - now);
  }
}

// ---- gateway ---------------------------------------------------------------

struct Gateway::EndpointState {
  std::unique_ptr<RateLimiter> limiter;
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak_in_flight{0};
  std::atomic<std::size_t> backend_calls{0};
  std::atomic<std::size_t> cache_hits{0};
};

Gateway::Gateway(Options options)
    : options_(std::move(options)),
      cache_(options_.cache_dir),
      http_(make_http_backend()),
      mock_(make_mock_backend()) {
  if (!options_.clock) options_.clock = [] { return std::chrono::steady_clock::now(); };
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::nanoseconds d) { std::this_thread::sleep_for(d); };
  }
}

Gateway::~Gateway() = default;

Gateway::EndpointState& Gateway::state_for(const EndpointConfig& endpoint) {
  std::lock_guard lock(states_mutex_);
  auto& slot = states_[endpoint.model_id];
  if (!slot) {
    slot = std::make_unique<EndpointState>();
    slot->limiter = std::make_unique<RateLimiter>(
        endpoint.requests_per_minute, options_.clock, options_.sleep);
  }
  return *slot;
}

EndpointStats Gateway::stats(const std::string& model_id) const {
  std::lock_guard lock(states_mutex_);
  auto it = states_.find(model_id);
  if (it == states_.end()) return {};
  return {it->second->backend_calls.load(), it->second->cache_hits.load(),
          it->second->peak_in_flight.load()};
}

std::string Gateway::call_with_retries(const EndpointConfig& endpoint,
                                       const PromptSpec& prompt,
                                       const RequestContext& context,
                                       EndpointState& state) {
  Backend& backend = options_.backend ? *options_.backend
                     : endpoint.is_mock() ? *mock_
                                          : *http_;
  for (int attempt = 0;; ++attempt) {
    state.limiter->acquire();
    const auto now_in_flight = ++state.in_flight;
    auto peak = state.peak_in_flight.load();
    while (now_in_flight > peak &&
           !state.peak_in_flight.compare_exchange_weak(peak, now_in_flight)) {
    }
    ++state.backend_calls;
    try {
      auto text = backend.complete(endpoint, prompt, context);
      --state.in_flight;
      return text;
    } catch (const RetryableError& e) {
      --state.in_flight;
      if (attempt >= endpoint.max_retries) {
        throw Error(e.code(), std::string(e.what()) + " (gave up after " +
                                  std::to_string(attempt + 1) + " attempts)");
      }
    } catch (...) {
      --state.in_flight;
      throw;
    }
    // Exponential backoff with jitter, capped at one minute.
    const double jitter =
        Rng(derive_seed(options_.jitter_seed,
                        prompt.sample_record_id + "#" + std::to_string(attempt)))
            .uniform01();
    const double ms = std::min(60000.0, 500.0 * std::pow(2.0, attempt) * (1.0 + jitter));
    options_.sleep(std::chrono::milliseconds(static_cast<long long>(ms)));
  }
}

RawResponse Gateway::submit(const EndpointConfig& endpoint,
                            const PromptSpec& prompt,
                            const RequestContext& context) {
  auto& state = state_for(endpoint);
  const auto hash = prompt_hash(endpoint.model_id, prompt, endpoint.temperature);
  if (auto cached = cache_.get(endpoint.model_id, hash)) {
    ++state.cache_hits;
    cached->record_id = prompt.sample_record_id;
    return *cached;
  }
  if (!endpoint.is_mock() && !endpoint.auth_env_var.empty()) {
    const char* key = std::getenv(endpoint.auth_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::AuthMissing, "environment variable " +
                                              endpoint.auth_env_var +
                                              " is not set for endpoint " +
                                              endpoint.model_id);
    }
  }
  const auto start = std::chrono::steady_clock::now();
  RawResponse r;
  r.record_id = prompt.sample_record_id;
  r.model_id = endpoint.model_id;
  r.prompt_hash = hash;
  r.output_text = call_with_retries(endpoint, prompt, context, state);
  r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  r.from_cache = false;
  cache_.put(r);
  return r;
}

std::vector<BatchItem> Gateway::run_batch(const EndpointConfig& endpoint,
                                          std::span<const BatchRequest> requests,
                                          const Scheme* scheme) {
  std::vector<BatchItem> items(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    items[i].record_id = requests[i].prompt.sample_record_id;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= requests.size()) return;
      RequestContext ctx{requests[i].truth_label, scheme};
      try {
        items[i].response = submit(endpoint, requests[i].prompt, ctx);
      } catch (const Error& e) {
        items[i].error = ItemError{e.code(), e.what()};
      } catch (const std::exception& e) {
        items[i].error = ItemError{ErrorCode::Internal, e.what()};
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(1, endpoint.max_concurrency)),
      requests.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return items;
}

}  // namespace revlabel
