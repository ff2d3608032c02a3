/*
 * Copyright 2026 The RALC Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// OpenAI-compatible chat-completions backend.
//
// Request:  POST <endpoint>
//           {"model": m, "temperature": t,
//            "messages": [{"role": "user", "content": prompt}]}
// Response: {"choices": [{"message": {"content": reply}}]}

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "ralc/error.hpp"
#include "ralc/gateway.hpp"

namespace ralc {

namespace {

using Json = nlohmann::json;

// Bounds concurrent requests to max_in_flight.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ < limit_; });
    ++active_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    cv_.notify_one();
  }

 private:
  std::size_t limit_;
  std::size_t active_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(BackendConfig config) : config_(std::move(config)), limiter_(config_.max_in_flight) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, kUrl)) {
      throw InvalidArgument(config_.name + ": endpoint must be an http(s) URL");
    }
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (base_.rfind("https://", 0) == 0) {
      throw InvalidArgument(config_.name + ": built without TLS support; use an http endpoint");
    }
#endif
    if (!config_.token_env.empty()) {
      const char* token = std::getenv(config_.token_env.c_str());
      if (token == nullptr || *token == '\0') {
        throw InvalidArgument(config_.name + ": environment variable " + config_.token_env + " is not set");
      }
      token_ = token;
    }
  }

  std::string complete(const ChatRequest& request) override {
    limiter_.acquire();
    struct Release {
      InFlightLimiter& l;
      ~Release() { l.release(); }
    } release{limiter_};

    httplib::Client client(base_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    const Json body{{"model", config_.model},
                    {"temperature", config_.temperature},
                    {"messages", Json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    const auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw GatewayError(config_.name, "transport error: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw GatewayError(config_.name, "HTTP status " + std::to_string(res->status));
    }
    try {
      const Json reply = Json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw GatewayError(config_.name, std::string("malformed completion: ") + e.what());
    }
  }

  const BackendConfig& config() const noexcept override { return config_; }

 private:
  BackendConfig config_;
  InFlightLimiter limiter_;
  std::string base_;
  std::string path_;
  std::string token_;
};

}  // namespace

BackendPtr make_http_backend(BackendConfig config) { return std::make_shared<HttpBackend>(std::move(config)); }

}  // namespace ralc
