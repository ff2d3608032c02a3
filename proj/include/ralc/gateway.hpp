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

#ifndef RALC_GATEWAY_HPP_
#define RALC_GATEWAY_HPP_

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ralc/beta.hpp"
#include "ralc/lexicon.hpp"
#include "ralc/metrics.hpp"
#include "ralc/templates.hpp"

namespace ralc {

// A single-user-message chat completion. `tags` carry structured context
// for in-process backends (the echo mock) and are never sent on the wire.
struct ChatRequest {
  std::string template_name;
  std::string prompt;
  std::map<std::string, std::string> tags;
};

enum class BackendRole { kGenerator, kEvaluator, kRewriter, kGrader, kClusterer };

struct BackendConfig {
  std::string name = "backend";  // identity reported in errors
  std::string endpoint;          // full chat-completions URL (HTTP backend)
  std::string model;
  std::string token_env;         // environment variable holding the bearer token
  double temperature = 1.0;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_in_flight = 4;
  int retries = 2;               // extra attempts after the first

  // Temperature 0 for grading and clustering, 1 for every other role.
  static BackendConfig for_role(BackendRole role, std::string name = "backend");
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;

  // One attempt. Transport failures raise GatewayError.
  virtual std::string complete(const ChatRequest& request) = 0;

  virtual const BackendConfig& config() const noexcept = 0;
  const std::string& name() const noexcept { return config().name; }
};

using BackendPtr = std::shared_ptr<ChatBackend>;

// Deterministic scripted backend. Replies come from a per-template queue
// (the last reply repeats once the queue is drained), else from the
// responder, else the call fails.
class MockBackend : public ChatBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit MockBackend(BackendConfig config = {}, Responder responder = nullptr);

  void script(const std::string& template_name, std::vector<std::string> replies);
  void set_responder(Responder responder);

  std::string complete(const ChatRequest& request) override;
  const BackendConfig& config() const noexcept override { return config_; }

  std::vector<ChatRequest> requests() const;
  std::size_t call_count() const;

 private:
  BackendConfig config_;
  Responder responder_;
  std::map<std::string, std::deque<std::string>> scripts_;
  std::vector<ChatRequest> log_;
  mutable std::mutex mu_;
};

// Closed-loop mock. Rewriters prefix the response with a
// "[[confidence=<target mean>]]" marker; evaluators return the marked mean
// times 100 (default_score when unmarked); the grader compares gold and
// predicted text; clustering groups marker-stripped, case-folded text;
// QA templates return the "answer" tag.
std::shared_ptr<MockBackend> make_echo_backend(BackendConfig config = {}, double default_score = 50.0);

// OpenAI-compatible chat-completions client over HTTP(S).
BackendPtr make_http_backend(BackendConfig config);

// Marker helpers shared with the echo mock and synthetic data.
std::string confidence_marker(double mean);
std::optional<double> extract_confidence_marker(const std::string& text);
std::string strip_confidence_marker(const std::string& text);

// ---- Parsers (pure) ----

enum class Grade { kCorrect, kIncorrect, kNotAttempted };
std::string_view to_string(Grade g);
std::optional<CorrectnessLabel> grade_to_label(Grade g);

// First decimal number in the reply, required to lie in [0, 100].
double parse_score(const std::string& reply);
// Exactly "A", "B" or "C" after trimming whitespace.
Grade parse_grade(const std::string& reply);
// {"semantic_ids": [...]} of length n, relabelled densely by first appearance.
std::vector<int> parse_semantic_ids(const std::string& reply, std::size_t n);
// Strips a "New response:" label and wrapping quotes; rejects empty text.
std::string parse_rewrite(const std::string& reply);
// Python-style list of strings, e.g. ["maybe", 'surely'].
std::vector<std::string> parse_expression_list(const std::string& reply);

// ---- Operations ----

// Issues the request and parses the reply, retrying on transport or parse
// failures up to config().retries extra times. Exhaustion raises
// GatewayError naming the backend.
template <typename Parse>
auto request_with_retry(ChatBackend& backend, const ChatRequest& request, Parse&& parse)
    -> decltype(parse(std::string{}));

// Scores from every (backend, pass) in backend-major order, scaled to [0, 1].
SampleSet evaluate_linguistic_confidence(const std::string& response_text,
                                         std::span<const BackendPtr> ensemble, int passes = 3,
                                         const std::string& human_annotated_cues = "");

Grade grade_response(const std::string& question, const std::string& gold,
                     const std::optional<std::string>& predicted, ChatBackend& backend);

std::vector<int> cluster_responses(const std::string& question, std::span<const std::string> responses,
                                   ChatBackend& backend);

std::string rewrite_with_hedges(const std::string& response, const RetrievalResult& retrieved,
                                ChatBackend& backend);

std::string rewrite_with_beta(const std::string& response, const BetaConfidence& target,
                              ChatBackend& backend);

// p_entail + 0.5 * p_neutral.
double content_preservation_score(double p_entail, double p_neutral);

// ---- implementation of the retry template ----

namespace detail {
[[noreturn]] void throw_exhausted(const ChatBackend& backend, const std::string& template_name,
                                  int attempts, const std::string& last_error);
}  // namespace detail

template <typename Parse>
auto request_with_retry(ChatBackend& backend, const ChatRequest& request, Parse&& parse)
    -> decltype(parse(std::string{})) {
  const int attempts = 1 + std::max(0, backend.config().retries);
  std::string last_error;
  for (int i = 0; i < attempts; ++i) {
    try {
      return parse(backend.complete(request));
    } catch (const std::runtime_error& e) {  // ParseError and GatewayError
      last_error = e.what();
    } catch (const std::invalid_argument& e) {
      last_error = e.what();
    }
  }
  detail::throw_exhausted(backend, request.template_name, attempts, last_error);
}

}  // namespace ralc

#endif  // RALC_GATEWAY_HPP_
