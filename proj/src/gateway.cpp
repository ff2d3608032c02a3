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

#include "ralc/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>

#include "json.hpp"
#include "ralc/error.hpp"

namespace ralc {

using Json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::string& tag(const ChatRequest& r, const std::string& key) {
  const auto it = r.tags.find(key);
  if (it == r.tags.end()) throw GatewayError("echo", "request lacks tag '" + key + "'");
  return it->second;
}

std::string tag_or(const ChatRequest& r, const std::string& key, std::string fallback) {
  const auto it = r.tags.find(key);
  return it == r.tags.end() ? fallback : it->second;
}

constexpr std::string_view kMarkerOpen = "[[confidence=";
constexpr std::string_view kMarkerClose = "]]";

std::string normalise_for_clustering(const std::string& text) {
  std::string s = lower(trim(strip_confidence_marker(text)));
  while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
  return trim(s);
}

std::string echo_reply(const ChatRequest& req, double default_score) {
  const auto& t = req.template_name;
  if (t == "ralc_rewrite" || t == "beta_rewrite") {
    const double mean = std::stod(tag(req, "target_mean"));
    return confidence_marker(mean) + " " + trim(strip_confidence_marker(tag(req, "response")));
  }
  if (t == "evaluator") {
    const auto m = extract_confidence_marker(tag_or(req, "sentence", req.prompt));
    // Fixed notation: the score parser reads plain decimals only.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17f", m ? *m * 100.0 : default_score);
    return buf;
  }
  if (t == "grader") {
    const auto predicted = lower(trim(strip_confidence_marker(tag_or(req, "predicted", ""))));
    if (predicted.empty()) return "C";
    const auto gold = lower(trim(tag(req, "gold")));
    return !gold.empty() && predicted.find(gold) != std::string::npos ? "A" : "B";
  }
  if (t == "clustering") {
    const Json responses = Json::parse(tag(req, "responses_json"));
    std::vector<std::string> seen;
    Json ids = Json::array();
    for (const auto& r : responses) {
      const auto key = normalise_for_clustering(r.get<std::string>());
      auto it = std::find(seen.begin(), seen.end(), key);
      if (it == seen.end()) it = seen.insert(seen.end(), key);
      ids.push_back(it - seen.begin());
    }
    return Json{{"semantic_ids", ids}}.dump();
  }
  if (t == "hedge_sourcing") {
    return R"(["I have no idea", "my random guess is", "possibly", "probably", "almost certainly", "without a doubt"])";
  }
  if (t == "nonverifiable_rewrite") {
    return tag(req, "word") + ", " + tag(req, "selected_sentence");
  }
  if (t.rfind("direct_qa_", 0) == 0 || t.rfind("hedged_qa_", 0) == 0) {
    return tag(req, "answer");
  }
  throw GatewayError("echo", "no echo rule for template " + t);
}

}  // namespace

BackendConfig BackendConfig::for_role(BackendRole role, std::string name) {
  BackendConfig c;
  c.name = std::move(name);
  c.temperature = (role == BackendRole::kGrader || role == BackendRole::kClusterer) ? 0.0 : 1.0;
  return c;
}

// ---- MockBackend ----

MockBackend::MockBackend(BackendConfig config, Responder responder)
    : config_(std::move(config)), responder_(std::move(responder)) {}

void MockBackend::script(const std::string& template_name, std::vector<std::string> replies) {
  std::lock_guard lock(mu_);
  scripts_[template_name] = std::deque<std::string>(replies.begin(), replies.end());
}

void MockBackend::set_responder(Responder responder) {
  std::lock_guard lock(mu_);
  responder_ = std::move(responder);
}

std::string MockBackend::complete(const ChatRequest& request) {
  Responder responder;
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    if (auto it = scripts_.find(request.template_name); it != scripts_.end() && !it->second.empty()) {
      std::string reply = it->second.front();
      if (it->second.size() > 1) it->second.pop_front();
      return reply;
    }
    responder = responder_;
  }
  if (!responder) throw GatewayError(config_.name, "no scripted reply for " + request.template_name);
  try {
    return responder(request);
  } catch (const GatewayError& e) {
    throw GatewayError(config_.name, e.what());
  }
}

std::vector<ChatRequest> MockBackend::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::shared_ptr<MockBackend> make_echo_backend(BackendConfig config, double default_score) {
  if (config.name == "backend") config.name = "echo";
  return std::make_shared<MockBackend>(
      std::move(config), [default_score](const ChatRequest& r) { return echo_reply(r, default_score); });
}

// ---- Markers ----

std::string confidence_marker(double mean) {
  return std::string(kMarkerOpen) + full_precision(mean) + std::string(kMarkerClose);
}

std::optional<double> extract_confidence_marker(const std::string& text) {
  const auto b = text.find(kMarkerOpen);
  if (b == std::string::npos) return std::nullopt;
  const auto start = b + kMarkerOpen.size();
  const auto e = text.find(kMarkerClose, start);
  if (e == std::string::npos) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::string body = text.substr(start, e - start);
    const double v = std::stod(body, &used);
    if (used != body.size() || !(v >= 0.0 && v <= 1.0)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string strip_confidence_marker(const std::string& text) {
  const auto b = text.find(kMarkerOpen);
  if (b == std::string::npos) return text;
  const auto e = text.find(kMarkerClose, b);
  if (e == std::string::npos) return text;
  return text.substr(0, b) + text.substr(e + kMarkerClose.size());
}

// ---- Parsers ----

std::string_view to_string(Grade g) {
  switch (g) {
    case Grade::kCorrect: return "CORRECT";
    case Grade::kIncorrect: return "INCORRECT";
    case Grade::kNotAttempted: return "NOT_ATTEMPTED";
  }
  return "?";
}

std::optional<CorrectnessLabel> grade_to_label(Grade g) {
  switch (g) {
    case Grade::kCorrect: return CorrectnessLabel::kCorrect;
    case Grade::kIncorrect: return CorrectnessLabel::kIncorrect;
    case Grade::kNotAttempted: return std::nullopt;
  }
  return std::nullopt;
}

double parse_score(const std::string& reply) {
  static const std::regex kNumber(R"((-?)(\d+(?:\.\d*)?|\.\d+))");
  std::smatch m;
  if (!std::regex_search(reply, m, kNumber)) throw ParseError("no number in evaluator reply");
  const double v = std::stod(m[2].str());
  if (m[1].length() > 0 && v != 0.0) throw ParseError("evaluator score is negative");
  if (!(v >= 0.0 && v <= 100.0)) throw ParseError("evaluator score outside [0, 100]");
  return v;
}

Grade parse_grade(const std::string& reply) {
  const auto t = trim(reply);
  if (t == "A") return Grade::kCorrect;
  if (t == "B") return Grade::kIncorrect;
  if (t == "C") return Grade::kNotAttempted;
  throw ParseError("grader reply is not one of A, B, C");
}

std::vector<int> parse_semantic_ids(const std::string& reply, std::size_t n) {
  std::string body = trim(reply);
  if (body.rfind("```", 0) == 0) {  // fenced code block
    const auto nl = body.find('\n');
    const auto close = body.rfind("```");
    if (nl != std::string::npos && close > nl) body = trim(body.substr(nl + 1, close - nl - 1));
  }
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception&) {
    const auto b = body.find('{');
    const auto e = body.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) {
      throw ParseError("clustering reply is not JSON");
    }
    try {
      j = Json::parse(body.substr(b, e - b + 1));
    } catch (const Json::exception&) {
      throw ParseError("clustering reply is not JSON");
    }
  }
  if (!j.is_object() || !j.contains("semantic_ids") || !j.at("semantic_ids").is_array()) {
    throw ParseError("clustering reply lacks a 'semantic_ids' array");
  }
  const auto& arr = j.at("semantic_ids");
  if (arr.size() != n) {
    throw ParseError("clustering reply has " + std::to_string(arr.size()) + " ids for " + std::to_string(n) +
                     " responses");
  }
  std::vector<long long> raw;
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw ParseError("semantic id is not an integer");
    raw.push_back(v.get<long long>());
  }
  std::vector<long long> order;
  std::vector<int> out;
  for (long long id : raw) {
    auto it = std::find(order.begin(), order.end(), id);
    if (it == order.end()) it = order.insert(order.end(), id);
    out.push_back(static_cast<int>(it - order.begin()));
  }
  return out;
}

std::string parse_rewrite(const std::string& reply) {
  std::string t = trim(reply);
  static constexpr std::string_view kLabel = "new response:";
  if (lower(t.substr(0, kLabel.size())) == kLabel) t = trim(t.substr(kLabel.size()));
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (t.size() >= open.size() + close.size() && t.compare(0, open.size(), open) == 0 &&
        t.compare(t.size() - close.size(), close.size(), close) == 0) {
      t = trim(t.substr(open.size(), t.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  strip_pair("\"", "\"") || strip_pair("\xE2\x80\x9C", "\xE2\x80\x9D") || strip_pair("'", "'");
  if (t.empty()) throw ParseError("empty rewrite");
  return t;
}

std::vector<std::string> parse_expression_list(const std::string& reply) {
  const auto b = reply.find('[');
  const auto e = reply.rfind(']');
  if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError("no list in reply");
  std::vector<std::string> out;
  for (std::size_t i = b + 1; i < e; ++i) {
    const char q = reply[i];
    if (q != '"' && q != '\'') continue;
    std::string s;
    std::size_t j = i + 1;
    for (; j < e && reply[j] != q; ++j) {
      if (reply[j] == '\\' && j + 1 < e) ++j;
      s += reply[j];
    }
    if (j >= e) throw ParseError("unterminated string in list");
    s = trim(s);
    if (!s.empty() && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    i = j;
  }
  if (out.empty()) throw ParseError("list holds no expressions");
  return out;
}

// ---- Operations ----

namespace detail {
void throw_exhausted(const ChatBackend& backend, const std::string& template_name, int attempts,
                     const std::string& last_error) {
  throw GatewayError(backend.name(), template_name + " failed after " + std::to_string(attempts) +
                                         " attempt(s): " + last_error);
}
}  // namespace detail

SampleSet evaluate_linguistic_confidence(const std::string& response_text, std::span<const BackendPtr> ensemble,
                                         int passes, const std::string& human_annotated_cues) {
  if (ensemble.empty()) throw InvalidArgument("evaluator ensemble is empty");
  if (passes < 1) throw InvalidArgument("passes must be at least 1");
  ChatRequest req{"evaluator",
                  render_template(TemplateName::kEvaluator,
                                  {{"sentence", response_text}, {"human_annotated_cues", human_annotated_cues}}),
                  {{"sentence", response_text}}};
  std::vector<double> scores;
  scores.reserve(ensemble.size() * static_cast<std::size_t>(passes));
  for (const auto& backend : ensemble) {
    if (!backend) throw InvalidArgument("null evaluator backend");
    for (int p = 0; p < passes; ++p) {
      scores.push_back(request_with_retry(*backend, req, parse_score) / 100.0);
    }
  }
  return SampleSet(std::move(scores));
}

Grade grade_response(const std::string& question, const std::string& gold,
                     const std::optional<std::string>& predicted, ChatBackend& backend) {
  Slots slots{{"question", question}, {"correct_answer", gold}};
  if (predicted) slots["predicted_answer"] = *predicted;
  ChatRequest req{"grader", render_template(TemplateName::kGrader, slots),
                  {{"question", question}, {"gold", gold}, {"predicted", predicted.value_or("")}}};
  return request_with_retry(backend, req, parse_grade);
}

std::vector<int> cluster_responses(const std::string& question, std::span<const std::string> responses,
                                   ChatBackend& backend) {
  if (responses.empty()) throw InvalidArgument("no responses to cluster");
  ChatRequest req{"clustering",
                  render_template(TemplateName::kClustering,
                                  {{"question", question}, {"responses", format_candidate_responses(responses)}}),
                  {{"question", question}, {"responses_json", Json(std::vector<std::string>(responses.begin(), responses.end())).dump()}}};
  const std::size_t n = responses.size();
  return request_with_retry(backend, req, [n](const std::string& r) { return parse_semantic_ids(r, n); });
}

namespace {
void tag_target(ChatRequest& req, const BetaConfidence& target) {
  req.tags["target_mean"] = full_precision(target.mean());
  req.tags["target_alpha"] = full_precision(target.alpha());
  req.tags["target_beta"] = full_precision(target.beta());
}
}  // namespace

std::string rewrite_with_hedges(const std::string& response, const RetrievalResult& retrieved,
                                ChatBackend& backend) {
  if (retrieved.entries.empty()) throw InvalidArgument("no retrieved hedges to rewrite with");
  std::vector<HedgeProfile> hedges;
  for (const auto& r : retrieved.entries) {
    hedges.push_back({r.entry.expression, r.entry.profile.alpha(), r.entry.profile.beta()});
  }
  ChatRequest req{"ralc_rewrite",
                  render_template(TemplateName::kRalcRewrite, {{"response", response}, {"hedges", format_hedges(hedges)}}),
                  {{"response", response}, {"top_hedge", hedges.front().expression}}};
  tag_target(req, retrieved.target);
  return request_with_retry(backend, req, parse_rewrite);
}

std::string rewrite_with_beta(const std::string& response, const BetaConfidence& target, ChatBackend& backend) {
  ChatRequest req{"beta_rewrite",
                  render_template(TemplateName::kBetaRewrite, {{"response", response},
                                                               {"alpha", format_two_decimals(target.alpha())},
                                                               {"beta", format_two_decimals(target.beta())}}),
                  {{"response", response}}};
  tag_target(req, target);
  return request_with_retry(backend, req, parse_rewrite);
}

double content_preservation_score(double p_entail, double p_neutral) {
  if (!(p_entail >= 0.0 && p_neutral >= 0.0 && p_entail + p_neutral <= 1.0 + 1e-12)) {
    throw InvalidArgument("entailment probabilities must be non-negative and sum to at most 1");
  }
  return std::min(1.0, p_entail + 0.5 * p_neutral);
}

}  // namespace ralc
