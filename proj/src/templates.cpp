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

#include "ralc/templates.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <set>

#include "ralc/error.hpp"

namespace ralc {

namespace {

// Bodies follow the published prompt wording. The multiple-choice loop is
// pre-rendered into {choices}; the grader's None check into an optional
// {predicted_answer}.

constexpr std::string_view kDirectQaMmlu =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.

{question}

{choices}

Answer: [Return the answer letter only])RALC";

constexpr std::string_view kHedgedQaMmlu =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.
If you are uncertain about your answer to the question,
convey this uncertainty linguistically by precisely hedging this answer. Please include the option letter in your answer.

Question: {question}

{choices}

Answer:)RALC";

constexpr std::string_view kDirectQaSquad =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.

Title: {title}

Background: {context}

Question: {question}

Answer:)RALC";

constexpr std::string_view kHedgedQaSquad =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.
If you are uncertain about your answer to the question,
convey this uncertainty linguistically by precisely hedging this answer.

Title: {title}

Background: {context}

Question: {question}

Answer:)RALC";

constexpr std::string_view kDirectQaTruthfulqa =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.

Question: {question}

Answer:)RALC";

constexpr std::string_view kHedgedQaTruthfulqa =
    R"RALC(Answer the following question using a succinct (at most one sentence) and full answer.
If you are uncertain about your answer to the question,
convey this uncertainty linguistically by precisely hedging this answer.

Question: {question}

Answer:)RALC";

constexpr std::string_view kEvaluator =
    R"RALC(Please provide only a confidence score between 0 and 100, based solely on the degree of confidence expressed in the tone and linguistic cues of the following sentence, without using any external or prior knowledge to assess the knowledge conveyed by the sentence. 
Please pay attention to the hedging language used and the overall assertiveness of the statement. 
If the sentence abstains from answering by pointing out the insufficiency of information with a firm tone, the score should be towards 100. 
If the sentence contains random guesses or abstention, the score should be towards 0. If the sentence is stated with strong certainty or no hedging, the score should be towards 100. 
If the sentence does not contain any hedging language or is a succinct, decisive short answer, the score should be towards 100, too.

To align with human perception, here are some human-annotated linguistic cues with perceived confidence profiles (mean and standard deviation) for your reference: 
{human_annotated_cues}

Here is the sentence:
{sentence}

Confidence Score: [Return only a number between 0 and 100 without any additional text or explanation])RALC";

constexpr std::string_view kGrader =
    R"RALC(If the predicted answer matches, implies or covers the correct answer, the grade is CORRECT.

If the predicted answer does not match, imply or cover the correct answer, the grade is INCORRECT. Do NOT grade it as INCORRECT if the predicted answer abstains from answering (e.g. "I don't know the answer..." or "I have no idea...").

If the predicted answer is empty, none or abstention (e.g. "I don't know the answer..." or "I have no idea..."), grade the predicted answer as NOT_ATTEMPTED instead of CORRECT or INCORRECT. If the predicted answer makes an attempt (even random guesses), do not grade it as NOT_ATTEMPTED.

Ignore any explanation or linguistic cues present in the predicted answer. Don't apologise or correct yourself if there was a mistake; we are just trying to grade the answer. 

Question: {question}

Correct answer: {correct_answer}

Predicted answer: {predicted_answer}


Grade the predicted answer of this new question as one of:

A: CORRECT

B: INCORRECT

C: NOT_ATTEMPTED


Just return one of the letters "A", "B", or "C", with no text around it.)RALC";

constexpr std::string_view kClustering =
    R"RALC(You are a strict JSON generator. Group semantically equivalent candidate responses to the same question. Ignore any linguistic markers of uncertainty or hedging and focus solely on the core meaning of the responses. 

Return a JSON object with a single key "semantic_ids", a list of integers aligned with the response order. Responses that are semantically equivalent (bidirectional entailment) must share the same integer id. Use 0-based ids. Semantic ids represent the semantic cluster assignment for each response. Return ONLY the JSON object, no extra text.

For instance, given the question and candidate responses:

Question: What is the capital of France?

Candidate responses:
    0: 'I guess Paris is the capital of France.'
    1: 'Paris is the capital city of France.'
    2: 'The capital of France is Berlin.'

The correct JSON output would be:

{"semantic_ids": [0, 0, 1]}

Now, please group the following candidate responses to the given question and return the JSON object:

Question: {question}

Candidate responses: {responses}

{"semantic_ids": [...]})RALC";

constexpr std::string_view kRalcRewrite =
    R"RALC(Given an original response and a list of target hedging words with their confidence profiles (Beta Distributions), rewrite the response to appropriately reflect the confidence level indicated by the set of target hedging words. 
You must preserve the original meaning of the response, as we are only adjusting the tone to match the confidence level suggested by the hedging words. Ensure the new response sounds natural and fluent. 

Original response: My answer to the question is: "{response}"

Target hedging words with confidence profiles: {hedges}

Please return only the rewritten sentence without any explanation.

New response: )RALC";

constexpr std::string_view kBetaRewrite =
    R"RALC(Given an original response and a Beta distribution, rewrite the response to appropriately reflect the confidence level indicated by the given Beta distribution by using hedging language. 
You must preserve the original meaning of the response, as we are only adjusting the tone to match the confidence level suggested by the hedging words. Ensure the new response sounds natural and fluent. 

Original response: My answer to the question is: "{response}"

Target Beta distribution: Beta(alpha={alpha}, beta={beta})

Please return only the rewritten sentence without any explanation.

New response: )RALC";

constexpr std::string_view kHedgeSourcing =
    R"RALC(Generate a Python list of words or expressions that humans use to convey the level of confidence, certainty, or hedging in their statements (without a subject, only the linguistic cues). These words should include common hedging phrases, adverbs, and qualifiers that indicate varying degrees of certainty or uncertainty, from extremely low confidence (like I do not know, my random guess is, etc) to high confidence (certain, sure, definitely). 

The list should be comprehensive and cover a wide range of expressions used in everyday language as well as in academic and professional contexts.)RALC";

constexpr std::string_view kNonverifiableRewrite =
    R"RALC(Given a linguistic cue: "{word}", rewrite one of the following non-verifiable statements to naturally include this cue to convey the intended level of confidence, certainty, or hedging.
Please do not use other hedging words, hedging phrases or linguistic cues in the sentence other than the specified linguistic cue.

Example sentences to rewrite:
{selected_sentence}

Do not use other hedging words or linguistic cues in the sentence. Do not combine linguistic cues. Do not include labels like "Example:" or "Sentence:". Just provide the statement.)RALC";

struct TemplateInfo {
  TemplateName name;
  std::string_view id;
  std::string_view body;
  std::vector<std::string> optional;
};

const std::array<TemplateInfo, kTemplateCount>& registry() {
  static const std::array<TemplateInfo, kTemplateCount> r{{
      {TemplateName::kDirectQaMmlu, "direct_qa_mmlu", kDirectQaMmlu, {}},
      {TemplateName::kHedgedQaMmlu, "hedged_qa_mmlu", kHedgedQaMmlu, {}},
      {TemplateName::kDirectQaSquad, "direct_qa_squad", kDirectQaSquad, {"title"}},
      {TemplateName::kHedgedQaSquad, "hedged_qa_squad", kHedgedQaSquad, {"title"}},
      {TemplateName::kDirectQaTruthfulqa, "direct_qa_truthfulqa", kDirectQaTruthfulqa, {}},
      {TemplateName::kHedgedQaTruthfulqa, "hedged_qa_truthfulqa", kHedgedQaTruthfulqa, {}},
      {TemplateName::kEvaluator, "evaluator", kEvaluator, {"human_annotated_cues"}},
      {TemplateName::kGrader, "grader", kGrader, {"predicted_answer"}},
      {TemplateName::kClustering, "clustering", kClustering, {}},
      {TemplateName::kRalcRewrite, "ralc_rewrite", kRalcRewrite, {}},
      {TemplateName::kBetaRewrite, "beta_rewrite", kBetaRewrite, {}},
      {TemplateName::kHedgeSourcing, "hedge_sourcing", kHedgeSourcing, {}},
      {TemplateName::kNonverifiableRewrite, "nonverifiable_rewrite", kNonverifiableRewrite, {}},
  }};
  return r;
}

const TemplateInfo& info(TemplateName name) { return registry().at(static_cast<std::size_t>(name)); }

bool is_slot_char(char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; }

// Placeholder at body[i] ('{'): returns the slot name length, or 0 if the
// brace is literal text (JSON examples in the clustering prompt).
std::size_t slot_length(std::string_view body, std::size_t i) {
  std::size_t j = i + 1;
  while (j < body.size() && is_slot_char(body[j])) ++j;
  if (j == i + 1 || j >= body.size() || body[j] != '}') return 0;
  return j - i - 1;
}

std::vector<std::string> placeholders(std::string_view body) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '{') continue;
    if (const auto n = slot_length(body, i); n > 0) {
      std::string s(body.substr(i + 1, n));
      if (seen.insert(s).second) out.push_back(std::move(s));
      i += n + 1;
    }
  }
  return out;
}

constexpr std::array<std::string_view, 12> kSentences{
    "There is a correlation between X and Y.",
    "It rains tomorrow.",
    "The experiment shows a significant effect.",
    "The new policy improves the economy.",
    "The medication is effective in treating the disease.",
    "The new product is successful in the market.",
    "The neighbour is home.",
    "The movie is good.",
    "The restaurant serves delicious food.",
    "The city is the oldest in the country.",
    "The book is informative.",
    "The report is not accurate.",
};

}  // namespace

std::string_view to_string(TemplateName name) { return info(name).id; }

TemplateName template_from_string(std::string_view name) {
  for (const auto& t : registry()) {
    if (t.id == name) return t.name;
  }
  throw InvalidArgument("unknown template: " + std::string(name));
}

std::span<const TemplateName> all_templates() {
  static const auto names = [] {
    std::array<TemplateName, kTemplateCount> a{};
    for (std::size_t i = 0; i < kTemplateCount; ++i) a[i] = registry()[i].name;
    return a;
  }();
  return names;
}

std::string_view template_body(TemplateName name) { return info(name).body; }

std::vector<std::string> optional_slots(TemplateName name) { return info(name).optional; }

std::vector<std::string> required_slots(TemplateName name) {
  const auto& opt = info(name).optional;
  std::vector<std::string> out;
  for (auto& s : placeholders(info(name).body)) {
    if (std::find(opt.begin(), opt.end(), s) == opt.end()) out.push_back(std::move(s));
  }
  return out;
}

std::string render_template(TemplateName name, const Slots& slots) {
  const auto& t = info(name);
  const auto names = placeholders(t.body);
  for (const auto& [key, value] : slots) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw InvalidArgument("template " + std::string(t.id) + " has no slot '" + key + "'");
    }
  }
  std::string out;
  out.reserve(t.body.size() + 256);
  for (std::size_t i = 0; i < t.body.size(); ++i) {
    const auto n = t.body[i] == '{' ? slot_length(t.body, i) : 0;
    if (n == 0) {
      out += t.body[i];
      continue;
    }
    const std::string key(t.body.substr(i + 1, n));
    if (const auto it = slots.find(key); it != slots.end()) {
      out += it->second;
    } else if (std::find(t.optional.begin(), t.optional.end(), key) == t.optional.end()) {
      throw InvalidArgument("template " + std::string(t.id) + " is missing slot '" + key + "'");
    }
    i += n + 1;
  }
  return out;
}

std::string render_template(std::string_view name, const Slots& slots) {
  return render_template(template_from_string(name), slots);
}

std::string format_choices(std::span<const std::string> choices) {
  static constexpr std::string_view kLetters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
  if (choices.size() > kLetters.size()) throw InvalidArgument("at most 26 choices are supported");
  std::string out;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += kLetters[i];
    out += ". ";
    out += choices[i];
  }
  return out;
}

std::string format_candidate_responses(std::span<const std::string> responses) {
  std::string out;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    out += "\n    " + std::to_string(i) + ": '" + responses[i] + "'";
  }
  return out;
}

std::string format_two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format_hedges(std::span<const HedgeProfile> hedges) {
  std::string out;
  for (std::size_t i = 0; i < hedges.size(); ++i) {
    if (i > 0) out += "; ";
    out += "\"" + hedges[i].expression + "\" (Beta(alpha=" + format_two_decimals(hedges[i].alpha) +
           ", beta=" + format_two_decimals(hedges[i].beta) + "))";
  }
  return out;
}

std::span<const std::string_view> nonverifiable_sentences() { return kSentences; }

}  // namespace ralc
