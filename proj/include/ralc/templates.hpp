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

#ifndef RALC_TEMPLATES_HPP_
#define RALC_TEMPLATES_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ralc {

enum class TemplateName {
  kDirectQaMmlu,
  kHedgedQaMmlu,
  kDirectQaSquad,
  kHedgedQaSquad,
  kDirectQaTruthfulqa,
  kHedgedQaTruthfulqa,
  kEvaluator,
  kGrader,
  kClustering,
  kRalcRewrite,
  kBetaRewrite,
  kHedgeSourcing,
  kNonverifiableRewrite,
};

inline constexpr std::size_t kTemplateCount = 13;

// snake_case names, e.g. "hedged_qa_squad".
std::string_view to_string(TemplateName name);
TemplateName template_from_string(std::string_view name);
std::span<const TemplateName> all_templates();

using Slots = std::map<std::string, std::string>;

// Body with {slot} placeholders exactly as stored.
std::string_view template_body(TemplateName name);

// Slots the template requires, plus optional ones that default to "".
std::vector<std::string> required_slots(TemplateName name);
std::vector<std::string> optional_slots(TemplateName name);

// Single-pass substitution; slot values are never re-scanned. Throws
// InvalidArgument on a missing required slot or an unknown slot name.
std::string render_template(TemplateName name, const Slots& slots);
std::string render_template(std::string_view name, const Slots& slots);

// "A. first\n\nB. second" for the multiple-choice templates.
std::string format_choices(std::span<const std::string> choices);

// "0: 'text'" lines for the clustering template.
std::string format_candidate_responses(std::span<const std::string> responses);

// "probably" (Beta(alpha=7.20, beta=2.80)); ... for the rewrite template.
struct HedgeProfile {
  std::string expression;
  double alpha;
  double beta;
};
std::string format_hedges(std::span<const HedgeProfile> hedges);

// Two-decimal rendering used by the Beta-guided rewrite prompt.
std::string format_two_decimals(double v);

// The twelve statements rewritten during lexicon construction.
std::span<const std::string_view> nonverifiable_sentences();

}  // namespace ralc

#endif  // RALC_TEMPLATES_HPP_
