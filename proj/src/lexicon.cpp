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

#include "ralc/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "ralc/error.hpp"
#include "ralc/serialization.hpp"

namespace ralc {

Lexicon::Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.expression.empty()) throw InvalidArgument("lexicon expression is empty");
    if (!seen.insert(e.expression).second) {
      throw InvalidArgument("duplicate lexicon expression: " + e.expression);
    }
  }
}

Lexicon build_lexicon(const std::vector<ScorePool>& score_pools, const MleOptions& mle) {
  std::vector<LexiconEntry> entries;
  entries.reserve(score_pools.size());
  for (const auto& [expression, pool] : score_pools) {
    entries.push_back({expression, fit_beta_mle(pool, mle).distribution});
  }
  return Lexicon(std::move(entries));
}

RetrievalResult retrieve(const Lexicon& lexicon, const BetaConfidence& target,
                         const RetrievalOptions& options) {
  if (lexicon.empty()) throw InvalidArgument("cannot retrieve from an empty lexicon");
  if (options.k == 0) throw InvalidArgument("k must be at least 1");
  if (options.shortlist_size == 0) throw InvalidArgument("shortlist size must be at least 1");
  if (options.w1_samples == 0) throw InvalidArgument("w1_samples must be at least 1");

  const auto& entries = lexicon.entries();
  const double mu = target.mean();
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(entries[a].profile.mean() - mu) < std::abs(entries[b].profile.mean() - mu);
  });
  order.resize(std::min(order.size(), options.shortlist_size));

  const auto target_draws = sorted_sample_beta(target, options.w1_samples, options.seed);
  std::vector<RetrievedEntry> ranked;
  ranked.reserve(order.size());
  for (std::size_t i : order) {
    const auto draws = sorted_sample_beta(entries[i].profile, options.w1_samples, options.seed);
    ranked.push_back({entries[i], w1_sorted(draws, target_draws)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.w1_distance < b.w1_distance; });
  if (ranked.size() > options.k) ranked.erase(ranked.begin() + static_cast<std::ptrdiff_t>(options.k), ranked.end());
  return {std::move(ranked), target};
}

std::string lexicon_to_jsonl(const Lexicon& lexicon) {
  std::string out;
  for (const auto& e : lexicon.entries()) {
    Json j{{"expression", e.expression}, {"alpha", e.profile.alpha()}, {"beta", e.profile.beta()}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

Lexicon lexicon_from_jsonl(const std::string& text) {
  std::vector<LexiconEntry> entries;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "lexicon line " + std::to_string(line_no) + ": ";
    try {
      const Json j = Json::parse(line);
      if (!j.is_object() || !j.contains("expression") || !j.at("expression").is_string()) {
        throw ParseError("missing string field 'expression'");
      }
      auto expression = j.at("expression").get<std::string>();
      if (expression.empty()) throw ParseError("empty expression");
      if (!seen.insert(expression).second) throw ParseError("duplicate expression '" + expression + "'");
      entries.push_back({std::move(expression), beta_from_json(j)});
    } catch (const Json::exception& e) {
      throw ParseError(where + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  return Lexicon(std::move(entries));
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  write_text_file(path, lexicon_to_jsonl(lexicon));
}

Lexicon load_lexicon(const std::filesystem::path& path) { return lexicon_from_jsonl(read_text_file(path)); }

}  // namespace ralc
