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

#ifndef RALC_LEXICON_HPP_
#define RALC_LEXICON_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ralc/beta.hpp"

namespace ralc {

struct LexiconEntry {
  std::string expression;
  BetaConfidence profile;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

// Ordered hedge-expression lexicon with unique, non-empty expressions.
// Immutable once constructed.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const Lexicon&, const Lexicon&) = default;

 private:
  std::vector<LexiconEntry> entries_;
};

struct RetrievedEntry {
  LexiconEntry entry;
  double w1_distance = 0.0;
};

struct RetrievalResult {
  std::vector<RetrievedEntry> entries;  // ascending by w1_distance
  BetaConfidence target{1.0, 1.0};
};

struct RetrievalOptions {
  std::size_t shortlist_size = 30;
  std::size_t k = 5;
  std::size_t w1_samples = kDefaultW1Samples;
  std::uint64_t seed = 0;
};

using ScorePool = std::pair<std::string, SampleSet>;

// One MLE-fitted entry per pool, in input order.
Lexicon build_lexicon(const std::vector<ScorePool>& score_pools, const MleOptions& mle = {});

// Stage 1 keeps the shortlist_size entries closest in mean (ties by lexicon
// order). Stage 2 ranks them by Monte-Carlo W1 with one shared seed.
RetrievalResult retrieve(const Lexicon& lexicon, const BetaConfidence& target,
                         const RetrievalOptions& options = {});

// JSONL, one {"expression", "alpha", "beta"} object per line.
std::string lexicon_to_jsonl(const Lexicon& lexicon);
Lexicon lexicon_from_jsonl(const std::string& text);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
Lexicon load_lexicon(const std::filesystem::path& path);

}  // namespace ralc

#endif  // RALC_LEXICON_HPP_
