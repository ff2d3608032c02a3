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

#ifndef RALC_DATASET_HPP_
#define RALC_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ralc/gateway.hpp"
#include "ralc/metrics.hpp"
#include "ralc/serialization.hpp"
#include "ralc/signals.hpp"

namespace ralc {

// One benchmark question with its pre-sampled responses.
struct DatasetRecord {
  std::string id;
  std::string question;
  std::optional<std::string> context;
  std::optional<std::string> title;
  std::vector<std::string> choices;
  std::string gold_answer;
  std::vector<SampledResponse> responses;
  // True when every response carried a cluster_id on input.
  bool clustered = false;
  std::optional<CorrectnessLabel> label;
  std::optional<Grade> grade;
};

// JSONL, one record per line:
// {"id", "question", "context"?, "title"?, "choices"?, "gold_answer",
//  "responses": [{"text", "token_logprobs"?, "cluster_id"?}],
//  "label"? (0/1), "grade"? ("CORRECT" | "INCORRECT" | "NOT_ATTEMPTED")}
// Errors name the line and, when known, the record id.
std::vector<DatasetRecord> parse_dataset(const std::string& jsonl);
std::vector<DatasetRecord> ingest_dataset(const std::filesystem::path& path);

Json record_to_json(const DatasetRecord& record);
std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records);

// Synthetic overconfident population for demos and hermetic tests. Each
// record's true confidence mu ~ U(mean_low, mean_high) and its label is
// Bernoulli(clip(mu - bias)). Responses carry cluster ids, token
// log-probabilities centred on log(mu), and a confidence marker holding mu
// so the echo evaluator reads it back.
struct SyntheticOptions {
  std::size_t n_records = 200;
  std::size_t n_responses = 20;
  double mean_low = 0.5;
  double mean_high = 0.95;
  double bias = 0.2;
  std::uint64_t seed = 0;
};

std::vector<DatasetRecord> make_synthetic_dataset(const SyntheticOptions& options);

}  // namespace ralc

#endif  // RALC_DATASET_HPP_
