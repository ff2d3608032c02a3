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

#ifndef RALC_SIGNALS_HPP_
#define RALC_SIGNALS_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ralc/beta.hpp"

namespace ralc {

// One self-consistency sample. token_logprobs may be empty when only the
// semantic or linguistic signal is used.
struct SampledResponse {
  std::string text;
  std::vector<double> token_logprobs;
  int cluster_id = 0;

  friend bool operator==(const SampledResponse&, const SampledResponse&) = default;
};

struct ClusterSummary {
  std::size_t n_total = 0;
  std::map<int, std::size_t> cluster_sizes;
  int majority_id = 0;

  std::size_t majority_size() const { return cluster_sizes.at(majority_id); }
};

// exp of the mean token log-probability.
double length_normalized_token_prob(std::span<const double> logprobs);

// Moments fit over the per-response length-normalised probabilities.
BetaConfidence token_prob_distribution(std::span<const SampledResponse> cluster_responses);

// Beta(|majority|, N - |majority|), clipped.
BetaConfidence semantic_uncertainty_distribution(const ClusterSummary& summary);

// Moments fit over evaluator scores already scaled to [0, 1].
BetaConfidence linguistic_confidence_distribution(const SampleSet& scores);

// Scales raw evaluator scores from [0, 100] to [0, 1]. Out-of-range or
// non-finite scores are rejected.
SampleSet scale_evaluator_scores(std::span<const double> raw_scores);

struct MajorityResult {
  ClusterSummary summary;
  std::size_t representative_index = 0;  // position in the input
  std::vector<SampledResponse> members;   // majority cluster, input order
};

// Largest cluster (ties to the lowest id); representative is its first
// member in input order.
MajorityResult majority_cluster(std::span<const SampledResponse> responses);

}  // namespace ralc

#endif  // RALC_SIGNALS_HPP_
