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

#include "ralc/signals.hpp"

#include <cmath>

#include "ralc/detail/summation.hpp"
#include "ralc/error.hpp"

namespace ralc {

double length_normalized_token_prob(std::span<const double> logprobs) {
  if (logprobs.empty()) throw InvalidArgument("token log-probabilities are empty");
  for (double lp : logprobs) {
    if (!(lp <= 0.0)) throw InvalidArgument("token log-probabilities must be <= 0");
  }
  const double mean = detail::compensated_sum(logprobs) / static_cast<double>(logprobs.size());
  return std::exp(mean);
}

BetaConfidence token_prob_distribution(std::span<const SampledResponse> cluster_responses) {
  if (cluster_responses.empty()) throw InvalidArgument("cluster has no responses");
  std::vector<double> scores;
  scores.reserve(cluster_responses.size());
  for (const auto& r : cluster_responses) scores.push_back(length_normalized_token_prob(r.token_logprobs));
  return fit_beta_moments(SampleSet(std::move(scores)));
}

BetaConfidence semantic_uncertainty_distribution(const ClusterSummary& summary) {
  if (summary.n_total == 0) throw InvalidArgument("cluster summary has no responses");
  const std::size_t top = summary.majority_size();
  if (top > summary.n_total) throw InvalidArgument("majority cluster larger than total");
  return BetaConfidence(static_cast<double>(top), static_cast<double>(summary.n_total - top));
}

BetaConfidence linguistic_confidence_distribution(const SampleSet& scores) {
  return fit_beta_moments(scores);
}

SampleSet scale_evaluator_scores(std::span<const double> raw_scores) {
  if (raw_scores.empty()) throw InvalidArgument("no evaluator scores");
  std::vector<double> out;
  out.reserve(raw_scores.size());
  for (double s : raw_scores) {
    if (!(s >= 0.0 && s <= 100.0)) throw InvalidArgument("evaluator score outside [0, 100]");
    out.push_back(s / 100.0);
  }
  return SampleSet(std::move(out));
}

MajorityResult majority_cluster(std::span<const SampledResponse> responses) {
  if (responses.empty()) throw InvalidArgument("no responses to cluster");
  MajorityResult res;
  res.summary.n_total = responses.size();
  for (const auto& r : responses) {
    if (r.cluster_id < 0) throw InvalidArgument("cluster id must be non-negative");
    ++res.summary.cluster_sizes[r.cluster_id];
  }
  // std::map iterates ids ascending, so strict > keeps the lowest id on ties.
  std::size_t best = 0;
  for (const auto& [id, size] : res.summary.cluster_sizes) {
    if (size > best) best = size, res.summary.majority_id = id;
  }
  bool first = true;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (responses[i].cluster_id != res.summary.majority_id) continue;
    if (first) res.representative_index = i, first = false;
    res.members.push_back(responses[i]);
  }
  return res;
}

}  // namespace ralc
