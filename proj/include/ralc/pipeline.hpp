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

#ifndef RALC_PIPELINE_HPP_
#define RALC_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ralc/calibrators.hpp"
#include "ralc/dataset.hpp"
#include "ralc/gateway.hpp"
#include "ralc/lexicon.hpp"
#include "ralc/metrics.hpp"

namespace ralc {

enum class SignalKind { kLinguistic, kTokenProb, kSemantic };
std::string_view to_string(SignalKind s);
SignalKind signal_kind_from_string(std::string_view s);

// Backends by role. Every pointer must be set for the operations that use it.
struct Gateway {
  BackendPtr generator;  // QA sampling (hedged baseline, live responses)
  std::vector<BackendPtr> evaluators;
  BackendPtr grader;
  BackendPtr clusterer;
  BackendPtr rewriter;
  int evaluator_passes = 3;
  std::string human_annotated_cues;

  // Every role served by the closed-loop echo mock (three evaluators).
  static Gateway echo();
};

// {"generator": B, "evaluators": [B, ...], "grader": B, "clusterer": B,
//  "rewriter": B, "evaluator_passes"?: n, "human_annotated_cues"?: text,
//  "human_annotated_cues_file"?: path}
// B = {"kind": "http" | "echo", "name"?, "endpoint"?, "model"?,
//      "token_env"?, "temperature"?, "timeout_ms"?, "max_in_flight"?,
//      "retries"?}. Relative cue paths resolve against the config file.
Gateway gateway_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Gateway load_gateway_config(const std::filesystem::path& path);

struct RunConfig {
  SignalKind signal = SignalKind::kLinguistic;
  std::size_t n_self_consistency = 20;
  double train_fraction = 0.3;
  CalibratorKind calibrator = CalibratorKind::kPlatt;
  std::size_t shortlist_size = 30;
  std::size_t k = 5;
  std::size_t w1_samples = kDefaultW1Samples;
  std::uint64_t seed = 0;
  EceOptions ece{};
  CalibratorOptions calibrator_options{};
  // NOT_ATTEMPTED grades are dropped rather than counted as incorrect.
  bool exclude_not_attempted = true;
  // Records processed concurrently; results are joined in input order.
  std::size_t max_parallel_records = 1;
};

Json to_json(const RunConfig& config);

struct SignalEstimate {
  BetaConfidence distribution;
  SampledResponse representative;
  std::size_t representative_index = 0;
  ClusterSummary clusters;
};

// Samples (when the record has no responses) and clusters (when ids are
// missing) through the gateway, then builds the configured signal from the
// majority cluster.
SignalEstimate estimate_signal(const DatasetRecord& record, const RunConfig& config, const Gateway& gateway);

struct RecordTrace {
  std::string id;
  CorrectnessLabel label = CorrectnessLabel::kIncorrect;
  std::string original_text;
  std::optional<BetaConfidence> original;    // signal space
  std::optional<BetaConfidence> calibrated;  // signal space
  std::vector<RetrievedEntry> hedges;
  std::string rewritten_text;
  BetaConfidence linguistic_pre{1.0, 1.0};
  BetaConfidence linguistic_post{1.0, 1.0};
};

struct FailedRecord {
  std::string id;
  std::string stage;  // "train" or "eval"
  std::string error;
};

struct PercentChange {
  double fd = 0.0;
  double ece = 0.0;
};

struct PipelineResult {
  std::string mode;  // "ralc", "hedged_qa", "direct_beta_rewrite"
  RunConfig config;
  std::optional<CalibrationMap> calibrator;
  std::vector<RecordTrace> records;  // eval split, input order
  std::vector<FailedRecord> failures;
  std::size_t n_train_used = 0;
  std::size_t n_not_attempted_excluded = 0;

  std::optional<EvaluationReport> signal_pre;
  std::optional<EvaluationReport> signal_post;
  EvaluationReport linguistic_pre;
  EvaluationReport linguistic_post;
  // Spearman between calibrated (or target) means and re-estimated means.
  std::optional<double> propagation_rho;
  std::optional<PercentChange> signal_change;
  PercentChange linguistic_change;

  std::vector<ReliabilityBin> reliability_pre;   // linguistic space
  std::vector<ReliabilityBin> reliability_post;  // linguistic space
};

// Splits, fits the calibrator on the training prefix, then runs
// estimate -> calibrate -> retrieve -> rewrite -> re-estimate on the rest.
PipelineResult run_ralc(const std::vector<DatasetRecord>& records, const RunConfig& config, const Gateway& gateway,
                        const Lexicon& lexicon);

// The evaluation half of run_ralc with a fixed map (no split).
PipelineResult apply_ralc(const std::vector<DatasetRecord>& eval_records, const CalibrationMap& map,
                          const RunConfig& config, const Gateway& gateway, const Lexicon& lexicon);

enum class BaselineKind { kHedgedQa, kDirectBetaRewrite };
std::string_view to_string(BaselineKind b);
BaselineKind baseline_kind_from_string(std::string_view s);

PipelineResult run_baseline(const std::vector<DatasetRecord>& records, const RunConfig& config,
                            const Gateway& gateway, BaselineKind kind);

// Fits once on every training record, then applies the frozen map to each
// evaluation set in full.
std::map<std::string, PipelineResult> run_cross_domain(const std::vector<DatasetRecord>& train_records,
                                                       const std::map<std::string, std::vector<DatasetRecord>>& eval_sets,
                                                       const RunConfig& config, const Gateway& gateway,
                                                       const Lexicon& lexicon);

// Fits the configured calibrator on (signal mean, label) pairs of records.
// Gateway failures are skipped and appended to `failures`.
CalibrationMap fit_calibrator_on_records(const std::vector<DatasetRecord>& records, const RunConfig& config,
                                         const Gateway& gateway, std::vector<FailedRecord>* failures = nullptr,
                                         std::size_t* n_used = nullptr);

struct LexiconBuildConfig {
  std::size_t rewrites_per_expression = 20;
  std::uint64_t seed = 0;
  MleOptions mle{};
};

struct LexiconBuildResult {
  Lexicon lexicon;
  std::vector<std::string> excluded;  // every scoring attempt failed
  std::map<std::string, std::size_t> score_counts;
};

// Rewrites sampled non-verifiable sentences around each expression, scores
// them with the evaluator ensemble and fits one profile per expression.
LexiconBuildResult build_lexicon_pipeline(const std::vector<std::string>& expressions,
                                          const LexiconBuildConfig& config, const Gateway& gateway);

// Asks the generator for hedge expressions via the sourcing prompt.
std::vector<std::string> source_hedge_expressions(const Gateway& gateway);

Json to_json(const PipelineResult& result);

// Writes report.json, metrics.csv, reliability_pre.csv,
// reliability_post.csv and trace.jsonl into out_dir (created if needed).
void emit_reports(const PipelineResult& result, const std::filesystem::path& out_dir);

}  // namespace ralc

#endif  // RALC_PIPELINE_HPP_
