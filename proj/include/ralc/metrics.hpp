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

#ifndef RALC_METRICS_HPP_
#define RALC_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ralc/beta.hpp"

namespace ralc {

// Binary correctness of a response. Three-way grades are reduced to this
// upstream; NOT_ATTEMPTED records never reach the metrics.
enum class CorrectnessLabel : std::uint8_t { kIncorrect = 0, kCorrect = 1 };

// Throws InvalidArgument unless value is 0 or 1.
CorrectnessLabel label_from_int(long long value);

constexpr int to_int(CorrectnessLabel y) noexcept { return static_cast<int>(y); }

// ---------------------------------------------------------------------------
// Instance-level metrics.

// Beta(alpha + y, beta + 1 - y).
BetaConfidence posterior_update(const BetaConfidence& d, CorrectnessLabel y);

// Faithfulness Divergence: (alpha + beta) * KL(posterior || prior). Large when
// a concentrated belief is contradicted by the outcome.
double faithfulness_divergence(const BetaConfidence& d, CorrectnessLabel y);

// E[(p - y)^2] for p ~ d: Var(p) + (E[p] - y)^2.
double expected_brier(const BetaConfidence& d, CorrectnessLabel y);

// E[-log p(y | p)] for p ~ d: psi(a + b) - psi(a) if y = 1, else psi(a + b) - psi(b).
double expected_nll(const BetaConfidence& d, CorrectnessLabel y);

// ---------------------------------------------------------------------------
// Population-level metrics.

struct EceOptions {
  std::size_t n_bins = 10;
  std::size_t samples_per_dist = 100;
  std::uint64_t seed = 0;
};

// Generalised ECE by pooled sampling. Each distribution contributes
// samples_per_dist draws paired with its label; the pooled pairs are binned
// on [0, 1] into equal-width bins. Per-instance draw
// streams are keyed on (seed, alpha, beta), so the result does not depend on
// instance order.
double generalized_ece(std::span<const BetaConfidence> dists,
                       std::span<const CorrectnessLabel> labels, const EceOptions& options = {});

struct ReliabilityBin {
  double bin_low = 0.0;
  double bin_high = 0.0;
  double mean_confidence = 0.0;  // mean of distribution means in the bin; 0 when empty
  double accuracy = 0.0;         // 0 when empty
  std::size_t count = 0;         // instances whose mean falls in the bin
};

// Reliability-diagram data binned on distribution means. Counts sum to the
// number of instances.
std::vector<ReliabilityBin> reliability_bins(std::span<const BetaConfidence> dists,
                                             std::span<const CorrectnessLabel> labels,
                                             std::size_t n_bins = 10);

// Mann-Whitney AUROC; tied scores earn half credit. Needs both classes.
double auroc(std::span<const double> scores, std::span<const CorrectnessLabel> labels);
double auroc_on_means(std::span<const BetaConfidence> dists,
                      std::span<const CorrectnessLabel> labels);

// Pearson correlation of average (fractional) ranks.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

// Mean of distribution means minus mean accuracy.
double miscalibration_bias(std::span<const BetaConfidence> dists,
                           std::span<const CorrectnessLabel> labels);

// ---------------------------------------------------------------------------

struct EvaluationConfig {
  EceOptions ece;
};

struct EvaluationReport {
  double mean_fd = 0.0;
  double generalized_ece = 0.0;
  double mean_expected_brier = 0.0;
  double mean_expected_nll = 0.0;
  std::optional<double> auroc;         // absent for single-class inputs
  std::optional<double> spearman_rho;  // means vs labels; absent when undefined
  double miscalibration_bias = 0.0;
  std::size_t n_instances = 0;
  // Identifies the generalised-ECE realisation used for this report.
  std::string ece_method = "pooled-sample-binning";
};

EvaluationReport evaluate_dataset(std::span<const BetaConfidence> dists,
                                  std::span<const CorrectnessLabel> labels,
                                  const EvaluationConfig& config = {});

// Percentage reduction relative to `before`; positive means improvement.
double percent_reduction(double before, double after);

// ---------------------------------------------------------------------------

// One point of a metric sweep over Beta(mean, concentration) with label y.
struct MetricSweepPoint {
  std::string sweep;  // "concentration" or "mean"
  double mean = 0.0;
  double concentration = 0.0;
  CorrectnessLabel label = CorrectnessLabel::kIncorrect;
  double fd = 0.0;
  double kl = 0.0;  // KL(posterior || prior), unweighted
  double expected_brier = 0.0;
  double expected_nll = 0.0;
};

MetricSweepPoint metric_sweep_point(std::string sweep, double mean, double concentration, CorrectnessLabel y);

// Mean 0.75, y=0 over concentrations {2, 5, 10, 20, 50, 100}, then
// concentration 20, y=1 over means {0.1, 0.3, 0.5, 0.7, 0.9}.
std::vector<MetricSweepPoint> default_metric_sweeps();

// Header "sweep,mean,concentration,label,fd,kl,expected_brier,expected_nll".
std::string metric_sweeps_to_csv(std::span<const MetricSweepPoint> points);

}  // namespace ralc

#endif  // RALC_METRICS_HPP_
