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

#include "ralc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "ralc/detail/seed.hpp"
#include "ralc/detail/summation.hpp"
#include "ralc/error.hpp"
#include "ralc/special_functions.hpp"

namespace ralc {
namespace {

void check_aligned(std::size_t n_dists, std::size_t n_labels, const char* what) {
  if (n_dists != n_labels) {
    throw InvalidArgument(std::string(what) + ": " + std::to_string(n_dists) +
                          " distributions but " + std::to_string(n_labels) + " labels");
  }
  if (n_dists == 0) throw InvalidArgument(std::string(what) + ": empty input");
}

std::size_t bin_index(double x, std::size_t n_bins) {
  const auto i = static_cast<std::size_t>(std::floor(x * static_cast<double>(n_bins)));
  return std::min(i, n_bins - 1);
}

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> means_of(std::span<const BetaConfidence> dists) {
  std::vector<double> m(dists.size());
  std::transform(dists.begin(), dists.end(), m.begin(), [](const auto& d) { return d.mean(); });
  return m;
}

}  // namespace

CorrectnessLabel label_from_int(long long value) {
  if (value == 0) return CorrectnessLabel::kIncorrect;
  if (value == 1) return CorrectnessLabel::kCorrect;
  throw InvalidArgument("correctness label must be 0 or 1, got " + std::to_string(value));
}

BetaConfidence posterior_update(const BetaConfidence& d, CorrectnessLabel y) {
  const double yy = to_int(y);
  return BetaConfidence(d.alpha() + yy, d.beta() + 1.0 - yy);
}

double faithfulness_divergence(const BetaConfidence& d, CorrectnessLabel y) {
  // KL(Beta(a+1, b) || Beta(a, b)) = log((a+b)/a) + psi(a+1) - psi(a+b+1),
  // and symmetrically for y = 0. The log-Beta difference is taken
  // analytically so that large concentrations do not cancel catastrophically.
  const double kappa = d.concentration();
  const double hit = (y == CorrectnessLabel::kCorrect) ? d.alpha() : d.beta();
  const double kl = std::log(kappa / hit) + special::digamma(hit + 1.0) -
                    special::digamma(kappa + 1.0);
  return kappa * std::max(kl, 0.0);
}

double expected_brier(const BetaConfidence& d, CorrectnessLabel y) {
  const double err = d.mean() - to_int(y);
  return d.variance() + err * err;
}

double expected_nll(const BetaConfidence& d, CorrectnessLabel y) {
  const double hit = (y == CorrectnessLabel::kCorrect) ? d.alpha() : d.beta();
  return special::digamma(d.concentration()) - special::digamma(hit);
}

double generalized_ece(std::span<const BetaConfidence> dists,
                       std::span<const CorrectnessLabel> labels, const EceOptions& options) {
  check_aligned(dists.size(), labels.size(), "generalized_ece");
  if (options.n_bins == 0) throw InvalidArgument("generalized_ece: n_bins must be >= 1");
  if (options.samples_per_dist == 0) {
    throw InvalidArgument("generalized_ece: samples_per_dist must be >= 1");
  }

  std::vector<detail::KahanSum> conf(options.n_bins);
  std::vector<std::size_t> hits(options.n_bins, 0);
  std::vector<std::size_t> count(options.n_bins, 0);
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto& d = dists[i];
    const std::uint64_t s =
        detail::mix_seed(detail::mix_seed(options.seed, d.alpha()), d.beta());
    const SampleSet draws = sample_beta(d, options.samples_per_dist, s);
    for (double x : draws.values()) {
      const std::size_t b = bin_index(x, options.n_bins);
      conf[b].add(x);
      hits[b] += static_cast<std::size_t>(to_int(labels[i]));
      ++count[b];
    }
  }

  const double total = static_cast<double>(dists.size() * options.samples_per_dist);
  detail::KahanSum ece;
  for (std::size_t b = 0; b < options.n_bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    const double acc = static_cast<double>(hits[b]) / n;
    ece.add(n / total * std::abs(acc - conf[b].value() / n));
  }
  return std::clamp(ece.value(), 0.0, 1.0);
}

std::vector<ReliabilityBin> reliability_bins(std::span<const BetaConfidence> dists,
                                             std::span<const CorrectnessLabel> labels,
                                             std::size_t n_bins) {
  check_aligned(dists.size(), labels.size(), "reliability_bins");
  if (n_bins == 0) throw InvalidArgument("reliability_bins: n_bins must be >= 1");
  std::vector<ReliabilityBin> bins(n_bins);
  std::vector<detail::KahanSum> conf(n_bins);
  std::vector<std::size_t> hits(n_bins, 0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].bin_low = static_cast<double>(b) / static_cast<double>(n_bins);
    bins[b].bin_high = static_cast<double>(b + 1) / static_cast<double>(n_bins);
  }
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const double m = dists[i].mean();
    const std::size_t b = bin_index(m, n_bins);
    conf[b].add(m);
    hits[b] += static_cast<std::size_t>(to_int(labels[i]));
    ++bins[b].count;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count == 0) continue;
    const double n = static_cast<double>(bins[b].count);
    bins[b].mean_confidence = conf[b].value() / n;
    bins[b].accuracy = static_cast<double>(hits[b]) / n;
  }
  return bins;
}

double auroc(std::span<const double> scores, std::span<const CorrectnessLabel> labels) {
  check_aligned(scores.size(), labels.size(), "auroc");
  const auto ranks = fractional_ranks(scores);
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == CorrectnessLabel::kCorrect) {
      pos_rank_sum += ranks[i];
      ++n_pos;
    }
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InvalidArgument("auroc is undefined for single-class labels");
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double auroc_on_means(std::span<const BetaConfidence> dists,
                      std::span<const CorrectnessLabel> labels) {
  check_aligned(dists.size(), labels.size(), "auroc_on_means");
  const auto m = means_of(dists);
  return auroc(m, labels);
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("spearman_rho: length mismatch (" + std::to_string(xs.size()) +
                          " vs " + std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) throw InvalidArgument("spearman_rho: need at least two points");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean_rank = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean_rank;
    const double dy = ry[i] - mean_rank;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InvalidArgument("spearman_rho: zero rank variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double miscalibration_bias(std::span<const BetaConfidence> dists,
                           std::span<const CorrectnessLabel> labels) {
  check_aligned(dists.size(), labels.size(), "miscalibration_bias");
  detail::KahanSum conf;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    conf.add(dists[i].mean());
    hits += static_cast<std::size_t>(to_int(labels[i]));
  }
  const double n = static_cast<double>(dists.size());
  return conf.value() / n - static_cast<double>(hits) / n;
}

EvaluationReport evaluate_dataset(std::span<const BetaConfidence> dists,
                                  std::span<const CorrectnessLabel> labels,
                                  const EvaluationConfig& config) {
  check_aligned(dists.size(), labels.size(), "evaluate_dataset");
  EvaluationReport r;
  r.n_instances = dists.size();

  detail::KahanSum fd, brier, nll;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    fd.add(faithfulness_divergence(dists[i], labels[i]));
    brier.add(expected_brier(dists[i], labels[i]));
    nll.add(expected_nll(dists[i], labels[i]));
  }
  const double n = static_cast<double>(dists.size());
  r.mean_fd = fd.value() / n;
  r.mean_expected_brier = brier.value() / n;
  r.mean_expected_nll = nll.value() / n;
  r.generalized_ece = generalized_ece(dists, labels, config.ece);
  r.miscalibration_bias = miscalibration_bias(dists, labels);

  const bool has_pos = std::any_of(labels.begin(), labels.end(),
                                   [](auto y) { return y == CorrectnessLabel::kCorrect; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(),
                                   [](auto y) { return y == CorrectnessLabel::kIncorrect; });
  if (has_pos && has_neg) {
    r.auroc = auroc_on_means(dists, labels);
    const auto m = means_of(dists);
    std::vector<double> y(labels.size());
    std::transform(labels.begin(), labels.end(), y.begin(),
                   [](auto l) { return static_cast<double>(to_int(l)); });
    const bool means_vary = std::any_of(m.begin(), m.end(), [&](double v) { return v != m[0]; });
    if (means_vary) r.spearman_rho = spearman_rho(m, y);
  }
  return r;
}

double percent_reduction(double before, double after) {
  if (before == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (before - after) / before;
}

MetricSweepPoint metric_sweep_point(std::string sweep, double mean, double concentration, CorrectnessLabel y) {
  const auto d = beta_from_mean_concentration(mean, concentration);
  return {std::move(sweep),      mean,
          concentration,         y,
          faithfulness_divergence(d, y), beta_kl(posterior_update(d, y), d),
          expected_brier(d, y),  expected_nll(d, y)};
}

std::vector<MetricSweepPoint> default_metric_sweeps() {
  std::vector<MetricSweepPoint> out;
  for (double k : {2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
    out.push_back(metric_sweep_point("concentration", 0.75, k, CorrectnessLabel::kIncorrect));
  }
  for (double m : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    out.push_back(metric_sweep_point("mean", m, 20.0, CorrectnessLabel::kCorrect));
  }
  return out;
}

std::string metric_sweeps_to_csv(std::span<const MetricSweepPoint> points) {
  std::string out = "sweep,mean,concentration,label,fd,kl,expected_brier,expected_nll\n";
  char buf[256];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", p.mean, p.concentration,
                  to_int(p.label), p.fd, p.kl, p.expected_brier, p.expected_nll);
    out += p.sweep + buf;
  }
  return out;
}

}  // namespace ralc
