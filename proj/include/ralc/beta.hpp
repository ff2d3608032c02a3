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

#ifndef RALC_BETA_HPP_
#define RALC_BETA_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ralc {

// Lower bound applied to every Beta parameter produced by this library.
inline constexpr double kClipFloor = 1e-6;

// Distribution over the probability that a statement is correct, as
// perceived by readers. alpha and beta act as pseudo-counts of correctness
// and incorrectness evidence; both are clipped to kClipFloor on construction.
class BetaConfidence {
 public:
  // Throws InvalidArgument for negative or non-finite parameters.
  BetaConfidence(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  double mean() const noexcept { return alpha_ / (alpha_ + beta_); }
  double concentration() const noexcept { return alpha_ + beta_; }
  double variance() const noexcept {
    const double k = alpha_ + beta_;
    return alpha_ * beta_ / (k * k * (k + 1.0));
  }

  friend bool operator==(const BetaConfidence&, const BetaConfidence&) = default;

 private:
  double alpha_;
  double beta_;
};

struct BetaMoments {
  double mean;
  double variance;
  double concentration;
};

BetaMoments beta_moments(const BetaConfidence& d);

// Beta(mu * kappa, (1 - mu) * kappa), each parameter clipped to kClipFloor.
// Requires mu in [0, 1] and kappa > 0.
BetaConfidence beta_from_mean_concentration(double mu, double kappa);

// Non-empty set of pseudo-observations in [0, 1].
class SampleSet {
 public:
  explicit SampleSet(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::vector<double> values_;
};

// Which branch of the method-of-moments estimator a sample set falls into.
enum class FitRegime {
  kRegular,             // 0 < v < m (1 - m)
  kBoundaryDegenerate,  // every observation is 0, or every observation is 1
  kInteriorDegenerate,  // v == 0, v >= m (1 - m), or a single observation
};

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when count == 1
  std::size_t count = 0;
  FitRegime regime = FitRegime::kRegular;
};

SampleSummary summarize_samples(const SampleSet& samples);

// Method-of-moments fit with the boundary/interior degenerate fallbacks
// (mean-preserving, concentration = sample count).
BetaConfidence fit_beta_moments(const SampleSet& samples);

struct MleOptions {
  double tolerance = 1e-8;
  int max_iterations = 200;
};

struct MleFit {
  BetaConfidence distribution;
  int iterations = 0;
  // Set when the likelihood has no interior maximum (zero variance) or
  // Newton failed to converge; distribution is then the moments fit.
  bool fell_back_to_moments = false;
};

// Maximum-likelihood fit on [0, 1] support. Samples are clipped to
// [kClipFloor, 1 - kClipFloor] before taking logs. Damped Newton on
// (log alpha, log beta), started from the moments estimate.
MleFit fit_beta_mle(const SampleSet& samples, const MleOptions& options = {});

// KL(p || q) in nats, closed form via log-Beta and digamma.
double beta_kl(const BetaConfidence& p, const BetaConfidence& q);

inline constexpr std::size_t kDefaultW1Samples = 1000;

// Monte-Carlo 1-Wasserstein distance by quantile coupling: n sorted draws
// from each distribution (both streams seeded with `seed`), mean absolute
// difference. W1(d, d) is exactly 0.
double beta_w1(const BetaConfidence& p, const BetaConfidence& q,
               std::size_t n_samples = kDefaultW1Samples, std::uint64_t seed = 0);

// n draws from d, deterministic in seed.
SampleSet sample_beta(const BetaConfidence& d, std::size_t n, std::uint64_t seed);

// Same draws as sample_beta, sorted ascending (empirical quantile function).
std::vector<double> sorted_sample_beta(const BetaConfidence& d, std::size_t n,
                                       std::uint64_t seed);

// L1 distance between two equal-length sorted samples.
double w1_sorted(std::span<const double> a, std::span<const double> b);

}  // namespace ralc

#endif  // RALC_BETA_HPP_
