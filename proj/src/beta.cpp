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

#include "ralc/beta.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ralc/detail/summation.hpp"
#include "ralc/error.hpp"
#include "ralc/special_functions.hpp"

namespace ralc {
namespace {

double clip_param(double x) { return std::max(x, kClipFloor); }

void check_param(double x, const char* name) {
  if (!std::isfinite(x) || x < 0.0) {
    throw InvalidArgument(std::string("Beta parameter ") + name +
                          " must be finite and non-negative, got " + std::to_string(x));
  }
}

// log of a Gamma(shape, 1) draw. Shapes below 1 use G(a) = G(a + 1) U^(1/a),
// kept in log space so that shapes near kClipFloor do not underflow to 0.
double log_gamma_draw(double shape, std::mt19937_64& engine) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(engine));
  }
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double g = gamma(engine);
  const double u = 1.0 - uniform(engine);  // (0, 1]
  return std::log(g) + std::log(u) / shape;
}

double draw_beta(const BetaConfidence& d, std::mt19937_64& engine) {
  const double lx = log_gamma_draw(d.alpha(), engine);
  const double ly = log_gamma_draw(d.beta(), engine);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

double clip_open_unit(double x) {
  return std::clamp(x, kClipFloor, 1.0 - kClipFloor);
}

struct LogLikelihood {
  double mean_log_x;
  double mean_log_1mx;

  double value(double a, double b) const {
    return (a - 1.0) * mean_log_x + (b - 1.0) * mean_log_1mx - special::log_beta(a, b);
  }
};

}  // namespace

BetaConfidence::BetaConfidence(double alpha, double beta) {
  check_param(alpha, "alpha");
  check_param(beta, "beta");
  alpha_ = clip_param(alpha);
  beta_ = clip_param(beta);
}

BetaMoments beta_moments(const BetaConfidence& d) {
  return {d.mean(), d.variance(), d.concentration()};
}

BetaConfidence beta_from_mean_concentration(double mu, double kappa) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw InvalidArgument("mean must lie in [0, 1], got " + std::to_string(mu));
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw InvalidArgument("concentration must be positive and finite, got " +
                          std::to_string(kappa));
  }
  return BetaConfidence(mu * kappa, (1.0 - mu) * kappa);
}

SampleSet::SampleSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("sample set must be non-empty");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("sample value outside [0, 1]: " + std::to_string(v));
    }
  }
}

SampleSummary summarize_samples(const SampleSet& samples) {
  const auto values = samples.values();
  SampleSummary out;
  out.count = values.size();

  const bool constant = std::all_of(values.begin(), values.end(),
                                    [&](double v) { return v == values.front(); });
  if (constant) {
    // Exact mean and zero variance; summation round-off would otherwise
    // push a constant set into the regular branch.
    out.mean = values.front();
    out.variance = 0.0;
  } else {
    out.mean = detail::compensated_sum(values) / static_cast<double>(out.count);
    detail::KahanSum sq;
    for (double v : values) sq.add((v - out.mean) * (v - out.mean));
    out.variance = sq.value() / static_cast<double>(out.count - 1);
  }

  if (constant && (out.mean == 0.0 || out.mean == 1.0)) {
    out.regime = FitRegime::kBoundaryDegenerate;
  } else if (out.count == 1 || out.variance <= 0.0 ||
             out.variance >= out.mean * (1.0 - out.mean)) {
    out.regime = FitRegime::kInteriorDegenerate;
  } else {
    out.regime = FitRegime::kRegular;
  }
  return out;
}

BetaConfidence fit_beta_moments(const SampleSet& samples) {
  const SampleSummary s = summarize_samples(samples);
  if (s.regime == FitRegime::kRegular) {
    const double common = s.mean * (1.0 - s.mean) / s.variance - 1.0;
    return BetaConfidence(s.mean * common, (1.0 - s.mean) * common);
  }
  const double kappa = static_cast<double>(s.count);
  return BetaConfidence(s.mean * kappa, (1.0 - s.mean) * kappa);
}

MleFit fit_beta_mle(const SampleSet& samples, const MleOptions& options) {
  std::vector<double> clipped(samples.values().begin(), samples.values().end());
  for (double& v : clipped) v = clip_open_unit(v);
  const SampleSet work(std::move(clipped));
  const SampleSummary summary = summarize_samples(work);
  const BetaConfidence moments = fit_beta_moments(work);

  if (summary.variance <= 0.0) {
    return {moments, 0, true};
  }

  detail::KahanSum lx, l1mx;
  for (double v : work.values()) {
    lx.add(std::log(v));
    l1mx.add(std::log1p(-v));
  }
  const double n = static_cast<double>(work.size());
  const LogLikelihood ll{lx.value() / n, l1mx.value() / n};

  double a = moments.alpha();
  double b = moments.beta();
  if (summary.regime != FitRegime::kRegular) {
    // Overdispersed: start from a diffuse, mean-preserving profile.
    a = clip_open_unit(summary.mean);
    b = 1.0 - a;
  }

  for (int it = 1; it <= options.max_iterations; ++it) {
    const double psi_ab = special::digamma(a + b);
    const double ga = ll.mean_log_x - special::digamma(a) + psi_ab;
    const double gb = ll.mean_log_1mx - special::digamma(b) + psi_ab;
    const double t_ab = special::trigamma(a + b);
    const double haa = t_ab - special::trigamma(a);
    const double hbb = t_ab - special::trigamma(b);
    const double hab = t_ab;

    // Gradient and Hessian with respect to (log a, log b).
    const double gu = a * ga;
    const double gv = b * gb;
    const double huu = a * a * haa + gu;
    const double hvv = b * b * hbb + gv;
    const double huv = a * b * hab;

    double du = 0.0;
    double dv = 0.0;
    const double det = huu * hvv - huv * huv;
    if (huu < 0.0 && det > 0.0) {
      du = -(hvv * gu - huv * gv) / det;
      dv = -(huu * gv - huv * gu) / det;
    } else {
      // Log-space Hessian indefinite; the natural-parameter Newton step is
      // always an ascent direction (the likelihood is concave in (a, b)).
      const double ndet = haa * hbb - hab * hab;
      const double da = -(hbb * ga - hab * gb) / ndet;
      const double db = -(haa * gb - hab * ga) / ndet;
      du = da / a;
      dv = db / b;
    }
    // Cap the log-space step to keep exp() well behaved.
    const double max_step = std::max(std::abs(du), std::abs(dv));
    if (max_step > 2.0) {
      du *= 2.0 / max_step;
      dv *= 2.0 / max_step;
    }

    const double current = ll.value(a, b);
    double scale = 1.0;
    double na = a, nb = b;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      na = a * std::exp(scale * du);
      nb = b * std::exp(scale * dv);
      if (ll.value(na, nb) >= current - 1e-15 * std::abs(current)) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;

    const double step = std::max(std::abs(scale * du), std::abs(scale * dv));
    a = na;
    b = nb;
    if (step < options.tolerance) {
      return {BetaConfidence(a, b), it, false};
    }
  }
  return {moments, options.max_iterations, true};
}

double beta_kl(const BetaConfidence& p, const BetaConfidence& q) {
  if (p == q) return 0.0;
  const double a1 = p.alpha(), b1 = p.beta();
  const double a2 = q.alpha(), b2 = q.beta();
  const double kl = special::log_beta(a2, b2) - special::log_beta(a1, b1) +
                    (a1 - a2) * special::digamma(a1) + (b1 - b2) * special::digamma(b1) +
                    (a2 - a1 + b2 - b1) * special::digamma(a1 + b1);
  return std::max(kl, 0.0);
}

std::vector<double> sorted_sample_beta(const BetaConfidence& d, std::size_t n,
                                       std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<double> out(n);
  for (double& x : out) x = draw_beta(d, engine);
  std::sort(out.begin(), out.end());
  return out;
}

SampleSet sample_beta(const BetaConfidence& d, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("sample count must be at least 1");
  std::mt19937_64 engine(seed);
  std::vector<double> out(n);
  for (double& x : out) x = draw_beta(d, engine);
  return SampleSet(std::move(out));
}

double w1_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw InvalidArgument("w1_sorted needs two non-empty samples of equal length");
  }
  detail::KahanSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(std::abs(a[i] - b[i]));
  return acc.value() / static_cast<double>(a.size());
}

double beta_w1(const BetaConfidence& p, const BetaConfidence& q, std::size_t n_samples,
               std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("W1 needs at least one sample");
  if (p == q) return 0.0;
  const auto sp = sorted_sample_beta(p, n_samples, seed);
  const auto sq = sorted_sample_beta(q, n_samples, seed);
  return w1_sorted(sp, sq);
}

}  // namespace ralc
