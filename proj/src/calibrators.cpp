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

#include "ralc/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ralc/error.hpp"

namespace ralc {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Bernoulli negative log-likelihood of label y under logit z.
double logistic_loss(double z, CorrectnessLabel y) {
  return y == CorrectnessLabel::kCorrect ? softplus(-z) : softplus(z);
}

void check_slice(const TrainingSlice& slice, bool need_both_classes, const char* kind) {
  if (slice.means.size() != slice.labels.size()) {
    throw InvalidArgument(std::string(kind) + ": means and labels differ in length");
  }
  if (slice.means.empty()) throw InvalidArgument(std::string(kind) + ": empty training slice");
  for (double m : slice.means) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw InvalidArgument(std::string(kind) + ": training mean outside [0, 1]");
    }
  }
  if (need_both_classes) {
    const auto pos = std::count(slice.labels.begin(), slice.labels.end(), CorrectnessLabel::kCorrect);
    if (pos == 0 || pos == static_cast<long>(slice.labels.size())) {
      throw InvalidArgument(std::string(kind) + ": training slice needs both classes");
    }
  }
}

double accuracy(std::span<const CorrectnessLabel> labels) {
  const auto pos = std::count(labels.begin(), labels.end(), CorrectnessLabel::kCorrect);
  return static_cast<double>(pos) / static_cast<double>(labels.size());
}

PlattParams fit_platt(const TrainingSlice& slice, const CalibratorOptions& opt) {
  check_slice(slice, true, "platt");
  std::vector<double> x(slice.means.size());
  std::transform(slice.means.begin(), slice.means.end(), x.begin(), clipped_logit);

  double w = 1.0;
  double b = 0.0;
  for (int it = 0; it < opt.platt_max_iterations; ++it) {
    // Gradient g = X^T (y - p), information H = X^T W X for features (x, 1).
    double gw = 0, gb = 0, hww = 0, hwb = 0, hbb = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double p = sigmoid(w * x[i] + b);
      const double r = to_int(slice.labels[i]) - p;
      const double v = p * (1.0 - p);
      gw += r * x[i];
      gb += r;
      hww += v * x[i] * x[i];
      hwb += v * x[i];
      hbb += v;
    }
    double det = hww * hbb - hwb * hwb;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, hww * hbb))) {
      hww += opt.ridge_fallback;
      hbb += opt.ridge_fallback;
      det = hww * hbb - hwb * hwb;
    }
    const double dw = (hbb * gw - hwb * gb) / det;
    const double db = (hww * gb - hwb * gw) / det;
    w += dw;
    b += db;
    if (std::max(std::abs(dw), std::abs(db)) < opt.platt_tolerance) break;
  }
  return {w, b};
}

TemperatureParams fit_temperature(const TrainingSlice& slice, const CalibratorOptions& opt) {
  check_slice(slice, true, "temperature");
  std::vector<double> z(slice.means.size());
  std::transform(slice.means.begin(), slice.means.end(), z.begin(), clipped_logit);
  auto nll = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += logistic_loss(z[i] / t, slice.labels[i]);
    return s;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = opt.temperature_min;
  double hi = opt.temperature_max;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = nll(c);
  double fd = nll(d);
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = nll(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = nll(d);
    }
  }
  return {0.5 * (lo + hi)};
}

IsotonicParams fit_isotonic(const TrainingSlice& slice) {
  check_slice(slice, false, "isotonic");
  std::vector<std::size_t> order(slice.means.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return slice.means[a] < slice.means[b]; });

  struct Block {
    double x_lo, x_hi, sum, weight;
    double value() const { return sum / weight; }
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < order.size();) {
    // Equal means collapse into one weighted point before pooling.
    const double x = slice.means[order[k]];
    Block blk{x, x, 0.0, 0.0};
    while (k < order.size() && slice.means[order[k]] == x) {
      blk.sum += to_int(slice.labels[order[k]]);
      blk.weight += 1.0;
      ++k;
    }
    blocks.push_back(blk);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value() >= blocks.back().value()) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      prev.x_hi = top.x_hi;
      prev.sum += top.sum;
      prev.weight += top.weight;
    }
  }

  IsotonicParams p;
  for (const auto& blk : blocks) {
    p.x.push_back(blk.x_lo);
    p.y.push_back(blk.value());
    if (blk.x_hi > blk.x_lo) {
      p.x.push_back(blk.x_hi);
      p.y.push_back(blk.value());
    }
  }
  return p;
}

HistogramParams fit_histogram(const TrainingSlice& slice, const CalibratorOptions& opt) {
  check_slice(slice, false, "histogram");
  if (opt.histogram_bins == 0) throw InvalidArgument("histogram: bins must be >= 1");
  const std::size_t n = opt.histogram_bins;
  std::vector<double> hits(n, 0.0), count(n, 0.0);
  for (std::size_t i = 0; i < slice.means.size(); ++i) {
    const auto b = std::min(
        static_cast<std::size_t>(std::floor(slice.means[i] * static_cast<double>(n))), n - 1);
    hits[b] += to_int(slice.labels[i]);
    count[b] += 1.0;
  }
  const double global = accuracy(slice.labels);
  HistogramParams p;
  p.bin_values.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    p.bin_values[b] = count[b] > 0.0 ? hits[b] / count[b] : global;
  }
  return p;
}

}  // namespace

std::string_view to_string(CalibratorKind kind) {
  switch (kind) {
    case CalibratorKind::kPlatt: return "platt";
    case CalibratorKind::kTemperature: return "temperature";
    case CalibratorKind::kIsotonic: return "isotonic";
    case CalibratorKind::kHistogram: return "histogram";
  }
  return "unknown";
}

CalibratorKind calibrator_kind_from_string(std::string_view name) {
  if (name == "platt") return CalibratorKind::kPlatt;
  if (name == "temperature") return CalibratorKind::kTemperature;
  if (name == "isotonic") return CalibratorKind::kIsotonic;
  if (name == "histogram") return CalibratorKind::kHistogram;
  throw InvalidArgument("unknown calibrator kind: " + std::string(name));
}

CalibrationMap::CalibrationMap(Params params) : params_(std::move(params)) {
  std::visit(Overloaded{
                 [](const PlattParams& p) {
                   if (!std::isfinite(p.w) || !std::isfinite(p.b)) {
                     throw InvalidArgument("platt parameters must be finite");
                   }
                 },
                 [](const TemperatureParams& p) {
                   if (!(p.temperature > 0.0) || !std::isfinite(p.temperature)) {
                     throw InvalidArgument("temperature must be positive");
                   }
                 },
                 [](const IsotonicParams& p) {
                   if (p.x.empty() || p.x.size() != p.y.size()) {
                     throw InvalidArgument("isotonic breakpoints must be non-empty and paired");
                   }
                   for (std::size_t i = 0; i < p.x.size(); ++i) {
                     if (!(p.y[i] >= 0.0 && p.y[i] <= 1.0)) {
                       throw InvalidArgument("isotonic values must lie in [0, 1]");
                     }
                     if (i > 0 && (p.x[i] < p.x[i - 1] || p.y[i] < p.y[i - 1])) {
                       throw InvalidArgument("isotonic breakpoints must be non-decreasing");
                     }
                   }
                 },
                 [](const HistogramParams& p) {
                   if (p.bin_values.empty()) throw InvalidArgument("histogram needs bins");
                   for (double v : p.bin_values) {
                     if (!(v >= 0.0 && v <= 1.0)) {
                       throw InvalidArgument("histogram bin values must lie in [0, 1]");
                     }
                   }
                 },
             },
             params_);
}

CalibratorKind CalibrationMap::kind() const noexcept {
  return static_cast<CalibratorKind>(params_.index());
}

static double clipped(double mu) { return std::clamp(mu, kClipFloor, 1.0 - kClipFloor); }

double clipped_logit(double mu) {
  const double m = clipped(mu);
  return std::log(m) - std::log1p(-m);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

CalibrationMap fit_calibrator(CalibratorKind kind, const TrainingSlice& slice,
                              const CalibratorOptions& options) {
  switch (kind) {
    case CalibratorKind::kPlatt: return CalibrationMap(fit_platt(slice, options));
    case CalibratorKind::kTemperature: return CalibrationMap(fit_temperature(slice, options));
    case CalibratorKind::kIsotonic: return CalibrationMap(fit_isotonic(slice));
    case CalibratorKind::kHistogram: return CalibrationMap(fit_histogram(slice, options));
  }
  throw InvalidArgument("unknown calibrator kind");
}

double apply_to_mean(const CalibrationMap& map, double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw InvalidArgument("apply_to_mean: mean outside [0, 1]: " + std::to_string(mu));
  }
  return std::visit(
      Overloaded{
          // Identity parameters skip the logit round trip so mu survives exactly.
          [&](const PlattParams& p) {
            return p.w == 1.0 && p.b == 0.0 ? clipped(mu) : sigmoid(p.w * clipped_logit(mu) + p.b);
          },
          [&](const TemperatureParams& p) {
            return p.temperature == 1.0 ? clipped(mu) : sigmoid(clipped_logit(mu) / p.temperature);
          },
          [&](const IsotonicParams& p) {
            if (mu <= p.x.front()) return p.y.front();
            if (mu >= p.x.back()) return p.y.back();
            const auto hi = static_cast<std::size_t>(
                std::upper_bound(p.x.begin(), p.x.end(), mu) - p.x.begin());
            const std::size_t lo = hi - 1;
            const double span = p.x[hi] - p.x[lo];
            if (span <= 0.0) return p.y[hi];
            const double t = (mu - p.x[lo]) / span;
            return p.y[lo] + t * (p.y[hi] - p.y[lo]);
          },
          [&](const HistogramParams& p) {
            const std::size_t n = p.bin_values.size();
            const auto b =
                std::min(static_cast<std::size_t>(std::floor(mu * static_cast<double>(n))), n - 1);
            return p.bin_values[b];
          },
      },
      map.params());
}

BetaConfidence apply_to_distribution(const CalibrationMap& map, const BetaConfidence& d) {
  const double mu = apply_to_mean(map, d.mean());
  if (mu == d.mean()) return d;
  return beta_from_mean_concentration(mu, d.concentration());
}

SplitPoint split_point(std::size_t n, double train_fraction) {
  if (n == 0) throw InvalidArgument("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must lie in (0, 1)");
  }
  auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
  n_train = std::max<std::size_t>(n_train, 1);
  return {std::min(n_train, n)};
}

}  // namespace ralc
