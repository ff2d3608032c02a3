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

#ifndef RALC_CALIBRATORS_HPP_
#define RALC_CALIBRATORS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ralc/beta.hpp"
#include "ralc/metrics.hpp"

namespace ralc {

enum class CalibratorKind { kPlatt, kTemperature, kIsotonic, kHistogram };

std::string_view to_string(CalibratorKind kind);
CalibratorKind calibrator_kind_from_string(std::string_view name);

// mu' = sigmoid(w * logit(mu) + b)
struct PlattParams {
  double w = 1.0;
  double b = 0.0;

  friend bool operator==(const PlattParams&, const PlattParams&) = default;
};

// mu' = sigmoid(logit(mu) / T)
struct TemperatureParams {
  double temperature = 1.0;

  friend bool operator==(const TemperatureParams&, const TemperatureParams&) = default;
};

// Piecewise-linear interpolation through non-decreasing breakpoints,
// clamped to the end values outside [x.front(), x.back()].
struct IsotonicParams {
  std::vector<double> x;
  std::vector<double> y;

  friend bool operator==(const IsotonicParams&, const IsotonicParams&) = default;
};

// Equal-width bins on [0, 1]; each bin maps to a constant.
struct HistogramParams {
  std::vector<double> bin_values;

  friend bool operator==(const HistogramParams&, const HistogramParams&) = default;
};

// A fitted signal-space transform of distribution means.
class CalibrationMap {
 public:
  using Params = std::variant<PlattParams, TemperatureParams, IsotonicParams, HistogramParams>;

  // Validates the variant invariants (monotone breakpoints, bin values in
  // [0, 1], T > 0); throws InvalidArgument otherwise.
  explicit CalibrationMap(Params params);

  static CalibrationMap identity() { return CalibrationMap(PlattParams{}); }

  CalibratorKind kind() const noexcept;
  const Params& params() const noexcept { return params_; }

 private:
  Params params_;
};

// Calibration training data: per-response means and binary labels.
struct TrainingSlice {
  std::vector<double> means;
  std::vector<CorrectnessLabel> labels;
};

struct CalibratorOptions {
  // Platt (IRLS)
  double platt_tolerance = 1e-8;
  int platt_max_iterations = 100;
  double ridge_fallback = 1e-4;
  // Temperature (golden-section over T)
  double temperature_min = 0.05;
  double temperature_max = 20.0;
  // Histogram
  std::size_t histogram_bins = 10;
};

CalibrationMap fit_calibrator(CalibratorKind kind, const TrainingSlice& slice,
                              const CalibratorOptions& options = {});

double apply_to_mean(const CalibrationMap& map, double mu);

// Calibrated mean, original concentration.
BetaConfidence apply_to_distribution(const CalibrationMap& map, const BetaConfidence& d);

// logit with the argument clipped to [kClipFloor, 1 - kClipFloor].
double clipped_logit(double mu);
double sigmoid(double z);

struct SplitPoint {
  std::size_t n_train = 0;
};

// Prefix split of n records: floor(n * train_fraction) training records,
// but at least one; the remainder is held out. Requires 0 < fraction < 1.
SplitPoint split_point(std::size_t n, double train_fraction);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_eval(const std::vector<T>& records,
                                                           double train_fraction = 0.3) {
  const auto at = split_point(records.size(), train_fraction).n_train;
  return {std::vector<T>(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(at)),
          std::vector<T>(records.begin() + static_cast<std::ptrdiff_t>(at), records.end())};
}

}  // namespace ralc

#endif  // RALC_CALIBRATORS_HPP_
