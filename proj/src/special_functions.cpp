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

#include "ralc/special_functions.hpp"

#include <cmath>
#include <limits>

namespace ralc::special {
namespace {

constexpr double kAsymptoticThreshold = 10.0;

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return x;
  // Recurrence terms are collected separately and subtracted at the end so
  // that tiny x (where 1/x dominates) does not lose the asymptotic part.
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // -sum B_2k / (2k x^2k), k = 1..7
  const double series =
      inv2 * (-1.0 / 12 +
      inv2 * (1.0 / 120 +
      inv2 * (-1.0 / 252 +
      inv2 * (1.0 / 240 +
      inv2 * (-1.0 / 132 +
      inv2 * (691.0 / 32760 +
      inv2 * (-1.0 / 12)))))));
  return std::log(x) - 0.5 * inv + series - shift;
}

double trigamma(double x) {
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) return 0.0;
  double shift = 0.0;
  while (x < kAsymptoticThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
  const double series =
      inv * inv2 * (1.0 / 6 +
      inv2 * (-1.0 / 30 +
      inv2 * (1.0 / 42 +
      inv2 * (-1.0 / 30 +
      inv2 * (5.0 / 66 +
      inv2 * (-691.0 / 2730 +
      inv2 * (7.0 / 6)))))));
  return inv + 0.5 * inv2 + series + shift;
}

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace ralc::special
