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

#ifndef RALC_DETAIL_SUMMATION_HPP_
#define RALC_DETAIL_SUMMATION_HPP_

#include <cmath>

namespace ralc::detail {

// Neumaier compensated accumulator.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <typename Range>
double compensated_sum(const Range& values) {
  KahanSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace ralc::detail

#endif  // RALC_DETAIL_SUMMATION_HPP_
