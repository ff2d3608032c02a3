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

#ifndef RALC_SPECIAL_FUNCTIONS_HPP_
#define RALC_SPECIAL_FUNCTIONS_HPP_

namespace ralc::special {

// Digamma function for x > 0. Upward recurrence to x >= 10 followed by the
// asymptotic Bernoulli series; relative error below 1e-12 on (0, inf).
double digamma(double x);

// Trigamma function for x > 0, same scheme as digamma.
double trigamma(double x);

// log Gamma(x) for x > 0 (thread-safe; does not touch signgam).
double log_gamma(double x);

// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
double log_beta(double a, double b);

}  // namespace ralc::special

#endif  // RALC_SPECIAL_FUNCTIONS_HPP_
