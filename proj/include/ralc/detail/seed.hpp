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

#ifndef RALC_DETAIL_SEED_HPP_
#define RALC_DETAIL_SEED_HPP_

#include <bit>
#include <cstdint>

namespace ralc::detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) noexcept {
  return splitmix64(seed ^ splitmix64(value));
}

inline std::uint64_t mix_seed(std::uint64_t seed, double value) noexcept {
  return mix_seed(seed, std::bit_cast<std::uint64_t>(value));
}

}  // namespace ralc::detail

#endif  // RALC_DETAIL_SEED_HPP_
