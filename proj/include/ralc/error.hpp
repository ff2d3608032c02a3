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

#ifndef RALC_ERROR_HPP_
#define RALC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ralc {

// Precondition violations on numeric inputs (bad parameters, mismatched
// lengths, empty collections).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input files or model replies.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A chat backend failed (transport or unparseable reply after the retry
// budget). Carries the backend identity so failures can be attributed.
class GatewayError : public std::runtime_error {
 public:
  GatewayError(std::string backend, const std::string& what)
      : std::runtime_error(backend + ": " + what), backend_(std::move(backend)) {}

  const std::string& backend() const noexcept { return backend_; }

 private:
  std::string backend_;
};

// Filesystem failures (unwritable output directory, unreadable input).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ralc

#endif  // RALC_ERROR_HPP_
