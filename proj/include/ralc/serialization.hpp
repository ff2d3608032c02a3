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

#ifndef RALC_SERIALIZATION_HPP_
#define RALC_SERIALIZATION_HPP_

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"
#include "ralc/beta.hpp"
#include "ralc/calibrators.hpp"
#include "ralc/metrics.hpp"
#include "ralc/signals.hpp"

namespace ralc {

using Json = nlohmann::json;

// {"alpha": a, "beta": b}
Json to_json(const BetaConfidence& d);
BetaConfidence beta_from_json(const Json& j);

// {"kind": "platt", "params": {...}}
Json to_json(const CalibrationMap& map);
CalibrationMap calibration_map_from_json(const Json& j);

// Optional metrics serialise as null.
Json to_json(const EvaluationReport& report);

// {"text", "token_logprobs"?, "cluster_id"?}; cluster_id defaults to 0.
Json to_json(const SampledResponse& r);
SampledResponse sampled_response_from_json(const Json& j);

// Shortest round-trip decimal form; "nan" for NaN, empty for absent.
std::string format_double(double v);

std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& report);
// Header plus one row.
std::string report_to_csv(const EvaluationReport& report);

// Columns: bin_low,bin_high,mean_conf,accuracy,count
std::string reliability_to_csv(std::span<const ReliabilityBin> bins);

// Whole-file helpers; failures raise IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace ralc

#endif  // RALC_SERIALIZATION_HPP_
