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

#include "ralc/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ralc/error.hpp"

namespace ralc {

namespace {

double number_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

std::vector<double> number_array(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(std::string("field '") + key + "' must be an array");
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

Json optional_number(const std::optional<double>& v) {
  if (!v || std::isnan(*v)) return nullptr;
  return *v;
}

}  // namespace

Json to_json(const BetaConfidence& d) { return {{"alpha", d.alpha()}, {"beta", d.beta()}}; }

BetaConfidence beta_from_json(const Json& j) {
  try {
    return BetaConfidence(number_field(j, "alpha"), number_field(j, "beta"));
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

Json to_json(const CalibrationMap& map) {
  Json params = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PlattParams>) {
          return {{"w", p.w}, {"b", p.b}};
        } else if constexpr (std::is_same_v<T, TemperatureParams>) {
          return {{"temperature", p.temperature}};
        } else if constexpr (std::is_same_v<T, IsotonicParams>) {
          return {{"x", p.x}, {"y", p.y}};
        } else {
          return {{"bin_values", p.bin_values}};
        }
      },
      map.params());
  return {{"kind", to_string(map.kind())}, {"params", std::move(params)}};
}

CalibrationMap calibration_map_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParseError("calibration map needs a string 'kind'");
  }
  if (!j.contains("params") || !j.at("params").is_object()) {
    throw ParseError("calibration map needs a 'params' object");
  }
  const Json& p = j.at("params");
  try {
    switch (calibrator_kind_from_string(j.at("kind").get<std::string>())) {
      case CalibratorKind::kPlatt:
        return CalibrationMap(PlattParams{number_field(p, "w"), number_field(p, "b")});
      case CalibratorKind::kTemperature:
        return CalibrationMap(TemperatureParams{number_field(p, "temperature")});
      case CalibratorKind::kIsotonic:
        return CalibrationMap(IsotonicParams{number_array(p, "x"), number_array(p, "y")});
      case CalibratorKind::kHistogram:
        return CalibrationMap(HistogramParams{number_array(p, "bin_values")});
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid calibration map: ") + e.what());
  }
  throw ParseError("unknown calibrator kind");
}

Json to_json(const EvaluationReport& r) {
  return {{"mean_fd", r.mean_fd},
          {"generalized_ece", r.generalized_ece},
          {"mean_expected_brier", r.mean_expected_brier},
          {"mean_expected_nll", r.mean_expected_nll},
          {"auroc", optional_number(r.auroc)},
          {"spearman_rho", optional_number(r.spearman_rho)},
          {"miscalibration_bias", r.miscalibration_bias},
          {"n_instances", r.n_instances},
          {"ece_method", r.ece_method}};
}

Json to_json(const SampledResponse& r) {
  Json j{{"text", r.text}, {"cluster_id", r.cluster_id}};
  if (!r.token_logprobs.empty()) j["token_logprobs"] = r.token_logprobs;
  return j;
}

SampledResponse sampled_response_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("text") || !j.at("text").is_string()) {
    throw ParseError("response needs a string 'text'");
  }
  SampledResponse r;
  r.text = j.at("text").get<std::string>();
  if (j.contains("token_logprobs") && !j.at("token_logprobs").is_null()) {
    r.token_logprobs = number_array(j, "token_logprobs");
  }
  if (j.contains("cluster_id") && !j.at("cluster_id").is_null()) {
    const Json& c = j.at("cluster_id");
    if (!c.is_number_integer() || c.get<long long>() < 0) {
      throw ParseError("'cluster_id' must be a non-negative integer");
    }
    r.cluster_id = c.get<int>();
  }
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {
std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
}  // namespace

std::string report_csv_header() {
  return "mean_fd,generalized_ece,mean_expected_brier,mean_expected_nll,auroc,spearman_rho,"
         "miscalibration_bias,n_instances,ece_method";
}

std::string report_csv_row(const EvaluationReport& r) {
  std::ostringstream os;
  os << format_double(r.mean_fd) << ',' << format_double(r.generalized_ece) << ','
     << format_double(r.mean_expected_brier) << ',' << format_double(r.mean_expected_nll) << ','
     << format_optional(r.auroc) << ',' << format_optional(r.spearman_rho) << ','
     << format_double(r.miscalibration_bias) << ',' << r.n_instances << ',' << r.ece_method;
  return os.str();
}

std::string report_to_csv(const EvaluationReport& r) {
  return report_csv_header() + "\n" + report_csv_row(r) + "\n";
}

std::string reliability_to_csv(std::span<const ReliabilityBin> bins) {
  std::ostringstream os;
  os << "bin_low,bin_high,mean_conf,accuracy,count\n";
  for (const auto& b : bins) {
    os << format_double(b.bin_low) << ',' << format_double(b.bin_high) << ','
       << format_double(b.mean_confidence) << ',' << format_double(b.accuracy) << ',' << b.count << '\n';
  }
  return os.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ralc
