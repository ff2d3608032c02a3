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

#include "ralc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_set>

#include "ralc/error.hpp"

namespace ralc {

namespace {

std::string required_string(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing required field '") + key + "'");
  if (!j.at(key).is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

Grade grade_from_string(const std::string& s) {
  if (s == "CORRECT") return Grade::kCorrect;
  if (s == "INCORRECT") return Grade::kIncorrect;
  if (s == "NOT_ATTEMPTED") return Grade::kNotAttempted;
  throw ParseError("unknown grade '" + s + "'");
}

DatasetRecord parse_record(const Json& j) {
  DatasetRecord r;
  r.question = required_string(j, "question");
  r.gold_answer = required_string(j, "gold_answer");
  r.context = optional_string(j, "context");
  r.title = optional_string(j, "title");
  if (j.contains("choices") && !j.at("choices").is_null()) {
    if (!j.at("choices").is_array()) throw ParseError("field 'choices' must be an array");
    for (const auto& c : j.at("choices")) {
      if (!c.is_string()) throw ParseError("choices must be strings");
      r.choices.push_back(c.get<std::string>());
    }
  }
  if (!j.contains("responses")) throw ParseError("missing required field 'responses'");
  if (!j.at("responses").is_array()) throw ParseError("field 'responses' must be an array");
  r.clustered = true;
  for (const auto& rj : j.at("responses")) {
    r.responses.push_back(sampled_response_from_json(rj));
    if (!rj.contains("cluster_id") || rj.at("cluster_id").is_null()) r.clustered = false;
  }
  if (r.responses.empty()) r.clustered = false;
  if (j.contains("label") && !j.at("label").is_null()) {
    const Json& l = j.at("label");
    if (l.is_boolean()) {
      r.label = l.get<bool>() ? CorrectnessLabel::kCorrect : CorrectnessLabel::kIncorrect;
    } else if (l.is_number_integer() && (l.get<long long>() == 0 || l.get<long long>() == 1)) {
      r.label = label_from_int(static_cast<int>(l.get<long long>()));
    } else {
      throw ParseError("field 'label' must be 0 or 1");
    }
  }
  if (auto g = optional_string(j, "grade")) r.grade = grade_from_string(*g);
  return r;
}

}  // namespace

std::vector<DatasetRecord> parse_dataset(const std::string& jsonl) {
  std::vector<DatasetRecord> out;
  std::unordered_set<std::string> ids;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(where + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw ParseError(where + ": record must be a JSON object");
    std::string id;
    try {
      id = required_string(j, "id");
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (id.empty()) throw ParseError(where + ": empty record id");
    if (!ids.insert(id).second) throw ParseError(where + ": duplicate record id '" + id + "'");
    try {
      DatasetRecord r = parse_record(j);
      r.id = id;
      out.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(where + " (record '" + id + "'): " + e.what());
    }
  }
  return out;
}

std::vector<DatasetRecord> ingest_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_text_file(path));
}

Json record_to_json(const DatasetRecord& r) {
  Json j{{"id", r.id}, {"question", r.question}, {"gold_answer", r.gold_answer}};
  if (r.context) j["context"] = *r.context;
  if (r.title) j["title"] = *r.title;
  if (!r.choices.empty()) j["choices"] = r.choices;
  Json responses = Json::array();
  for (const auto& resp : r.responses) {
    Json rj = to_json(resp);
    if (!r.clustered) rj.erase("cluster_id");
    responses.push_back(std::move(rj));
  }
  j["responses"] = std::move(responses);
  if (r.label) j["label"] = to_int(*r.label);
  if (r.grade) j["grade"] = std::string(to_string(*r.grade));
  return j;
}

std::string dataset_to_jsonl(const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

std::vector<DatasetRecord> make_synthetic_dataset(const SyntheticOptions& o) {
  if (o.n_records == 0 || o.n_responses == 0) throw InvalidArgument("synthetic dataset needs records and responses");
  if (!(o.mean_low >= 0.0 && o.mean_low <= o.mean_high && o.mean_high <= 1.0)) {
    throw InvalidArgument("synthetic mean range must satisfy 0 <= low <= high <= 1");
  }
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::vector<DatasetRecord> out;
  out.reserve(o.n_records);
  for (std::size_t i = 0; i < o.n_records; ++i) {
    const double mu = o.mean_low + (o.mean_high - o.mean_low) * unit(rng);
    const bool correct = unit(rng) < std::clamp(mu - o.bias, 0.0, 1.0);
    DatasetRecord r;
    r.id = "syn-" + std::to_string(i);
    r.question = "Synthetic question " + std::to_string(i) + "?";
    r.gold_answer = "answer " + std::to_string(i);
    r.label = correct ? CorrectnessLabel::kCorrect : CorrectnessLabel::kIncorrect;
    r.clustered = true;

    const auto n = o.n_responses;
    const auto majority = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(mu * static_cast<double>(n))), 1, n);
    const std::size_t chunk = std::max<std::size_t>(1, majority > 1 ? majority - 1 : 1);
    const std::string stated = correct ? r.gold_answer : "decoy " + std::to_string(i);
    for (std::size_t k = 0; k < n; ++k) {
      SampledResponse s;
      if (k < majority) {
        s.cluster_id = 0;
        s.text = confidence_marker(mu) + " The answer is " + stated + ".";
      } else {
        s.cluster_id = 1 + static_cast<int>((k - majority) / chunk);
        s.text = "The answer is alternative " + std::to_string(s.cluster_id) + ".";
      }
      for (int t = 0; t < 8; ++t) s.token_logprobs.push_back(std::min(0.0, std::log(std::max(mu, 1e-6)) + jitter(rng)));
      r.responses.push_back(std::move(s));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ralc
