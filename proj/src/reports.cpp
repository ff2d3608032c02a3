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

#include <cmath>
#include <system_error>

#include "ralc/error.hpp"
#include "ralc/pipeline.hpp"
#include "ralc/serialization.hpp"

namespace ralc {

namespace {

Json percent_json(const PercentChange& p) {
  auto num = [](double v) -> Json { return std::isnan(v) ? Json(nullptr) : Json(v); };
  return {{"fd_percent_reduction", num(p.fd)}, {"ece_percent_reduction", num(p.ece)}};
}

Json trace_json(const RecordTrace& t) {
  Json j{{"id", t.id},
         {"label", to_int(t.label)},
         {"original_text", t.original_text},
         {"rewritten_text", t.rewritten_text},
         {"linguistic_pre", to_json(t.linguistic_pre)},
         {"linguistic_post", to_json(t.linguistic_post)}};
  if (t.original) j["original"] = to_json(*t.original);
  if (t.calibrated) j["calibrated"] = to_json(*t.calibrated);
  if (!t.hedges.empty()) {
    Json hs = Json::array();
    for (const auto& h : t.hedges) {
      hs.push_back({{"expression", h.entry.expression},
                    {"alpha", h.entry.profile.alpha()},
                    {"beta", h.entry.profile.beta()},
                    {"w1_distance", h.w1_distance}});
    }
    j["hedges"] = std::move(hs);
  }
  return j;
}

std::string metrics_csv(const PipelineResult& r) {
  std::string out = "space,stage," + report_csv_header() + "\n";
  auto row = [&](const char* space, const char* stage, const EvaluationReport& rep) {
    out += std::string(space) + "," + stage + "," + report_csv_row(rep) + "\n";
  };
  if (r.signal_pre) row("signal", "pre", *r.signal_pre);
  if (r.signal_post) row("signal", "post", *r.signal_post);
  row("linguistic", "pre", r.linguistic_pre);
  row("linguistic", "post", r.linguistic_post);
  return out;
}

}  // namespace

Json to_json(const PipelineResult& r) {
  Json failures = Json::array();
  for (const auto& f : r.failures) failures.push_back({{"id", f.id}, {"stage", f.stage}, {"error", f.error}});
  Json j{{"mode", r.mode},
         {"config", to_json(r.config)},
         {"counts",
          {{"n_eval_completed", r.records.size()},
           {"n_failed", r.failures.size()},
           {"n_not_attempted_excluded", r.n_not_attempted_excluded},
           {"n_train_used", r.n_train_used}}},
         {"linguistic", {{"pre", to_json(r.linguistic_pre)}, {"post", to_json(r.linguistic_post)}}},
         {"linguistic_change", percent_json(r.linguistic_change)},
         {"propagation_rho", r.propagation_rho ? Json(*r.propagation_rho) : Json(nullptr)},
         {"failures", std::move(failures)}};
  j["calibrator"] = r.calibrator ? to_json(*r.calibrator) : Json(nullptr);
  if (r.signal_pre && r.signal_post) {
    j["signal"] = {{"pre", to_json(*r.signal_pre)}, {"post", to_json(*r.signal_post)}};
  }
  if (r.signal_change) j["signal_change"] = percent_json(*r.signal_change);
  return j;
}

void emit_reports(const PipelineResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw IoError("cannot create output directory " + out_dir.string() + (ec ? ": " + ec.message() : ""));
  }
  write_text_file(out_dir / "report.json", to_json(result).dump(2) + "\n");
  write_text_file(out_dir / "metrics.csv", metrics_csv(result));
  write_text_file(out_dir / "reliability_pre.csv", reliability_to_csv(result.reliability_pre));
  write_text_file(out_dir / "reliability_post.csv", reliability_to_csv(result.reliability_post));
  std::string trace;
  for (const auto& t : result.records) trace += trace_json(t).dump() + "\n";
  write_text_file(out_dir / "trace.jsonl", trace);
}

}  // namespace ralc
