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

#include "ralc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "ralc/error.hpp"
#include "ralc/serialization.hpp"

using ralc::BetaConfidence;
using ralc::CorrectnessLabel;
using ralc::DatasetRecord;
using ralc::Gateway;
using ralc::Json;
using ralc::MockBackend;
using ralc::RunConfig;
using ralc::SampledResponse;
using ralc::SignalKind;

namespace {

std::vector<DatasetRecord> synthetic(std::size_t n, std::uint64_t seed, double bias = 0.2) {
  ralc::SyntheticOptions o;
  o.n_records = n;
  o.seed = seed;
  o.bias = bias;
  return ralc::make_synthetic_dataset(o);
}

// Means 0.02, 0.04, ..., 0.98 at concentration 10.
ralc::Lexicon grid_lexicon(std::size_t n = 49) {
  std::vector<ralc::LexiconEntry> es;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    es.push_back({"hedge-" + std::to_string(i), ralc::beta_from_mean_concentration(mu, 10.0)});
  }
  return ralc::Lexicon(std::move(es));
}

std::shared_ptr<MockBackend> scripted(const std::string& name, const std::string& tmpl,
                                      std::vector<std::string> replies) {
  ralc::BackendConfig c;
  c.name = name;
  auto m = std::make_shared<MockBackend>(c);
  m->script(tmpl, std::move(replies));
  return m;
}

DatasetRecord record_with_clusters(const std::vector<int>& ids) {
  DatasetRecord r;
  r.id = "r";
  r.question = "q";
  r.gold_answer = "g";
  r.clustered = true;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    r.responses.push_back({"response " + std::to_string(i), {-0.1, -0.3}, ids[i]});
  }
  return r;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    const auto end = s.find('\n', start);
    out.push_back(s.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

TEST_SUITE("estimate_signal") {
  TEST_CASE("semantic signal: majority 12 of 20 gives Beta(12, 8)") {
    std::vector<int> ids(20, 1);
    for (int i = 0; i < 12; ++i) ids[static_cast<std::size_t>(i + 3)] = 0;
    RunConfig c;
    c.signal = SignalKind::kSemantic;
    const auto est = ralc::estimate_signal(record_with_clusters(ids), c, Gateway{});
    CHECK(est.distribution.alpha() == 12.0);
    CHECK(est.distribution.beta() == 8.0);
    CHECK(est.representative_index == 3);
    CHECK(est.representative.text == "response 3");
    CHECK(est.clusters.majority_size() == 12);
  }

  TEST_CASE("linguistic signal with every evaluator returning 85") {
    Gateway g;
    for (int i = 0; i < 3; ++i) g.evaluators.push_back(scripted("ev" + std::to_string(i), "evaluator", {"85"}));
    RunConfig c;
    const auto est = ralc::estimate_signal(record_with_clusters({0, 0, 1}), c, g);
    CHECK(est.distribution.alpha() == doctest::Approx(0.85 * 9).epsilon(1e-12));
    CHECK(est.distribution.beta() == doctest::Approx(0.15 * 9).epsilon(1e-12));
    for (const auto& e : g.evaluators) CHECK(std::static_pointer_cast<MockBackend>(e)->call_count() == 3);
  }

  TEST_CASE("token signal over a singleton majority uses the degenerate rule") {
    RunConfig c;
    c.signal = SignalKind::kTokenProb;
    const auto est = ralc::estimate_signal(record_with_clusters({0}), c, Gateway{});
    const double p = std::exp(-0.2);
    CHECK(est.distribution.mean() == doctest::Approx(p).epsilon(1e-12));
    CHECK(est.distribution.concentration() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("token signal without log-probabilities is a usage error") {
    auto r = record_with_clusters({0, 0});
    r.responses[1].token_logprobs.clear();
    RunConfig c;
    c.signal = SignalKind::kTokenProb;
    CHECK_THROWS_AS(ralc::estimate_signal(r, c, Gateway{}), ralc::InvalidArgument);
  }

  TEST_CASE("live sampling and clustering through the gateway") {
    DatasetRecord r;
    r.id = "live";
    r.question = "Where is the Eiffel Tower?";
    r.gold_answer = "Paris";
    Gateway g;
    g.generator = scripted("gen", "direct_qa_truthfulqa", {"Rome.", "Paris.", "paris", "Paris!", "Berlin"});
    g.clusterer = ralc::make_echo_backend(ralc::BackendConfig::for_role(ralc::BackendRole::kClusterer, "cl"));
    RunConfig c;
    c.signal = SignalKind::kSemantic;
    c.n_self_consistency = 6;
    const auto est = ralc::estimate_signal(r, c, g);
    CHECK(std::static_pointer_cast<MockBackend>(g.generator)->call_count() == 6);
    // Paris x3 vs Rome, Berlin x2 (the last reply repeats).
    CHECK(est.distribution.alpha() == 3.0);
    CHECK(est.distribution.beta() == 3.0);
    CHECK(est.representative.text == "Paris.");
  }

  TEST_CASE("missing backends are reported") {
    DatasetRecord r;
    r.id = "x";
    r.question = "q";
    r.gold_answer = "g";
    CHECK_THROWS_AS(ralc::estimate_signal(r, RunConfig{}, Gateway{}), ralc::InvalidArgument);
  }
}

TEST_SUITE("run_ralc") {
  TEST_CASE("closed loop: rho = 1 and linguistic FD does not increase") {
    const auto records = synthetic(200, 5);
    RunConfig c;
    c.seed = 5;
    const auto g = Gateway::echo();
    const auto res = ralc::run_ralc(records, c, g, grid_lexicon());
    CHECK(res.failures.empty());
    const auto prompts = std::static_pointer_cast<MockBackend>(g.rewriter)->requests();
    REQUIRE(prompts.size() == res.records.size());
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      for (const auto& h : res.records[i].hedges) CHECK(prompts[i].prompt.find(h.entry.expression) != std::string::npos);
    }
    CHECK(res.n_train_used == 60);
    CHECK(res.records.size() == 140);
    REQUIRE(res.propagation_rho.has_value());
    CHECK(*res.propagation_rho == 1.0);
    CHECK(res.linguistic_post.mean_fd <= res.linguistic_pre.mean_fd);
    REQUIRE(res.signal_pre.has_value());
    CHECK(res.signal_post->generalized_ece < res.signal_pre->generalized_ece);
    for (const auto& t : res.records) {
      // Calibrated means come back through the marker and the evaluators.
      CHECK(rel_diff(t.linguistic_post.mean(), t.calibrated->mean()) < 1e-12);
      CHECK(t.hedges.size() == c.k);
      CHECK(ralc::extract_confidence_marker(t.rewritten_text) == t.calibrated->mean());
    }
  }

  TEST_CASE("concentration is preserved end to end") {
    for (auto signal : {SignalKind::kLinguistic, SignalKind::kSemantic, SignalKind::kTokenProb}) {
      RunConfig c;
      c.signal = signal;
      c.w1_samples = 200;
      const auto res = ralc::run_ralc(synthetic(60, 8), c, Gateway::echo(), grid_lexicon());
      for (const auto& t : res.records) {
        CHECK(t.calibrated->concentration() == doctest::Approx(t.original->concentration()).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("identity map: calibrated equals original and the rewrite reports it") {
    const auto records = synthetic(40, 2);
    RunConfig c;
    c.w1_samples = 200;
    const auto res =
        ralc::apply_ralc(records, ralc::CalibrationMap::identity(), c, Gateway::echo(), grid_lexicon());
    for (const auto& t : res.records) {
      CHECK(*t.calibrated == *t.original);
      CHECK(rel_diff(t.linguistic_post.mean(), t.calibrated->mean()) < 1e-12);
    }
    CHECK(ralc::to_json(*res.signal_pre) == ralc::to_json(*res.signal_post));
  }

  TEST_CASE("k larger than the lexicon returns every entry") {
    RunConfig c;
    c.k = 50;
    c.shortlist_size = 50;
    const auto res = ralc::run_ralc(synthetic(20, 4), c, Gateway::echo(), grid_lexicon(5));
    for (const auto& t : res.records) {
      REQUIRE(t.hedges.size() == 5);
      for (std::size_t i = 1; i < t.hedges.size(); ++i) CHECK(t.hedges[i - 1].w1_distance <= t.hedges[i].w1_distance);
    }
  }

  TEST_CASE("configuration errors") {
    const auto records = synthetic(20, 1);
    RunConfig c;
    CHECK_THROWS_AS(ralc::run_ralc(records, c, Gateway::echo(), ralc::Lexicon{}), ralc::InvalidArgument);
    c.k = 0;
    CHECK_THROWS_AS(ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon()), ralc::InvalidArgument);
    c = {};
    CHECK_THROWS_AS(ralc::run_ralc({records[0]}, c, Gateway::echo(), grid_lexicon()), ralc::InvalidArgument);
  }

  TEST_CASE("single-class training split fails Platt") {
    auto records = synthetic(20, 1);
    for (auto& r : records) r.label = CorrectnessLabel::kCorrect;
    CHECK_THROWS_AS(ralc::run_ralc(records, RunConfig{}, Gateway::echo(), grid_lexicon()), ralc::InvalidArgument);
  }

  TEST_CASE("gateway failures are excluded and counted; other errors propagate") {
    auto records = synthetic(30, 6);
    for (auto& s : records[20].responses) s.text += " FAIL";
    for (auto& s : records[3].responses) s.text += " FAIL";
    auto echo = Gateway::echo();
    auto inner = ralc::make_echo_backend(ralc::BackendConfig::for_role(ralc::BackendRole::kRewriter, "rw"));
    auto failing = std::make_shared<MockBackend>(inner->config(), [inner](const ralc::ChatRequest& r) {
      if (r.tags.count("response") && r.tags.at("response").find("FAIL") != std::string::npos) return std::string();
      return inner->complete(r);
    });
    echo.rewriter = failing;
    // Training records pass through the rewriter untouched, so only the eval failure shows.
    auto res = ralc::run_ralc(records, RunConfig{}, echo, grid_lexicon());
    REQUIRE(res.failures.size() == 1);
    CHECK(res.failures[0].id == records[20].id);
    CHECK(res.failures[0].stage == "eval");
    CHECK(res.failures[0].error.find("rw") != std::string::npos);
    CHECK(res.records.size() == 20);

    // Evaluator failures on a training record are counted at the train stage.
    auto ev_fail = Gateway::echo();
    auto ev_inner = ralc::make_echo_backend({});
    ev_fail.evaluators[1] = std::make_shared<MockBackend>(ralc::BackendConfig{}, [ev_inner](const ralc::ChatRequest& r) {
      if (r.tags.at("sentence").find("FAIL") != std::string::npos) return std::string("no number");
      return ev_inner->complete(r);
    });
    res = ralc::run_ralc(records, RunConfig{}, ev_fail, grid_lexicon());
    REQUIRE(res.failures.size() == 2);
    CHECK(res.failures[0].stage == "train");
    CHECK(res.failures[0].id == records[3].id);
    CHECK(res.failures[1].stage == "eval");
    CHECK(res.n_train_used == 8);

    RunConfig token;
    token.signal = SignalKind::kTokenProb;
    records[25].responses[0].token_logprobs.clear();
    CHECK_THROWS_AS(ralc::run_ralc(records, token, Gateway::echo(), grid_lexicon()), ralc::InvalidArgument);
  }

  TEST_CASE("NOT_ATTEMPTED grades are excluded by default") {
    auto records = synthetic(30, 7);
    records[15].label.reset();
    records[15].grade = ralc::Grade::kNotAttempted;
    const auto res = ralc::run_ralc(records, RunConfig{}, Gateway::echo(), grid_lexicon());
    CHECK(res.n_not_attempted_excluded == 1);
    CHECK(res.records.size() == 20);
    RunConfig keep;
    keep.exclude_not_attempted = false;
    const auto kept = ralc::run_ralc(records, keep, Gateway::echo(), grid_lexicon());
    CHECK(kept.records.size() == 21);
    CHECK(kept.records[6].label == CorrectnessLabel::kIncorrect);
  }

  TEST_CASE("grader labels records without gold labels") {
    auto records = synthetic(30, 12);
    for (auto& r : records) r.label.reset();
    const auto res = ralc::run_ralc(records, RunConfig{}, Gateway::echo(), grid_lexicon());
    const auto ref = synthetic(30, 12);
    // The echo grader finds the gold answer in correct responses only.
    for (std::size_t i = 0; i < res.records.size(); ++i) CHECK(res.records[i].label == ref[i + 9].label);
  }

  TEST_CASE("eval labels never reach the calibrator") {
    const auto records = synthetic(100, 13);
    RunConfig c;
    const auto base = ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon());
    auto permuted = records;
    std::mt19937_64 rng(99);
    std::vector<std::optional<CorrectnessLabel>> labels;
    for (std::size_t i = 30; i < permuted.size(); ++i) labels.push_back(permuted[i].label);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 30; i < permuted.size(); ++i) {
      permuted[i].label = labels[i - 30] == CorrectnessLabel::kCorrect ? CorrectnessLabel::kIncorrect
                                                                        : CorrectnessLabel::kCorrect;
    }
    const auto other = ralc::run_ralc(permuted, c, Gateway::echo(), grid_lexicon());
    CHECK(base.calibrator->params() == other.calibrator->params());
  }

  TEST_CASE("parallel record processing gives identical output") {
    const auto records = synthetic(60, 21);
    RunConfig c;
    c.w1_samples = 300;
    const auto serial = ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon());
    c.max_parallel_records = 4;
    auto parallel = ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon());
    parallel.config.max_parallel_records = 1;
    CHECK(ralc::to_json(serial).dump() == ralc::to_json(parallel).dump());
  }
}

TEST_SUITE("run_baseline") {
  TEST_CASE("direct beta rewrite closes the loop") {
    RunConfig c;
    const auto res = ralc::run_baseline(synthetic(100, 3), c, Gateway::echo(), ralc::BaselineKind::kDirectBetaRewrite);
    CHECK(res.mode == "direct_beta_rewrite");
    REQUIRE(res.propagation_rho.has_value());
    CHECK(*res.propagation_rho == 1.0);
    CHECK(res.calibrator.has_value());
    for (const auto& t : res.records) {
      CHECK(t.hedges.empty());
      // Two-decimal targets in the prompt; the echo reads the exact mean from the tag.
      CHECK(rel_diff(t.linguistic_post.mean(), t.calibrated->mean()) < 1e-12);
    }
  }

  TEST_CASE("hedged QA has no calibrated fields") {
    const auto res = ralc::run_baseline(synthetic(40, 3), RunConfig{}, Gateway::echo(), ralc::BaselineKind::kHedgedQa);
    CHECK(res.mode == "hedged_qa");
    CHECK_FALSE(res.calibrator.has_value());
    CHECK_FALSE(res.signal_pre.has_value());
    CHECK_FALSE(res.signal_post.has_value());
    CHECK_FALSE(res.propagation_rho.has_value());
    for (const auto& t : res.records) {
      CHECK_FALSE(t.original.has_value());
      CHECK_FALSE(t.calibrated.has_value());
    }
    const auto j = ralc::to_json(res);
    CHECK_FALSE(j.contains("signal"));
    CHECK(j.contains("linguistic"));
  }

  TEST_CASE("empty evaluation split is an error for both baselines") {
    const auto one = synthetic(1, 3);
    for (auto kind : {ralc::BaselineKind::kHedgedQa, ralc::BaselineKind::kDirectBetaRewrite}) {
      CHECK_THROWS_AS(ralc::run_baseline(one, RunConfig{}, Gateway::echo(), kind), ralc::InvalidArgument);
      CHECK_THROWS_AS(ralc::run_baseline({}, RunConfig{}, Gateway::echo(), kind), ralc::InvalidArgument);
    }
  }

  TEST_CASE("names") {
    CHECK(ralc::baseline_kind_from_string("hedged_qa") == ralc::BaselineKind::kHedgedQa);
    CHECK(ralc::to_string(ralc::BaselineKind::kDirectBetaRewrite) == "direct_beta_rewrite");
    CHECK_THROWS_AS(ralc::baseline_kind_from_string("nope"), ralc::InvalidArgument);
    CHECK(ralc::signal_kind_from_string("token_prob") == SignalKind::kTokenProb);
    CHECK_THROWS_AS(ralc::signal_kind_from_string("tokens"), ralc::InvalidArgument);
  }
}

TEST_SUITE("run_cross_domain") {
  TEST_CASE("evaluating on the training set matches the in-domain path with a full fit") {
    const auto records = synthetic(50, 31);
    RunConfig c;
    c.w1_samples = 300;
    auto out = ralc::run_cross_domain(records, {{"same", records}}, c, Gateway::echo(), grid_lexicon());
    const auto map = ralc::fit_calibrator_on_records(records, c, Gateway::echo());
    auto direct = ralc::apply_ralc(records, map, c, Gateway::echo(), grid_lexicon());
    auto& cross = out.at("same");
    CHECK(cross.mode == "cross_domain");
    CHECK(cross.n_train_used == 50);
    cross.mode = direct.mode;
    cross.n_train_used = direct.n_train_used;
    CHECK(ralc::to_json(cross).dump() == ralc::to_json(direct).dump());
  }

  TEST_CASE("a shared bias direction transfers") {
    RunConfig c;
    c.w1_samples = 200;
    const auto out = ralc::run_cross_domain(synthetic(400, 41), {{"a", synthetic(300, 42)}, {"b", synthetic(300, 43, 0.15)}},
                                            c, Gateway::echo(), grid_lexicon());
    for (const auto& [name, r] : out) {
      CAPTURE(name);
      CHECK(r.signal_post->generalized_ece < r.signal_pre->generalized_ece);
      CHECK(r.signal_change->ece > 0.0);
      CHECK(r.signal_pre->miscalibration_bias > 0.0);
      CHECK(std::abs(r.signal_post->miscalibration_bias) < r.signal_pre->miscalibration_bias);
    }
  }

  TEST_CASE("zero bias: no catastrophic change") {
    RunConfig c;
    c.w1_samples = 200;
    const auto out = ralc::run_cross_domain(synthetic(400, 51, 0.0), {{"z", synthetic(400, 52, 0.0)}}, c,
                                            Gateway::echo(), grid_lexicon());
    const auto& r = out.at("z");
    CHECK(std::abs(r.signal_post->generalized_ece - r.signal_pre->generalized_ece) < 0.03);
    CHECK(std::abs(r.signal_post->miscalibration_bias) < 0.05);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(ralc::run_cross_domain({}, {{"a", synthetic(5, 1)}}, RunConfig{}, Gateway::echo(), grid_lexicon()),
                    ralc::InvalidArgument);
    CHECK_THROWS_AS(ralc::run_cross_domain(synthetic(5, 1), {}, RunConfig{}, Gateway::echo(), grid_lexicon()),
                    ralc::InvalidArgument);
  }
}

TEST_SUITE("build_lexicon_pipeline") {
  Gateway scored_gateway(const std::function<std::string(const ralc::ChatRequest&)>& evaluator) {
    Gateway g;
    for (int i = 0; i < 3; ++i) {
      ralc::BackendConfig c;
      c.name = "ev" + std::to_string(i);
      c.retries = 0;
      g.evaluators.push_back(std::make_shared<MockBackend>(c, evaluator));
    }
    g.rewriter = ralc::make_echo_backend(ralc::BackendConfig::for_role(ralc::BackendRole::kRewriter, "rw"));
    return g;
  }

  TEST_CASE("expression scored near 95 gets a profile with mean about 0.95") {
    std::atomic<int> n{0};
    const auto g = scored_gateway([&](const ralc::ChatRequest&) {
      static const char* kScores[] = {"94", "95", "96", "95.5", "94.5"};
      return std::string(kScores[n++ % 5]);
    });
    ralc::LexiconBuildConfig cfg;
    const auto res = ralc::build_lexicon_pipeline({"certainly"}, cfg, g);
    REQUIRE(res.lexicon.size() == 1);
    CHECK(res.score_counts.at("certainly") == 180);
    CHECK(res.lexicon.entries()[0].profile.mean() == doctest::Approx(0.95).epsilon(0.002));
    CHECK(res.excluded.empty());
  }

  TEST_CASE("sampled sentences carry the expression") {
    ralc::Gateway g = scored_gateway([](const ralc::ChatRequest& r) {
      CHECK(r.tags.at("sentence").rfind("maybe, ", 0) == 0);
      return std::string("40");
    });
    ralc::LexiconBuildConfig cfg;
    cfg.rewrites_per_expression = 4;
    const auto res = ralc::build_lexicon_pipeline({"maybe"}, cfg, g);
    CHECK(res.score_counts.at("maybe") == 36);
  }

  TEST_CASE("bimodal scores give a low concentration") {
    std::atomic<int> n{0};
    const auto g = scored_gateway([&](const ralc::ChatRequest&) { return std::string(n++ % 2 ? "8" : "92"); });
    const auto res = ralc::build_lexicon_pipeline({"perhaps"}, ralc::LexiconBuildConfig{}, g);
    CHECK(res.lexicon.entries()[0].profile.concentration() < 2.0);
    CHECK(res.lexicon.entries()[0].profile.mean() == doctest::Approx(0.5).epsilon(0.02));
  }

  TEST_CASE("an expression whose scoring always fails is excluded") {
    const auto g = scored_gateway([](const ralc::ChatRequest& r) {
      return std::string(r.tags.at("sentence").find("nope") != std::string::npos ? "unclear" : "70");
    });
    ralc::LexiconBuildConfig cfg;
    cfg.rewrites_per_expression = 3;
    const auto res = ralc::build_lexicon_pipeline({"likely", "nope"}, cfg, g);
    CHECK(res.lexicon.size() == 1);
    CHECK(res.excluded == std::vector<std::string>{"nope"});
    CHECK(res.score_counts.at("nope") == 0);
    CHECK_THROWS_AS(ralc::build_lexicon_pipeline({"nope"}, cfg, g), ralc::GatewayError);
  }

  TEST_CASE("errors and determinism") {
    const auto g = scored_gateway([](const ralc::ChatRequest&) { return std::string("60"); });
    CHECK_THROWS_AS(ralc::build_lexicon_pipeline({}, ralc::LexiconBuildConfig{}, g), ralc::InvalidArgument);
    ralc::LexiconBuildConfig cfg;
    cfg.rewrites_per_expression = 0;
    CHECK_THROWS_AS(ralc::build_lexicon_pipeline({"a"}, cfg, g), ralc::InvalidArgument);
    const auto echo = Gateway::echo();
    const auto a = ralc::build_lexicon_pipeline({"a", "b"}, ralc::LexiconBuildConfig{}, echo);
    const auto b = ralc::build_lexicon_pipeline({"a", "b"}, ralc::LexiconBuildConfig{}, echo);
    CHECK(a.lexicon == b.lexicon);
  }

  TEST_CASE("sourcing through the generator") {
    const auto words = ralc::source_hedge_expressions(Gateway::echo());
    CHECK_FALSE(words.empty());
  }
}

TEST_SUITE("emit_reports") {
  TEST_CASE("emitted files, bin counts and percent reductions") {
    const auto dir = std::filesystem::temp_directory_path() / "ralc_emit_test";
    std::filesystem::remove_all(dir);
    RunConfig c;
    c.seed = 17;
    const auto records = synthetic(80, 17);
    const auto res = ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon());
    ralc::emit_reports(res, dir / "a");
    for (const char* f : {"report.json", "metrics.csv", "reliability_pre.csv", "reliability_post.csv", "trace.jsonl"}) {
      CHECK(std::filesystem::exists(dir / "a" / f));
    }
    const auto report = Json::parse(ralc::read_text_file(dir / "a" / "report.json"));
    CHECK(report == ralc::to_json(res));
    CHECK(report.at("counts").at("n_eval_completed") == res.records.size());
    const auto& sc = report.at("signal_change");
    const double pre_fd = report.at("signal").at("pre").at("mean_fd");
    const double post_fd = report.at("signal").at("post").at("mean_fd");
    CHECK(sc.at("fd_percent_reduction").get<double>() == doctest::Approx(100.0 * (pre_fd - post_fd) / pre_fd));
    const double pre_ece = report.at("linguistic").at("pre").at("generalized_ece");
    const double post_ece = report.at("linguistic").at("post").at("generalized_ece");
    CHECK(report.at("linguistic_change").at("ece_percent_reduction").get<double>() ==
          doctest::Approx(100.0 * (pre_ece - post_ece) / pre_ece));

    for (const char* f : {"reliability_pre.csv", "reliability_post.csv"}) {
      const auto lines = split_lines(ralc::read_text_file(dir / "a" / f));
      REQUIRE(lines.size() == c.ece.n_bins + 1);
      CHECK(lines[0] == "bin_low,bin_high,mean_conf,accuracy,count");
      std::size_t total = 0;
      for (std::size_t i = 1; i < lines.size(); ++i) total += std::stoul(lines[i].substr(lines[i].rfind(',') + 1));
      CHECK(total == res.records.size());
    }
    const auto metrics = split_lines(ralc::read_text_file(dir / "a" / "metrics.csv"));
    REQUIRE(metrics.size() == 5);
    CHECK(metrics[1].rfind("signal,pre,", 0) == 0);
    CHECK(metrics[4].rfind("linguistic,post,", 0) == 0);
    const auto trace = split_lines(ralc::read_text_file(dir / "a" / "trace.jsonl"));
    REQUIRE(trace.size() == res.records.size());
    for (const auto& line : trace) CHECK(Json::parse(line).at("hedges").size() == c.k);

    const auto again = ralc::run_ralc(records, c, Gateway::echo(), grid_lexicon());
    ralc::emit_reports(again, dir / "b");
    for (const char* f : {"report.json", "metrics.csv", "reliability_pre.csv", "reliability_post.csv", "trace.jsonl"}) {
      CHECK(ralc::read_text_file(dir / "a" / f) == ralc::read_text_file(dir / "b" / f));
    }

    ralc::write_text_file(dir / "plain-file", "x");
    CHECK_THROWS_AS(ralc::emit_reports(res, dir / "plain-file" / "sub"), ralc::IoError);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("gateway config") {
  TEST_CASE("echo backends from JSON") {
    const auto j = Json::parse(R"({
      "generator": {"kind": "echo"}, "grader": {"kind": "echo"}, "clusterer": {"kind": "echo"},
      "rewriter": {"kind": "echo", "name": "rw"}, "evaluators": [{"kind": "echo"}, {"kind": "echo"}],
      "evaluator_passes": 2, "human_annotated_cues": "cue"})");
    const auto g = ralc::gateway_from_json(j);
    CHECK(g.evaluators.size() == 2);
    CHECK(g.evaluator_passes == 2);
    CHECK(g.human_annotated_cues == "cue");
    CHECK(g.rewriter->name() == "rw");
    CHECK(g.grader->config().temperature == 0.0);
    CHECK(g.rewriter->config().temperature == 1.0);
  }

  TEST_CASE("cue file resolves against the config directory") {
    const auto dir = std::filesystem::temp_directory_path() / "ralc_gateway_cfg";
    std::filesystem::create_directories(dir);
    ralc::write_text_file(dir / "cues.txt", "from file");
    ralc::write_text_file(dir / "gw.json",
                          R"({"evaluators": [{"kind": "echo"}], "human_annotated_cues_file": "cues.txt"})");
    CHECK(ralc::load_gateway_config(dir / "gw.json").human_annotated_cues == "from file");
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("invalid configs") {
    CHECK_THROWS_AS(ralc::gateway_from_json(Json::parse(R"({"grader": {"kind": "carrier-pigeon"}})")), ralc::ParseError);
    CHECK_THROWS_AS(ralc::gateway_from_json(Json::parse(R"({"evaluator_passes": 0})")), ralc::ParseError);
    CHECK_THROWS_AS(ralc::gateway_from_json(Json::parse(R"([])")), ralc::ParseError);
    CHECK_THROWS_AS(ralc::gateway_from_json(Json::parse(R"({"evaluators": {}})")), ralc::ParseError);
  }
}
