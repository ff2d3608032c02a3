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
#include <atomic>
#include <exception>
#include <functional>
#include <random>
#include <thread>

#include "ralc/detail/seed.hpp"
#include "ralc/error.hpp"
#include "ralc/signals.hpp"

namespace ralc {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each slot holds
// either a value or the exception fn raised; order follows the input.
template <typename T>
struct Slot {
  std::optional<T> value;
  std::exception_ptr error;
};

template <typename T>
std::vector<Slot<T>> parallel_map(std::size_t n, std::size_t threads, const std::function<T(std::size_t)>& fn) {
  std::vector<Slot<T>> out(n);
  auto run = [&](std::size_t i) {
    try {
      out[i].value.emplace(fn(i));
    } catch (...) {
      out[i].error = std::current_exception();
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) run(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

// Gateway failures are per-record and recoverable; anything else aborts.
std::optional<std::string> gateway_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const GatewayError& g) {
    return std::string(g.what());
  }
}

ChatBackend& require(const BackendPtr& b, const char* role) {
  if (!b) throw InvalidArgument(std::string("gateway has no ") + role + " backend");
  return *b;
}

std::pair<TemplateName, Slots> qa_prompt(const DatasetRecord& r, bool hedged) {
  if (!r.choices.empty()) {
    return {hedged ? TemplateName::kHedgedQaMmlu : TemplateName::kDirectQaMmlu,
            {{"question", r.question}, {"choices", format_choices(r.choices)}}};
  }
  if (r.context) {
    Slots s{{"question", r.question}, {"context", *r.context}};
    if (r.title) s["title"] = *r.title;
    return {hedged ? TemplateName::kHedgedQaSquad : TemplateName::kDirectQaSquad, std::move(s)};
  }
  return {hedged ? TemplateName::kHedgedQaTruthfulqa : TemplateName::kDirectQaTruthfulqa, {{"question", r.question}}};
}

std::string trimmed_nonempty(const std::string& reply) {
  const auto b = reply.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) throw ParseError("empty answer");
  const auto e = reply.find_last_not_of(" \t\r\n");
  return reply.substr(b, e - b + 1);
}

// Responses with cluster ids, sampling and clustering through the gateway
// when the record does not carry them.
std::vector<SampledResponse> prepared_responses(const DatasetRecord& r, const RunConfig& config,
                                                const Gateway& gateway) {
  std::vector<SampledResponse> responses = r.responses;
  bool clustered = r.clustered;
  if (responses.empty()) {
    if (config.n_self_consistency == 0) throw InvalidArgument("n_self_consistency must be at least 1");
    auto& gen = require(gateway.generator, "generator");
    const auto [name, slots] = qa_prompt(r, false);
    const ChatRequest req{std::string(to_string(name)), render_template(name, slots), {}};
    for (std::size_t i = 0; i < config.n_self_consistency; ++i) {
      responses.push_back({request_with_retry(gen, req, trimmed_nonempty), {}, 0});
    }
    clustered = false;
  }
  if (!clustered) {
    if (responses.size() == 1) {
      responses[0].cluster_id = 0;
    } else {
      std::vector<std::string> texts;
      for (const auto& s : responses) texts.push_back(s.text);
      const auto ids = cluster_responses(r.question, texts, require(gateway.clusterer, "clusterer"));
      for (std::size_t i = 0; i < ids.size(); ++i) responses[i].cluster_id = ids[i];
    }
  }
  return responses;
}

BetaConfidence linguistic_estimate(const std::string& text, const Gateway& gateway) {
  return linguistic_confidence_distribution(
      evaluate_linguistic_confidence(text, gateway.evaluators, gateway.evaluator_passes, gateway.human_annotated_cues));
}

// nullopt means the record is excluded as NOT_ATTEMPTED.
std::optional<CorrectnessLabel> resolve_label(const DatasetRecord& r, const std::string& answer,
                                              const RunConfig& config, const Gateway& gateway) {
  if (r.label) return r.label;
  const Grade g = r.grade ? *r.grade
                          : grade_response(r.question, r.gold_answer, answer, require(gateway.grader, "grader"));
  if (auto l = grade_to_label(g)) return l;
  if (config.exclude_not_attempted) return std::nullopt;
  return CorrectnessLabel::kIncorrect;
}

struct Outcome {
  bool not_attempted = false;
  RecordTrace trace;
};

void validate(const RunConfig& c) {
  if (c.k == 0) throw InvalidArgument("k must be at least 1");
  if (c.shortlist_size == 0) throw InvalidArgument("shortlist_size must be at least 1");
  if (c.w1_samples == 0) throw InvalidArgument("w1_samples must be at least 1");
}

// Shared evaluation loop. Failed and excluded records are counted apart.
void run_eval(PipelineResult& result, const std::vector<DatasetRecord>& records,
              const std::function<Outcome(const DatasetRecord&)>& process) {
  const auto slots = parallel_map<Outcome>(records.size(), result.config.max_parallel_records,
                                           [&](std::size_t i) { return process(records[i]); });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].error) {
      if (auto msg = gateway_failure(slots[i].error)) {
        result.failures.push_back({records[i].id, "eval", *msg});
        continue;
      }
    }
    if (slots[i].value->not_attempted) {
      ++result.n_not_attempted_excluded;
      continue;
    }
    result.records.push_back(slots[i].value->trace);
  }
}

double safe_percent(double before, double after) { return percent_reduction(before, after); }

void aggregate(PipelineResult& result, bool has_signal, bool has_target) {
  if (result.records.empty()) {
    throw InvalidArgument("no evaluation record completed (" + std::to_string(result.failures.size()) +
                          " failed, " + std::to_string(result.n_not_attempted_excluded) + " not attempted)");
  }
  std::vector<CorrectnessLabel> labels;
  std::vector<BetaConfidence> pre, post, orig, cal;
  for (const auto& t : result.records) {
    labels.push_back(t.label);
    pre.push_back(t.linguistic_pre);
    post.push_back(t.linguistic_post);
    if (has_signal) {
      orig.push_back(*t.original);
      cal.push_back(*t.calibrated);
    }
  }
  const EvaluationConfig ec{result.config.ece};
  result.linguistic_pre = evaluate_dataset(pre, labels, ec);
  result.linguistic_post = evaluate_dataset(post, labels, ec);
  result.linguistic_change = {safe_percent(result.linguistic_pre.mean_fd, result.linguistic_post.mean_fd),
                              safe_percent(result.linguistic_pre.generalized_ece, result.linguistic_post.generalized_ece)};
  result.reliability_pre = reliability_bins(pre, labels, result.config.ece.n_bins);
  result.reliability_post = reliability_bins(post, labels, result.config.ece.n_bins);
  if (has_signal) {
    result.signal_pre = evaluate_dataset(orig, labels, ec);
    result.signal_post = evaluate_dataset(cal, labels, ec);
    result.signal_change = PercentChange{
        safe_percent(result.signal_pre->mean_fd, result.signal_post->mean_fd),
        safe_percent(result.signal_pre->generalized_ece, result.signal_post->generalized_ece)};
  }
  if (has_target && result.records.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& t : result.records) {
      xs.push_back(t.calibrated->mean());
      ys.push_back(t.linguistic_post.mean());
    }
    try {
      result.propagation_rho = spearman_rho(xs, ys);
    } catch (const InvalidArgument&) {
      result.propagation_rho.reset();  // constant ranks
    }
  }
}

BackendPtr backend_from_json(const Json& j, BackendRole role, const std::string& default_name) {
  if (!j.is_object()) throw ParseError("backend entry must be an object");
  auto c = BackendConfig::for_role(role, j.value("name", default_name));
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.token_env = j.value("token_env", "");
  c.temperature = j.value("temperature", c.temperature);
  c.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(c.timeout.count())));
  c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
  c.retries = j.value("retries", c.retries);
  const std::string kind = j.value("kind", "http");
  if (kind == "echo") return make_echo_backend(c);
  if (kind == "http") return make_http_backend(c);
  throw ParseError("unknown backend kind '" + kind + "'");
}

}  // namespace

// ---- enums ----

std::string_view to_string(SignalKind s) {
  switch (s) {
    case SignalKind::kLinguistic: return "linguistic";
    case SignalKind::kTokenProb: return "token_prob";
    case SignalKind::kSemantic: return "semantic";
  }
  return "?";
}

SignalKind signal_kind_from_string(std::string_view s) {
  if (s == "linguistic") return SignalKind::kLinguistic;
  if (s == "token_prob") return SignalKind::kTokenProb;
  if (s == "semantic") return SignalKind::kSemantic;
  throw InvalidArgument("unknown signal: " + std::string(s));
}

std::string_view to_string(BaselineKind b) {
  return b == BaselineKind::kHedgedQa ? "hedged_qa" : "direct_beta_rewrite";
}

BaselineKind baseline_kind_from_string(std::string_view s) {
  if (s == "hedged_qa") return BaselineKind::kHedgedQa;
  if (s == "direct_beta_rewrite") return BaselineKind::kDirectBetaRewrite;
  throw InvalidArgument("unknown baseline: " + std::string(s));
}

// ---- gateway ----

Gateway Gateway::echo() {
  auto named = [](const std::string& n, BackendRole role) { return make_echo_backend(BackendConfig::for_role(role, n)); };
  Gateway g;
  g.generator = named("echo-generator", BackendRole::kGenerator);
  for (int i = 1; i <= 3; ++i) g.evaluators.push_back(named("echo-evaluator-" + std::to_string(i), BackendRole::kEvaluator));
  g.grader = named("echo-grader", BackendRole::kGrader);
  g.clusterer = named("echo-clusterer", BackendRole::kClusterer);
  g.rewriter = named("echo-rewriter", BackendRole::kRewriter);
  return g;
}

Gateway gateway_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("gateway config must be a JSON object");
  Gateway g;
  try {
    if (j.contains("generator")) g.generator = backend_from_json(j.at("generator"), BackendRole::kGenerator, "generator");
    if (j.contains("grader")) g.grader = backend_from_json(j.at("grader"), BackendRole::kGrader, "grader");
    if (j.contains("clusterer")) g.clusterer = backend_from_json(j.at("clusterer"), BackendRole::kClusterer, "clusterer");
    if (j.contains("rewriter")) g.rewriter = backend_from_json(j.at("rewriter"), BackendRole::kRewriter, "rewriter");
    if (j.contains("evaluators")) {
      if (!j.at("evaluators").is_array()) throw ParseError("'evaluators' must be an array");
      std::size_t i = 0;
      for (const auto& e : j.at("evaluators")) {
        g.evaluators.push_back(backend_from_json(e, BackendRole::kEvaluator, "evaluator-" + std::to_string(++i)));
      }
    }
    g.evaluator_passes = j.value("evaluator_passes", g.evaluator_passes);
    g.human_annotated_cues = j.value("human_annotated_cues", std::string{});
  } catch (const Json::exception& e) {
    throw ParseError(std::string("gateway config: ") + e.what());
  }
  if (j.contains("human_annotated_cues_file")) {
    std::filesystem::path p = j.at("human_annotated_cues_file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    g.human_annotated_cues = read_text_file(p);
  }
  if (g.evaluator_passes < 1) throw ParseError("evaluator_passes must be at least 1");
  return g;
}

Gateway load_gateway_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return gateway_from_json(j, path.parent_path());
}

Json to_json(const RunConfig& c) {
  return {{"signal", to_string(c.signal)},
          {"n_self_consistency", c.n_self_consistency},
          {"train_fraction", c.train_fraction},
          {"calibrator", to_string(c.calibrator)},
          {"shortlist_size", c.shortlist_size},
          {"k", c.k},
          {"w1_samples", c.w1_samples},
          {"seed", c.seed},
          {"ece_bins", c.ece.n_bins},
          {"ece_samples_per_dist", c.ece.samples_per_dist},
          {"ece_seed", c.ece.seed},
          {"exclude_not_attempted", c.exclude_not_attempted}};
}

// ---- signal estimation ----

SignalEstimate estimate_signal(const DatasetRecord& record, const RunConfig& config, const Gateway& gateway) {
  const auto responses = prepared_responses(record, config, gateway);
  auto majority = majority_cluster(responses);
  const auto& rep = responses[majority.representative_index];
  auto distribution = [&]() -> BetaConfidence {
    switch (config.signal) {
      case SignalKind::kSemantic: return semantic_uncertainty_distribution(majority.summary);
      case SignalKind::kTokenProb: {
        for (const auto& m : majority.members) {
          if (m.token_logprobs.empty()) {
            throw InvalidArgument("record '" + record.id + "': token signal needs token_logprobs on every response");
          }
        }
        return token_prob_distribution(majority.members);
      }
      case SignalKind::kLinguistic: return linguistic_estimate(rep.text, gateway);
    }
    throw InvalidArgument("unknown signal");
  }();
  return {distribution, rep, majority.representative_index, std::move(majority.summary)};
}

// ---- calibration ----

CalibrationMap fit_calibrator_on_records(const std::vector<DatasetRecord>& records, const RunConfig& config,
                                         const Gateway& gateway, std::vector<FailedRecord>* failures,
                                         std::size_t* n_used) {
  struct TrainPoint {
    std::optional<CorrectnessLabel> label;
    double mean = 0.0;
  };
  const auto slots = parallel_map<TrainPoint>(records.size(), config.max_parallel_records, [&](std::size_t i) {
    const auto est = estimate_signal(records[i], config, gateway);
    return TrainPoint{resolve_label(records[i], est.representative.text, config, gateway), est.distribution.mean()};
  });
  TrainingSlice slice;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].error) {
      const auto msg = gateway_failure(slots[i].error);
      if (failures) failures->push_back({records[i].id, "train", *msg});
      continue;
    }
    if (!slots[i].value->label) continue;
    slice.means.push_back(slots[i].value->mean);
    slice.labels.push_back(*slots[i].value->label);
  }
  if (n_used) *n_used = slice.means.size();
  return fit_calibrator(config.calibrator, slice, config.calibrator_options);
}

// ---- runs ----

PipelineResult apply_ralc(const std::vector<DatasetRecord>& eval_records, const CalibrationMap& map,
                          const RunConfig& config, const Gateway& gateway, const Lexicon& lexicon) {
  validate(config);
  if (eval_records.empty()) throw InvalidArgument("evaluation split is empty");
  if (lexicon.empty()) throw InvalidArgument("lexicon is empty");
  auto& rewriter = require(gateway.rewriter, "rewriter");
  PipelineResult result;
  result.mode = "ralc";
  result.config = config;
  result.calibrator = map;
  const RetrievalOptions ropt{config.shortlist_size, config.k, config.w1_samples, config.seed};
  run_eval(result, eval_records, [&](const DatasetRecord& r) {
    const auto est = estimate_signal(r, config, gateway);
    Outcome o;
    const auto label = resolve_label(r, est.representative.text, config, gateway);
    if (!label) return Outcome{true, {}};
    auto& t = o.trace;
    t.id = r.id;
    t.label = *label;
    t.original_text = est.representative.text;
    t.original = est.distribution;
    t.calibrated = apply_to_distribution(map, est.distribution);
    const auto retrieved = retrieve(lexicon, *t.calibrated, ropt);
    t.hedges = retrieved.entries;
    t.rewritten_text = rewrite_with_hedges(t.original_text, retrieved, rewriter);
    t.linguistic_pre = config.signal == SignalKind::kLinguistic ? est.distribution
                                                                : linguistic_estimate(t.original_text, gateway);
    t.linguistic_post = linguistic_estimate(t.rewritten_text, gateway);
    return o;
  });
  aggregate(result, true, true);
  return result;
}

PipelineResult run_ralc(const std::vector<DatasetRecord>& records, const RunConfig& config, const Gateway& gateway,
                        const Lexicon& lexicon) {
  validate(config);
  if (lexicon.empty()) throw InvalidArgument("lexicon is empty");
  auto [train, eval] = split_train_eval(records, config.train_fraction);
  if (eval.empty()) throw InvalidArgument("evaluation split is empty");
  std::vector<FailedRecord> failures;
  std::size_t used = 0;
  const auto map = fit_calibrator_on_records(train, config, gateway, &failures, &used);
  auto result = apply_ralc(eval, map, config, gateway, lexicon);
  result.failures.insert(result.failures.begin(), failures.begin(), failures.end());
  result.n_train_used = used;
  return result;
}

PipelineResult run_baseline(const std::vector<DatasetRecord>& records, const RunConfig& config,
                            const Gateway& gateway, BaselineKind kind) {
  validate(config);
  if (records.empty()) throw InvalidArgument("evaluation split is empty");
  auto [train, eval] = split_train_eval(records, config.train_fraction);
  if (eval.empty()) throw InvalidArgument("evaluation split is empty");
  PipelineResult result;
  result.mode = std::string(to_string(kind));
  result.config = config;

  if (kind == BaselineKind::kHedgedQa) {
    auto& gen = require(gateway.generator, "generator");
    run_eval(result, eval, [&](const DatasetRecord& r) {
      const auto responses = prepared_responses(r, config, gateway);
      const auto majority = majority_cluster(responses);
      const auto& rep = responses[majority.representative_index];
      const auto label = resolve_label(r, rep.text, config, gateway);
      if (!label) return Outcome{true, {}};
      Outcome o;
      auto& t = o.trace;
      t.id = r.id;
      t.label = *label;
      t.original_text = rep.text;
      const auto [name, slots] = qa_prompt(r, true);
      // The "answer" tag lets the echo mock stand in for the model.
      const ChatRequest req{std::string(to_string(name)), render_template(name, slots), {{"answer", rep.text}}};
      t.rewritten_text = request_with_retry(gen, req, trimmed_nonempty);
      t.linguistic_pre = linguistic_estimate(t.original_text, gateway);
      t.linguistic_post = linguistic_estimate(t.rewritten_text, gateway);
      return o;
    });
    aggregate(result, false, false);
    return result;
  }

  auto& rewriter = require(gateway.rewriter, "rewriter");
  std::size_t used = 0;
  const auto map = fit_calibrator_on_records(train, config, gateway, &result.failures, &used);
  result.n_train_used = used;
  result.calibrator = map;
  run_eval(result, eval, [&](const DatasetRecord& r) {
    const auto est = estimate_signal(r, config, gateway);
    const auto label = resolve_label(r, est.representative.text, config, gateway);
    if (!label) return Outcome{true, {}};
    Outcome o;
    auto& t = o.trace;
    t.id = r.id;
    t.label = *label;
    t.original_text = est.representative.text;
    t.original = est.distribution;
    t.calibrated = apply_to_distribution(map, est.distribution);
    t.rewritten_text = rewrite_with_beta(t.original_text, *t.calibrated, rewriter);
    t.linguistic_pre = config.signal == SignalKind::kLinguistic ? est.distribution
                                                                : linguistic_estimate(t.original_text, gateway);
    t.linguistic_post = linguistic_estimate(t.rewritten_text, gateway);
    return o;
  });
  aggregate(result, true, true);
  return result;
}

std::map<std::string, PipelineResult> run_cross_domain(const std::vector<DatasetRecord>& train_records,
                                                       const std::map<std::string, std::vector<DatasetRecord>>& eval_sets,
                                                       const RunConfig& config, const Gateway& gateway,
                                                       const Lexicon& lexicon) {
  validate(config);
  if (train_records.empty()) throw InvalidArgument("training set is empty");
  if (eval_sets.empty()) throw InvalidArgument("no evaluation sets");
  std::vector<FailedRecord> failures;
  std::size_t used = 0;
  const auto map = fit_calibrator_on_records(train_records, config, gateway, &failures, &used);
  std::map<std::string, PipelineResult> out;
  for (const auto& [name, records] : eval_sets) {
    auto r = apply_ralc(records, map, config, gateway, lexicon);
    r.mode = "cross_domain";
    r.failures.insert(r.failures.begin(), failures.begin(), failures.end());
    r.n_train_used = used;
    out.emplace(name, std::move(r));
  }
  return out;
}

// ---- lexicon construction ----

std::vector<std::string> source_hedge_expressions(const Gateway& gateway) {
  auto& gen = require(gateway.generator, "generator");
  const ChatRequest req{"hedge_sourcing", render_template(TemplateName::kHedgeSourcing, {}), {}};
  return request_with_retry(gen, req, parse_expression_list);
}

LexiconBuildResult build_lexicon_pipeline(const std::vector<std::string>& expressions,
                                          const LexiconBuildConfig& config, const Gateway& gateway) {
  if (expressions.empty()) throw InvalidArgument("no hedge expressions to score");
  if (config.rewrites_per_expression == 0) throw InvalidArgument("rewrites_per_expression must be at least 1");
  if (gateway.evaluators.empty()) throw InvalidArgument("gateway has no evaluator backends");
  auto& rewriter = require(gateway.rewriter, "rewriter");
  const auto sentences = nonverifiable_sentences();

  LexiconBuildResult result;
  std::vector<ScorePool> pools;
  for (std::size_t e = 0; e < expressions.size(); ++e) {
    const auto& word = expressions[e];
    std::mt19937_64 rng(detail::mix_seed(config.seed, static_cast<std::uint64_t>(e)));
    std::vector<double> scores;
    for (std::size_t i = 0; i < config.rewrites_per_expression; ++i) {
      const std::string sentence(sentences[rng() % sentences.size()]);
      std::string rewritten;
      try {
        const ChatRequest req{
            "nonverifiable_rewrite",
            render_template(TemplateName::kNonverifiableRewrite, {{"word", word}, {"selected_sentence", sentence}}),
            {{"word", word}, {"selected_sentence", sentence}}};
        rewritten = request_with_retry(rewriter, req, parse_rewrite);
      } catch (const GatewayError&) {
        continue;
      }
      // Score per evaluator so one failing model does not discard the rest.
      for (const auto& ev : gateway.evaluators) {
        try {
          const auto s = evaluate_linguistic_confidence(rewritten, std::span<const BackendPtr>(&ev, 1),
                                                        gateway.evaluator_passes, gateway.human_annotated_cues);
          scores.insert(scores.end(), s.values().begin(), s.values().end());
        } catch (const GatewayError&) {
        }
      }
    }
    result.score_counts[word] = scores.size();
    if (scores.empty()) {
      result.excluded.push_back(word);
      continue;
    }
    pools.emplace_back(word, SampleSet(std::move(scores)));
  }
  if (pools.empty()) throw GatewayError("lexicon", "every expression failed to score");
  result.lexicon = build_lexicon(pools, config.mle);
  return result;
}

}  // namespace ralc
