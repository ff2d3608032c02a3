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

// ralc: command-line front end for the RALC toolkit.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ralc/calibrators.hpp"
#include "ralc/dataset.hpp"
#include "ralc/error.hpp"
#include "ralc/lexicon.hpp"
#include "ralc/metrics.hpp"
#include "ralc/pipeline.hpp"
#include "ralc/serialization.hpp"

namespace fs = std::filesystem;
using ralc::Json;

namespace {

// Options shared by the pipeline subcommands.
struct RunFlags {
  std::string signal = "linguistic";
  std::string calibrator = "platt";
  std::string gateway;  // empty: echo mock
  ralc::RunConfig config;
  bool keep_not_attempted = false;

  void attach(CLI::App& app, bool with_split) {
    app.add_option("--signal", signal, "linguistic | token_prob | semantic")
        ->check(CLI::IsMember({"linguistic", "token_prob", "semantic"}));
    app.add_option("--calibrator", calibrator, "platt | temperature | isotonic | histogram")
        ->check(CLI::IsMember({"platt", "temperature", "isotonic", "histogram"}));
    app.add_option("--gateway", gateway, "Gateway JSON config (default: echo mock)")->check(CLI::ExistingFile);
    app.add_option("--seed", config.seed, "Seed for retrieval and ECE sampling");
    app.add_option("--n-self-consistency", config.n_self_consistency, "Responses sampled per question when absent")
        ->check(CLI::PositiveNumber);
    if (with_split) {
      app.add_option("--train-fraction", config.train_fraction, "Leading fraction used to fit the calibrator")
          ->check(CLI::Range(0.0, 1.0));
    }
    app.add_option("--shortlist-size", config.shortlist_size, "Mean-distance shortlist size")
        ->check(CLI::PositiveNumber);
    app.add_option("-k,--k", config.k, "Hedges passed to the rewriter")->check(CLI::PositiveNumber);
    app.add_option("--w1-samples", config.w1_samples, "Monte Carlo samples per W1 estimate")
        ->check(CLI::PositiveNumber);
    app.add_option("--n-bins", config.ece.n_bins, "Reliability bins")->check(CLI::PositiveNumber);
    app.add_option("--ece-samples", config.ece.samples_per_dist, "Draws per distribution for generalised ECE")
        ->check(CLI::PositiveNumber);
    app.add_option("--parallel", config.max_parallel_records, "Records processed concurrently")
        ->check(CLI::PositiveNumber);
    app.add_flag("--keep-not-attempted", keep_not_attempted, "Count NOT_ATTEMPTED grades as incorrect");
  }

  ralc::RunConfig resolve() const {
    auto c = config;
    c.signal = ralc::signal_kind_from_string(signal);
    c.calibrator = ralc::calibrator_kind_from_string(calibrator);
    c.ece.seed = c.seed;
    c.exclude_not_attempted = !keep_not_attempted;
    return c;
  }

  ralc::Gateway make_gateway() const {
    return gateway.empty() ? ralc::Gateway::echo() : ralc::load_gateway_config(gateway);
  }
};

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    ralc::write_text_file(path, text);
  }
}

void report_failures(const ralc::PipelineResult& r) {
  if (!r.failures.empty()) {
    std::cerr << "warning: " << r.failures.size() << " record(s) failed and were excluded\n";
  }
}

void print_summary(const ralc::PipelineResult& r) {
  auto line = [](const char* what, const ralc::EvaluationReport& pre, const ralc::EvaluationReport& post) {
    std::printf("%-11s FD %.4f -> %.4f   gECE %.4f -> %.4f\n", what, pre.mean_fd, post.mean_fd, pre.generalized_ece,
                post.generalized_ece);
  };
  std::printf("%s: %zu records evaluated, %zu failed, %zu not attempted\n", r.mode.c_str(), r.records.size(),
              r.failures.size(), r.n_not_attempted_excluded);
  if (r.signal_pre && r.signal_post) line("signal", *r.signal_pre, *r.signal_post);
  line("linguistic", r.linguistic_pre, r.linguistic_post);
  if (r.propagation_rho) std::printf("propagation rho %.4f\n", *r.propagation_rho);
}

// JSONL lines of {"alpha", "beta", "label"?}.
struct Predictions {
  std::vector<ralc::BetaConfidence> dists;
  std::vector<ralc::CorrectnessLabel> labels;
};

Predictions read_predictions(const std::string& path, bool need_labels) {
  Predictions p;
  const auto text = ralc::read_text_file(path);
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = Json::parse(line);
      p.dists.push_back(ralc::beta_from_json(j));
      if (need_labels) p.labels.push_back(ralc::label_from_int(j.at("label").get<long long>()));
    } catch (const std::exception& e) {
      throw ralc::ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional confidence calibration and linguistic rewriting toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ralc 0.1.0");

  // ---- ablate-fd ----
  std::string ablate_out;
  auto* ablate = app.add_subcommand("ablate-fd", "Metric monotonicity sweeps over mean and concentration as CSV");
  ablate->add_option("-o,--out", ablate_out, "Output CSV (default: stdout)");

  // ---- evaluate ----
  std::string eval_in, eval_out, eval_rel;
  ralc::EceOptions eval_ece;
  auto* evaluate = app.add_subcommand("evaluate", "Score Beta predictions against labels");
  evaluate->add_option("-i,--input", eval_in, "JSONL of {alpha, beta, label}")->required()->check(CLI::ExistingFile);
  evaluate->add_option("-o,--out", eval_out, "Report JSON (default: stdout)");
  evaluate->add_option("--reliability", eval_rel, "Reliability-bin CSV");
  evaluate->add_option("--n-bins", eval_ece.n_bins)->check(CLI::PositiveNumber);
  evaluate->add_option("--ece-samples", eval_ece.samples_per_dist)->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", eval_ece.seed);

  // ---- fit-calibrator ----
  RunFlags fit_flags;
  std::string fit_data, fit_out;
  auto* fit = app.add_subcommand("fit-calibrator", "Fit a calibration map on every record of a dataset");
  fit->add_option("-d,--data", fit_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  fit->add_option("-o,--out", fit_out, "Calibration map JSON (default: stdout)");
  fit_flags.attach(*fit, false);

  // ---- calibrate ----
  std::string cal_map, cal_in, cal_out;
  std::optional<double> cal_alpha, cal_beta;
  auto* calibrate = app.add_subcommand("calibrate", "Apply a calibration map to Beta distributions");
  calibrate->add_option("-m,--map", cal_map, "Calibration map JSON")->required()->check(CLI::ExistingFile);
  auto* cal_in_opt = calibrate->add_option("-i,--input", cal_in, "JSONL of {alpha, beta}")->check(CLI::ExistingFile);
  auto* cal_a = calibrate->add_option("--alpha", cal_alpha);
  auto* cal_b = calibrate->add_option("--beta", cal_beta);
  cal_a->needs(cal_b);
  cal_b->needs(cal_a);
  cal_in_opt->excludes(cal_a);
  calibrate->add_option("-o,--out", cal_out, "Output JSONL (default: stdout)");

  // ---- build-lexicon ----
  std::string lex_expr, lex_out, lex_gateway;
  ralc::LexiconBuildConfig lex_cfg;
  auto* build = app.add_subcommand("build-lexicon", "Score hedge expressions and fit one Beta profile each");
  build->add_option("-e,--expressions", lex_expr, "One expression per line (default: ask the generator)")
      ->check(CLI::ExistingFile);
  build->add_option("-o,--out", lex_out, "Lexicon JSONL")->required();
  build->add_option("--gateway", lex_gateway, "Gateway JSON config (default: echo mock)")->check(CLI::ExistingFile);
  build->add_option("--rewrites", lex_cfg.rewrites_per_expression, "Rewrites per expression")
      ->check(CLI::PositiveNumber);
  build->add_option("--seed", lex_cfg.seed);

  // ---- retrieve ----
  std::string ret_lex;
  double ret_alpha = 0, ret_beta = 0;
  ralc::RetrievalOptions ret_opt;
  auto* retrieve = app.add_subcommand("retrieve", "Top-k hedges for a target Beta distribution");
  retrieve->add_option("-l,--lexicon", ret_lex)->required()->check(CLI::ExistingFile);
  retrieve->add_option("--alpha", ret_alpha)->required();
  retrieve->add_option("--beta", ret_beta)->required();
  retrieve->add_option("-k,--k", ret_opt.k)->check(CLI::PositiveNumber);
  retrieve->add_option("--shortlist-size", ret_opt.shortlist_size)->check(CLI::PositiveNumber);
  retrieve->add_option("--w1-samples", ret_opt.w1_samples)->check(CLI::PositiveNumber);
  retrieve->add_option("--seed", ret_opt.seed);

  // ---- run-ralc ----
  RunFlags ralc_flags;
  std::string ralc_data, ralc_lex, ralc_out;
  auto* run = app.add_subcommand("run-ralc", "Calibrate, retrieve hedges, rewrite and re-estimate");
  run->add_option("-d,--data", ralc_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  run->add_option("-l,--lexicon", ralc_lex, "Lexicon JSONL")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", ralc_out, "Report directory")->required();
  ralc_flags.attach(*run, true);

  // ---- run-baseline ----
  RunFlags base_flags;
  std::string base_data, base_out, base_kind;
  auto* baseline = app.add_subcommand("run-baseline", "Hedged QA or direct Beta-guided rewrite");
  baseline->add_option("--kind", base_kind)->required()->check(CLI::IsMember({"hedged_qa", "direct_beta_rewrite"}));
  baseline->add_option("-d,--data", base_data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  baseline->add_option("-o,--out", base_out, "Report directory")->required();
  base_flags.attach(*baseline, true);

  // ---- cross-domain ----
  RunFlags cross_flags;
  std::string cross_train, cross_lex, cross_out;
  std::vector<std::string> cross_evals;
  auto* cross = app.add_subcommand("cross-domain", "Fit on one dataset, apply the frozen map to others");
  cross->add_option("--train", cross_train, "Training dataset JSONL")->required()->check(CLI::ExistingFile);
  cross->add_option("--eval", cross_evals, "name=path, repeatable")->required();
  cross->add_option("-l,--lexicon", cross_lex)->required()->check(CLI::ExistingFile);
  cross->add_option("-o,--out", cross_out, "Report directory (one subdirectory per set)")->required();
  cross_flags.attach(*cross, false);

  // ---- make-synthetic ----
  ralc::SyntheticOptions syn;
  std::string syn_out;
  auto* synth = app.add_subcommand("make-synthetic", "Write an overconfident synthetic dataset");
  synth->add_option("-n,--n-records", syn.n_records)->check(CLI::PositiveNumber);
  synth->add_option("--n-responses", syn.n_responses)->check(CLI::PositiveNumber);
  synth->add_option("--bias", syn.bias);
  synth->add_option("--seed", syn.seed);
  synth->add_option("-o,--out", syn_out, "Dataset JSONL (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ablate) {
      write_or_print(ablate_out, ralc::metric_sweeps_to_csv(ralc::default_metric_sweeps()));
    } else if (*evaluate) {
      const auto p = read_predictions(eval_in, true);
      const auto report = ralc::evaluate_dataset(p.dists, p.labels, {eval_ece});
      write_or_print(eval_out, ralc::to_json(report).dump(2) + "\n");
      if (!eval_rel.empty()) {
        ralc::write_text_file(eval_rel, ralc::reliability_to_csv(ralc::reliability_bins(p.dists, p.labels, eval_ece.n_bins)));
      }
    } else if (*fit) {
      const auto records = ralc::ingest_dataset(fit_data);
      std::vector<ralc::FailedRecord> failures;
      std::size_t used = 0;
      const auto map =
          ralc::fit_calibrator_on_records(records, fit_flags.resolve(), fit_flags.make_gateway(), &failures, &used);
      if (!failures.empty()) std::cerr << "warning: " << failures.size() << " record(s) failed and were skipped\n";
      std::cerr << "fitted on " << used << " record(s)\n";
      write_or_print(fit_out, ralc::to_json(map).dump(2) + "\n");
    } else if (*calibrate) {
      const auto map = ralc::calibration_map_from_json(Json::parse(ralc::read_text_file(cal_map)));
      std::vector<ralc::BetaConfidence> in;
      if (cal_alpha) {
        in.emplace_back(*cal_alpha, *cal_beta);
      } else if (!cal_in.empty()) {
        in = read_predictions(cal_in, false).dists;
      } else {
        throw ralc::InvalidArgument("calibrate needs --input or --alpha/--beta");
      }
      std::string out;
      for (const auto& d : in) out += ralc::to_json(ralc::apply_to_distribution(map, d)).dump() + "\n";
      write_or_print(cal_out, out);
    } else if (*build) {
      const auto gateway = lex_gateway.empty() ? ralc::Gateway::echo() : ralc::load_gateway_config(lex_gateway);
      std::vector<std::string> expressions;
      if (lex_expr.empty()) {
        expressions = ralc::source_hedge_expressions(gateway);
      } else {
        std::istringstream in(ralc::read_text_file(lex_expr));
        for (std::string line; std::getline(in, line);) {
          const auto b = line.find_first_not_of(" \t\r");
          if (b == std::string::npos) continue;
          expressions.push_back(line.substr(b, line.find_last_not_of(" \t\r") - b + 1));
        }
      }
      const auto res = ralc::build_lexicon_pipeline(expressions, lex_cfg, gateway);
      for (const auto& e : res.excluded) std::cerr << "warning: no usable scores for '" << e << "'; excluded\n";
      ralc::save_lexicon(res.lexicon, lex_out);
      std::cerr << "wrote " << res.lexicon.size() << " entries to " << lex_out << "\n";
    } else if (*retrieve) {
      const auto res = ralc::retrieve(ralc::load_lexicon(ret_lex), ralc::BetaConfidence(ret_alpha, ret_beta), ret_opt);
      Json out = Json::array();
      for (const auto& r : res.entries) {
        out.push_back({{"expression", r.entry.expression},
                       {"profile", ralc::to_json(r.entry.profile)},
                       {"w1_distance", r.w1_distance}});
      }
      std::cout << out.dump(2) << "\n";
    } else if (*run) {
      const auto result = ralc::run_ralc(ralc::ingest_dataset(ralc_data), ralc_flags.resolve(),
                                         ralc_flags.make_gateway(), ralc::load_lexicon(ralc_lex));
      ralc::emit_reports(result, ralc_out);
      report_failures(result);
      print_summary(result);
    } else if (*baseline) {
      const auto result = ralc::run_baseline(ralc::ingest_dataset(base_data), base_flags.resolve(),
                                             base_flags.make_gateway(), ralc::baseline_kind_from_string(base_kind));
      ralc::emit_reports(result, base_out);
      report_failures(result);
      print_summary(result);
    } else if (*cross) {
      std::map<std::string, std::vector<ralc::DatasetRecord>> sets;
      for (const auto& arg : cross_evals) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
          throw ralc::InvalidArgument("--eval expects name=path, got '" + arg + "'");
        }
        if (!sets.emplace(arg.substr(0, eq), ralc::ingest_dataset(arg.substr(eq + 1))).second) {
          throw ralc::InvalidArgument("duplicate evaluation set name '" + arg.substr(0, eq) + "'");
        }
      }
      const auto results = ralc::run_cross_domain(ralc::ingest_dataset(cross_train), sets, cross_flags.resolve(),
                                                  cross_flags.make_gateway(), ralc::load_lexicon(cross_lex));
      for (const auto& [name, r] : results) {
        ralc::emit_reports(r, fs::path(cross_out) / name);
        std::printf("[%s] ", name.c_str());
        print_summary(r);
      }
    } else if (*synth) {
      write_or_print(syn_out, ralc::dataset_to_jsonl(ralc::make_synthetic_dataset(syn)));
    }
  } catch (const ralc::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
