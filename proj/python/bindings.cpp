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

#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "ralc/beta.hpp"
#include "ralc/calibrators.hpp"
#include "ralc/dataset.hpp"
#include "ralc/error.hpp"
#include "ralc/lexicon.hpp"
#include "ralc/metrics.hpp"
#include "ralc/pipeline.hpp"
#include "ralc/serialization.hpp"

namespace py = pybind11;

namespace {

py::object to_python(const ralc::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

ralc::Json from_python(const py::object& o) {
  return ralc::Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::vector<ralc::CorrectnessLabel> to_labels(const std::vector<long long>& ys) {
  std::vector<ralc::CorrectnessLabel> out;
  out.reserve(ys.size());
  for (long long y : ys) out.push_back(ralc::label_from_int(y));
  return out;
}

ralc::RunConfig make_config(const std::string& signal, const std::string& calibrator, std::uint64_t seed,
                            double train_fraction, std::size_t k, std::size_t shortlist_size, std::size_t w1_samples,
                            std::size_t n_bins, std::size_t ece_samples) {
  ralc::RunConfig c;
  c.signal = ralc::signal_kind_from_string(signal);
  c.calibrator = ralc::calibrator_kind_from_string(calibrator);
  c.seed = seed;
  c.train_fraction = train_fraction;
  c.k = k;
  c.shortlist_size = shortlist_size;
  c.w1_samples = w1_samples;
  c.ece = {n_bins, ece_samples, seed};
  return c;
}

ralc::Gateway make_gateway(const std::optional<std::string>& path) {
  return path ? ralc::load_gateway_config(*path) : ralc::Gateway::echo();
}

py::object finish(const ralc::PipelineResult& r, const std::optional<std::string>& out_dir) {
  if (out_dir) ralc::emit_reports(r, *out_dir);
  return to_python(ralc::to_json(r));
}

}  // namespace

PYBIND11_MODULE(_ralc, m) {
  m.doc() = "Beta-distributed confidence: metrics, calibration, hedge retrieval and the rewriting pipeline.";

  py::register_exception<ralc::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ralc::GatewayError>(m, "GatewayError", PyExc_RuntimeError);
  py::register_exception<ralc::IoError>(m, "IoError", PyExc_OSError);

  py::class_<ralc::BetaConfidence>(m, "BetaConfidence")
      .def(py::init<double, double>(), py::arg("alpha"), py::arg("beta"))
      .def_static("from_mean_concentration", &ralc::beta_from_mean_concentration, py::arg("mean"),
                  py::arg("concentration"))
      .def_property_readonly("alpha", &ralc::BetaConfidence::alpha)
      .def_property_readonly("beta", &ralc::BetaConfidence::beta)
      .def_property_readonly("mean", &ralc::BetaConfidence::mean)
      .def_property_readonly("concentration", &ralc::BetaConfidence::concentration)
      .def_property_readonly("variance", &ralc::BetaConfidence::variance)
      .def(py::self == py::self)
      .def("__repr__", [](const ralc::BetaConfidence& d) {
        return "BetaConfidence(alpha=" + ralc::format_double(d.alpha()) + ", beta=" + ralc::format_double(d.beta()) +
               ")";
      });

  m.def(
      "fit_beta_moments", [](std::vector<double> xs) { return ralc::fit_beta_moments(ralc::SampleSet(std::move(xs))); },
      py::arg("samples"));
  m.def(
      "fit_beta_mle",
      [](std::vector<double> xs) { return ralc::fit_beta_mle(ralc::SampleSet(std::move(xs))).distribution; },
      py::arg("samples"));
  m.def("beta_kl", &ralc::beta_kl, py::arg("p"), py::arg("q"));
  m.def("beta_w1", &ralc::beta_w1, py::arg("p"), py::arg("q"), py::arg("n_samples") = ralc::kDefaultW1Samples,
        py::arg("seed") = 0);

  m.def(
      "faithfulness_divergence",
      [](const ralc::BetaConfidence& d, long long y) { return ralc::faithfulness_divergence(d, ralc::label_from_int(y)); },
      py::arg("dist"), py::arg("label"));
  m.def(
      "expected_brier",
      [](const ralc::BetaConfidence& d, long long y) { return ralc::expected_brier(d, ralc::label_from_int(y)); },
      py::arg("dist"), py::arg("label"));
  m.def(
      "expected_nll",
      [](const ralc::BetaConfidence& d, long long y) { return ralc::expected_nll(d, ralc::label_from_int(y)); },
      py::arg("dist"), py::arg("label"));
  m.def(
      "evaluate",
      [](const std::vector<ralc::BetaConfidence>& dists, const std::vector<long long>& labels, std::size_t n_bins,
         std::size_t samples_per_dist, std::uint64_t seed) {
        const auto report =
            ralc::evaluate_dataset(dists, to_labels(labels), {ralc::EceOptions{n_bins, samples_per_dist, seed}});
        return to_python(ralc::to_json(report));
      },
      py::arg("dists"), py::arg("labels"), py::arg("n_bins") = 10, py::arg("samples_per_dist") = 100,
      py::arg("seed") = 0);
  m.def("metric_sweeps", [] {
    py::list out;
    for (const auto& p : ralc::default_metric_sweeps()) {
      py::dict d;
      d["sweep"] = p.sweep;
      d["mean"] = p.mean;
      d["concentration"] = p.concentration;
      d["label"] = ralc::to_int(p.label);
      d["fd"] = p.fd;
      d["kl"] = p.kl;
      d["expected_brier"] = p.expected_brier;
      d["expected_nll"] = p.expected_nll;
      out.append(d);
    }
    return out;
  });

  py::class_<ralc::CalibrationMap>(m, "CalibrationMap")
      .def_static("identity", &ralc::CalibrationMap::identity)
      .def_static(
          "from_dict", [](const py::object& o) { return ralc::calibration_map_from_json(from_python(o)); },
          py::arg("data"))
      .def_property_readonly("kind", [](const ralc::CalibrationMap& c) { return std::string(ralc::to_string(c.kind())); })
      .def("to_dict", [](const ralc::CalibrationMap& c) { return to_python(ralc::to_json(c)); })
      .def(
          "apply_to_mean", [](const ralc::CalibrationMap& c, double mu) { return ralc::apply_to_mean(c, mu); },
          py::arg("mean"))
      .def(
          "apply", [](const ralc::CalibrationMap& c, const ralc::BetaConfidence& d) {
            return ralc::apply_to_distribution(c, d);
          },
          py::arg("dist"));
  m.def(
      "fit_calibrator",
      [](const std::string& kind, std::vector<double> means, const std::vector<long long>& labels) {
        ralc::TrainingSlice slice{std::move(means), to_labels(labels)};
        return ralc::fit_calibrator(ralc::calibrator_kind_from_string(kind), slice);
      },
      py::arg("kind"), py::arg("means"), py::arg("labels"));

  py::class_<ralc::Lexicon>(m, "Lexicon")
      .def(py::init([](const std::vector<std::pair<std::string, ralc::BetaConfidence>>& entries) {
             std::vector<ralc::LexiconEntry> es;
             for (const auto& [e, p] : entries) es.push_back({e, p});
             return ralc::Lexicon(std::move(es));
           }),
           py::arg("entries"))
      .def_static(
          "load", [](const std::string& path) { return ralc::load_lexicon(path); }, py::arg("path"))
      .def("save", [](const ralc::Lexicon& l, const std::string& path) { ralc::save_lexicon(l, path); }, py::arg("path"))
      .def("__len__", &ralc::Lexicon::size)
      .def("entries", [](const ralc::Lexicon& l) {
        std::vector<std::pair<std::string, ralc::BetaConfidence>> out;
        for (const auto& e : l.entries()) out.emplace_back(e.expression, e.profile);
        return out;
      });
  m.def(
      "retrieve",
      [](const ralc::Lexicon& lexicon, const ralc::BetaConfidence& target, std::size_t k, std::size_t shortlist_size,
         std::size_t w1_samples, std::uint64_t seed) {
        const auto r = ralc::retrieve(lexicon, target, {shortlist_size, k, w1_samples, seed});
        std::vector<std::tuple<std::string, ralc::BetaConfidence, double>> out;
        for (const auto& e : r.entries) out.emplace_back(e.entry.expression, e.entry.profile, e.w1_distance);
        return out;
      },
      py::arg("lexicon"), py::arg("target"), py::arg("k") = 5, py::arg("shortlist_size") = 30,
      py::arg("w1_samples") = ralc::kDefaultW1Samples, py::arg("seed") = 0);

  m.def(
      "make_synthetic_dataset",
      [](const std::string& path, std::size_t n_records, std::size_t n_responses, double bias, std::uint64_t seed) {
        ralc::SyntheticOptions o;
        o.n_records = n_records;
        o.n_responses = n_responses;
        o.bias = bias;
        o.seed = seed;
        ralc::write_text_file(path, ralc::dataset_to_jsonl(ralc::make_synthetic_dataset(o)));
      },
      py::arg("path"), py::arg("n_records") = 200, py::arg("n_responses") = 20, py::arg("bias") = 0.2,
      py::arg("seed") = 0);

  m.def(
      "run_ralc",
      [](const std::string& dataset, const ralc::Lexicon& lexicon, std::optional<std::string> out_dir,
         std::optional<std::string> gateway, const std::string& signal, const std::string& calibrator,
         std::uint64_t seed, double train_fraction, std::size_t k, std::size_t shortlist_size, std::size_t w1_samples,
         std::size_t n_bins, std::size_t ece_samples) {
        const auto config =
            make_config(signal, calibrator, seed, train_fraction, k, shortlist_size, w1_samples, n_bins, ece_samples);
        ralc::PipelineResult r;
        {
          py::gil_scoped_release release;
          r = ralc::run_ralc(ralc::ingest_dataset(dataset), config, make_gateway(gateway), lexicon);
        }
        return finish(r, out_dir);
      },
      py::arg("dataset"), py::arg("lexicon"), py::arg("out_dir") = py::none(), py::arg("gateway") = py::none(),
      py::arg("signal") = "linguistic", py::arg("calibrator") = "platt", py::arg("seed") = 0,
      py::arg("train_fraction") = 0.3, py::arg("k") = 5, py::arg("shortlist_size") = 30,
      py::arg("w1_samples") = ralc::kDefaultW1Samples, py::arg("n_bins") = 10, py::arg("ece_samples") = 100);

  m.def(
      "run_baseline",
      [](const std::string& dataset, const std::string& kind, std::optional<std::string> out_dir,
         std::optional<std::string> gateway, const std::string& signal, const std::string& calibrator,
         std::uint64_t seed, double train_fraction) {
        const auto config = make_config(signal, calibrator, seed, train_fraction, 5, 30, ralc::kDefaultW1Samples, 10, 100);
        ralc::PipelineResult r;
        {
          py::gil_scoped_release release;
          r = ralc::run_baseline(ralc::ingest_dataset(dataset), config, make_gateway(gateway),
                                 ralc::baseline_kind_from_string(kind));
        }
        return finish(r, out_dir);
      },
      py::arg("dataset"), py::arg("kind"), py::arg("out_dir") = py::none(), py::arg("gateway") = py::none(),
      py::arg("signal") = "linguistic", py::arg("calibrator") = "platt", py::arg("seed") = 0,
      py::arg("train_fraction") = 0.3);
}
