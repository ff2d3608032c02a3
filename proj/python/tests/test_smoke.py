# Copyright 2026 The RALC Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import pytest

import ralc


def test_beta_basics():
    d = ralc.BetaConfidence(2.0, 2.0)
    assert d.mean == 0.5
    assert d.concentration == 4.0
    d8 = ralc.BetaConfidence.from_mean_concentration(0.8, 10.0)
    assert (d8.alpha, d8.beta) == pytest.approx((8.0, 2.0), rel=1e-12)
    with pytest.raises(ValueError):
        ralc.BetaConfidence(-1.0, 1.0)


def test_closed_forms():
    fd = ralc.faithfulness_divergence(ralc.BetaConfidence(2, 2), 1)
    # 4 (ln 2 + psi(3) - psi(5)) with psi(5) - psi(3) = 1/3 + 1/4.
    assert fd == pytest.approx(4 * (math.log(2) - 1 / 3 - 1 / 4), abs=1e-12)
    assert ralc.expected_nll(ralc.BetaConfidence(1, 1), 1) == pytest.approx(1.0, abs=1e-12)
    assert ralc.expected_nll(ralc.BetaConfidence(2, 2), 1) == pytest.approx(5 / 6, abs=1e-12)
    assert ralc.beta_kl(ralc.BetaConfidence(3, 4), ralc.BetaConfidence(3, 4)) == 0.0


def test_fits():
    assert ralc.fit_beta_moments([0.2, 0.4, 0.6, 0.8]) == ralc.BetaConfidence(1.375, 1.375)
    assert ralc.fit_beta_moments([0.7] * 10).alpha == pytest.approx(7.0)
    assert ralc.fit_beta_mle([0.1, 0.5, 0.9, 0.3, 0.7]).mean == pytest.approx(0.5, abs=1e-6)


def test_calibration_round_trip():
    means = [0.9, 0.8, 0.95, 0.6, 0.7, 0.85, 0.55, 0.99]
    labels = [1, 0, 1, 0, 1, 0, 0, 1]
    m = ralc.fit_calibrator("platt", means, labels)
    assert m.kind == "platt"
    again = ralc.CalibrationMap.from_dict(json.loads(json.dumps(m.to_dict())))
    d = ralc.BetaConfidence(9, 1)
    assert again.apply(d) == m.apply(d)
    assert m.apply(d).concentration == pytest.approx(10.0, rel=1e-12)
    assert ralc.CalibrationMap.identity().apply(d) == d
    with pytest.raises(ValueError):
        ralc.fit_calibrator("platt", [0.5, 0.6], [1, 1])
    with pytest.raises(ralc.ParseError):
        ralc.CalibrationMap.from_dict({"kind": "bogus", "params": {}})


def test_evaluate_and_sweeps():
    dists = [ralc.BetaConfidence(8, 2), ralc.BetaConfidence(3, 7)]
    report = ralc.evaluate(dists, [1, 0], seed=1)
    assert report["n_instances"] == 2
    assert 0.0 <= report["generalized_ece"] <= 1.0
    pts = ralc.metric_sweeps()
    conc = [p["fd"] for p in pts if p["sweep"] == "concentration"]
    assert all(a < b for a, b in zip(conc, conc[1:]))


def test_retrieval(tmp_path):
    lex = ralc.Lexicon([(f"h{i}", ralc.BetaConfidence.from_mean_concentration(0.1 + 0.2 * i, 10)) for i in range(5)])
    top = ralc.retrieve(lex, ralc.BetaConfidence(9, 1), k=2)
    assert [t[0] for t in top] == ["h4", "h3"]
    path = tmp_path / "lex.jsonl"
    lex.save(str(path))
    assert len(ralc.Lexicon.load(str(path))) == 5


def test_pipeline_closed_loop(tmp_path):
    data = tmp_path / "data.jsonl"
    ralc.make_synthetic_dataset(str(data), n_records=200, seed=4)
    lex = ralc.Lexicon([(f"h{i}", ralc.BetaConfidence.from_mean_concentration((i + 1) / 20, 10)) for i in range(19)])
    out = tmp_path / "out"
    report = ralc.run_ralc(str(data), lex, out_dir=str(out), seed=4, w1_samples=200)
    assert report["propagation_rho"] == 1.0
    assert report["linguistic"]["post"]["mean_fd"] <= report["linguistic"]["pre"]["mean_fd"]
    assert sorted(p.name for p in out.iterdir()) == [
        "metrics.csv",
        "reliability_post.csv",
        "reliability_pre.csv",
        "report.json",
        "trace.jsonl",
    ]
    assert json.loads((out / "report.json").read_text()) == report
    base = ralc.run_baseline(str(data), "hedged_qa")
    assert base["mode"] == "hedged_qa" and base["propagation_rho"] is None
    with pytest.raises(OSError):
        ralc.run_ralc(str(tmp_path / "missing.jsonl"), lex)
