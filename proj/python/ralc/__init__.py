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

"""Beta-distributed confidence: metrics, calibration, hedge retrieval and rewriting."""

from ._ralc import (
    BetaConfidence,
    CalibrationMap,
    GatewayError,
    IoError,
    Lexicon,
    ParseError,
    beta_kl,
    beta_w1,
    evaluate,
    expected_brier,
    expected_nll,
    faithfulness_divergence,
    fit_beta_mle,
    fit_beta_moments,
    fit_calibrator,
    make_synthetic_dataset,
    metric_sweeps,
    retrieve,
    run_baseline,
    run_ralc,
)

__version__ = "0.1.0"

__all__ = [
    "BetaConfidence",
    "CalibrationMap",
    "GatewayError",
    "IoError",
    "Lexicon",
    "ParseError",
    "beta_kl",
    "beta_w1",
    "evaluate",
    "expected_brier",
    "expected_nll",
    "faithfulness_divergence",
    "fit_beta_mle",
    "fit_beta_moments",
    "fit_calibrator",
    "make_synthetic_dataset",
    "metric_sweeps",
    "retrieve",
    "run_baseline",
    "run_ralc",
]
