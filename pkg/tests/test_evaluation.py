"""Experiment harness tests: metrics, studies, benchmark table, serializers.

Oracles: hand-computable burn-in indices and mean squared errors, a
direct recomputation of the rank correlation with scipy, and exact
expected serialization strings for small hand-built results.
"""

import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from voltrack import (
    BENCH_METHODS,
    BenchReport,
    ConvergenceResult,
    FuncSpec,
    OrderingResult,
    Scenario,
    bench_csv_text,
    bench_json_text,
    benchmark_report,
    burn_in_index,
    convergence_csv_text,
    convergence_experiment,
    convergence_json_text,
    convergence_plot_text,
    ordering_agreement,
    ordering_csv_text,
    ordering_json_text,
    shift_sensitivity,
    vn_metric,
)

SINU = Scenario(
    mu_spec=FuncSpec("constant", (0.05,)),
    v_spec=FuncSpec("sinusoid", (0.09, 0.04, 2.0, 0.3)),
)


class TestBurnInIndex:
    def test_reference_values(self):
        # 1000^(2/3) = 100; 16000^(2/3) = 634.96...; 8^(2/3) = 4 but the
        # n//4 cap bites first.
        assert burn_in_index(1000, 0) == 100
        assert burn_in_index(16000, 0) == 635
        assert burn_in_index(8, 0) == 2

    def test_higher_order_uses_larger_layer(self):
        assert burn_in_index(10_000, 1) > burn_in_index(10_000, 0)

    def test_scale_factor(self):
        assert burn_in_index(1000, 0, c=2.0) == 200
        assert burn_in_index(1000, 0, c=0.5) == 50

    def test_cap_keeps_evaluation_window(self):
        for n in (10, 100, 1000):
            assert burn_in_index(n, 4) <= n // 4

    def test_validation(self):
        with pytest.raises(ValueError):
            burn_in_index(1, 0)
        with pytest.raises(ValueError):
            burn_in_index(100, -1)
        with pytest.raises(ValueError):
            burn_in_index(100, 0, c=0.0)


class TestVnMetric:
    def test_identical_sequences_give_zero(self):
        v = np.linspace(0.05, 0.1, 50)
        assert vn_metric(v, v, 10) == 0.0

    def test_constant_offset(self):
        # dyadic values keep the offset and its square exact
        v = np.full(40, 0.125)
        assert vn_metric(v, v + 0.25, 0) == 0.0625

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(1)
        v, e = rng.random(100), rng.random(100)
        burn = 17
        expected = float(np.mean((v[burn:] - e[burn:]) ** 2))
        assert_allclose(vn_metric(v, e, burn), expected, rtol=1e-12)

    def test_burn_in_discards_head(self):
        v = np.full(30, 0.09)
        e = v.copy()
        e[:5] = 100.0
        assert vn_metric(v, e, 5) == 0.0
        assert vn_metric(v, e, 4) > 0.0

    def test_validation(self):
        v = np.full(30, 0.09)
        with pytest.raises(ValueError):
            vn_metric(v, v[:-1], 0)
        with pytest.raises(ValueError):
            vn_metric(v, v, 30)
        with pytest.raises(ValueError):
            vn_metric(v, v, -1)


class TestResultValidation:
    def test_convergence_result(self):
        good = dict(
            n_values=(100, 400, 1600),
            mse_values=(0.1, 0.05, 0.02),
            fitted_slope=-0.6,
            theoretical_slope=-2 / 3,
            seeds_per_n=10,
        )
        ConvergenceResult(**good)
        with pytest.raises(ValueError):
            ConvergenceResult(**{**good, "n_values": (100, 400), "mse_values": (0.1, 0.05)})
        with pytest.raises(ValueError):
            ConvergenceResult(**{**good, "n_values": (100, 400, 400)})
        with pytest.raises(ValueError):
            ConvergenceResult(**{**good, "mse_values": (0.1, 0.05)})
        with pytest.raises(ValueError):
            ConvergenceResult(**{**good, "mse_values": (0.1, 0.05, 0.0)})

    def test_ordering_result(self):
        good = dict(
            theta_grid=(0.1, 1.0, 10.0),
            sn_values=(0.3, 0.2, 0.4),
            vn_values=(0.03, 0.02, 0.04),
            kendall_tau=1.0,
            argmin_match=True,
        )
        OrderingResult(**good)
        with pytest.raises(ValueError):
            OrderingResult(**{**good, "theta_grid": (0.1, 0.1, 10.0)})
        with pytest.raises(ValueError):
            OrderingResult(**{**good, "sn_values": (0.3, 0.2)})

    def test_bench_report(self):
        good = dict(
            rows=(("a", 200),),
            columns=("garch11", "filter0"),
            cells=((0.1, 0.2),),
        )
        BenchReport(**good)
        with pytest.raises(ValueError):
            BenchReport(**{**good, "cells": ()})
        with pytest.raises(ValueError):
            BenchReport(**{**good, "cells": ((0.1,),)})
        with pytest.raises(ValueError):
            BenchReport(**{**good, "cells": ((0.1, -0.2),)})
        BenchReport(**{**good, "cells": ((0.1, None),)})


class TestConvergenceExperiment:
    def test_small_study_decays(self):
        result = convergence_experiment(SINU, 0, (400, 1200, 4000), seeds=10)
        assert result.n_values == (400, 1200, 4000)
        assert result.seeds_per_n == 10
        assert result.mse_values[0] > result.mse_values[1] > result.mse_values[2]
        assert result.fitted_slope < -0.4
        assert result.theoretical_slope == -2.0 / 3.0

    def test_theoretical_slope_formula(self):
        result = convergence_experiment(SINU, 1, (400, 1200, 4000), seeds=10)
        assert result.theoretical_slope == -0.8

    def test_validation(self):
        with pytest.raises(ValueError):
            convergence_experiment(SINU, 0, (400, 1200), seeds=10)
        with pytest.raises(ValueError):
            convergence_experiment(SINU, 0, (400, 1200, 3000), seeds=10)
        with pytest.raises(ValueError):
            convergence_experiment(SINU, 0, (400, 1200, 4000), seeds=5)


class TestOrderingAgreement:
    def test_small_study(self):
        grid = np.logspace(-1, 1.2, 12)
        result = ordering_agreement(SINU, grid, n=1000, seeds=10)
        assert result.kendall_tau >= 0.7
        assert result.argmin_match
        # tau and the argmin flag must be exactly what the sequences say
        recomputed = float(stats.kendalltau(result.sn_values, result.vn_values).statistic)
        assert result.kendall_tau == recomputed
        assert result.argmin_match == (
            int(np.argmin(result.sn_values)) == int(np.argmin(result.vn_values))
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            ordering_agreement(SINU, (0.1, 0.2), n=500, seeds=10)
        with pytest.raises(ValueError):
            ordering_agreement(SINU, np.logspace(-1, 1, 12)[::-1], n=500, seeds=10)
        with pytest.raises(ValueError):
            ordering_agreement(SINU, np.logspace(-1, 1, 12), n=500, seeds=3)


class TestShiftSensitivity:
    def test_small_and_non_negative(self):
        value = shift_sensitivity(SINU, 0, 500, 3)
        assert 0.0 <= value < 1e-3

    def test_validation(self):
        with pytest.raises(ValueError):
            shift_sensitivity(SINU, 0, 500, 0)


class TestBenchmarkReport:
    def test_all_methods_on_synthetic_series(self):
        rng = np.random.default_rng(5)
        xs = np.abs(rng.normal(0.09, 0.03, size=150))
        report = benchmark_report({"synthetic": xs})
        assert report.columns == BENCH_METHODS
        assert report.rows == (("synthetic", 150),)
        cells = dict(zip(report.columns, report.cells[0]))
        assert all(c is not None and c >= 0.0 for c in cells.values())
        # the staged level filter starts from the pure filter's solution
        assert cells["filter1"] <= cells["filter0"] + 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            benchmark_report({})
        with pytest.raises(ValueError):
            benchmark_report({"short": np.full(50, 0.1)})
        with pytest.raises(ValueError):
            benchmark_report({"flat": np.full((150, 2), 0.1)})


CONV = ConvergenceResult(
    n_values=(100, 400, 1600),
    mse_values=(0.5, 0.25, 0.125),
    fitted_slope=-0.5,
    theoretical_slope=-2 / 3,
    seeds_per_n=10,
)

ORDER = OrderingResult(
    theta_grid=(0.5, 1.0, 2.0),
    sn_values=(0.25, 0.125, 0.5),
    vn_values=(0.025, 0.0125, 0.05),
    kendall_tau=1.0,
    argmin_match=True,
)

BENCH = BenchReport(
    rows=(("alpha", 200), ("beta", 300)),
    columns=("garch11", "filter0"),
    cells=((0.25, 0.125), (None, 0.5)),
)


class TestSerializers:
    def test_convergence_csv(self):
        assert convergence_csv_text(CONV) == "n,mse\n100,0.5\n400,0.25\n1600,0.125\n"

    def test_convergence_plot_two_columns(self):
        lines = convergence_plot_text(CONV).strip().split("\n")
        assert len(lines) == 3
        for (n, mse), line in zip(zip(CONV.n_values, CONV.mse_values), lines):
            a, b = line.split(" ")
            assert float(a) == math.log(n)
            assert float(b) == math.log(mse)

    def test_convergence_json(self):
        doc = json.loads(convergence_json_text(CONV))
        assert doc["schema_version"] == 1
        assert doc["kind"] == "convergence"
        assert doc["n_values"] == [100, 400, 1600]
        assert doc["mse_values"] == [0.5, 0.25, 0.125]
        assert doc["fitted_slope"] == -0.5

    def test_ordering_csv(self):
        assert ordering_csv_text(ORDER) == (
            "theta,sn,vn\n0.5,0.25,0.025\n1.0,0.125,0.0125\n2.0,0.5,0.05\n"
        )

    def test_ordering_json(self):
        doc = json.loads(ordering_json_text(ORDER))
        assert doc["schema_version"] == 1
        assert doc["kind"] == "ordering"
        assert doc["theta_grid"] == [0.5, 1.0, 2.0]
        assert doc["kendall_tau"] == 1.0
        assert doc["argmin_match"] is True

    def test_bench_csv_blank_for_missing(self):
        assert bench_csv_text(BENCH) == (
            "series,method,sn\n"
            "alpha,garch11,0.25\n"
            "alpha,filter0,0.125\n"
            "beta,garch11,\n"
            "beta,filter0,0.5\n"
        )

    def test_bench_json_null_for_missing(self):
        doc = json.loads(bench_json_text(BENCH))
        assert doc["schema_version"] == 1
        assert doc["columns"] == ["garch11", "filter0"]
        assert doc["rows"][0] == {
            "name": "alpha",
            "n": 200,
            "cells": {"garch11": 0.25, "filter0": 0.125},
        }
        assert doc["rows"][1]["cells"]["garch11"] is None
