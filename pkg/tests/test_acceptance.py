"""Acceptance suite: every exit criterion at its stated tolerance and budget.

Each test prints one PASS/FAIL line in the terminal summary (see conftest).
"""

import csv
import itertools
import json
import math
import time
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from teflow import (
    DatedSeries,
    OhlcBar,
    OhlcSeries,
    ProcessSpec,
    SymbolSeries,
    TeConfig,
    WindowScheme,
    count_transitions,
    estimate,
    garman_klass_volatility,
    generate,
    parkinson_volatility,
    transfer_entropy,
    window_analysis,
)
from teflow.cli import main
from teflow.pipeline import REPORT_COLUMNS
from teflow.te import substream

from oracles import binary_entropy_bits, naive_te_binary_lag1, naive_transfer_entropy

FIXTURES = Path(__file__).parent / "fixtures"


def sym(bits, m=2):
    return SymbolSeries.from_symbols(bits, m)


def dated(values, label):
    start = date(2015, 1, 1)
    dates = tuple(start + timedelta(days=i) for i in range(len(values)))
    return DatedSeries(dates=dates, values=np.asarray(values, dtype=float), label=label)


class Budget:
    """Wall-clock gate for a criterion."""

    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, \
                f"runtime {self.elapsed:.1f}s exceeds the {self.seconds}s budget"


def test_golden_plug_in_te():
    """Hand-countable micro-example matches the closed form and the brute-force oracle."""
    with Budget(1.0):
        x = [0, 1, 1, 0, 1, 0, 0, 1]
        y = [0, 0, 1, 1, 0, 1, 0, 0]
        te = transfer_entropy(count_transitions(sym(y), sym(x), 1, 1), 2.0)
        closed_form = 4 / 7 + (1 / 7) * math.log2(3) + (2 / 7) * math.log2(1.5)
        assert te == pytest.approx(closed_form, abs=1e-9)
        assert te == pytest.approx(naive_transfer_entropy(y, x, 1, 1), abs=1e-12)


def test_analytic_copy_process_consistency():
    """Binary copy process: forward ~1 bit with tight ETE; reverse null and insignificant."""
    with Budget(5.0):
        src, tgt = generate(ProcessSpec(kind="copy", length=10000, seed=7))
        cfg = TeConfig(n_shuffles=100, n_bootstrap=300, seed=42)
        forward = estimate(sym(tgt), sym(src), cfg, direction="x->y")
        assert 0.97 <= forward.te <= 1.00
        assert abs(forward.ete - 1.0) <= 0.03
        backward = estimate(sym(src), sym(tgt), cfg, direction="y->x")
        assert abs(backward.ete) <= 0.01
        assert backward.p_value > 0.05


def test_null_calibration_over_20_seeds():
    """Independent pairs: |ETE| always tiny, p above 0.05 in at least 18 of 20 runs."""
    with Budget(60.0):
        insignificant = 0
        for seed in range(20):
            src, tgt = generate(ProcessSpec(kind="iid_binary", length=5000, seed=seed))
            cfg = TeConfig(n_shuffles=100, n_bootstrap=300, seed=seed)
            est = estimate(sym(tgt), sym(src), cfg)
            assert abs(est.ete) <= 0.01
            insignificant += est.p_value > 0.05
        assert insignificant >= 18


def test_noisy_coupling_oracle():
    """copy(d=1, noise=0.11): estimate matches 1 - H(0.11), target recomputed here."""
    with Budget(5.0):
        # independent recomputation of the binary entropy target
        h = binary_entropy_bits(0.11)
        assert h == pytest.approx(-0.11 * math.log2(0.11) - 0.89 * math.log2(0.89), abs=0)
        target_bits = 1.0 - h
        src, tgt = generate(ProcessSpec(kind="copy", length=10000, seed=9, noise=0.11))
        te = transfer_entropy(count_transitions(sym(tgt), sym(src), 1, 1))
        assert abs(te - target_bits) <= 0.03


def test_brute_force_equivalence_sweep():
    """Exhaustive: every binary pair of length 2..10 agrees with the naive oracle."""
    with Budget(30.0):
        checked = 0
        for n in range(2, 11):
            raw = list(itertools.product((0, 1), repeat=n))
            series = [sym(bits) for bits in raw]
            for xr, xs in zip(raw, series):
                for yr, ys in zip(raw, series):
                    te = transfer_entropy(count_transitions(ys, xs, 1, 1))
                    ref = naive_te_binary_lag1(xr, yr)
                    assert abs(te - ref) <= 1e-12, (xr, yr, te, ref)
                    checked += 1
        assert checked == sum(4 ** n for n in range(2, 11))


def test_closed_form_volatility():
    """Range estimators hit their closed forms and vanish on degenerate bars."""
    e = math.e
    day = date(2020, 1, 1)
    bar_e = OhlcSeries(bars=(OhlcBar(day=day, open=1.5, high=e, low=1.0, close=1.5),))
    assert parkinson_volatility(bar_e).values[0] == pytest.approx(0.600561, abs=1e-6)
    assert parkinson_volatility(bar_e).values[0] == pytest.approx(
        1.0 / (2.0 * math.sqrt(math.log(2.0))), abs=1e-12)
    assert garman_klass_volatility(bar_e).values[0] == pytest.approx(0.707107, abs=1e-6)
    assert garman_klass_volatility(bar_e).values[0] == pytest.approx(math.sqrt(0.5), abs=1e-12)
    flat = OhlcSeries(bars=(OhlcBar(day=day, open=2.0, high=2.0, low=2.0, close=2.0),))
    assert parkinson_volatility(flat).values[0] == 0.0
    assert garman_klass_volatility(flat).values[0] == 0.0


def test_window_partition_arithmetic():
    """2300 aligned observations split --count 4 into exactly 4 windows of 575."""
    rng = substream(1, 60, 0)
    src = dated(rng.integers(0, 2, 2300), "x")
    tgt = dated(substream(1, 61, 0).integers(0, 2, 2300), "y")
    cfg = TeConfig(n_shuffles=5, n_bootstrap=0, seed=1)
    windows, dropped = window_analysis(src, tgt, cfg, WindowScheme(count=4))
    assert len(windows) == 4
    assert dropped == 0
    for i, w in enumerate(windows):
        assert (w.end - w.start).days + 1 == 575
        assert w.start == src.dates[i * 575]
        assert w.end == src.dates[(i + 1) * 575 - 1]


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    """Fixture-driven end-to-end inputs: normalize, index, derive return/volatility."""
    root = tmp_path_factory.mktemp("accept")
    norm = root / "norm"
    assert main(["ingest", "--ohlc", str(FIXTURES / "ohlc.csv"),
                 "--trends-dir", str(FIXTURES / "trends"), "--out", str(norm)]) == 0
    assert main(["index", "--set", "subset3", "--input-dir", str(norm), "--diff",
                 "--out", str(root)]) == 0
    assert main(["returns", "--ohlc", str(norm / "ohlc.csv"), "--out", str(root)]) == 0
    assert main(["vol", "--ohlc", str(norm / "ohlc.csv"), "--method", "parkinson",
                 "--out", str(root)]) == 0
    return root


def te_args(ws, out):
    return ["te",
            "--source", str(ws / "subset3_diff.csv"), "--source-label", "GTC",
            "--target", str(ws / "returns.csv"), "--target-label", "Return",
            "--target", str(ws / "vol_parkinson.csv"), "--target-label", "Volatility",
            "--k", "1", "--l", "1", "--shuffles", "100", "--boot", "300",
            "--seed", "42", "--out", str(out)]


def test_pipeline_schema_fidelity(cli_workspace, tmp_path):
    """One run covers all four direction rows with the TE/ETE/Std.Err./p-value columns."""
    out = tmp_path / "report"
    assert main(te_args(cli_workspace, out)) == 0
    with open(out / "te_report.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == REPORT_COLUMNS
    assert [r["direction"] for r in rows] == [
        "GTC->Return", "Return->GTC", "GTC->Volatility", "Volatility->GTC",
    ]
    for row in rows:
        assert float(row["te"]) >= 0.0
        assert row["std_err"] != "" and row["p_value"] != ""
        assert float(row["ete"]) == pytest.approx(float(row["te"]), abs=1.0)
    doc = json.loads((out / "te_report.json").read_text())
    assert len(doc["rows"]) == 4


def test_report_determinism(cli_workspace, tmp_path):
    """Repeated runs and different thread counts produce byte-identical reports."""
    out_a, out_b, out_c = (tmp_path / n for n in ("a", "b", "c"))
    assert main(te_args(cli_workspace, out_a)) == 0
    assert main(te_args(cli_workspace, out_b)) == 0
    assert main(te_args(cli_workspace, out_c) + ["--threads", "4"]) == 0
    ref_csv = (out_a / "te_report.csv").read_bytes()
    ref_json = (out_a / "te_report.json").read_bytes()
    assert (out_b / "te_report.csv").read_bytes() == ref_csv
    assert (out_c / "te_report.csv").read_bytes() == ref_csv
    assert (out_b / "te_report.json").read_bytes() == ref_json
    assert (out_c / "te_report.json").read_bytes() == ref_json


def test_regime_change_windows_over_20_seeds():
    """Coupling only in the second half: first window quiet, last window significant."""
    ok = 0
    for seed in range(20):
        n = 2000
        src_vals = substream(seed, 50, 0).integers(0, 2, size=n)
        tgt_vals = substream(seed, 51, 0).integers(0, 2, size=n)
        tgt_vals[n // 2:] = src_vals[n // 2 - 1: n - 1]
        src, tgt = dated(src_vals, "x"), dated(tgt_vals, "y")
        cfg = TeConfig(n_shuffles=100, n_bootstrap=300, seed=seed)
        windows, _ = window_analysis(src, tgt, cfg, WindowScheme(count=4))
        first, last = windows[0].forward, windows[-1].forward
        ok += (first.p_value > 0.05) and (last.p_value < 0.05)
    assert ok >= 18
