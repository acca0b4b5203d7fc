import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fallfourier.classify import make_pipeline
from fallfourier.errors import ClassAbsent, EmptyInput, LengthMismatch, StratumTooSmall, TooFewInstances
from fallfourier.evaluate import (
    ConfusionCounts,
    ExperimentReport,
    append_ledger,
    confusion,
    emit_table,
    kfold_cv,
    macro_average_accuracy,
    read_ledger,
    sensitivity,
    specificity,
    standard_accuracy,
    stratified_folds,
)
from fallfourier.records import FeatureSet

from oracles import tally

# NP_ADL=781, TP_ADL=750, NP_FALL=50, TP_FALL=40
CASE = ConfusionCounts(np_adl=781, tp_adl=750, np_fall=50, tp_fall=40)


def test_confusion_examples():
    truth = [0, 1, 0, 1]
    c = confusion(truth, truth)
    assert c.tp == c.np
    c = confusion([0, 0, 0, 0], truth)
    assert c.tp_fall == 0 and c.np_fall == 2
    c = confusion(["ADL", "FALL"], ["FALL", "FALL"])
    assert (c.np_fall, c.tp_fall) == (2, 1)


def test_confusion_against_tally_oracle(rng):
    pred = rng.integers(0, 2, 100)
    truth = rng.integers(0, 2, 100)
    assert confusion(pred, truth).to_dict() == tally(pred, truth)


def test_confusion_errors():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0])
    with pytest.raises(EmptyInput):
        confusion([], [])


def test_derived_case_values():
    assert standard_accuracy(CASE) == 790 / 831
    assert standard_accuracy(CASE) == pytest.approx(0.950662, abs=1e-6)
    assert macro_average_accuracy(CASE, exact=True) == (Fraction(750, 781) + Fraction(40, 50)) / 2
    assert macro_average_accuracy(CASE) == pytest.approx(0.880154, abs=1e-6)
    assert sensitivity(CASE) == 0.8
    assert specificity(CASE) == pytest.approx(0.960307, abs=1e-6)


def test_trivial_metric_values():
    perfect = ConfusionCounts(10, 10, 5, 5)
    for f in (standard_accuracy, macro_average_accuracy, sensitivity, specificity):
        assert f(perfect) == 1.0
    assert standard_accuracy(ConfusionCounts(10, 0, 5, 0)) == 0.0


def test_metric_errors():
    with pytest.raises(EmptyInput):
        standard_accuracy(ConfusionCounts(0, 0, 0, 0))
    with pytest.raises(ClassAbsent):
        macro_average_accuracy(ConfusionCounts(3, 1, 0, 0))
    with pytest.raises(ClassAbsent):
        sensitivity(ConfusionCounts(3, 1, 0, 0))
    with pytest.raises(ClassAbsent):
        specificity(ConfusionCounts(0, 0, 3, 1))
    with pytest.raises(ValueError):
        ConfusionCounts(3, 4, 1, 0)


counts = st.integers(1, 2000).flatmap(
    lambda na: st.integers(1, 2000).flatmap(
        lambda nf: st.tuples(st.just(na), st.integers(0, na), st.just(nf), st.integers(0, nf))
    )
)


@given(counts)
def test_metric_invariants(t):
    c = ConfusionCounts(*t)
    se, sp, sa, maa = sensitivity(c), specificity(c), standard_accuracy(c), macro_average_accuracy(c)
    assert maa == (se + sp) / 2
    assert min(se, sp) <= sa <= max(se, sp)
    s = c.swapped()
    assert (sensitivity(s), specificity(s)) == (sp, se)
    assert standard_accuracy(s) == sa and macro_average_accuracy(s) == maa


@given(st.integers(1, 2000), st.integers(0, 2000), st.integers(0, 2000))
def test_equal_class_sizes_collapse_maa_to_sa(n, a, b):
    c = ConfusionCounts(n, min(a, n), n, min(b, n))
    assert macro_average_accuracy(c, exact=True) == standard_accuracy(c, exact=True)
    assert math.isclose(macro_average_accuracy(c), standard_accuracy(c), rel_tol=4e-16, abs_tol=1e-300)


def test_constant_adl_predictor_on_imbalanced_data():
    truth = np.r_[np.zeros(781, int), np.ones(50, int)]
    c = confusion(np.zeros_like(truth), truth)
    assert standard_accuracy(c) == 781 / 831
    assert macro_average_accuracy(c) == 0.5


# ---------------------------------------------------------------- folds


def test_stratified_folds_partition(rng):
    labels = np.r_[np.zeros(80, int), np.ones(20, int)]
    assign = stratified_folds(labels, 10, seed=3)
    sizes = np.bincount(assign, minlength=10)
    assert sizes.tolist() == [10] * 10
    for lab in (0, 1):
        per = np.bincount(assign[labels == lab], minlength=10)
        assert per.max() - per.min() <= 1
    assert np.array_equal(assign, stratified_folds(labels, 10, seed=3))
    assert not np.array_equal(assign, stratified_folds(labels, 10, seed=4))


def test_stratified_folds_errors():
    with pytest.raises(TooFewInstances):
        stratified_folds(np.array([0, 1, 0]), 10)
    with pytest.raises(StratumTooSmall):
        stratified_folds(np.r_[np.zeros(50, int), np.ones(5, int)], 10)


def _separable(rng, n_adl=90, n_fall=10, d=5):
    X = np.vstack([rng.normal(size=(n_adl, d)), rng.normal(size=(n_fall, d)) + 6])
    labels = np.r_[np.zeros(n_adl, int), np.ones(n_fall, int)]
    return FeatureSet(X, labels, tuple(f"i{j:03d}" for j in range(len(labels))))


def test_kfold_each_instance_tested_once(rng):
    fs = _separable(rng)
    seen = []

    class Recorder:
        one_class = False

        def train(self, part):
            return None

        def predict(self, model, X):
            seen.extend(map(tuple, X))
            return np.zeros(len(X), dtype=np.int8)

    report = kfold_cv(fs, Recorder(), folds=10, seed=0)
    assert len(seen) == 100 and len(set(seen)) == 100
    assert [f.fold_index for f in report.folds] == list(range(1, 11))
    assert sum(f.counts.total for f in report.folds) == 100


def test_kfold_deterministic_and_parallel_equal(rng):
    fs = _separable(rng)
    pipe = make_pipeline("knn2", k=3)
    a = kfold_cv(fs, pipe, seed=9)
    b = kfold_cv(fs, pipe, seed=9)
    c = kfold_cv(fs, pipe, seed=9, workers=4)
    assert a.to_dict() == b.to_dict() == c.to_dict()
    assert set(a.means) == {"sa", "maa", "se", "sp"}
    assert a.means["sa"] > 0.95
    for m in a.means:
        assert abs(a.means[m] - sum(getattr(f, m) for f in a.folds) / 10) < 1e-12
    for f in a.folds:
        assert f.maa == (f.se + f.sp) / 2
        assert f.sa == standard_accuracy(f.counts)


def test_kfold_one_class(rng):
    fs = _separable(rng)
    report = kfold_cv(fs, make_pipeline("knn1", k=1), folds=5, seed=1)
    assert len(report.folds) == 5
    assert all(f.counts.np_fall == 2 for f in report.folds)


def test_emit_table_shapes(rng):
    fs = _separable(rng)
    report = kfold_cv(fs, make_pipeline("knn2"), seed=2, config={"collection": "2"})
    csv_text = emit_table(report, "CSV")
    md_text = emit_table(report, "MARKDOWN")
    csv_rows = [l for l in csv_text.splitlines() if not l.startswith("#")][1:]
    md_rows = [l for l in md_text.splitlines() if l.startswith("| ") and not l.startswith("| fold")]
    assert len(csv_rows) == 11 and len(md_rows) == 11
    assert csv_rows[-1].startswith("mean,")
    for c_row, m_row in zip(csv_rows, md_rows):
        assert c_row.split(",") == [x.strip() for x in m_row.strip("| ").split("|")]
    assert '"collection": "2"' in csv_text and '"collection": "2"' in md_text


def test_emit_table_two_decimal_percent():
    fold_counts = ConfusionCounts(10000, 9531, 10000, 9531)
    report = ExperimentReport({}, tuple([_fold(i, fold_counts) for i in range(1, 11)]))
    assert report.means["sa"] == pytest.approx(0.9531)
    assert "95.31" in emit_table(report, "CSV").splitlines()[-1]


def _fold(i, counts):
    from fallfourier.evaluate import FoldReport

    return FoldReport.from_counts(i, counts)


def test_report_roundtrip_and_ledger(tmp_path, rng):
    report = kfold_cv(_separable(rng), make_pipeline("knn2"), seed=2, config={"x": 1})
    assert ExperimentReport.from_dict(report.to_dict()).to_dict() == report.to_dict()
    ledger = tmp_path / "results.jsonl"
    append_ledger(ledger, report.config, report.means)
    append_ledger(ledger, {"x": 2}, None, status="error", error="boom")
    rows = read_ledger(ledger)
    assert [r["status"] for r in rows] == ["ok", "error"]
    assert rows[0]["means"] == report.means
    assert read_ledger(tmp_path / "missing.jsonl") == []
