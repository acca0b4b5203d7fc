"""Evaluation metrics, stratified k-fold cross-validation and report tables.

The metrics are the four used throughout: standard accuracy (SA), macro
average accuracy (MAA), sensitivity (SE) and specificity (SP), with FALL as
the positive class. Each metric is computed from exact integer tallies;
``exact=True`` returns a :class:`fractions.Fraction` instead of a float so
algebraic identities between the metrics can be checked without rounding.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .classify import as_feature_set
from .errors import ClassAbsent, EmptyInput, LengthMismatch, StratumTooSmall, TooFewInstances
from .records import FeatureSet, Label

REPORT_FORMAT_VERSION = 1
METRICS = ("sa", "maa", "se", "sp")

__all__ = [
    "ConfusionCounts",
    "FoldReport",
    "ExperimentReport",
    "confusion",
    "standard_accuracy",
    "macro_average_accuracy",
    "sensitivity",
    "specificity",
    "stratified_folds",
    "kfold_cv",
    "holdout",
    "emit_table",
    "config_hash",
    "append_ledger",
    "read_ledger",
]


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-class tallies: NP_a occurrences of class a, TP_a of them recognised."""

    np_adl: int
    tp_adl: int
    np_fall: int
    tp_fall: int

    def __post_init__(self):
        for tp, n in ((self.tp_adl, self.np_adl), (self.tp_fall, self.np_fall)):
            if not 0 <= tp <= n:
                raise ValueError(f"invalid tally TP={tp}, NP={n}")

    @property
    def np(self) -> dict:
        return {Label.ADL: self.np_adl, Label.FALL: self.np_fall}

    @property
    def tp(self) -> dict:
        return {Label.ADL: self.tp_adl, Label.FALL: self.tp_fall}

    @property
    def true_positives(self) -> int:
        return self.tp_fall

    @property
    def positives(self) -> int:
        return self.np_fall

    @property
    def true_negatives(self) -> int:
        return self.tp_adl

    @property
    def negatives(self) -> int:
        return self.np_adl

    @property
    def total(self) -> int:
        return self.np_adl + self.np_fall

    def swapped(self) -> "ConfusionCounts":
        """Counts after exchanging the roles of ADL and FALL."""
        return ConfusionCounts(self.np_fall, self.tp_fall, self.np_adl, self.tp_adl)

    def to_dict(self) -> dict:
        return {"np_adl": self.np_adl, "tp_adl": self.tp_adl, "np_fall": self.np_fall, "tp_fall": self.tp_fall}


def confusion(predictions, truths) -> ConfusionCounts:
    pred = np.asarray([int(Label.parse(p)) for p in predictions] if _is_textual(predictions) else predictions)
    true = np.asarray([int(Label.parse(t)) for t in truths] if _is_textual(truths) else truths)
    if pred.shape != true.shape:
        raise LengthMismatch(f"{pred.size} predictions for {true.size} truths")
    if true.size == 0:
        raise EmptyInput("no predictions to tally")
    fall = true == Label.FALL
    hit = pred == true
    return ConfusionCounts(
        np_adl=int((~fall).sum()),
        tp_adl=int((hit & ~fall).sum()),
        np_fall=int(fall.sum()),
        tp_fall=int((hit & fall).sum()),
    )


def _is_textual(seq) -> bool:
    if isinstance(seq, np.ndarray):
        return seq.dtype.kind in "UO"
    return any(isinstance(v, str) for v in seq)


def _out(value: Fraction, exact: bool):
    return value if exact else float(value)


def standard_accuracy(c: ConfusionCounts, exact: bool = False):
    if c.total == 0:
        raise EmptyInput("no instances evaluated")
    return _out(Fraction(c.tp_adl + c.tp_fall, c.total), exact)


def _class_accuracy(tp: int, n: int, name: str) -> Fraction:
    if n == 0:
        raise ClassAbsent(f"class {name} does not occur in the evaluated set")
    return Fraction(tp, n)


def sensitivity(c: ConfusionCounts, exact: bool = False):
    return _out(_class_accuracy(c.tp_fall, c.np_fall, "FALL"), exact)


def specificity(c: ConfusionCounts, exact: bool = False):
    return _out(_class_accuracy(c.tp_adl, c.np_adl, "ADL"), exact)


def macro_average_accuracy(c: ConfusionCounts, exact: bool = False):
    """Unweighted mean of the per-class accuracies.

    The float result averages the already-rounded per-class accuracies, so
    ``macro_average_accuracy(c) == (sensitivity(c) + specificity(c)) / 2``
    holds bit for bit.
    """
    per_class = [_class_accuracy(c.tp_adl, c.np_adl, "ADL"), _class_accuracy(c.tp_fall, c.np_fall, "FALL")]
    if exact:
        return sum(per_class, Fraction(0)) / len(per_class)
    return (float(per_class[1]) + float(per_class[0])) / 2


# ---------------------------------------------------------------------------
# cross-validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldReport:
    fold_index: int
    sa: float
    maa: float
    se: float
    sp: float
    counts: ConfusionCounts

    @classmethod
    def from_counts(cls, fold_index: int, counts: ConfusionCounts) -> "FoldReport":
        return cls(
            fold_index,
            standard_accuracy(counts),
            macro_average_accuracy(counts),
            sensitivity(counts),
            specificity(counts),
            counts,
        )

    def to_dict(self) -> dict:
        return {"fold": self.fold_index, **{m: getattr(self, m) for m in METRICS}, "counts": self.counts.to_dict()}


@dataclass(frozen=True)
class ExperimentReport:
    config: dict
    folds: tuple
    means: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.means and self.folds:
            object.__setattr__(
                self, "means", {m: math.fsum(getattr(f, m) for f in self.folds) / len(self.folds) for m in METRICS}
            )

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "config": self.config,
            "folds": [f.to_dict() for f in self.folds],
            "means": self.means,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        folds = tuple(
            FoldReport(f["fold"], f["sa"], f["maa"], f["se"], f["sp"], ConfusionCounts(**f["counts"])) for f in d["folds"]
        )
        return cls(d["config"], folds, dict(d["means"]))


def stratified_folds(labels, folds: int = 10, seed: int = 0) -> np.ndarray:
    """Assign each instance a fold in ``0..folds-1``, stratified by label.

    Each stratum is shuffled with a PCG64 generator seeded by ``seed`` and
    dealt round-robin, so per-stratum fold sizes differ by at most one.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise ValueError("need at least two folds")
    if labels.size < folds:
        raise TooFewInstances(f"{labels.size} instances cannot fill {folds} folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    assign = np.empty(labels.size, dtype=np.intp)
    for lab in (Label.ADL, Label.FALL):
        idx = np.flatnonzero(labels == lab)
        if idx.size < folds:
            raise StratumTooSmall(f"only {idx.size} {lab.name} instances for {folds} folds")
        assign[rng.permutation(idx)] = np.arange(idx.size) % folds
    return assign


def _run_fold(fs: FeatureSet, assign: np.ndarray, fold: int, pipeline) -> FoldReport:
    test = assign == fold
    model = pipeline.train(fs.subset(~test))
    pred = pipeline.predict(model, fs.X[test])
    return FoldReport.from_counts(fold + 1, confusion(pred, fs.labels[test]))


def kfold_cv(data, pipeline, folds: int = 10, seed: int = 0, config: dict | None = None, workers: int = 1) -> ExperimentReport:
    """Stratified k-fold cross-validation of a train/predict pipeline.

    Every instance is tested exactly once. Folds may run on a thread pool;
    the report is assembled in fold order so parallel and serial runs agree.
    """
    fs = as_feature_set(data)
    assign = stratified_folds(fs.labels, folds, seed)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda f: _run_fold(fs, assign, f, pipeline), range(folds)))
    else:
        reports = [_run_fold(fs, assign, f, pipeline) for f in range(folds)]
    cfg = dict(config or {})
    cfg.setdefault("folds", folds)
    cfg.setdefault("seed", seed)
    return ExperimentReport(cfg, tuple(reports))


def holdout(train, test, pipeline, config: dict | None = None) -> ExperimentReport:
    """Fit on ``train`` and score once on ``test`` (a single-row report)."""
    tr, te = as_feature_set(train), as_feature_set(test)
    model = pipeline.train(tr)
    fold = FoldReport.from_counts(1, confusion(pipeline.predict(model, te.X), te.labels))
    cfg = dict(config or {})
    cfg["protocol"] = "holdout"
    return ExperimentReport(cfg, (fold,))


# ---------------------------------------------------------------------------
# rendering and ledgers
# ---------------------------------------------------------------------------

def _pct(v: float) -> str:
    return f"{100.0 * v:.2f}"


def emit_table(report: ExperimentReport, style: str = "CSV") -> str:
    """Render one row per fold plus a mean row, metrics as percentages."""
    style = style.upper()
    header = ["fold", "SA", "MAA", "SE", "SP"]
    rows = [[str(f.fold_index)] + [_pct(getattr(f, m)) for m in METRICS] for f in report.folds]
    rows.append(["mean"] + [_pct(report.means[m]) for m in METRICS])
    cfg = json.dumps(report.config, sort_keys=True)
    if style == "CSV":
        buf = io.StringIO()
        buf.write(f"# format_version={REPORT_FORMAT_VERSION}\n# config={cfg}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if style == "MARKDOWN":
        lines = [
            f"<!-- format_version={REPORT_FORMAT_VERSION} config={cfg} -->",
            "| " + " | ".join(header) + " |",
            "|" + "---|" * len(header),
        ]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table style {style!r}")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def append_ledger(path, config: dict, means: dict | None, status: str = "ok", error: str | None = None, key: str | None = None) -> dict:
    """Append one JSON row; ``key`` overrides the hash of ``config``."""
    row = {
        "format_version": REPORT_FORMAT_VERSION,
        "config_hash": key or config_hash(config),
        "config": config,
        "status": status,
        "means": means,
    }
    if error:
        row["error"] = error
    with open(path, "a") as fh:
        fh.write(json.dumps(row, sort_keys=True) + "\n")
    return row


def read_ledger(path) -> list[dict]:
    try:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except FileNotFoundError:
        return []
