"""End-to-end experiment orchestration used by the command line."""

from __future__ import annotations

import configparser
import itertools
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from . import ingest
from .classify import ClassifierKind, ThresholdRule, make_pipeline
from .errors import ConfigError, DataError, FallFourierError, RecordingTooShort
from .evaluate import ExperimentReport, append_ledger, config_hash, emit_table, holdout, kfold_cv, read_ledger
from .features import Extractor, feature_set
from .records import WINDOW_LENGTHS, Source, WindowRecord

log = logging.getLogger(__name__)

GRID_AXES = ("collection", "feature", "classifier", "window", "k")
# fields that do not change results and so are left out of the cell hash
_VOLATILE = ("out", "workers", "windows")


@dataclass(frozen=True)
class ExperimentConfig:
    collection: str = "2"
    feature: str = "fourier"
    classifier: str = "knn2"
    window: int = 128
    k: int = 1
    threshold_rule: str = "percentile:95"
    folds: int = 10
    seed: int = 0
    windows: tuple = ()
    out: str = "results"
    scale: float = 1.0
    normalize: bool = False
    metric: str = "euclidean"
    standardize: bool = False
    holdout: bool = False
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        try:
            collection = "all" if str(self.collection).lower() == "all" else ingest.normalize_collection_id(self.collection)[1:]
            feature = Extractor.parse(self.feature).value.lower()
            classifier = ClassifierKind.parse(self.classifier).value
            rule = str(ThresholdRule.parse(self.threshold_rule))
            metric = str(self.metric).lower()
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None
        if int(self.window) not in WINDOW_LENGTHS:
            raise ConfigError(f"window must be one of {WINDOW_LENGTHS}, got {self.window}")
        if int(self.k) < 1:
            raise ConfigError("k must be a positive integer")
        if classifier == "knn2" and int(self.k) % 2 == 0:
            raise ConfigError("two-class kNN needs an odd k")
        if int(self.folds) < 2:
            raise ConfigError("folds must be at least 2")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a non-negative 64-bit integer")
        if not 0 < float(self.scale) <= 1:
            raise ConfigError("scale must lie in (0, 1]")
        if metric not in ("euclidean", "manhattan"):
            raise ConfigError(f"unknown metric {self.metric!r}")
        windows = tuple(self.windows) if not isinstance(self.windows, str) else tuple(p for p in self.windows.split(",") if p)
        return replace(
            self,
            collection=collection,
            feature=feature,
            classifier=classifier,
            window=int(self.window),
            k=int(self.k),
            threshold_rule=rule,
            folds=int(self.folds),
            seed=int(self.seed),
            windows=windows,
            scale=float(self.scale),
            metric=metric,
            workers=int(self.workers),
        )

    def identity(self) -> dict:
        d = asdict(self)
        for key in _VOLATILE:
            d.pop(key)
        return d

    @property
    def cell_hash(self) -> str:
        return config_hash(self.identity())


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, value):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if not isinstance(value, str):
        return value
    if kind == "bool":
        try:
            return _BOOL[value.strip().lower()]
        except KeyError:
            raise ConfigError(f"{name}: expected a boolean, got {value!r}") from None
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    if kind == "tuple":
        return tuple(p.strip() for p in value.split(",") if p.strip())
    return value.strip()


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a flat ``key = value`` file, then apply non-None overrides."""
    values = {}
    names = {f.name for f in fields(ExperimentConfig)}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        parser.read_string("[experiment]\n" + text)
        for key, value in parser["experiment"].items():
            key = key.replace("-", "_")
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    try:
        coerced = {k: _coerce(k, v) for k, v in values.items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(**coerced).validate()


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

class StageError(FallFourierError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
        super().__init__(f"stage '{stage}' failed: {cause}")


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except (FallFourierError, ValueError, OSError) as exc:
                raise StageError(name, exc) from exc

        return inner

    return wrap


def fit_window_length(windows, n: int) -> list[WindowRecord]:
    out = []
    for w in windows:
        if w.n == n:
            out.append(w)
        elif w.n > n:
            out.append(ingest.recrop_window(w, n))
        else:
            raise RecordingTooShort(f"window {w.id} has {w.n} samples, need {n}")
    return out


@_stage("load")
def load_pools(paths, n: int):
    if not paths:
        raise ConfigError("no windows files given")
    windows = []
    for p in paths:
        windows.extend(ingest.read_windows(p))
    windows = fit_window_length(windows, n)
    pool1 = [w for w in windows if w.source is Source.TFALL]
    pool2 = [w for w in windows if w.source is Source.UCIHAR]
    return pool1, pool2


@_stage("collection")
def _collect(cfg: ExperimentConfig, pool1, pool2):
    if cfg.collection == "all":
        return None, list(pool1) + list(pool2), []
    spec = ingest.CollectionSpec.published(cfg.collection, seed=cfg.seed, scale=cfg.scale)
    split = ingest.build_collection(pool1, pool2, spec)
    return split, list(split.train), list(split.test)


@_stage("features")
def _features(cfg: ExperimentConfig, windows):
    return feature_set(windows, cfg.feature, normalize=cfg.normalize)


def _pipeline(cfg: ExperimentConfig):
    return make_pipeline(
        cfg.classifier,
        k=cfg.k,
        metric=cfg.metric,
        threshold_rule=cfg.threshold_rule,
        standardize=cfg.standardize,
        seed=cfg.seed,
    )


@_stage("cross-validation")
def _cv(cfg, fs, provenance):
    return kfold_cv(fs, _pipeline(cfg), folds=cfg.folds, seed=cfg.seed, config=provenance, workers=cfg.workers)


@_stage("holdout")
def _holdout(cfg, train_fs, test_fs, provenance):
    return holdout(train_fs, test_fs, _pipeline(cfg), config=provenance)


def _write_report(out: Path, stem: str, report: ExperimentReport) -> None:
    (out / f"{stem}.json").write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    (out / f"{stem}.csv").write_text(emit_table(report, "CSV"))
    (out / f"{stem}.md").write_text(emit_table(report, "MARKDOWN"))


def run_experiment(cfg: ExperimentConfig, pools=None, ledger: Path | None = None) -> ExperimentReport:
    """Build the collection, extract features, cross-validate, write tables.

    Outputs go to ``cfg.out``: ``report.{json,csv,md}``, an optional
    ``holdout.*`` set, the collection ``manifest.json``, and one summary
    row appended to ``ledger`` (default ``<out>/results.jsonl``).
    """
    cfg = cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    pool1, pool2 = pools if pools is not None else load_pools(cfg.windows, cfg.window)
    if pools is not None:
        pool1, pool2 = fit_window_length(pool1, cfg.window), fit_window_length(pool2, cfg.window)
    split, train, test = _collect(cfg, pool1, pool2)
    provenance = {"format_version": ingest.FORMAT_VERSION, "cell_hash": cfg.cell_hash, **cfg.identity()}
    if split is not None:
        ingest.write_manifest(out / "manifest.json", split, config=provenance)
    train_fs = _features(cfg, train)
    report = _cv(cfg, train_fs, provenance)
    _write_report(out, "report", report)
    if cfg.holdout and test:
        _write_report(out, "holdout", _holdout(cfg, train_fs, _features(cfg, test), provenance))
    append_ledger(ledger or out / "results.jsonl", provenance, report.means, key=cfg.cell_hash)
    return report


def expand_grid(base: ExperimentConfig, axes: dict) -> list[ExperimentConfig]:
    unknown = set(axes) - set(GRID_AXES)
    if unknown:
        raise ConfigError(f"grid axes must be among {GRID_AXES}, got {sorted(unknown)}")
    names = [a for a in GRID_AXES if a in axes]
    cells = []
    for combo in itertools.product(*(axes[a] for a in names)):
        values = {a: _coerce(a, v) for a, v in zip(names, combo)}
        cells.append(replace(base, **values).validate())
    return cells


def run_grid(base: ExperimentConfig, axes: dict, pools=None) -> list[dict]:
    """Run every grid cell into ``<out>/cells/<hash>/``.

    Cells whose hash already has an ``ok`` row in ``<out>/results.jsonl``
    are skipped, so an interrupted grid can simply be rerun. A failing cell
    is recorded with status ``error`` and the grid moves on.
    """
    out = Path(base.out)
    out.mkdir(parents=True, exist_ok=True)
    ledger = out / "results.jsonl"
    done = {row["config_hash"] for row in read_ledger(ledger) if row.get("status") == "ok"}
    if pools is None:
        pools_by_n = {}
    rows = []
    for cell in expand_grid(base, axes):
        if cell.cell_hash in done:
            log.info("skipping completed cell %s", cell.cell_hash)
            continue
        cell = replace(cell, out=str(out / "cells" / cell.cell_hash))
        try:
            if pools is None:
                if cell.window not in pools_by_n:
                    pools_by_n[cell.window] = load_pools(cell.windows, cell.window)
                cell_pools = pools_by_n[cell.window]
            else:
                cell_pools = pools
            report = run_experiment(cell, pools=cell_pools, ledger=ledger)
            rows.append({"config_hash": cell.cell_hash, "status": "ok", "means": report.means})
        except (FallFourierError, ValueError, OSError) as exc:
            provenance = {"format_version": ingest.FORMAT_VERSION, "cell_hash": cell.cell_hash, **cell.identity()}
            log.error("cell %s failed: %s", cell.cell_hash, exc)
            rows.append(append_ledger(ledger, provenance, None, status="error", error=str(exc), key=cell.cell_hash))
    return rows


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------

def ingest_datasets(tfall=None, ucihar=None, n: int = 128, seed: int = 0, out=".", tolerance: float = ingest.DEFAULT_TOLERANCE) -> dict:
    """Convert the raw datasets to canonical windows files.

    Writes ``dataset1_w<N>.jsonl`` (tFall) and/or ``dataset2_w<N>.jsonl``
    (UCI HAR) plus ``ingest_manifest.json`` with counts. tFall recordings
    too short for the window are skipped and counted.
    """
    out = Path(out)
    if not any(p and Path(p).is_dir() for p in (tfall, ucihar)):
        raise DataError(f"no dataset directory found (tfall={tfall!r}, ucihar={ucihar!r})")
    out.mkdir(parents=True, exist_ok=True)
    summary = {"format_version": ingest.FORMAT_VERSION, "window": n, "seed": seed, "datasets": {}}
    if tfall and Path(tfall).is_dir():
        recs = ingest.parse_tfall(tfall, tolerance=tolerance)
        windows, short = [], 0
        for rec in recs:
            try:
                windows.extend(ingest.windows_from_recording(rec, n))
            except RecordingTooShort as exc:
                short += 1
                log.warning("%s", exc)
        path = out / f"dataset1_w{n}.jsonl"
        ingest.write_windows(path, windows)
        summary["datasets"]["dataset1"] = {
            "path": path.name,
            "source_dir": str(tfall),
            "recordings": len(recs),
            "windows": len(windows),
            "too_short": short,
            "malformed_lines": sum(r.malformed_lines for r in recs),
            "adl": sum(w.label == 0 for w in windows),
            "fall": sum(w.label == 1 for w in windows),
        }
    if ucihar and Path(ucihar).is_dir():
        windows = fit_window_length(ingest.parse_ucihar(ucihar), n)
        path = out / f"dataset2_w{n}.jsonl"
        ingest.write_windows(path, windows)
        summary["datasets"]["dataset2"] = {"path": path.name, "source_dir": str(ucihar), "windows": len(windows), "adl": len(windows), "fall": 0}
    (out / "ingest_manifest.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    return summary
