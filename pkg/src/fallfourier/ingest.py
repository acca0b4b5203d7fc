"""Dataset parsing, windowing and train/test collection assembly.

Two public datasets feed the pipeline:

* dataset1, the tFall archive: variable-length recordings of ADL and
  simulated falls, stored as per-subject text files with one
  ``t,ax,ay,az`` sample per line. ADL and fall files live in separate
  subtrees (any path component named ``adl*`` or ``fall*``).
* dataset2, UCI HAR: pre-segmented 128-sample rows at 50 Hz. All of its
  activities count as ADL.

Both are reduced to :class:`~fallfourier.records.WindowRecord` objects and
stored in a line-delimited JSON interchange format.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InsufficientPool,
    MalformedLine,
    MissingDirectory,
    MissingFile,
    NonFiniteValue,
    RecordingTooShort,
    RowCountMismatch,
)
from .records import Label, RawRecording, Source, WindowRecord

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
UCIHAR_RATE_HZ = 50.0
UCIHAR_WINDOW = 128
DEFAULT_TOLERANCE = 0.01

__all__ = [
    "CollectionSpec",
    "SplitDataset",
    "AdlSourcePolicy",
    "PUBLISHED_COUNTS",
    "parse_tfall",
    "parse_ucihar",
    "windows_from_recording",
    "recrop_window",
    "build_collection",
    "write_windows",
    "read_windows",
    "write_manifest",
    "read_manifest",
]


# ---------------------------------------------------------------------------
# tFall
# ---------------------------------------------------------------------------

def _label_from_path(parts: Sequence[str]) -> Label | None:
    for part in parts:
        p = part.lower()
        if p.startswith("fall"):
            return Label.FALL
        if p.startswith("adl"):
            return Label.ADL
    return None


def _parse_sample_file(path: Path, time_scale: float, tolerance: float):
    rows = []
    total = 0
    malformed = 0
    last_t = -math.inf
    with open(path, "r") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            total += 1
            try:
                vals = [float(v) for v in line.rstrip(";").split(",")]
            except ValueError:
                malformed += 1
                continue
            if len(vals) != 4 or not all(math.isfinite(v) for v in vals):
                malformed += 1
                continue
            vals[0] *= time_scale
            # out-of-order timestamps are treated like corrupt lines
            if vals[0] <= last_t:
                malformed += 1
                continue
            last_t = vals[0]
            rows.append(vals)
    if total and malformed / total > tolerance:
        raise MalformedLine(
            f"{path}: {malformed} of {total} lines malformed "
            f"(tolerance {tolerance:.1%})"
        )
    return rows, malformed


def parse_tfall(
    archive_root,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    time_scale: float = 1.0,
    pattern: str = "*.txt",
) -> list[RawRecording]:
    """Parse every sample file under a tFall-style archive.

    Parameters
    ----------
    archive_root : path-like
        Directory holding ``adl*/`` and ``fall*/`` subtrees of per-subject
        text files.
    tolerance : float
        Maximum fraction of malformed lines per file before the file is
        rejected with :class:`MalformedLine`. Malformed lines below the
        tolerance are dropped and counted in ``RawRecording.malformed_lines``.
    time_scale : float
        Multiplier that converts the timestamp column to seconds.

    Returns
    -------
    list of RawRecording, sorted by relative path.
    """
    root = Path(archive_root)
    if not root.is_dir():
        raise MissingDirectory(f"tFall archive not found: {root}")
    recordings = []
    warnings = 0
    for path in sorted(root.rglob(pattern)):
        if not path.is_file():
            continue
        rel = path.relative_to(root)
        label = _label_from_path(rel.parts[:-1])
        if label is None:
            log.warning("skipping %s: not under an adl/fall subtree", rel)
            continue
        rows, malformed = _parse_sample_file(path, time_scale, tolerance)
        if malformed:
            warnings += malformed
            log.warning("%s: skipped %d malformed line(s)", rel, malformed)
        if len(rows) < 2:
            log.warning("skipping %s: fewer than two valid samples", rel)
            continue
        samples = np.asarray(rows, dtype=np.float64)
        duration = samples[-1, 0] - samples[0, 0]
        subject_dirs = [p for p in rel.parts[:-1] if _label_from_path([p]) is None]
        recordings.append(
            RawRecording(
                subject_id=subject_dirs[-1] if subject_dirs else "unknown",
                activity_tag=path.stem,
                nominal_rate_hz=(len(rows) - 1) / duration,
                samples=samples,
                source=Source.TFALL,
                label=label,
                path=rel.with_suffix("").as_posix(),
                malformed_lines=malformed,
            )
        )
    if not recordings:
        raise EmptyDataset(f"no recordings parsed under {root}")
    log.info("parsed %d tFall recordings (%d malformed lines skipped)", len(recordings), warnings)
    return recordings


# ---------------------------------------------------------------------------
# UCI HAR
# ---------------------------------------------------------------------------

def _ucihar_split_dirs(root: Path) -> list[tuple[str, Path]]:
    found = []
    for base in (root, root / "UCI HAR Dataset"):
        for split in ("train", "test"):
            d = base / split
            if (d / "Inertial Signals").is_dir():
                found.append((split, d))
        if found:
            break
    return found


def _load_matrix(path: Path) -> np.ndarray:
    if not path.is_file():
        raise MissingFile(f"missing UCI HAR file: {path}")
    arr = np.loadtxt(path, ndmin=2)
    return arr


def parse_ucihar(dataset_root) -> list[WindowRecord]:
    """Load the total-acceleration inertial signals of UCI HAR.

    Each row of the ``total_acc_{x,y,z}_{split}.txt`` files becomes one
    128-sample ADL window at 50 Hz. Both ``train`` and ``test`` splits are
    read when present, train first.
    """
    root = Path(dataset_root)
    if not root.is_dir():
        raise MissingFile(f"UCI HAR directory not found: {root}")
    splits = _ucihar_split_dirs(root)
    if not splits:
        raise MissingFile(f"no train/ or test/ 'Inertial Signals' directory under {root}")
    windows: list[WindowRecord] = []
    for split, d in splits:
        axes = [
            _load_matrix(d / "Inertial Signals" / f"total_acc_{ax}_{split}.txt")
            for ax in "xyz"
        ]
        labels = _load_matrix(d / f"y_{split}.txt").ravel()
        counts = {a.shape[0] for a in axes}
        if len(counts) != 1:
            raise RowCountMismatch(
                f"{split}: axis files have row counts "
                f"{[a.shape[0] for a in axes]}"
            )
        rows = counts.pop()
        if labels.shape[0] != rows:
            raise RowCountMismatch(f"{split}: {rows} signal rows but {labels.shape[0]} labels")
        widths = {a.shape[1] for a in axes}
        if widths != {UCIHAR_WINDOW}:
            raise RowCountMismatch(f"{split}: expected {UCIHAR_WINDOW} values per row, got {widths}")
        stacked = np.stack(axes, axis=-1)
        if not np.all(np.isfinite(stacked)):
            raise NonFiniteValue(f"{split}: inertial signals contain non-finite values")
        for r in range(rows):
            windows.append(
                WindowRecord(
                    id=f"UCIHAR/{split}/{r:05d}",
                    source=Source.UCIHAR,
                    label=Label.ADL,
                    rate_hz=UCIHAR_RATE_HZ,
                    samples=stacked[r],
                )
            )
    log.info("parsed %d UCI HAR windows", len(windows))
    return windows


# ---------------------------------------------------------------------------
# windowing
# ---------------------------------------------------------------------------

def _peak_window(samples: np.ndarray, n: int) -> tuple[np.ndarray, bool]:
    mag = np.sqrt(np.sum(samples * samples, axis=1))
    peak = int(np.argmax(mag))  # first index on ties
    start = peak - n // 2
    idx = np.arange(start, start + n)
    padded = bool(idx[0] < 0 or idx[-1] >= len(samples))
    return samples[np.clip(idx, 0, len(samples) - 1)], padded


def windows_from_recording(
    rec: RawRecording, n: int, target_rate_hz: float = UCIHAR_RATE_HZ
) -> list[WindowRecord]:
    """Cut one peak-centered window of length ``n`` from a recording.

    The recording is first resampled onto a uniform ``target_rate_hz`` grid
    by linear interpolation. The window is centered on the first sample
    attaining the maximum acceleration magnitude (``n // 2`` samples before
    it). Positions outside the recording repeat the boundary sample and the
    window is marked ``padded``.
    """
    if n < 1:
        raise ValueError("window length must be positive")
    need = n / target_rate_hz
    if rec.duration < need - 1e-9:
        raise RecordingTooShort(
            f"{rec.path or rec.activity_tag}: {rec.duration:.3f} s recorded, "
            f"{need:.3f} s needed for n={n} at {target_rate_hz:g} Hz"
        )
    t = rec.samples[:, 0] - rec.samples[0, 0]
    count = int(math.floor(rec.duration * target_rate_hz + 1e-9)) + 1
    grid = np.arange(count) / target_rate_hz
    resampled = np.column_stack([np.interp(grid, t, rec.samples[:, c]) for c in (1, 2, 3)])
    window, padded = _peak_window(resampled, n)
    return [
        WindowRecord(
            id=f"TFALL/{rec.path or rec.subject_id + '/' + rec.activity_tag}",
            source=rec.source,
            label=rec.label,
            rate_hz=float(target_rate_hz),
            samples=window,
            padded=padded,
        )
    ]


def recrop_window(window: WindowRecord, n: int) -> WindowRecord:
    """Shorten a window to ``n`` samples around its magnitude peak.

    Used to derive 51-sample windows from UCI HAR's fixed 128-sample rows;
    the same peak-centering rule as :func:`windows_from_recording` applies.
    """
    if n == window.n:
        return window
    if n > window.n:
        raise RecordingTooShort(f"window {window.id} has {window.n} samples, cannot cut {n}")
    samples, padded = _peak_window(window.samples, n)
    return WindowRecord(window.id, window.source, window.label, window.rate_hz, samples, padded or window.padded)


# ---------------------------------------------------------------------------
# collections
# ---------------------------------------------------------------------------

class AdlSourcePolicy(str, enum.Enum):
    ALL_D1 = "ALL_D1"
    HALF_D1_HALF_D2 = "HALF_D1_HALF_D2"
    ALL_D2 = "ALL_D2"


# (adl_train, adl_test, fall_train, fall_test, policy)
PUBLISHED_COUNTS = {
    "C1": (7035, 781, 453, 50, AdlSourcePolicy.ALL_D1),
    "C2": (7035, 781, 453, 50, AdlSourcePolicy.HALF_D1_HALF_D2),
    "C3": (9270, 1029, 453, 50, AdlSourcePolicy.ALL_D2),
}


@dataclass(frozen=True)
class CollectionSpec:
    collection_id: str
    adl_train_count: int
    adl_test_count: int
    fall_train_count: int
    fall_test_count: int
    adl_source_policy: AdlSourcePolicy
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "adl_source_policy", AdlSourcePolicy(self.adl_source_policy))
        counts = (self.adl_train_count, self.adl_test_count, self.fall_train_count, self.fall_test_count)
        if any(int(c) != c or c < 0 for c in counts):
            raise ValueError("collection counts must be non-negative integers")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @classmethod
    def published(cls, collection_id, seed: int = 0, scale: float = 1.0) -> "CollectionSpec":
        """Counts and source policy for one of the three published collections.

        ``scale`` < 1 shrinks every stratum proportionally (each at least 1)
        for small or synthetic pools; ``scale=1`` gives the published counts.
        """
        cid = normalize_collection_id(collection_id)
        adl_tr, adl_te, fall_tr, fall_te, policy = PUBLISHED_COUNTS[cid]
        if scale != 1.0:
            if not 0 < scale <= 1:
                raise ValueError("scale must lie in (0, 1]")
            adl_tr, adl_te, fall_tr, fall_te = (max(1, round(c * scale)) for c in (adl_tr, adl_te, fall_tr, fall_te))
        return cls(cid, adl_tr, adl_te, fall_tr, fall_te, policy, seed)

    @property
    def matches_published(self) -> bool:
        ref = PUBLISHED_COUNTS.get(self.collection_id)
        return ref is not None and ref == (
            self.adl_train_count,
            self.adl_test_count,
            self.fall_train_count,
            self.fall_test_count,
            self.adl_source_policy,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["adl_source_policy"] = self.adl_source_policy.value
        return d


def normalize_collection_id(value) -> str:
    s = str(value).strip().upper()
    if not s.startswith("C"):
        s = "C" + s
    if s not in PUBLISHED_COUNTS:
        raise ValueError(f"unknown collection {value!r}; expected 1, 2 or 3")
    return s


@dataclass(frozen=True)
class SplitDataset:
    train: tuple
    test: tuple
    spec: CollectionSpec
    strata: dict

    def manifest(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "strata": {k: list(v) for k, v in self.strata.items()},
        }


def _draw(rng: np.random.Generator, pool: list, n_train: int, n_test: int, name: str):
    need = n_train + n_test
    if need > len(pool):
        raise InsufficientPool(name, need, len(pool))
    pick = rng.choice(len(pool), size=need, replace=False)
    return [pool[i] for i in pick[:n_train]], [pool[i] for i in pick[n_train:]]


def build_collection(pool1: Iterable[WindowRecord], pool2: Iterable[WindowRecord], spec: CollectionSpec) -> SplitDataset:
    """Sample a train/test collection from the two window pools.

    Pools are sorted by id first, so the result depends only on pool
    contents and ``spec`` (including its seed). Strata are drawn without
    replacement in a fixed order: ADL from dataset1, ADL from dataset2,
    FALL from dataset1. Under the half/half policy an odd total gives the
    extra window to dataset1.
    """
    p1 = sorted(pool1, key=lambda w: w.id)
    p2 = sorted(pool2, key=lambda w: w.id)
    ids = [w.id for w in p1] + [w.id for w in p2]
    if len(set(ids)) != len(ids):
        raise ValueError("window ids must be unique across both pools")
    d1_adl = [w for w in p1 if w.label is Label.ADL]
    d1_fall = [w for w in p1 if w.label is Label.FALL]
    d2_adl = [w for w in p2 if w.label is Label.ADL]

    tr, te = spec.adl_train_count, spec.adl_test_count
    if spec.adl_source_policy is AdlSourcePolicy.ALL_D1:
        plan = [(tr, te), (0, 0)]
    elif spec.adl_source_policy is AdlSourcePolicy.ALL_D2:
        plan = [(0, 0), (tr, te)]
    else:
        plan = [(tr - tr // 2, te - te // 2), (tr // 2, te // 2)]

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    strata = {}
    train: list[WindowRecord] = []
    test: list[WindowRecord] = []
    for (n_tr, n_te), pool, name in (
        (plan[0], d1_adl, "ADL/TFALL"),
        (plan[1], d2_adl, "ADL/UCIHAR"),
        ((spec.fall_train_count, spec.fall_test_count), d1_fall, "FALL/TFALL"),
    ):
        a, b = _draw(rng, pool, n_tr, n_te, name)
        strata[f"train/{name}"] = tuple(w.id for w in a)
        strata[f"test/{name}"] = tuple(w.id for w in b)
        train.extend(a)
        test.extend(b)
    return SplitDataset(tuple(train), tuple(test), spec, strata)


# ---------------------------------------------------------------------------
# interchange files
# ---------------------------------------------------------------------------

def write_windows(path, windows: Iterable[WindowRecord]) -> int:
    """Write windows as line-delimited JSON, one record per line."""
    count = 0
    with open(path, "w") as fh:
        for w in windows:
            rec = {"format_version": FORMAT_VERSION, **w.to_dict()}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            count += 1
    return count


def read_windows(path) -> list[WindowRecord]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"windows file not found: {path}")
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(f"{path}:{lineno}: {exc}") from None
            if rec.get("format_version", FORMAT_VERSION) > FORMAT_VERSION:
                raise MalformedLine(f"{path}:{lineno}: unsupported format_version {rec['format_version']}")
            out.append(WindowRecord.from_dict(rec))
    return out


def write_manifest(path, split: SplitDataset, **extra) -> None:
    doc = split.manifest()
    doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
