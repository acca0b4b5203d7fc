import numpy as np
import pytest

from fallfourier.records import Label, Source, WindowRecord


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_window(samples, id="w", label=Label.ADL, source=Source.TFALL, rate=50.0):
    return WindowRecord(id, source, label, rate, samples)


@pytest.fixture
def window_factory(rng):
    def build(n=128, id="w", label=Label.ADL, source=Source.TFALL):
        return make_window(rng.normal(size=(n, 3)), id=id, label=label, source=source)

    return build


def write_tfall_file(path, t, acc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for ti, (ax, ay, az) in zip(t, acc):
            fh.write(",".join(repr(float(v)) for v in (ti, ax, ay, az)) + "\n")


def write_ucihar_split(root, split, rows, seed=0, labels=None):
    rng = np.random.default_rng(seed)
    sig = root / split / "Inertial Signals"
    sig.mkdir(parents=True, exist_ok=True)
    data = {}
    for ax in "xyz":
        arr = rng.normal(size=(rows, 128)) * 0.2 + (1.0 if ax == "x" else 0.0)
        np.savetxt(sig / f"total_acc_{ax}_{split}.txt", arr, fmt="%15.8e")
        data[ax] = arr
    lab = labels if labels is not None else rng.integers(1, 7, size=rows)
    np.savetxt(root / split / f"y_{split}.txt", lab, fmt="%d")
    return data
