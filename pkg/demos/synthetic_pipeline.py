"""Full pipeline on synthetic windows, no datasets needed.

synthesize -> canonical windows file -> features -> 10-fold CV -> tables,
for each feature extractor and the two kNN variants.
"""
import sys
import tempfile
from pathlib import Path

from fallfourier import synth
from fallfourier.classify import make_pipeline
from fallfourier.evaluate import emit_table, kfold_cv
from fallfourier.features import feature_set
from fallfourier.ingest import read_windows, write_windows

count = int(sys.argv[1]) if len(sys.argv) > 1 else 600

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "synthetic.jsonl"
    write_windows(path, synth.synthesize("mixed", count, seed=3))
    windows = read_windows(path)

n_fall = sum(int(w.label) for w in windows)
print(f"{len(windows)} windows, {n_fall} falls\n")

for feature in ("raw", "energy", "fourier"):
    fs = feature_set(windows, feature)
    for kind, kw in (("knn2", {"k": 3}), ("knn1", {"k": 1, "threshold_rule": "percentile:95"})):
        report = kfold_cv(fs, make_pipeline(kind, **kw), folds=10, seed=0)
        m = report.means
        print(f"{feature:8s}{kind}  SA {100 * m['sa']:6.2f}  MAA {100 * m['maa']:6.2f}  SE {100 * m['se']:6.2f}  SP {100 * m['sp']:6.2f}")

print("\nper-fold table for fourier/knn2:\n")
print(emit_table(kfold_cv(feature_set(windows, "fourier"), make_pipeline("knn2", k=3), seed=0), "MARKDOWN"))
