"""How the three collections are drawn from the two window pools.

Uses placeholder windows sized like the real pools so the counts can be
checked without the datasets.
"""
import numpy as np

from fallfourier.ingest import CollectionSpec, build_collection
from fallfourier.records import Label, Source, WindowRecord

z = np.zeros((128, 3))
pool1 = [WindowRecord(f"TFALL/adl/{i:05d}", Source.TFALL, Label.ADL, 50.0, z) for i in range(7816)]
pool1 += [WindowRecord(f"TFALL/fall/{i:05d}", Source.TFALL, Label.FALL, 50.0, z) for i in range(503)]
pool2 = [WindowRecord(f"UCIHAR/train/{i:05d}", Source.UCIHAR, Label.ADL, 50.0, z) for i in range(10299)]

for cid in ("C1", "C2", "C3"):
    spec = CollectionSpec.published(cid, seed=0)
    split = build_collection(pool1, pool2, spec)
    man = split.manifest()
    print(cid, spec.adl_source_policy.value)
    for part in ("train", "test"):
        ws = getattr(split, part)
        by = {}
        for w in ws:
            key = f"{w.label.name}/{w.source.value}"
            by[key] = by.get(key, 0) + 1
        print(f"  {part:5s} {len(ws):6d}  {dict(sorted(by.items()))}")
    print(f"  manifest keys: {sorted(man)}")
