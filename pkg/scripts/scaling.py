"""Wall-clock time of run-all as the synthetic fixture grows, for several shard counts.

    python3 scripts/scaling.py --root /tmp/occov_scaling --sizes 300 1000 3000 --shards 1 2

Writes one CSV row per (records, shards) to stdout.
"""

import argparse
import csv
import shutil
import sys
import time
from pathlib import Path

from oc_coverage import synthetic
from oc_coverage.cli import main as occov


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", type=Path, required=True)
    ap.add_argument("--sizes", type=int, nargs="+", default=[300, 1000, 3000])
    ap.add_argument("--shards", type=int, nargs="+", default=[1, 2])
    args = ap.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["records", "meta_rows", "index_rows", "shards", "seconds", "matched"])
    for n in args.sizes:
        root = args.root / f"n{n}"
        fx = synthetic.generate(root, n_records=n, n_meta_noise=3 * n, n_index_noise=27 * n)
        for shards in args.shards:
            out = root / f"out_s{shards}"
            shutil.rmtree(out, ignore_errors=True)
            t0 = time.perf_counter()
            rc = occov(["run-all", "--iris-dir", str(fx.iris_dir), "--mapping", str(fx.mapping),
                        "--meta-dump", str(fx.meta_dump), "--index-dump", str(fx.index_dump),
                        "--out", str(out), "--shards", str(shards)])
            elapsed = time.perf_counter() - t0
            if rc:
                raise SystemExit(rc)
            with open(out / "canonical_matches.csv", encoding="utf-8") as fh:
                matched = sum(1 for _ in fh) - 1
            w.writerow([n, fx.n_meta_rows, fx.n_index_rows, shards, f"{elapsed:.2f}", matched])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
