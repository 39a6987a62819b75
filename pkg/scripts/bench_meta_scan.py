"""Measure peak memory and throughput of a Meta scan over a large generated dump.

    python3 scripts/bench_meta_scan.py --dump /tmp/meta_1g --size-mb 1024 --index 100000

The dump is generated on first use (in a child process, so generation does not
inflate the scan's peak RSS) and reused afterwards.
"""

import argparse
import json
import resource
import subprocess
import sys
import time
from pathlib import Path

from oc_coverage import synthetic
from oc_coverage.meta_matcher import scan_meta_dump
from oc_coverage.pids import Pid, PidIndex


def dump_bytes(path: Path) -> int:
    return sum(p.stat().st_size for p in path.glob("*.csv"))


def generate(args) -> None:
    pids = synthetic.index_pids(args.index, seed=args.seed)
    rows = synthetic.write_large_meta_dump(args.dump, args.size_mb << 20, pids, seed=args.seed)
    print(json.dumps({"generated_rows": rows, "bytes": dump_bytes(args.dump)}))


def scan(args) -> dict:
    index = PidIndex()
    for k, (scheme, value) in enumerate(synthetic.index_pids(args.index, seed=args.seed)):
        index.add(Pid(scheme, value), f"item{k}")
    rss_index = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    t0 = time.perf_counter()
    result = scan_meta_dump(args.dump, index, shards=args.shards)
    elapsed = time.perf_counter() - t0
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    if args.shards > 1:
        peak = max(peak, resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss)
    return {
        "dump_bytes": dump_bytes(args.dump),
        "rows": result.counters["rows"],
        "matches": len(result.matches),
        "index_entries": len(index),
        "seconds": round(elapsed, 2),
        "rows_per_second": round(result.counters["rows"] / elapsed) if elapsed else None,
        "peak_rss_mb_after_index": round(rss_index / 1024, 1),
        "peak_rss_mb": round(peak / 1024, 1),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dump", type=Path, required=True)
    ap.add_argument("--size-mb", type=int, default=1024)
    ap.add_argument("--index", type=int, default=100_000, help="PidIndex entries")
    ap.add_argument("--shards", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--generate-only", action="store_true")
    args = ap.parse_args()
    if args.generate_only:
        generate(args)
        return
    if dump_bytes(args.dump) < args.size_mb << 20:
        subprocess.run([sys.executable, __file__, "--generate-only", "--dump", str(args.dump),
                        "--size-mb", str(args.size_mb), "--index", str(args.index), "--seed", str(args.seed)],
                       check=True, stdout=subprocess.DEVNULL)
    print(json.dumps(scan(args)))


if __name__ == "__main__":
    main()
