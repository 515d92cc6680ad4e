"""Norm vs bound for the lattice and mean-field Gibbs symbols, n = 1..3.

Writes one CSV per example into the output directory and prints a short
summary (certified rows, worst norm/bound ratio, skipped points).
"""

import argparse
import time
from pathlib import Path

from normlab.config import ExperimentConfig
from normlab.sweep import emit_report, run_sweep, sweep_status


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--potential", default="lorentz")
    ap.add_argument("--n", default="1,2,3")
    ap.add_argument("--h", default="0.05,0.1,0.5")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dims = tuple(int(v) for v in args.n.split(","))
    hs = tuple(float(v) for v in args.h.split(","))
    status = 0
    for example in ("lattice", "mean-field"):
        t0 = time.perf_counter()
        cfg = ExperimentConfig(example=example, potential=args.potential, n_values=dims, h_values=hs, timing=True)
        rows = run_sweep(cfg)
        path = out / f"headline_{example}_{args.potential}.csv"
        emit_report(rows, "csv", path, timing=True)
        done = [r for r in rows if r.passed == "true"]
        worst = max((r.norm / r.bound for r in done), default=float("nan"))
        skipped = sum(r.passed == "skip" for r in rows)
        print(f"{example:>10}: {len(done)}/{len(rows)} certified, {skipped} skipped, worst norm/bound {worst:.4f}, "
              f"{time.perf_counter() - t0:.0f}s -> {path}")
        status = max(status, sweep_status(rows))
    raise SystemExit(status)


if __name__ == "__main__":
    main()
