"""Run every sweep preset plus the probes and print a slope table.

    python3 scripts/run_all_presets.py [--out results] [--threads 4] [names ...]
"""

import argparse
import time
from pathlib import Path

from koblab.cli import dumps
from koblab.presets import PRESETS, check_windows, probe_preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=sorted(PRESETS))
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name in args.names:
        preset = PRESETS[name]
        t0 = time.time()
        report = preset.execute(workers=args.threads, seed=args.seed)
        status = check_windows(report, preset.windows)
        (out / f"{report.domain}_{name}.csv").write_text(report.to_csv(), encoding="utf-8")
        summary = report.summary()
        summary["window_status"] = status
        (out / f"{report.domain}_{name}.json").write_text(dumps(summary), encoding="utf-8")
        cols = []
        for side in ("lower", "upper"):
            f = report.fits.get(side, {})
            s = f.get("slope")
            cols.append(f"{side} {'-' if s is None else f'{s:+.4f}'} ({status.get(side, 'no window')})")
        print(f"{name:15s} {'  '.join(cols)}  {time.time() - t0:6.1f}s")

    for dom in ("ball", "flat4", "saddle"):
        res = probe_preset(dom, seed=args.seed, workers=args.threads)
        slope = (res.sweep or {}).get("fit") or {}
        print(f"probe {dom:9s} {res.verdict}  min eigenvalue {res.min_eigenvalue:+.4f}"
              + (f"  witness slope {slope.get('slope'):+.4f}" if slope.get("slope") is not None else ""))


if __name__ == "__main__":
    main()
