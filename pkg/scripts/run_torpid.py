"""Escape-time experiment on G*_n plus the exact bottleneck sums.

    python3 scripts/run_torpid.py [--config configs/escape_default.json] [--workers N] [--out results/]
"""

import argparse
import json
from dataclasses import asdict
from pathlib import Path

from quasiline_ising.cli import atomic_write
from quasiline_ising.torpid import (
    EscapeConfig,
    bottleneck_sums,
    escape_time_experiment,
    find_magnifier_base,
    rows_to_csv,
    sign_test,
    summarise,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path, default=Path(__file__).parents[1] / "configs" / "escape_default.json")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    cfg = EscapeConfig.from_dict(json.loads(args.config.read_text()))
    rows = escape_time_experiment(cfg, args.workers)
    atomic_write(args.out / "escape.csv", rows_to_csv(rows))
    summary = summarise(rows)
    for s in summary:
        print(f"{s.kind:8s} n={s.size}  median={s.median:>12.0f}  IQR=[{s.q25:.0f}, {s.q75:.0f}]  censored={s.censored}/{s.count}")

    gstar = {n: [r.hit_time for r in rows if r.kind == "gstar" and r.size == n] for n in cfg.sizes}
    lo, hi = min(cfg.sizes), max(cfg.sizes)
    w, t, p = sign_test(gstar[lo], gstar[hi])
    print(f"paired sign test n={hi} vs n={lo}: {w}/{t}, p={p:.3g}")
    report = {"config": cfg.to_dict(), "summary": [asdict(s) for s in summary],
              "size_sign_test": {"wins": w, "trials": t, "p": p}}
    if cfg.control:
        ctrl = [10 * r.hit_time for r in rows if r.kind == "control" and r.size == hi]
        w, t, p = sign_test(ctrl, gstar[hi])
        print(f"G* vs 10x control at n={hi}: {w}/{t}, p={p:.3g}")
        report["control_sign_test"] = {"wins": w, "trials": t, "p": p}

    bn = []
    for n in cfg.sizes:
        base, cert, used = find_magnifier_base(n, cfg.seed)
        r = bottleneck_sums(base, "2^76", cert)
        bn.append({"n": n, "base_seed": used, "separation_at_2^76": r.separation_holds(),
                   "threshold_mu": str(r.threshold_mu())})
        print(f"bottleneck n={n}: separation at 2^76 {r.separation_holds()}, exact threshold mu*={r.threshold_mu()}")
    report["bottleneck"] = bn
    atomic_write(args.out / "torpid.json", json.dumps(report, indent=2) + "\n")


if __name__ == "__main__":
    main()
