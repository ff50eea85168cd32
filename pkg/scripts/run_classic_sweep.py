#!/usr/bin/env python3
"""Run the classic large-n selection sweep and print the chosen model sizes."""
import argparse
import os

import numpy as np

from gibbs_ic.criteria import select_model
from gibbs_ic.plots import emit_plot
from gibbs_ic.presets import classic_config
from gibbs_ic.sweep import run_sweep, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--out", type=str, default="results")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    cfg = classic_config(seeds=args.seeds)
    result = run_sweep(cfg, jobs=args.jobs, progress=True)
    csv_path = os.path.join(args.out, "classic.csv")
    write_csv(result, csv_path)
    print(csv_path)
    emit_plot(result, "criteria_comparison", os.path.join(args.out, "classic_criteria.svg"))

    crits = ["aic", "bic", "aic_plus", "bic_plus_exact", "bic_minus_exact"]
    ps = sorted({r.p for r in result.rows})

    class Avg:
        def __init__(self, p, **kw):
            self.p = p
            self.__dict__.update(kw)

    avg = [Avg(p, **{c: float(np.mean([getattr(r, c) for r in result.rows if r.p == p]))
                     for c in crits}) for p in ps]
    for c in crits:
        sel = select_model(avg, c)
        print(f"{c:16s} selects p = {sel.p}")


if __name__ == "__main__":
    main()
