"""Command-line entry point.

Subcommands: gen-data, sweep, rmt, sampler-bench, plot, reproduce.
Exit codes: 0 success, 1 validation error, 2 runtime error. The default
output directory comes from --out or the GIBBS_IC_OUT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import presets, rmt
from .config import config_from_yaml
from .data_gen import dump_dataset_csv, make_teacher, sample_dataset
from .plots import FIGURES, emit_plot
from .sweep import read_csv, run_sweep, write_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; validation errors are 1
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _out_dir(args) -> str:
    out = args.out or os.environ.get("GIBBS_IC_OUT", "results")
    os.makedirs(out, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gibbs-ic", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--out", type=str, default=None, help="output directory (or $GIBBS_IC_OUT)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-data", help="dump one synthetic dataset as CSV")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--noise-var", type=float, default=0.1)
    g.add_argument("--data-seed", type=int, default=0)

    s = sub.add_parser("sweep", help="run a sweep from a YAML config")
    s.add_argument("--config", type=str, required=True)
    s.add_argument("--timing", action="store_true", help="write measured wallclock_ms instead of 0")

    r = sub.add_parser("rmt", help="print/dump spectral transform values")
    r.add_argument("--gamma", type=float, nargs="+", required=True)
    r.add_argument("--r", type=float, nargs="+", required=True)
    r.add_argument("--csv", type=str, default=None)

    b = sub.add_parser("sampler-bench", help="compare MALA and SGLD on one posterior")
    b.add_argument("--steps", type=int, default=None)
    b.add_argument("--eta", type=float, default=None)

    p = sub.add_parser("plot", help="re-plot a figure from a sweep CSV")
    p.add_argument("--csv", type=str, required=True)
    p.add_argument("--figure", type=str, required=True, choices=FIGURES)
    p.add_argument("--svg", type=str, default=None)

    rep = sub.add_parser("reproduce", help="run a preset figure end to end")
    rep.add_argument("figure_id", type=str, choices=presets.FIGURE_IDS)
    rep.add_argument("--seeds", type=int, default=None, help="seed count override (default 50)")
    return parser


def _cmd_gen_data(args) -> int:
    teacher = make_teacher(args.d, args.noise_var, args.data_seed)
    ds = sample_dataset(teacher, args.n, args.data_seed)
    path = os.path.join(_out_dir(args), f"dataset_d{args.d}_n{args.n}_seed{args.data_seed}.csv")
    dump_dataset_csv(ds, path)
    print(path)
    return 0


def _cmd_sweep(args) -> int:
    if not os.path.exists(args.config):
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 1
    cfg = config_from_yaml(args.config, master_seed=args.seed)
    out = _out_dir(args)
    for lam in cfg.lambdas:
        result = run_sweep(cfg, lam=lam, jobs=args.jobs, progress=True)
        path = os.path.join(out, f"sweep_{cfg.regime}_lam{lam:g}.csv")
        write_csv(result, path, include_timing=args.timing)
        if result.failures:
            for p, seed, msg in result.failures:
                print(f"warning: row (p={p}, seed={seed}) failed: {msg}", file=sys.stderr)
        print(path)
    return 0


def _cmd_rmt(args) -> int:
    lines = ["gamma,r,F,eta,shannon,V"]
    for g in args.gamma:
        for r in args.r:
            lines.append(f"{g:.17g},{r:.17g},{rmt.f_func(g, r):.17g},{rmt.eta_transform(g, r):.17g},"
                         f"{rmt.shannon_transform(g, r):.17g},{rmt.v_func(g, r):.17g}")
    text = "\n".join(lines)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
        print(args.csv)
    else:
        print(text)
    return 0


def _cmd_sampler_bench(args) -> int:
    cfg = presets.sampler_bench_config()
    if args.steps:
        cfg["steps"], cfg["burn_in"] = args.steps, args.steps // 2
    if args.eta:
        cfg["eta"] = args.eta
    if args.seed is not None:
        cfg["master_seed"] = args.seed
    result = presets.run_sampler_bench(cfg, out_dir=_out_dir(args))
    import numpy as np

    post = result["posterior"]
    for kind in ("mala", "sgld"):
        run = result["runs"][kind][0]
        mean = run.samples.mean(axis=0)
        err = np.linalg.norm(mean - post.mean) / np.linalg.norm(post.mean)
        print(f"{kind}: acceptance={run.acceptance_rate:.3f} relative mean error={err:.4f}")
    return 0


def _cmd_plot(args) -> int:
    if not os.path.exists(args.csv):
        print(f"error: csv not found: {args.csv}", file=sys.stderr)
        return 1
    rows = read_csv(args.csv)
    svg = args.svg or os.path.join(_out_dir(args), f"{args.figure}.svg")
    emit_plot(rows, args.figure, svg)
    print(svg)
    return 0


def _cmd_reproduce(args) -> int:
    for path in presets.reproduce(args.figure_id, _out_dir(args), seeds=args.seeds, jobs=args.jobs):
        print(path)
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "sweep": _cmd_sweep,
    "rmt": _cmd_rmt,
    "sampler-bench": _cmd_sampler_bench,
    "plot": _cmd_plot,
    "reproduce": _cmd_reproduce,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
