"""Command line entry point: run / validate / dims."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .grading import hilbert_function
from .runner import ConfigError, load_config, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shiftlab",
        description="Numerical probes of compressed shift tuples on graded "
        "ideal complements.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute all experiments in a config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--seed-override", type=int, default=None)

    p_val = sub.add_parser("validate", help="parse and validate a config")
    p_val.add_argument("config", type=Path)

    p_dims = sub.add_parser("dims", help="print the Hilbert-function table")
    p_dims.add_argument("config", type=Path)
    p_dims.add_argument("--out", type=Path, default=None)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        for w in cfg.warnings:
            print(f"warning: {w}")
        print(
            f"ok: d={cfg.d} sigma={cfg.sigma} n_max={cfg.n_max} "
            f"{len(cfg.ideal.generators)} generators, "
            f"{len(cfg.experiments)} experiments"
        )
        return 0

    if args.command == "dims":
        hf = hilbert_function(cfg.ideal, cfg.n_max, rank_tol=cfg.rank_tol)
        print("n,dim_total,dim_ideal,dim_complement")
        for n, t, di, dh in hf.rows():
            print(f"{n},{t},{di},{dh}")
        if hf.finite_codimension_suspected:
            print(
                "warning: complement dimensions vanish at high degree "
                "(finite co-dimension suspected)",
                file=sys.stderr,
            )
        return 0

    reports = run(
        cfg, args.out, workers=args.workers, seed_override=args.seed_override
    )
    print((args.out / "summary.txt").read_text(), end="")
    return 0 if all(r.status == "ok" for r in reports) else 1


if __name__ == "__main__":
    raise SystemExit(main())
