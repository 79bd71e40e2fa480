"""Command line entry point: ``antisym <experiment> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from antisym.experiments import EXPERIMENTS, ExperimentConfig, rows_to_csv, run, vega_lite_spec


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="antisym", description="Run an antisymmetrization experiment and emit CSV.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--d", type=int)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--m-rule", help="nd, 3n or fixed:<m>")
    p.add_argument("--activations", help="comma separated, e.g. relu,tanh")
    p.add_argument("--samples", type=int)
    p.add_argument("--seeds", type=int)
    p.add_argument("--master-seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (the ANTISYM_THREADS variable takes precedence)")
    p.add_argument("--quick", action="store_true", help="reduced sizes, finishes in under a minute")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms = 0 so reruns are byte-identical")
    p.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    p.add_argument("--plot-spec", type=Path, help="also write a vega-lite spec for the CSV")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = json.loads(args.config.read_text()) if args.config else {}
    if data.get("experiment", args.experiment) != args.experiment:
        raise SystemExit(f"config file is for {data['experiment']!r}, not {args.experiment!r}")
    data["experiment"] = args.experiment
    if args.n_min is not None or args.n_max is not None:
        lo, hi = data.get("n_range") or (None, None)
        lo = args.n_min if args.n_min is not None else lo
        hi = args.n_max if args.n_max is not None else hi
        if lo is None or hi is None:
            lo = hi = lo if lo is not None else hi
        data["n_range"] = (lo, hi)
    flags = {
        "d": args.d,
        "m_rule": args.m_rule,
        "samples": args.samples,
        "seeds": args.seeds,
        "master_seed": args.master_seed,
        "threads": args.threads,
        "out_path": str(args.out) if args.out else None,
        "plot_spec": str(args.plot_spec) if args.plot_spec else None,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    if args.activations:
        data["activations"] = [a.strip() for a in args.activations.split(",") if a.strip()]
    if args.quick:
        data["quick"] = True
    if args.no_timing:
        data["record_timing"] = False
    return ExperimentConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = config_from_args(args)
    text = rows_to_csv(run(cfg))
    if cfg.out_path:
        Path(cfg.out_path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    if cfg.plot_spec:
        data_url = cfg.out_path or "results.csv"
        Path(cfg.plot_spec).write_text(json.dumps(vega_lite_spec(cfg, data_url), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
