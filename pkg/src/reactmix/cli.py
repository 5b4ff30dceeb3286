"""Command-line entry point: ``reactmix {simulate,sweep,fit,verify,flows}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import diagnostics as dg
from .config import config_hash, load_config
from .errors import ConfigError, ReactmixError, ValidationError
from .experiments import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, run_campaign
from .flows import FLOW_CATALOG


def _common(p, config=True):
    if config:
        p.add_argument("--config", metavar="PATH", help="YAML campaign file")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                       help="dotted-key override, repeatable; later ones win")
        p.add_argument("--jobs", type=int, metavar="N", help="worker processes for sweep cells")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--quiet", action="store_true", help="print only errors")


def build_parser():
    parser = argparse.ArgumentParser(prog="reactmix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("simulate", help="run a single simulation"))
    _common(sub.add_parser("sweep", help="run the campaign named by the config's kind"))
    p = sub.add_parser("fit", help="fit an exponential decay rate to a diagnostics CSV")
    p.add_argument("csv", help="CSV with a t column")
    p.add_argument("--column", default=None, help="value column (default fluct_sim, else the first after t)")
    p.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"), help="fit only samples in [T0, T1]")
    p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--mutation", choices=["flip-sink-sign"], default=None,
                   help="inject a known defect the suite must catch")
    p.add_argument("--dt-scale", type=float, default=1.0, help="multiply every canned time step")
    _common(p, config=False)
    p = sub.add_parser("flows", help="list the available flows")
    p.add_argument("--quiet", action="store_true")
    return parser


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def _load(args, kind=None):
    overrides = list(args.overrides)
    if kind is not None:
        overrides.insert(0, f"kind={kind}")
    cfg = load_config(args.config, overrides)
    if kind is not None and cfg.kind != kind:
        raise ConfigError(f"the simulate command needs kind=simulate, got {cfg.kind}")
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg.jobs = args.jobs
    return cfg


def cmd_run(args, kind=None):
    cfg = _load(args, kind)
    out = args.out or os.path.join("reactmix-out", f"{cfg.kind}-{config_hash(cfg)}")
    code, manifest = run_campaign(cfg, out)
    _say(args, f"{cfg.kind}: wrote {len(manifest['outputs'])} file(s) to {out} (status {manifest['status']})")
    for f in manifest["failures"]:
        print(f"failed cell {f} (see {os.path.join(out, 'manifest.json')})",
              file=sys.stderr)
    return code


def cmd_fit(args):
    cols = dg.read_csv(args.csv)
    if "t" not in cols:
        raise ValidationError(f"{args.csv} has no t column")
    name = args.column
    if name is None:
        numeric = [k for k, v in cols.items() if k != "t" and isinstance(v, np.ndarray)]
        name = "fluct_sim" if "fluct_sim" in cols else (numeric[0] if numeric else None)
    if name not in cols or not isinstance(cols[name], np.ndarray):
        raise ValidationError(f"no numeric column {name!r} in {args.csv}; columns are {list(cols)}")
    fit = dg.fit_decay_rate(np.c_[cols["t"], cols[name]], args.window)
    print(f"rate={fit.rate:.10g} r2={fit.r2:.6f} samples={fit.samples} window={fit.window[0]:g}..{fit.window[1]:g}")
    return EXIT_OK


def cmd_verify(args):
    from .verify import verify_suite

    report = verify_suite(mutation=args.mutation, dt_scale=args.dt_scale)
    _say(args, report.format())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "verify.json"), "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    return EXIT_OK if report.passed else EXIT_PARTIAL


def cmd_flows(args):
    for info in FLOW_CATALOG:
        print(f"{info.name:<18} {info.summary}")
        for k, v in info.params.items():
            print(f"{'':<20}{k}: {v}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return cmd_run(args, "simulate")
        if args.command == "sweep":
            return cmd_run(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_flows(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ReactmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
