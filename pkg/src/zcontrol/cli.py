"""Command line entry point.

Verbs::

    zcontrol run      --preset NAME | --config FILE  [--out DIR] [--set k=v ...]
    zcontrol sweep    --preset NAME --lambdas 0.5,1,2 [--horizon T] [--jobs J]
    zcontrol validate --preset NAME | --config FILE
    zcontrol presets  list | show NAME | export NAME

Exit codes: 0 success, 2 invalid configuration, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .config import ConfigurationError, apply_overrides, build_scenario, load_config
from .integrate import BlowUpError
from .presets import PRESETS, get_preset
from .runner import run_scenario, sweep_lambda

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3

log = logging.getLogger("zcontrol")


def _variants(args):
    """List of ``(label, settings)`` from --preset or --config plus overrides."""
    if bool(args.preset) == bool(args.config):
        raise ConfigurationError("give exactly one of --preset or --config")
    extra = list(args.set or [])
    if args.seed is not None:
        extra.append(f"sim.seed={args.seed}")
    if args.config:
        runs = [("base", load_config(args.config))]
    else:
        runs = get_preset(args.preset).variant_settings()
    return [(label, apply_overrides(s, extra)) for label, s in runs]


def _out_dir(args):
    return args.out or os.environ.get("ZC_OUT_DIR") or "zc_out"


def cmd_run(args):
    variants = [(label, build_scenario(s)) for label, s in _variants(args)]
    root = _out_dir(args)
    status = EXIT_OK
    for label, sc in variants:
        sub = os.path.join(root, sc.name, label) if len(variants) > 1 else os.path.join(root, sc.name)
        try:
            rep = run_scenario(sc, sub, variant=label)
        except BlowUpError as exc:
            log.error("%s [%s]: %s", sc.name, label, exc)
            status = EXIT_BLOWUP
            continue
        print(json.dumps(rep.as_dict()))
    return status


def cmd_validate(args):
    for label, s in _variants(args):
        sc = build_scenario(s)
        print(f"{sc.name} [{label}]: ok")
    return EXIT_OK


def cmd_sweep(args):
    variants = _variants(args)
    if len(variants) != 1:
        raise ConfigurationError("sweep needs a single-run preset or config")
    sc = build_scenario(variants[0][1])
    try:
        lambdas = [float(v) for v in args.lambdas.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError("--lambdas must be a comma separated list of numbers") from None
    if not lambdas or min(lambdas) <= 0:
        raise ConfigurationError("--lambdas needs at least one positive value")
    try:
        rows, lam_max = sweep_lambda(sc, lambdas, threshold=args.threshold, horizon=args.horizon,
                                     jobs=args.jobs, out_dir=os.path.join(_out_dir(args), sc.name, "sweep"))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    for r in rows:
        ct = "-" if r.consensus_time is None else f"{r.consensus_time:.6g}"
        print(f"lambda={r.lam:g} consensus_time={ct} converged={r.converged} {r.status}")
    print(f"lambda_max={lam_max}")
    return EXIT_OK


def cmd_presets(args):
    if args.action == "list":
        for name, p in PRESETS.items():
            print(f"{name:20s} {p.description}")
        return EXIT_OK
    if not args.name:
        raise ConfigurationError(f"presets {args.action} needs a preset name")
    p = get_preset(args.name)
    if args.action == "show":
        print(f"# {p.description}")
        for label, _ in p.variant_settings():
            print(f"# variant: {label}")
    print(p.export())
    return EXIT_OK


def _add_source(p):
    p.add_argument("--preset", help="built-in scenario name (see `presets list`)")
    p.add_argument("--config", help="INI file with [model] [kernel] [control] [sim] [ic] sections")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one setting; repeatable")
    p.add_argument("--seed", type=int, help="seed for the random initial state")


def build_parser():
    parser = argparse.ArgumentParser(prog="zcontrol", description="Consensus under Z-control")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="run a preset or config file")
    _add_source(p)
    p.add_argument("--out", help="output root (default: $ZC_OUT_DIR or ./zc_out)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep the decay rate lambda")
    _add_source(p)
    p.add_argument("--out", help="output root (default: $ZC_OUT_DIR or ./zc_out)")
    p.add_argument("--lambdas", required=True, help="comma-separated gains, e.g. 0.5,1,2")
    p.add_argument("--threshold", type=float, default=1e-6, help="consensus threshold on Gamma")
    p.add_argument("--horizon", type=float, help="final time per run (default: sim.T)")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a preset or config without running")
    _add_source(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("presets", help="list, show or export presets")
    p.add_argument("action", choices=("list", "show", "export"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
