"""Command-line front end: ``sqsflow run | list | check``.

Exit status: 0 success, 2 configuration error, 3 invariant failure,
4 numerical abort. ``SQSFLOW_OUTPUT_ROOT`` sets the directory under which
runs are written (default ``./runs``).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config, parse_config
from .scenarios import BUILTINS, builtin_config, check_manifest, run_scenario
from .schrodinger import NumericalAbort

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_ABORT = 0, 2, 3, 4


def output_root() -> Path:
    return Path(os.environ.get("SQSFLOW_OUTPUT_ROOT", "runs"))


def _resolve(target: str):
    path = Path(target)
    if path.exists() or target.endswith(".json"):
        return load_config(path)
    if target in BUILTINS:
        return builtin_config(target)
    raise ConfigError(f"{target}: no such config file or built-in scenario (see 'sqsflow list')")


def _override_seeds(cfg, n, mode):
    if n is None and mode is None:
        return cfg
    if cfg.kind != "trajectories":
        raise ConfigError("--seeds and --seed-mode apply to trajectories scenarios only")
    raw = cfg.resolved()
    if n is not None:
        raw["params"]["seeds"]["n"] = n
    if mode is not None:
        raw["params"]["seeds"]["mode"] = mode
    return parse_config(raw)


def _print_checks(checks, stream):
    for c in checks:
        mark = "pass" if c.passed else "FAIL"
        print(f"  [{mark}] {c.name}: {c.value:.6g} (tolerance {c.tolerance:g}) {c.detail}", file=stream)


def cmd_run(args) -> int:
    try:
        cfg = _override_seeds(_resolve(args.config), args.seeds, args.seed_mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else output_root() / cfg.output_dir
    try:
        result = run_scenario(cfg, out, figures=not args.no_figures)
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    print(f"{cfg.name} ({cfg.kind}) -> {out}")
    _print_checks(result.checks, sys.stdout)
    for note in result.manifest["diagnostics"]:
        print(f"  note: {note}")
    failed = [c.name for c in result.checks if not c.passed]
    if failed:
        print(f"invariant failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_list(args) -> int:
    width = max(len(n) for n in BUILTINS)
    for b in BUILTINS.values():
        crit = ",".join(str(c) for c in b.criteria)
        print(f"{b.name:<{width}}  [{b.config['kind']}; criteria {crit}] {b.description}")
        print(f"{'':<{width}}  anchor: {b.anchor}")
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        report = check_manifest(args.manifest)
    except FileNotFoundError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error in manifest: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in report.modified:
        print(f"artifact modified or missing: {name}", file=sys.stderr)
    for name in report.disagreements:
        print(f"manifest disagrees with re-evaluation: {name}", file=sys.stderr)
    _print_checks(report.checks, sys.stdout)
    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        print(f"invariant failed: {', '.join(failed)}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqsflow", description="Quantum-hydrodynamics scenarios with checked invariants.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario from a JSON config or a built-in name")
    run.add_argument("config", help="path to a JSON config, or the name of a built-in scenario")
    run.add_argument("--out", help="output directory (default: $SQSFLOW_OUTPUT_ROOT/<output_dir>)")
    run.add_argument("--seeds", type=int, help="override the trajectory seed count")
    run.add_argument("--seed-mode", choices=("quantile", "uniform"), help="override the trajectory seed mode")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    run.set_defaults(func=cmd_run)
    lst = sub.add_parser("list", help="list the built-in scenarios")
    lst.set_defaults(func=cmd_list)
    chk = sub.add_parser("check", help="re-verify a finished run from its manifest")
    chk.add_argument("manifest", help="manifest.json or the run directory holding it")
    chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
