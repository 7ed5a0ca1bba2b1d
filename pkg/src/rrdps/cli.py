"""Command-line front end.

Exit codes: 0 success / feasible, 1 infeasible, 2 validation failure,
3 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .channel import preset
from .config import SUBCOMMANDS, load_config
from .errors import ConfigError, DegenerateDenominatorError, NoFeasiblePointError, ValidationError
from .keyrate import evaluate_ensemble
from .optimizer import optimize_intensities, run_sweep
from .oracle import run_suite
from .report import keyrate_report, write_sweep_csv
from .source import SourceEnsemble

EXIT_OK, EXIT_INFEASIBLE, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2, 3

log = logging.getLogger("rrdps")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with [DEFAULT] and per-subcommand sections")
    p.add_argument("--preset", help="channel parameter preset (default table1)")
    p.add_argument("--L", help="train length(s), comma separated")
    p.add_argument("--delta", help="relative intensity error radius (or list)")
    p.add_argument("--z", help="distance(s) in km, comma separated")
    p.add_argument("--z-range", dest="z_range", help="distances as start:stop:step km, stop included")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--seed", help="root seed for searches and random patterns")
    p.add_argument("--rate-scope", dest="rate_scope", choices=("eq1", "eq2"),
                   help="eq1: 1/L on the whole rate; eq2: 1/L on the yield sum only")
    p.add_argument("--fixed-intensities", dest="fixed_intensities", metavar="MU,NU1,NU2,NU3",
                   help="use this ensemble instead of optimizing")
    p.add_argument("--workers", help="processes for sweep points")
    p.add_argument("--resolution", help="grid points per coordinate scan")
    p.add_argument("--rounds", help="refinement rounds")
    p.add_argument("--multistart", help="random starting points")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rrdps", description="Decoy-state RRDPS key rates with source intensity errors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "keyrate": "key rate report at one (L, delta, z) point",
        "optimize": "optimize intensities at one (L, delta, z) point",
        "sweep": "CSV of rates over L, delta and z grids",
        "verify": "randomized soundness check of the decoy bounds",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        _add_common(p)
        if name == "verify":
            p.add_argument("--patterns", help="random patterns per (delta, z) cell")
            p.add_argument("--pattern-length", dest="pattern_length", help="trains per random pattern")
            p.add_argument("--mutate", help="negate this coefficient (e.g. q1) as a negative control")
    return parser


def _open_out(path):
    if path is None:
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from None


def _emit(text: str, path) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def cmd_point(cfg, force_optimize: bool) -> int:
    L, delta, z = cfg.single_point()
    params = preset(cfg.preset, L, z)
    if cfg.optimize or force_optimize:
        try:
            ensemble, result = optimize_intensities(params, delta, cfg.search, cfg.rate_scope)
        except NoFeasiblePointError as exc:
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
    else:
        ensemble = SourceEnsemble.from_intensities(*cfg.fixed_intensities, delta)
        try:
            result = evaluate_ensemble(ensemble, params, cfg.rate_scope)
        except ValidationError as exc:
            _emit(f"conditions: fail: {exc}\n", cfg.out)
            return EXIT_VALIDATION
        except DegenerateDenominatorError as exc:
            _emit(f"conditions: degenerate: {exc}\n", cfg.out)
            return EXIT_VALIDATION
    _emit(keyrate_report(ensemble, result, L, delta, z), cfg.out)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def cmd_sweep(cfg) -> int:
    result = run_sweep(
        cfg.L, cfg.delta, cfg.z, cfg.search, cfg.rate_scope, cfg.preset, cfg.fixed_intensities, cfg.workers
    )
    fh, close = _open_out(cfg.out)
    try:
        write_sweep_csv(result, fh)
    finally:
        if close:
            fh.close()
    for L, delta, z, why in result.excluded:
        print(f"excluded L={L} delta={delta} z={z}: {why}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg) -> int:
    kwargs = {}
    if cfg.fixed_intensities is not None:
        kwargs["intensities"] = cfg.fixed_intensities
    suite = run_suite(
        n_patterns=cfg.patterns,
        deltas=tuple(cfg.delta),
        distances=tuple(cfg.z),
        train_len=cfg.L[0],
        preset=cfg.preset,
        seed=cfg.seed,
        pattern_length=cfg.pattern_length,
        mutate=cfg.mutate,
        **kwargs,
    )
    _emit("\n".join(suite.lines()) + "\n", cfg.out)
    return EXIT_OK if suite.passed else EXIT_VALIDATION


VERIFY_DEFAULTS = {"delta": "0.02,0.05,0.08", "z": "0,15,30,60"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = load_config(args.config, args.command, overrides, defaults=VERIFY_DEFAULTS if args.command == "verify" else None)
        if args.command == "keyrate":
            return cmd_point(cfg, force_optimize=False)
        if args.command == "optimize":
            return cmd_point(cfg, force_optimize=True)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        return cmd_verify(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
