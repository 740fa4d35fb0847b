"""Command-line entry point for spectra, statistics, and classical sweeps.

Every subcommand accepts the same flags, one per ``RunConfig`` field, plus
``--config FILE`` pointing at a JSON object with the same keys.  Precedence
is defaults < config file < explicit flags.  The exit code is 0 when every
grid cell finished and nonzero otherwise, with a per-cell failure report on
stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .pipelines import PIPELINES, RunConfig

__all__ = ["main", "build_parser"]

_SUBCOMMANDS = {
    "spectrum": "eigenvalues and convergence flags per coupling cell",
    "stats": "whole-sample spacing and ratio summary per cell",
    "ratio-map": "ratio averages over the coupling grid",
    "ad-scan": "moving-window Anderson-Darling series",
    "classical": "mean-field trajectory export",
    "lyapunov-map": "attractor verdicts over the coupling grid",
    "ghs-compare": "quantum statistics vs classical attractor per cell",
}

_HELP = {
    "omega": "field frequency",
    "omega0": "atomic splitting",
    "gamma_minus": "corotating coupling strength",
    "gamma_plus": "counterrotating coupling strength",
    "kappa": "photon leakage rate",
    "twice_j": "twice the pseudospin length (2j)",
    "n_max": "Fock-space cutoff",
    "gamma_minus_grid": "sweep values overriding --gamma-minus",
    "gamma_plus_grid": "sweep values overriding --gamma-plus",
    "sector": "parity sector, +1 or -1",
    "delta_nmax": "cutoff increment of the convergence partner run",
    "tol_match": "eigenvalue pairing distance counted as converged",
    "dim_cap": "refuse dense solves above this dimension",
    "k_neighbors": "neighbor order of the local-density unfolding",
    "dedupe_tol": "pairs closer than this count as numerically identical",
    "window_size": "eigenvalues per moving window",
    "stride": "window hop in eigenvalues",
    "ad_threshold": "Anderson-Darling rejection threshold",
    "ratio_tol": "acceptance half-width around the ratio references",
    "q0": "initial field quadrature q",
    "p0": "initial field quadrature p",
    "jx0": "initial spin x component",
    "jy0": "initial spin y component",
    "jz0": "initial spin z component",
    "t_final": "trajectory export horizon",
    "n_samples": "trajectory export sample count",
    "t_transient": "discarded settling time before classification",
    "t_settle": "observation span of the attractor classifier",
    "eps_fixed_point": "late-time speed below which a cell is a sink",
    "chaos_threshold": "Lyapunov exponent above which a cell is chaotic",
    "eps_cycle": "section-cloud cluster radius for limit-cycle detection",
    "lyapunov_t_total": "Lyapunov integration span",
    "lyapunov_t_renorm": "Lyapunov renormalization interval",
    "lyapunov_d0": "initial separation of the Lyapunov pair",
    "seed": "seed of every stochastic choice (perturbation directions)",
    "jobs": "parallel worker cap for grid cells",
    "outdir": "output directory",
    "cache_dir": "eigenvalue cache directory ('none' disables; relative "
                 "paths live under the output directory)",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for field in dataclasses.fields(RunConfig):
        if field.name == "pipeline":
            continue
        flag = "--" + field.name.replace("_", "-")
        help_text = _HELP.get(field.name, field.name)
        if isinstance(field.default, tuple):
            parser.add_argument(flag, nargs="*", type=float,
                                default=argparse.SUPPRESS,
                                metavar="G", help=help_text)
        elif isinstance(field.default, bool):
            raise AssertionError("boolean knobs need explicit wiring")
        elif isinstance(field.default, int):
            parser.add_argument(flag, type=int, default=argparse.SUPPRESS,
                                help=help_text)
        elif isinstance(field.default, float):
            parser.add_argument(flag, type=float, default=argparse.SUPPRESS,
                                help=help_text)
        else:
            parser.add_argument(flag, type=str, default=argparse.SUPPRESS,
                                help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickechaos",
        description="Spectral statistics and classical chaos of the open "
                    "anisotropic Dicke model.")
    sub = parser.add_subparsers(dest="pipeline", required=True)
    for name, description in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=description, description=description)
        p.add_argument("--config", type=str, default=None,
                       help="JSON file of RunConfig keys; flags override it")
        _add_config_flags(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config is not None:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"{args.config}: expected a JSON object")
        data.update(loaded)
    for key, value in vars(args).items():
        if key in ("config",):
            continue
        data[key] = value
    data["pipeline"] = args.pipeline
    if data.get("cache_dir") in ("none", "None"):
        data["cache_dir"] = None
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    result = PIPELINES[config.pipeline](config)
    n_cells = len(result["cells"])
    print(f"{config.pipeline}: {n_cells} cell(s) in {config.outdir}")
    if result["table"] is not None:
        print(f"merged table: {result['table']}")
    if result["failures"]:
        print(f"{len(result['failures'])} cell(s) failed:", file=sys.stderr)
        for cell, message in sorted(result["failures"].items()):
            print(f"  {cell}: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
