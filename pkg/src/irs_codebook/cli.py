"""Command-line interface: ``irs-codebook design`` and ``irs-codebook evaluate``.

Exit codes: 0 success, 2 usage error, 3 invalid data, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .array_model import IrsGeometry
from .baselines import QuadraticProfileConfig
from .codebook import DESIGNERS, CodebookError, DesignOptions, generate_codebook
from .discrete import BnbConfig
from .evalsim import (
    LinkBudget,
    MonteCarloConfig,
    SAMPLERS,
    power_tradeoff_curve,
    write_heatmap_csv,
    write_pattern_csv,
    write_tradeoff_csv,
)
from .grid import build_grid
from .io import SchemaError, load_codebook, save_codebook
from .sca import DesignError, ScaConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 2, 3, 4

log = logging.getLogger("irs_codebook")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irs-codebook", description="IRS reflection codebook design and evaluation.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="design a codebook and write it as JSON")
    d.add_argument("--qy", type=_positive_int, required=True, help="elements along y")
    d.add_argument("--qz", type=_positive_int, required=True, help="elements along z")
    d.add_argument("--dy", type=_positive_float, default=0.5, help="spacing along y in wavelengths")
    d.add_argument("--dz", type=_positive_float, default=0.5, help="spacing along z in wavelengths")
    d.add_argument("--my", type=_positive_int, required=True, help="intervals along beta_y")
    d.add_argument("--mz", type=_positive_int, required=True, help="intervals along beta_z")
    d.add_argument("--py", type=_positive_int, default=5, help="sample points per interval along y")
    d.add_argument("--pz", type=_positive_int, default=5, help="sample points per interval along z")
    d.add_argument("--designer", choices=DESIGNERS, default="continuous")
    d.add_argument("--bits", type=_positive_int, help="phase resolution (discrete designer only)")
    d.add_argument("--seed", type=int, default=0, help="SCA initialization seed")
    d.add_argument("--config", help="JSON file with 'sca', 'bnb', 'quadratic', 'reuse_template' settings")
    d.add_argument("--jobs", type=_positive_int, default=1, help="parallel worker processes")
    d.add_argument("--out", required=True, help="output codebook file")

    e = sub.add_parser("evaluate", help="export pattern, heat-map or trade-off CSVs")
    e.add_argument("--codebook", required=True)
    mode = e.add_mutually_exclusive_group(required=True)
    mode.add_argument("--pattern-cut", choices=("y", "z"), help="1-D cut along this axis -> pattern.csv")
    mode.add_argument("--heatmap", action="store_true", help="composite coverage map -> heatmap.csv")
    mode.add_argument("--tradeoff", action="store_true", help="Monte-Carlo required power -> tradeoff.csv")
    e.add_argument("--resolution", type=_positive_int, default=201, help="points per axis")
    e.add_argument("--cut-value", type=float, default=0.0, help="fixed coordinate of the pattern cut")
    e.add_argument("--gamma-db", type=float, default=10.0)
    e.add_argument("--freq-ghz", type=_positive_float, default=3.4)
    e.add_argument("--d1", type=_positive_float, default=20.0, help="transmitter-IRS distance (m)")
    e.add_argument("--d2", type=_positive_float, default=20.0, help="IRS-receiver distance (m)")
    e.add_argument("--bw-mhz", type=_positive_float, default=20.0)
    e.add_argument("--noise-dbm-hz", type=float, default=-174.0)
    e.add_argument("--trials", type=_positive_int, default=10_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--sampler", choices=SAMPLERS, default="beta-uniform")
    e.add_argument("--out-dir", default=".")
    return parser


def _design_options(args) -> DesignOptions:
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(raw) - {"sca", "bnb", "quadratic", "reuse_template", "exact_discrete_max_elements"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
    sca = ScaConfig(**{**raw.get("sca", {}), "rng_seed": args.seed})
    opts = DesignOptions(
        sca=sca,
        bits=args.bits,
        bnb=BnbConfig(**raw.get("bnb", {})),
        quadratic=QuadraticProfileConfig(**raw.get("quadratic", {})),
        reuse_template=bool(raw.get("reuse_template", False)),
    )
    if "exact_discrete_max_elements" in raw:
        opts.exact_discrete_max_elements = int(raw["exact_discrete_max_elements"])
    return opts


def cmd_design(args, parser) -> int:
    if args.bits is not None and args.designer != "discrete":
        parser.error("--bits is only valid with --designer discrete")
    if args.designer == "discrete" and args.bits is None:
        parser.error("--designer discrete requires --bits")
    try:
        opts = _design_options(args)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: invalid --config: {exc}", file=sys.stderr)
        return EXIT_DATA
    geom = IrsGeometry(args.qy, args.qz, args.dy, args.dz)
    grid = build_grid(geom, args.my, args.mz, args.py, args.pz)
    try:
        codebook = generate_codebook(geom, grid, args.designer, opts, jobs=args.jobs)
    except (CodebookError, DesignError) as exc:
        detail = getattr(exc, "failures", None)
        print(f"error: design failed: {exc} {detail or ''}".rstrip(), file=sys.stderr)
        return EXIT_SOLVER
    save_codebook(codebook, args.out)
    worst = min(cw.achieved_alpha for cw in codebook.codewords)
    log.info("wrote %d codewords to %s (worst sampled gain %.6g)", codebook.size, args.out, worst)
    return EXIT_OK


def cmd_evaluate(args, parser) -> int:
    try:
        codebook = load_codebook(args.codebook)
    except OSError as exc:
        print(f"error: cannot read codebook: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SchemaError as exc:
        print(f"error: invalid codebook: {exc}", file=sys.stderr)
        return EXIT_DATA
    os.makedirs(args.out_dir, exist_ok=True)
    if args.pattern_cut:
        path = os.path.join(args.out_dir, "pattern.csv")
        write_pattern_csv(path, codebook, args.pattern_cut, args.resolution, args.cut_value)
    elif args.heatmap:
        path = os.path.join(args.out_dir, "heatmap.csv")
        write_heatmap_csv(path, codebook, args.resolution)
    else:
        budget = LinkBudget.from_engineering(
            args.gamma_db, args.freq_ghz, args.d1, args.d2, args.bw_mhz, args.noise_dbm_hz
        )
        mc = MonteCarloConfig(args.trials, args.seed, args.sampler)
        rows = power_tradeoff_curve({(codebook.designer, codebook.size): codebook}, budget, mc)
        path = os.path.join(args.out_dir, "tradeoff.csv")
        write_tradeoff_csv(path, rows)
    log.info("wrote %s", path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command == "design":
        return cmd_design(args, parser)
    return cmd_evaluate(args, parser)


if __name__ == "__main__":
    sys.exit(main())
