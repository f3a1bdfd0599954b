"""Command-line entry point: growth sweeps, trapping-set bounds, zero contours and oracle checks."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import oracle, svg
from .enumerator import CapacityError, exact_average_enumerator
from .growth import Settings, free_distance_bounds, sweep
from .optimizer import OptimizationError
from .protograph import FormatError, parse_matrix_literal, registry
from .trapping import conv_ts_bounds, default_delta_grid, zero_contour

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_MISMATCH = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")

log = logging.getLogger("ldpc_growth")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    ensemble: str | None = None
    base: str | None = None
    factors: range | None = None
    deltas: list | None = None
    T: int = 12
    N: int = 2
    lift_seed: int = 0
    out: Path = Path(".")
    formats: tuple = FORMATS
    tolerance: float = 1e-3
    settings: Settings = field(default_factory=Settings)


# ---------------------------------------------------------------------------
# argument parsing

def parse_range(text: str) -> range:
    try:
        lo, hi = (int(p) for p in text.split(".."))
    except ValueError:
        raise UsageError(f"range must look like a..b, got {text!r}") from None
    if hi < lo:
        raise UsageError(f"empty range {text!r}")
    return range(lo, hi + 1)


def parse_deltas(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad delta list {text!r}") from None
    if not vals:
        raise UsageError("empty delta list")
    if any(v < 0 or not np.isfinite(v) for v in vals):
        raise UsageError("delta values must be finite and nonnegative")
    return sorted(set(vals))


def parse_formats(text: str) -> tuple:
    fmts = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise UsageError(f"formats must be a subset of {','.join(FORMATS)}")
    return fmts


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldpc-growth", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, ranges=True):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--ensemble", help="registry name or protograph file")
        src.add_argument("--base", help="block base matrix literal such as '[[3,3]]'")
        if ranges:
            sp.add_argument("--range", dest="factors", default=None, help="factor range a..b")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--formats", default="csv,json,svg")
        sp.add_argument("--tol", type=float, default=1e-3, help="bound coincidence tolerance")
        sp.add_argument("--bisect-tol", type=float, default=1e-6)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--restarts", type=int, default=1)

    common(sub.add_parser("growth", help="free-distance growth-rate sweep"))
    tp = sub.add_parser("trapping", help="trapping-set growth-rate bounds")
    common(tp)
    tp.add_argument("--delta", default="0,0.01,0.05")
    cp = sub.add_parser("contour", help="zero-contour curves")
    common(cp, ranges=False)
    cp.add_argument("--delta", default=None, help="comma-separated grid (default: 0 plus 40 log points)")
    cp.add_argument("--T", type=int, default=12)
    op = sub.add_parser("oracle-verify", help="exhaustive finite-N checks")
    common(op, ranges=False)
    op.add_argument("--N", type=int, default=2)
    op.add_argument("--lift-seed", type=int, default=0)
    return p


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command, ensemble=args.ensemble, base=args.base,
                    out=Path(args.out), formats=parse_formats(args.formats), tolerance=args.tol)
    if args.restarts < 1 or args.bisect_tol <= 0 or args.tol < 0:
        raise UsageError("restarts must be >= 1 and tolerances positive")
    cfg.settings = Settings(tol=args.bisect_tol, restarts=args.restarts, seed=args.seed)
    if getattr(args, "factors", None):
        cfg.factors = parse_range(args.factors)
    if getattr(args, "delta", None):
        cfg.deltas = parse_deltas(args.delta)
    if args.command == "contour":
        cfg.T = args.T
    if args.command == "oracle-verify":
        if args.N < 1:
            raise UsageError("--N must be positive")
        cfg.N, cfg.lift_seed = args.N, args.lift_seed
    if cfg.ensemble is None and cfg.base is None:
        cfg.ensemble = "3-6"
    return cfg


# ---------------------------------------------------------------------------
# output

def cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def json_value(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, Fraction):
        return cell(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(cell(x))


def write_table(cfg: RunConfig, stem: str, header, rows) -> None:
    if "csv" in cfg.formats:
        lines = [",".join(header)] + [",".join(cell(v) for v in r) for r in rows]
        (cfg.out / f"{stem}.csv").write_text("\n".join(lines) + "\n")
    if "json" in cfg.formats:
        data = [{h: json_value(v) for h, v in zip(header, r)} for r in rows]
        (cfg.out / f"{stem}.json").write_text(json.dumps(data, indent=1) + "\n")


def write_figure(cfg: RunConfig, name: str, fig: svg.Figure) -> None:
    if "svg" in cfg.formats:
        svg.save(fig, cfg.out / name)


def _ensemble(cfg: RunConfig):
    if cfg.base is not None:
        raise UsageError("this command needs a convolutional --ensemble, not --base")
    return registry(cfg.ensemble)


def _factors(cfg: RunConfig, conv):
    factors = cfg.factors or range(conv.memory + 1, 22)
    if factors.start < conv.memory + 1:
        raise UsageError(f"factors must be >= m_s + 1 = {conv.memory + 1}, got {factors.start}")
    return factors


# ---------------------------------------------------------------------------
# commands

def cmd_growth(cfg: RunConfig) -> int:
    ens = _ensemble(cfg)
    factors = _factors(cfg, ens.conv)
    rows = sweep(ens.conv, factors, settings=cfg.settings)
    bounds = free_distance_bounds(ens.conv, factors, cfg.tolerance, cfg.settings)
    write_table(cfg, "growth_sweep", ("kind", "factor", "block_growth", "bound", "design_rate"),
                [(r.kind, r.factor, r.block_growth, r.bound, r.rate) for r in rows])
    write_table(cfg, "bounds", ("T", "lower", "upper", "coincide", "exact_value"),
                [(b.T, b.lower, b.upper, b.coincide, b.exact_value) for b in bounds])
    fig = svg.Figure(f"{ens.name} ensemble", "termination / tail-biting factor", "growth rate")
    for kind, tag in (("terminated", "L"), ("tailbiting", "lambda")):
        sel = [r for r in rows if r.kind == kind]
        fig.add(f"{kind} block ({tag})", [r.factor for r in sel], [r.block_growth for r in sel])
    fig.add("upper bound", [b.T for b in bounds], [b.upper for b in bounds], dashed=True)
    fig.add("lower bound", [b.T for b in bounds], [b.lower for b in bounds], dashed=True)
    write_figure(cfg, "fig1.svg", fig)
    for b in bounds:
        print(f"T={b.T:3d} lower={b.lower:.6g} upper={b.upper:.6g}"
              + (f" exact={b.exact_value:.6g}" if b.coincide else ""))
    return EXIT_OK


def cmd_trapping(cfg: RunConfig) -> int:
    ens = _ensemble(cfg)
    factors = _factors(cfg, ens.conv)
    deltas = cfg.deltas or [0.0, 0.01, 0.05]
    table = []
    fig = svg.Figure(f"{ens.name} trapping-set bounds", "T", "growth rate")
    for d in deltas:
        bounds = conv_ts_bounds(ens.conv, d, factors, cfg.tolerance, cfg.settings)
        table += [(d, b.T, b.lower, b.upper, b.coincide, b.exact_value) for b in bounds]
        fig.add(f"upper, delta={d:g}", [b.T for b in bounds], [b.upper for b in bounds])
        fig.add(f"lower, delta={d:g}", [b.T for b in bounds], [b.lower for b in bounds], dashed=True)
    write_table(cfg, "ts_bounds", ("delta", "T", "lower", "upper", "coincide", "exact_value"), table)
    write_figure(cfg, "fig2.svg", fig)
    for d, T, lo, up, co, ex in table:
        print(f"delta={d:g} T={T:3d} lower={lo:.6g} upper={up:.6g}" + (f" exact={ex:.6g}" if co else ""))
    return EXIT_OK


def cmd_contour(cfg: RunConfig) -> int:
    grid = cfg.deltas or default_delta_grid()
    ens = _ensemble(cfg)
    if cfg.T < ens.conv.memory + 1:
        raise UsageError(f"--T must be >= {ens.conv.memory + 1}")
    block = zero_contour(ens.block_proto, grid, cfg.settings, cfg.tolerance)
    conv = zero_contour((ens.conv, cfg.T), grid, cfg.settings, cfg.tolerance)
    points = block + conv
    write_table(cfg, "contour", ("delta", "alpha", "beta", "source"),
                [(p.delta_ratio, p.alpha, p.beta, p.source) for p in points])
    fig = svg.Figure(f"{ens.name} zero contours", "alpha", "beta")
    for source in ("block", "conv-exact", "conv-lower", "conv-upper"):
        sel = [p for p in points if p.source == source]
        if sel:
            label = "block" if source == "block" else f"{source} T={cfg.T}"
            fig.add(label, [p.alpha for p in sel], [p.beta for p in sel], dashed=source != "block" and source != "conv-exact")
    write_figure(cfg, "fig3.svg", fig)
    for source in ("block", "conv"):
        got = {p.delta_ratio for p in points if p.source.startswith(source)}
        missing = [d for d in grid if d not in got]
        if missing:
            print(f"{source}: no certified growth at delta = {', '.join(f'{d:g}' for d in missing)} (omitted)",
                  file=sys.stderr)
    print(f"{len(block)} block points, {len(conv)} convolutional points")
    return EXIT_OK


def _oracle_base(cfg: RunConfig):
    if cfg.base is not None:
        return parse_matrix_literal(cfg.base)
    return registry(cfg.ensemble).block_proto


def cmd_oracle_verify(cfg: RunConfig) -> int:
    base, N = _oracle_base(cfg), cfg.N
    failed = False

    avg = oracle.exhaustive_ensemble_average(base, N)
    bad = next(((d, v) for d, v in avg.items() if exact_average_enumerator(base, N, d) != v), None)
    if bad is None:
        print(f"PASS product-formula equivalence ({len(avg)} weight vectors, N={N})")
    else:
        d, v = bad
        print(f"FAIL product-formula equivalence at N={N}, d={d}: "
              f"exhaustive {v}, formula {exact_average_enumerator(base, N, d)}")
        failed = True

    code = oracle.lift(base, N, seed=cfg.lift_seed)
    census = oracle.trapping_census(code, code.n)
    if oracle.census_marginals_hold(census, code.n):
        print(f"PASS census marginals (n={code.n}, seed={cfg.lift_seed})")
    else:
        print("FAIL census marginals")
        failed = True
    mismatch = oracle.bijection_mismatch(code)
    if mismatch is None:
        print(f"PASS trapping-set bijection (seed={cfg.lift_seed})")
    else:
        a, b, c1, c2 = mismatch
        print(f"FAIL trapping-set bijection at (a, b) = ({a}, {b}): census {c1}, augmented codewords {c2}")
        failed = True
    return EXIT_MISMATCH if failed else EXIT_OK


COMMANDS = {
    "growth": cmd_growth,
    "trapping": cmd_trapping,
    "contour": cmd_contour,
    "oracle-verify": cmd_oracle_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if cfg.command != "oracle-verify":
            cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, FormatError, oracle.BudgetError, oracle.LiftError, CapacityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as err:
        print(f"error: {err.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except OptimizationError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
