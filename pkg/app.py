import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np

# Import the engine entry points
try:
    from src.curve_io import STDOUT, plot_curves_svg, records_from_curves, write_curves_csv, write_report_json
    from src.errors import QrocError, UsageError
    from src.loader import load_pair
    from src.pipeline import DEFAULT_BOUNDS, DEFAULT_P_GRID, load_settings, run_asymptotics, run_bounds, run_exact, run_sequence
except ImportError:
    from curve_io import STDOUT, plot_curves_svg, records_from_curves, write_curves_csv, write_report_json
    from errors import QrocError, UsageError
    from loader import load_pair
    from pipeline import DEFAULT_BOUNDS, DEFAULT_P_GRID, load_settings, run_asymptotics, run_bounds, run_exact, run_sequence

logger = logging.getLogger("qroc")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through the JSON error channel."""

    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from e
    if not values:
        raise UsageError("empty list")
    return values


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="app.py",
        description="Exact and bounded ROC curves for discriminating two quantum states.",
    )
    parser.add_argument("--config", default=None, help="YAML settings file (default: config.yaml).")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads; overrides QROC_THREADS.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only.")
    sub = parser.add_subparsers(dest="command", required=True)

    exact = sub.add_parser("exact", help="Exact ROC of two density matrices.")
    exact.add_argument("state1")
    exact.add_argument("state2")
    exact.add_argument("--grid", type=int, default=None, help="Number of Chebyshev p-points.")
    exact.add_argument("--out", default=STDOUT)

    bounds = sub.add_parser("bounds", help="Analytic ROC bounds.")
    bounds.add_argument("state1")
    bounds.add_argument("state2", nargs="?", default=None)
    bounds.add_argument("--bounds", default=",".join(DEFAULT_BOUNDS),
                        help="Comma-separated subset of fidUB,fidLB,caqcb,oaqcb,qreLB.")
    bounds.add_argument("--copies", type=int, default=1)
    bounds.add_argument("--grid", type=int, default=None)
    bounds.add_argument("--s0", type=float, default=None, help="CAQCB member; default is s*.")
    bounds.add_argument("--svg", default=None, help="Also plot the curves to this SVG file.")
    bounds.add_argument("--log", action="store_true", help="Log axes in the SVG.")
    bounds.add_argument("--fock-cutoff", type=int, default=None)
    bounds.add_argument("--fock-max-deficit", type=float, default=None)
    bounds.add_argument("--out", default=STDOUT)

    asym = sub.add_parser("asymptotics", help="Exponents, Hoeffding saturation, Stein limits.")
    asym.add_argument("state1")
    asym.add_argument("state2", nargs="?", default=None)
    asym.add_argument("--p-grid", default=",".join(str(p) for p in DEFAULT_P_GRID))
    asym.add_argument("--out", default=STDOUT)

    seq = sub.add_parser("sequence", help="Three-copy rules and adaptive sequences of pure states.")
    seq.add_argument("--fidelities", required=True, help="Comma-separated per-subsystem fidelities.")
    seq.add_argument("--rule", choices=["a", "b", "c", "adaptive"], default="adaptive")
    seq.add_argument("--p0", default=None, help="Comma-separated p values; default is a uniform sweep.")
    seq.add_argument("--grid", type=int, default=None, help="Points in the default sweep.")
    seq.add_argument("--out", default=STDOUT)
    return parser


# --- Commands ---

def cmd_exact(args, settings) -> None:
    pair = load_pair(args.state1, args.state2)
    curve = run_exact(pair, settings, args.grid)
    write_curves_csv(records_from_curves([curve]), args.out)


def cmd_bounds(args, settings) -> None:
    if args.copies < 1:
        raise UsageError(f"--copies must be >= 1, got {args.copies}")
    pair = load_pair(args.state1, args.state2)
    names = [n.strip() for n in args.bounds.split(",") if n.strip()]
    curves, skipped = run_bounds(pair, settings, names, args.copies, args.s0, args.grid)
    records = records_from_curves(curves)
    write_curves_csv(records, args.out)
    if args.svg:
        plot_curves_svg(records, args.svg, log=args.log)
    if skipped is not None:
        # the other curves are already written; the exit code still reports the gap
        raise skipped


def cmd_asymptotics(args, settings) -> None:
    pair = load_pair(args.state1, args.state2)
    p_grid = _float_list(args.p_grid)
    write_report_json(run_asymptotics(pair, settings, p_grid), args.out)


def cmd_sequence(args, settings) -> None:
    fidelities = _float_list(args.fidelities)
    if args.p0:
        p_grid = _float_list(args.p0)
    else:
        p_grid = list(np.linspace(0.0, 1.0, args.grid or settings.bound_grid_points))
    curves, residual = run_sequence(fidelities, args.rule, p_grid)
    write_curves_csv(records_from_curves(curves), args.out)
    if residual is not None:
        print(json.dumps({"adaptive_identity_residual": residual}), file=sys.stderr)


COMMANDS = {
    "exact": cmd_exact,
    "bounds": cmd_bounds,
    "asymptotics": cmd_asymptotics,
    "sequence": cmd_sequence,
}


def _setup_logging(args, level_name: str) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else level_name
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        settings = load_settings(
            args.config,
            threads=args.threads,
            fock_cutoff=getattr(args, "fock_cutoff", None),
            fock_max_deficit=getattr(args, "fock_max_deficit", None),
        )
        _setup_logging(args, settings.log_level)
        logger.debug("running %s with %s", args.command, settings.model_dump())
        COMMANDS[args.command](args, settings)
        return 0
    except QrocError as e:
        print(json.dumps(e.to_record()), file=sys.stderr)
        return e.exit_code
    except np.linalg.LinAlgError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": 4}), file=sys.stderr)
        return 4


# --- Main execution ---
if __name__ == "__main__":
    sys.exit(main())
