"""Flat-file artifacts: curve CSV, JSON reports, SVG plots."""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Iterable, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

try:
    from .errors import ConvergenceFailure
    from .exact_roc import ROCCurve
except ImportError:
    from errors import ConvergenceFailure
    from exact_roc import ROCCurve

logger = logging.getLogger(__name__)

HEADER = ["bound", "p", "q", "beta", "alpha"]
STDOUT = "-"

# Fixed SVG ids and no timestamp, so identical runs give identical files.
matplotlib.rcParams["svg.hashsalt"] = "qroc"


@dataclass(frozen=True)
class CurveRecord:
    bound: str
    p: Optional[float]
    q: Optional[float]
    beta: float
    alpha: float


def records_from_curves(curves: Iterable[ROCCurve]) -> List[CurveRecord]:
    """Flatten curves into rows sorted by (bound, beta, -alpha)."""
    rows = []
    for curve in curves:
        for pt in curve.points:
            if not (math.isfinite(pt.alpha) and math.isfinite(pt.beta)):
                raise ConvergenceFailure(f"non-finite point in {pt.kind}: ({pt.beta}, {pt.alpha})")
            rows.append(CurveRecord(pt.kind, pt.p, pt.q, float(pt.beta), float(pt.alpha)))
    rows.sort(key=lambda r: (r.bound, r.beta, -r.alpha))
    return rows


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else format(float(x), ".17g")


def _parse(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def format_csv(records: Sequence[CurveRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in records:
        writer.writerow([r.bound, _fmt(r.p), _fmt(r.q), _fmt(r.beta), _fmt(r.alpha)])
    return buf.getvalue()


def _emit(text: str, path: str) -> None:
    if path == STDOUT:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("wrote %s", path)


def write_curves_csv(records: Sequence[CurveRecord], path: str = STDOUT) -> None:
    _emit(format_csv(records), path)


def read_curves_csv(source) -> List[CurveRecord]:
    """Parse a curve CSV from a path or an open text stream."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8", newline="") as f:
            return read_curves_csv(f)
    reader = csv.reader(source)
    header = next(reader)
    if header != HEADER:
        raise ValueError(f"unexpected CSV header: {header}")
    return [
        CurveRecord(row[0], _parse(row[1]), _parse(row[2]), float(row[3]), float(row[4]))
        for row in reader
        if row
    ]


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalars
        return _jsonable(value.item())
    return value


def format_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def write_report_json(report: dict, path: str = STDOUT) -> None:
    _emit(format_report(report), path)


def plot_curves_svg(records: Sequence[CurveRecord], path: str, log: bool = False) -> None:
    """alpha against beta, one line per bound tag."""
    fig, ax = plt.subplots(figsize=(6, 5))
    labels = sorted({r.bound for r in records})
    for label in labels:
        rows = [r for r in records if r.bound == label]
        if log:
            rows = [r for r in rows if r.beta > 0 and r.alpha > 0]
        if not rows:
            continue
        ax.plot([r.beta for r in rows], [r.alpha for r in rows], label=label, lw=1.2)
    if log:
        ax.set_xscale("log")
        ax.set_yscale("log")
    else:
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
    ax.set_xlabel("beta (type II)")
    ax.set_ylabel("alpha (type I)")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
