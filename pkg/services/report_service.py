# services/report_service.py - Output payloads and files with provenance
#
# Thin layer between the CLI and file_utils: every JSON payload gets the
# exact MetricConfig and tool version; every CSV gets a JSON sidecar.

import logging
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from config import get_tool_version
from domain.models import CurvePoint, EstimateReport, MetricConfig, TaylorPoly
from file_utils import (
    atomic_write_text,
    comment_line,
    csv_text,
    json_text,
    sidecar_path,
)
from series_core import poly_from_json

logger = logging.getLogger(__name__)

BOUNDS_HEADER = (
    "n",
    "delta_lower",
    "log_count_lower",
    "delta_upper",
    "log_count_upper",
)
ESTIMATE_HEADER = ("delta", "pack_count", "cover_count")


def provenance(cfg: MetricConfig, **extra: Any) -> dict[str, Any]:
    """{"config": ..., "version": ...} plus any extra fields (seed, n-range, ...)."""
    data = {"config": cfg.to_dict(), "version": get_tool_version()}
    data.update({k: v for k, v in extra.items() if v is not None})
    return data


def read_poly(path: Path) -> TaylorPoly:
    """Load a coefficient file. OSError if unreadable, ValueError if malformed."""
    path = Path(path)
    try:
        return poly_from_json(path.read_text(encoding="utf-8"))
    except ValueError as e:
        raise ValueError(f"{path}: {e}") from e


def emit_header(meta: dict[str, Any], stdout) -> None:
    """Provenance as a single comment line ahead of plain-text stdout output."""
    stdout.write(comment_line(meta))


def emit_json(payload: dict[str, Any], out: Optional[Path], stdout) -> None:
    """Write canonical JSON to out (atomically) or to stdout."""
    text = json_text(payload)
    if out is None:
        stdout.write(text)
    else:
        atomic_write_text(Path(out), text)
        logger.info("Wrote %s", out)


def emit_csv(
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: dict[str, Any],
    out: Optional[Path],
    stdout,
) -> None:
    """
    CSV to out plus the JSON sidecar. Without out, the sidecar becomes one
    leading comment line and the CSV follows on stdout (read it back with
    comment="#").
    """
    text = csv_text(header, rows)
    if out is None:
        emit_header(meta, stdout)
        stdout.write(text)
        return
    out = Path(out)
    atomic_write_text(out, text)
    atomic_write_text(sidecar_path(out), json_text(meta))
    logger.info("Wrote %s and %s", out, sidecar_path(out))


def bounds_rows(
    lower: Sequence[CurvePoint], upper: Sequence[CurvePoint]
) -> list[tuple]:
    """Join the two curves on n."""
    by_n = {p.n: p for p in upper}
    rows = []
    for lo in lower:
        up = by_n.get(lo.n)
        if up is None:
            raise ValueError(f"Upper curve has no point for n = {lo.n}")
        rows.append((lo.n, lo.delta, lo.log_count, up.delta, up.log_count))
    return rows


def estimate_rows(report: EstimateReport) -> list[tuple]:
    return [tuple(row) for row in report.rows()]
