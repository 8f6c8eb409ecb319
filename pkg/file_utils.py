# file_utils.py - Reproducible output writing (atomic writes, floats, CSV/JSON text)

import contextlib
import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence


def atomic_write_text(path: Path, content: str, encoding: str = "utf-8") -> None:
    """
    Replace path with content in one rename, so readers never see a partial
    output file. Newlines are written as given ("\\n" on every platform).
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    partial = target.with_name(target.name + ".partial")
    with contextlib.ExitStack() as cleanup:
        cleanup.callback(_remove_quietly, partial)
        partial.write_bytes(content.encode(encoding))
        partial.replace(target)


def _remove_quietly(path: Path) -> None:
    with contextlib.suppress(OSError):
        path.unlink()


def format_float(x: float) -> str:
    """Shortest decimal that parses back to the same binary64."""
    return repr(float(x))


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """CSV with a header row, '\\n' line endings and round-trip floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def json_text(data: Any) -> str:
    """Canonical JSON: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def sidecar_path(path: Path) -> Path:
    """curves.csv -> curves.json"""
    return Path(path).with_suffix(".json")


def comment_line(data: Any) -> str:
    """One '# '-prefixed line of compact canonical JSON (metadata above stdout text)."""
    body = json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return f"# {body}\n"
