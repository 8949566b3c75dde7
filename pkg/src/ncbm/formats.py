"""Plain-text file formats: config, matrices, member lists, traffic logs, CSV."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .behavior import BehaviorParams
from .errors import LogParseError
from .estimation import TrafficRecord

LOG_HEADER = ("node_id", "interval", "pkts_forwarded", "pkts_received", "remaining_power",
              "power_consumption_rate", "initial_energy", "recovery_durations")
MEMBER_HEADER = ("node_id", "a", "b", "c", "d", "e")


def fmt(x) -> str:
    """12 significant digits, trailing zeros kept, '.' as decimal point."""
    if x is None:
        return ""
    if isinstance(x, (str, bytes)):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if x != x:
        return "nan"
    if x == 0.0:
        x = 0.0  # no "-0"
    return format(x, "#.12g")


def load_config(path) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment. Keys use underscores."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def format_matrix(p, labels=("W", "D", "I", "L"), header_lines=()) -> str:
    lines = list(header_lines)
    lines.append("# states: " + " ".join(labels))
    lines.extend(" ".join(fmt(v) for v in row) for row in np.asarray(p))
    return "\n".join(lines) + "\n"


def read_matrix(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([float(v) for v in line.split()])
    p = np.array(rows, dtype=float)
    if p.shape != (4, 4):
        raise ValueError(f"{path}: expected 4 rows of 4 values, got shape {p.shape}")
    return p


def _data_lines(path):
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                yield lineno, stripped


def _split_rows(path, header):
    lines = list(_data_lines(path))
    if not lines:
        raise LogParseError(1, "file is empty")
    lineno, first = lines[0]
    got = tuple(f.strip() for f in next(csv.reader([first])))
    if got != header:
        raise LogParseError(lineno, f"expected header {','.join(header)}")
    for lineno, line in lines[1:]:
        fields = [f.strip() for f in next(csv.reader([line]))]
        if len(fields) != len(header):
            raise LogParseError(lineno, f"expected {len(header)} fields, got {len(fields)}")
        yield lineno, fields


def read_members(path, eta: float = 10.0) -> list[tuple[str, BehaviorParams]]:
    """Parse a ``node_id,a,b,c,d,e`` member file.

    Malformed numbers raise :class:`LogParseError`; invalid probabilities
    raise the usual validation errors.
    """
    members = []
    for lineno, fields in _split_rows(path, MEMBER_HEADER):
        try:
            values = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise LogParseError(lineno, str(exc)) from None
        members.append((fields[0], BehaviorParams(*values, eta=eta)))
    if not members:
        raise LogParseError(1, "member file lists no nodes")
    return members


def read_log(path) -> list[TrafficRecord]:
    records = []
    for lineno, fields in _split_rows(path, LOG_HEADER):
        try:
            recoveries = tuple(float(x) for x in fields[7].split(";") if x.strip())
            records.append(TrafficRecord(
                node_id=fields[0],
                interval_index=int(fields[1]),
                pkts_forwarded=float(fields[2]),
                pkts_received=float(fields[3]),
                remaining_power=float(fields[4]),
                power_consumption_rate=float(fields[5]),
                initial_energy=float(fields[6]),
                recovery_durations=recoveries,
            ))
        except ValueError as exc:
            raise LogParseError(lineno, str(exc)) from None
    return records


def format_log(records) -> str:
    out = [",".join(LOG_HEADER)]
    for r in records:
        out.append(",".join([
            str(r.node_id), str(r.interval_index), repr(float(r.pkts_forwarded)),
            repr(float(r.pkts_received)), repr(float(r.remaining_power)),
            repr(float(r.power_consumption_rate)), repr(float(r.initial_energy)),
            ";".join(repr(x) for x in r.recovery_durations),
        ]))
    return "\n".join(out) + "\n"


def format_csv(columns, rows, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()
