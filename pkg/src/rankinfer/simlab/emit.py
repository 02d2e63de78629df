"""CSV/JSON serialization of rejection tables and rank histograms.

Floats are written with ``repr`` so parsing the output reproduces every
value exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Literal

from rankinfer.errors import InvalidArgument
from rankinfer.simlab.montecarlo import RankHistogram, RejectionTable, Row

Format = Literal["csv", "json"]


def _records(obj) -> tuple[tuple[str, ...], list[dict]]:
    if isinstance(obj, (list, tuple)) and obj and all(isinstance(h, RankHistogram) for h in obj):
        return RankHistogram.COLUMNS, [rec for h in obj for rec in _records(h)[1]]
    if isinstance(obj, RejectionTable):
        return RejectionTable.COLUMNS, [
            {c: getattr(row, c) for c in RejectionTable.COLUMNS} for row in obj.rows
        ]
    if isinstance(obj, RankHistogram):
        return RankHistogram.COLUMNS, [
            {
                "design": obj.design,
                "n": obj.n,
                "delta": obj.delta,
                "estimator": obj.estimator,
                "rank": j,
                "percent": pct,
                "count": c,
                "R": obj.R,
            }
            for j, (c, pct) in enumerate(zip(obj.counts, obj.percentages))
        ]
    raise InvalidArgument(f"cannot emit {type(obj).__name__}")


def emit(
    obj: RejectionTable | RankHistogram | list[RankHistogram],
    fmt: Format = "csv",
    path: str | Path | None = None,
) -> bytes:
    """Serialize ``obj``; also write it to ``path`` when given.

    A list of histograms is written as one long table.
    """
    columns, records = _records(obj)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([repr(v) if isinstance(v, float) else v for v in rec.values()])
        data = buf.getvalue().encode("utf-8")
    elif fmt == "json":
        data = (json.dumps({"columns": list(columns), "rows": records}, indent=2) + "\n").encode()
    else:
        raise InvalidArgument(f"unknown format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_bytes(data)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return data


_TYPES = {"n": int, "R": int, "count": int, "rank": int, "delta": float, "rate": float,
          "se": float, "percent": float}


def parse(data: bytes, fmt: Format = "csv") -> list[dict]:
    """Inverse of :func:`emit` at the record level."""
    if fmt == "json":
        return json.loads(data)["rows"]
    reader = csv.DictReader(io.StringIO(data.decode("utf-8")))
    return [{k: _TYPES.get(k, str)(v) for k, v in rec.items()} for rec in reader]


def table_from_records(records: list[dict]) -> RejectionTable:
    return RejectionTable(tuple(Row(**rec) for rec in records))
