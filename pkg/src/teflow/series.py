"""Dated value series: the common carrier for prices, returns, volatilities and index levels."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .errors import EmptyIntersection, NonFiniteValue, ParseError


def format_value(x: float) -> str:
    """Canonical float formatting used by every CSV writer (byte-stable across runs)."""
    return format(float(x), ".12g")


@dataclass(frozen=True)
class DatedSeries:
    """Ordered (date, value) observations with strictly increasing dates.

    Values must be finite unless the series was built with ``allow_missing``,
    in which case NaN marks a missing observation (infinities are never valid).
    """

    dates: tuple[date, ...]
    values: np.ndarray
    label: str = ""
    units: str = ""
    allow_missing: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dates", tuple(self.dates))
        if len(self.dates) != vals.shape[0]:
            raise ValueError("dates and values must have equal length")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ParseError(f"dates not strictly increasing near {cur.isoformat()}")
        if np.isinf(vals).any():
            raise NonFiniteValue(f"infinite value in series {self.label!r}")
        if not self.allow_missing and np.isnan(vals).any():
            raise NonFiniteValue(f"missing (NaN) value in series {self.label!r}")

    def __len__(self) -> int:
        return len(self.dates)

    def window(self, start: int, stop: int) -> "DatedSeries":
        """Contiguous slice by positional index."""
        return replace(self, dates=self.dates[start:stop], values=self.values[start:stop])

    def drop_missing(self) -> "DatedSeries":
        """Remove NaN observations; result is a fully finite series."""
        keep = ~np.isnan(self.values)
        dates = tuple(d for d, k in zip(self.dates, keep) if k)
        return replace(self, dates=dates, values=self.values[keep], allow_missing=False)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "value"])
            for d, v in zip(self.dates, self.values):
                w.writerow([d.isoformat(), format_value(v)])

    @classmethod
    def from_pairs(cls, pairs, label: str = "", units: str = "", allow_missing: bool = False) -> "DatedSeries":
        pairs = list(pairs)
        dates = tuple(p[0] for p in pairs)
        values = np.array([p[1] for p in pairs], dtype=float)
        return cls(dates=dates, values=values, label=label, units=units, allow_missing=allow_missing)


def load_series_csv(path, label: str | None = None, skip_preamble: bool = False) -> DatedSeries:
    """Read a two-column ``date,value`` CSV with one header row.

    ``skip_preamble`` tolerates a leading export preamble (a category line
    followed by a blank line) when one is detected.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path=path)
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    offset = 0
    if skip_preamble and lines and lines[0].strip() and "," not in lines[0]:
        offset = 1
        while offset < len(lines) and not lines[offset].strip():
            offset += 1
    rows = list(csv.reader(lines[offset:]))
    if not rows:
        raise ParseError("missing header row", path=path, line=offset + 1)
    pairs: list[tuple[date, float]] = []
    seen: set[date] = set()
    for i, row in enumerate(rows[1:], start=offset + 2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", path=path, line=i)
        try:
            d = date.fromisoformat(row[0].strip())
        except ValueError:
            raise ParseError(f"bad date {row[0]!r}", path=path, line=i) from None
        try:
            v = float(row[1])
        except ValueError:
            raise ParseError(f"bad value {row[1]!r}", path=path, line=i) from None
        if not math.isfinite(v):
            raise NonFiniteValue(f"{path}:{i}: non-finite value")
        if d in seen:
            raise ParseError(f"duplicate date {d.isoformat()}", path=path, line=i)
        seen.add(d)
        pairs.append((d, v))
    pairs.sort(key=lambda p: p[0])
    return DatedSeries.from_pairs(pairs, label=label if label is not None else path.stem)


def align(series_a: DatedSeries, series_b: DatedSeries) -> tuple[DatedSeries, DatedSeries]:
    """Inner join on dates; both outputs share one strictly increasing date vector."""
    if series_a.dates == series_b.dates:
        return series_a, series_b
    common = sorted(set(series_a.dates) & set(series_b.dates))
    if not common:
        raise EmptyIntersection(
            f"series {series_a.label!r} and {series_b.label!r} share no dates"
        )
    idx_a = {d: i for i, d in enumerate(series_a.dates)}
    idx_b = {d: i for i, d in enumerate(series_b.dates)}
    sel_a = np.array([idx_a[d] for d in common])
    sel_b = np.array([idx_b[d] for d in common])
    out_a = replace(series_a, dates=tuple(common), values=series_a.values[sel_a])
    out_b = replace(series_b, dates=tuple(common), values=series_b.values[sel_b])
    return out_a, out_b
