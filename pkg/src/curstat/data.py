"""Domain types, CSV ingestion, step-function evaluation and the RNG contract.

Every random quantity in the package is drawn from a stream addressed by
``(master_seed, *path, replicate)``.  Replicate ``b`` therefore sees the same
draws no matter in which order, or in which worker process, it is computed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySample, InvalidDatum


@dataclass(frozen=True)
class RngSpec:
    """Seed plus a key path; ``generator(b)`` is the stream of replicate ``b``."""

    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.master_seed) < 0 or int(self.master_seed) >= 2**64:
            raise InvalidDatum("master_seed must be a 64-bit unsigned integer")

    def child(self, *keys: int) -> RngSpec:
        return RngSpec(self.master_seed, self.path + tuple(int(k) for k in keys))

    def generator(self, replicate: int = 0) -> np.random.Generator:
        seq = np.random.SeedSequence(
            int(self.master_seed), spawn_key=self.path + (int(replicate),)
        )
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True, eq=False)
class CurrentStatusSample:
    """Current status observations grouped by distinct inspection time.

    Attributes
    ----------
    times : ndarray of shape (k,)
        Strictly increasing distinct inspection times.
    statuses : ndarray of shape (k,)
        Number of observations with ``status == 1`` at each time.
    multiplicities : ndarray of shape (k,)
        Total number of observations at each time.
    support : tuple of float or None
        Optional interval ``[lo, hi]`` known to contain the inspection times.
    """

    times: np.ndarray
    statuses: np.ndarray
    multiplicities: np.ndarray
    support: tuple[float, float] | None = None
    group_index: np.ndarray = field(init=False, repr=False)
    expanded_status: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        statuses = np.asarray(self.statuses, dtype=np.int64)
        mult = np.asarray(self.multiplicities, dtype=np.int64)
        if times.size == 0:
            raise EmptySample("sample has no observations")
        if not (times.shape == statuses.shape == mult.shape):
            raise InvalidDatum("times, statuses and multiplicities differ in length")
        if not np.all(np.isfinite(times)):
            raise InvalidDatum("non-finite observation time")
        if np.any(np.diff(times) <= 0):
            raise InvalidDatum("times must be strictly increasing after grouping")
        if np.any(mult < 1) or np.any(statuses < 0) or np.any(statuses > mult):
            raise InvalidDatum("need 0 <= statuses <= multiplicities and multiplicities >= 1")
        if self.support is not None:
            lo, hi = map(float, self.support)
            if not lo < hi or times[0] < lo or times[-1] > hi:
                raise InvalidDatum(f"support [{lo}, {hi}] does not contain the times")
            object.__setattr__(self, "support", (lo, hi))
        for name, arr in (("times", times), ("statuses", statuses), ("multiplicities", mult)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        # Expanded order: sorted by time, status-0 records before status-1 records.
        gidx = np.repeat(np.arange(times.size), mult)
        starts = np.concatenate(([0], np.cumsum(mult)[:-1]))
        pos = np.arange(gidx.size) - starts[gidx]
        expanded = (pos >= (mult - statuses)[gidx]).astype(np.int64)
        gidx.setflags(write=False)
        expanded.setflags(write=False)
        object.__setattr__(self, "group_index", gidx)
        object.__setattr__(self, "expanded_status", expanded)

    @property
    def n(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def k(self) -> int:
        return int(self.times.size)

    def support_or_range(self) -> tuple[float, float]:
        if self.support is not None:
            return self.support
        return (min(0.0, float(self.times[0])), float(self.times[-1]))

    def expanded_times(self) -> np.ndarray:
        return self.times[self.group_index]

    def group_sums(self, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-time total weight and weighted status sum for per-record ``counts``.

        ``counts`` may be 2-d with one row per replicate.
        """
        counts = np.asarray(counts)
        starts = np.concatenate(([0], np.cumsum(self.multiplicities)[:-1]))
        w = np.add.reduceat(counts, starts, axis=-1)
        s = np.add.reduceat(counts * self.expanded_status, starts, axis=-1)
        return w, s


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """Right-continuous step function with jumps at ``knots``."""

    knots: np.ndarray
    values: np.ndarray
    left_limit: float = 0.0

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.shape != values.shape or knots.ndim != 1:
            raise InvalidDatum("knots and values must be 1-d of equal length")
        if np.any(np.diff(knots) <= 0):
            raise InvalidDatum("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @property
    def jumps(self) -> np.ndarray:
        """Jump sizes at each knot."""
        return np.diff(np.concatenate(([self.left_limit], self.values)))

    def __call__(self, t):
        return eval_step(self, t)


@dataclass(frozen=True)
class BootstrapWeights:
    counts: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.size)


@dataclass(frozen=True)
class Grid:
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise InvalidDatum("grid is empty")
        if np.any(np.diff(pts) <= 0):
            raise InvalidDatum("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def regular(cls, start: float, stop: float, step: float) -> Grid:
        m = int(round((stop - start) / step))
        return cls(np.round(start + step * np.arange(m + 1), 12))

    def check_inside(self, support: tuple[float, float]) -> None:
        lo, hi = support
        if self.points[0] < lo or self.points[-1] > hi:
            raise InvalidDatum(f"grid leaves the support [{lo}, {hi}]")

    def __len__(self):
        return self.points.size


def ingest_sample(
    raw_pairs: Iterable[tuple[float, int]],
    counts: Sequence[int] | None = None,
    support: tuple[float, float] | None = None,
) -> CurrentStatusSample:
    """Sort ``(time, status)`` pairs and merge ties into grouped form."""
    pairs = list(raw_pairs)
    if not pairs:
        raise EmptySample("no observations")
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidDatum("expected (time, status) pairs")
    t, d = arr[:, 0], arr[:, 1]
    if not np.all(np.isfinite(t)):
        raise InvalidDatum("non-finite observation time")
    if not np.all((d == 0) | (d == 1)):
        raise InvalidDatum("status must be 0 or 1")
    c = np.ones(t.size, dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
    if c.shape != t.shape or np.any(c < 1):
        raise InvalidDatum("counts must be positive integers, one per pair")
    uniq, inv = np.unique(t, return_inverse=True)
    mult = np.bincount(inv, weights=c, minlength=uniq.size).astype(np.int64)
    stat = np.bincount(inv, weights=c * d, minlength=uniq.size).astype(np.int64)
    return CurrentStatusSample(uniq, stat, mult, support=support)


def sample_from_arrays(times, statuses, support=None) -> CurrentStatusSample:
    times = np.asarray(times, dtype=float)
    statuses = np.asarray(statuses)
    return ingest_sample(np.column_stack([times, statuses]), support=support)


def read_sample_csv(source, support=None) -> CurrentStatusSample:
    """Read a ``time,status[,count]`` CSV file (header required)."""
    rows = _read_rows(source, required=("time", "status"), optional=("count",))
    pairs = [(r["time"], r["status"]) for r in rows]
    counts = [int(r["count"]) for r in rows] if rows and "count" in rows[0] else None
    return ingest_sample(pairs, counts=counts, support=support)


def _read_rows(source, required, optional=()):
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise EmptySample("CSV file is empty") from None
    missing = [c for c in required if c not in header]
    if missing:
        raise InvalidDatum(f"CSV header lacks column(s): {', '.join(missing)}")
    cols = [c for c in (*required, *optional) if c in header]
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(header):
            raise InvalidDatum(f"line {lineno}: expected {len(header)} fields, got {len(rec)}")
        row = {}
        for c in cols:
            raw = rec[header.index(c)].strip()
            try:
                val = float(raw)
            except ValueError:
                raise InvalidDatum(f"line {lineno}: cannot parse {c}={raw!r}") from None
            if not math.isfinite(val):
                raise InvalidDatum(f"line {lineno}: non-finite {c}")
            if c in ("status", "count") and val != int(val):
                raise InvalidDatum(f"line {lineno}: {c} must be an integer")
            row[c] = val
        rows.append(row)
    if not rows:
        raise EmptySample("CSV file has no data rows")
    return rows


def eval_step(F: StepDistribution, t):
    """Evaluate ``F`` right-continuously; scalar in, scalar out."""
    tt = np.asarray(t, dtype=float)
    if F.knots.size == 0:
        vals = np.full(tt.shape, F.left_limit)
    else:
        idx = np.searchsorted(F.knots, tt, side="right") - 1
        vals = np.where(idx >= 0, F.values[np.clip(idx, 0, None)], F.left_limit)
    if np.ndim(t) == 0:
        return float(vals)
    return vals


def draw_multinomial_weights(n: int, rng: RngSpec, replicate: int) -> BootstrapWeights:
    """Multinomial(n; 1/n, ..., 1/n) counts from ``n`` tallied uniform index draws."""
    if n < 1:
        raise EmptySample("cannot draw bootstrap weights for n=0")
    idx = rng.generator(replicate).integers(0, n, size=n)
    return BootstrapWeights(np.bincount(idx, minlength=n).astype(np.int64))
