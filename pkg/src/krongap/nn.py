"""Finite Kronecker orbits and their nearest-neighbour structure.

Two exact routes compute nearest neighbours:

``brute``
    the O(N^2) scan over all pairs of points (reference).
``offset``
    uses that the torus distance between ``z_n`` and ``z_m`` depends only
    on ``|n - m|``. One table of keys over offsets ``k = 1..N-1`` (rank
    coded, so ties stay exact) answers every query for every prefix size.

Ties are broken towards the maximum index in both routes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from . import _accel
from .cf import CoefficientStream, convergents, format_rational
from .torus import L2, Metric, distance_key, key_from_norms, scaled_norm

__all__ = [
    "PointSet",
    "NNRecord",
    "GapSpectrum",
    "OffsetTable",
    "TruncationError",
    "generate",
    "nearest_neighbor",
    "nn_records",
    "gap_spectrum",
    "h_profile",
    "nn_graph",
    "format_edges",
    "circle_gaps",
    "brute_g_sweep",
    "auto_depth",
    "realize",
    "stability_check",
    "Realization",
]


class TruncationError(RuntimeError):
    """Results at depth K and K+2 disagree; more coefficients are needed."""


def _lcm(values) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


@dataclass(frozen=True)
class PointSet:
    """``{z_n : n in indices}`` with ``z_n = ({n a_1}, ..., {n a_d})``.

    ``index_base=1`` gives ``z_1..z_N``; ``index_base=0`` gives
    ``z_0..z_{N-1}``. ``closed=True`` appends ``z_{base+N}`` (the circle
    picture with both endpoints, N+1 points).
    """

    alpha: tuple[Fraction, ...]
    N: int
    index_base: int = 1
    closed: bool = False
    truncation_depth: tuple[int, ...] | None = None

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def size(self) -> int:
        return self.N + int(self.closed)

    @property
    def indices(self) -> range:
        return range(self.index_base, self.index_base + self.size)

    @cached_property
    def denominator(self) -> int:
        return _lcm(a.denominator for a in self.alpha)

    @cached_property
    def points(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple((n * a) % 1 for a in self.alpha) for n in self.indices)

    def point(self, n: int) -> tuple[Fraction, ...]:
        return self.points[self.position(n)]

    def position(self, n: int) -> int:
        if n not in self.indices:
            raise IndexError(f"index {n} outside {self.indices.start}..{self.indices.stop - 1}")
        return n - self.index_base

    def scaled_coords(self, dtype=None) -> np.ndarray:
        """Coordinates times the common denominator, as exact integers."""
        L = self.denominator
        cols = []
        for a in self.alpha:
            s = L // a.denominator
            cols.append([(n * a.numerator % a.denominator) * s for n in self.indices])
        arr = np.array(cols, dtype=object).T.reshape(self.size, self.d)
        return arr.astype(dtype) if dtype is not None else arr


def generate(alpha, N: int, index_base: int = 1, closed: bool = False, depth=None) -> PointSet:
    alpha = tuple(Fraction(a) for a in alpha)
    if not alpha:
        raise ValueError("alpha must have at least one coordinate")
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    if index_base not in (0, 1):
        raise ValueError("index_base must be 0 or 1")
    return PointSet(alpha, N, index_base, closed, depth)


@dataclass(frozen=True)
class NNRecord:
    i: int
    j: int
    key: Fraction
    h: int


@dataclass(frozen=True)
class GapSpectrum:
    """Distinct nearest-neighbour keys (ascending) with multiplicities."""

    keys: tuple[Fraction, ...]
    counts: tuple[int, ...]
    metric: Metric = L2

    @property
    def g(self) -> int:
        return len(self.keys)

    def to_json(self) -> str:
        return json.dumps([format_rational(k) for k in self.keys])


def _need_two(ps: PointSet):
    if ps.size < 2:
        raise ValueError("nearest-neighbour analysis needs at least 2 points")


# ---------------------------------------------------------------------------
# brute force


def nearest_neighbor(ps: PointSet, i: int, metric: Metric = L2) -> NNRecord:
    """Exact scan of all other points; ties go to the larger index."""
    _need_two(ps)
    zi = ps.point(i)
    best = bj = None
    for n, z in zip(ps.indices, ps.points):
        if n == i:
            continue
        k = distance_key(zi, z, metric)
        if best is None or k <= best:
            best, bj = k, n
    return NNRecord(i, bj, best, abs(bj - i))


def _key_scale(ps: PointSet, metric: Metric) -> int:
    return ps.denominator ** (1 if metric.is_inf else metric.q)


def _brute_arrays(ps: PointSet, metric: Metric):
    L = ps.denominator
    if _accel.fits_int64(L, ps.d, metric.q):
        keys, pos = _accel.brute_nn_int64(ps.scaled_coords(np.int64), L, metric.q)
    else:
        keys, pos = _accel.np_brute_nn(ps.scaled_coords(), L, metric.q)
    return keys, pos


def brute_g_sweep(ps: PointSet, metric: Metric = L2) -> np.ndarray:
    """g for every prefix ``z_b..z_{b+n-1}``, ``n = 0..size`` (entries 0, 1 unused)."""
    L = ps.denominator
    if _accel.fits_int64(L, ps.d, metric.q):
        return _accel.brute_sweep_int64(ps.scaled_coords(np.int64), L, metric.q)
    return _accel.np_brute_sweep(ps.scaled_coords(), L, metric.q)


# ---------------------------------------------------------------------------
# offset tables


class OffsetTable:
    """Exact keys ``D(k)`` of the displacement ``k * alpha`` for ``k = 1..kmax``."""

    def __init__(self, alpha: Sequence, kmax: int, metric: Metric = L2):
        self.alpha = tuple(Fraction(a) for a in alpha)
        self.kmax = int(kmax)
        self.metric = metric
        L = _lcm(a.denominator for a in self.alpha)
        self.denominator = L
        scales = [(a.numerator, a.denominator, L // a.denominator) for a in self.alpha]
        raw = [0]
        for k in range(1, self.kmax + 1):
            norms = [scaled_norm(k * p, q) * s for p, q, s in scales]
            raw.append(key_from_norms(norms, metric))
        self.raw = raw
        uniq = {v: r for r, v in enumerate(sorted(set(raw[1:])))}
        rank = np.empty(self.kmax + 1, dtype=np.int64)
        rank[0] = _accel.INT64_MAX
        rank[1:] = [uniq[v] for v in raw[1:]]
        self.rank = rank
        self.pm, self.first, self.last = _accel.offset_tables(rank)

    def key(self, k: int) -> Fraction:
        scale = self.denominator ** (1 if self.metric.is_inf else self.metric.q)
        return Fraction(self.raw[k], scale)

    def sweep(self, nmax: int | None = None):
        """Arrays ``g[N]`` and ``h1[N]`` for ``N = 2..nmax`` (first point's h)."""
        nmax = self.kmax + 1 if nmax is None else nmax
        self._check(nmax)
        return _accel.offset_sweep(self.pm, self.last, nmax)

    def neighbours(self, n: int) -> np.ndarray:
        """1-based neighbour position of every point in a run of ``n`` points."""
        self._check(n)
        return _accel.offset_nn(self.pm, self.first, self.last, n)

    def _check(self, n: int):
        if n - 1 > self.kmax:
            raise ValueError(f"table covers offsets up to {self.kmax}; need {n - 1}")
        if n < 2:
            raise ValueError("need at least 2 points")


def nn_records(ps: PointSet, metric: Metric = L2, method: str = "offset") -> list[NNRecord]:
    _need_two(ps)
    base = ps.index_base
    if method == "offset":
        table = OffsetTable(ps.alpha, ps.size - 1, metric)
        j = table.neighbours(ps.size)
        out = []
        for pos, jp in enumerate(j.tolist(), start=1):
            h = abs(jp - pos)
            out.append(NNRecord(base + pos - 1, base + jp - 1, table.key(h), h))
        return out
    if method == "brute":
        keys, pos = _brute_arrays(ps, metric)
        scale = _key_scale(ps, metric)
        return [
            NNRecord(base + a, base + int(b), Fraction(int(k), scale), abs(int(b) - a))
            for a, (k, b) in enumerate(zip(keys.tolist(), pos.tolist()))
        ]
    raise ValueError(f"unknown method {method!r}")


def gap_spectrum(ps: PointSet, metric: Metric = L2, method: str = "offset") -> GapSpectrum:
    recs = nn_records(ps, metric, method)
    counts: dict[Fraction, int] = {}
    for r in recs:
        counts[r.key] = counts.get(r.key, 0) + 1
    keys = tuple(sorted(counts))
    return GapSpectrum(keys, tuple(counts[k] for k in keys), metric)


def h_profile(ps: PointSet, metric: Metric = L2, method: str = "offset") -> list[int]:
    return [r.h for r in nn_records(ps, metric, method)]


def nn_graph(ps: PointSet, metric: Metric = L2, method: str = "offset") -> list[tuple[int, int, Fraction]]:
    """Directed edges ``<v_i, nn_1(v_i)>``, one per point."""
    return [(r.i, r.j, r.key) for r in nn_records(ps, metric, method)]


def format_edges(edges) -> str:
    return "".join(f"{i} {j} {format_rational(k)}\n" for i, j, k in edges)


# ---------------------------------------------------------------------------
# one dimension


def circle_gaps(alpha, N: int, index_base: int = 1) -> list[Fraction]:
    """Sorted lengths of the arcs cut out by the orbit on the circle.

    ``index_base=1`` uses ``{n alpha}`` for ``n = 1..N``; ``index_base=0``
    uses ``n = 0..N`` (N+1 points, the usual circle picture).
    """
    if isinstance(alpha, (list, tuple)):
        if len(alpha) != 1:
            raise ValueError("circle_gaps is one-dimensional")
        alpha = alpha[0]
    alpha = Fraction(alpha)
    start = 0 if index_base == 0 else 1
    pts = sorted({(n * alpha) % 1 for n in range(start, N + 1)})
    if len(pts) == 1:
        return [Fraction(1)]
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(1 - pts[-1] + pts[0])
    return sorted(gaps)


# ---------------------------------------------------------------------------
# truncation policy


def auto_depth(stream: CoefficientStream, nmax: int) -> int:
    """Smallest depth with ``q_K > nmax**2``; a terminating stream's full length."""
    if stream.is_terminating:
        return stream.length
    target = nmax * nmax
    q2, q1, K = 1, 0, -1
    while q1 <= target:
        K += 1
        q2, q1 = q1, stream[K] * q1 + q2
    return max(K, 1)


def _truncated(stream: CoefficientStream, depth: int) -> Fraction:
    if stream.is_terminating:
        depth = min(depth, stream.length)
    c = convergents(stream, depth)[-1]
    return Fraction(c.p, c.q)


def _alpha_at(streams, depths):
    return tuple(_truncated(s, k) for s, k in zip(streams, depths))


def stability_check(streams: Sequence[CoefficientStream], nmax: int, depth=None, metrics=(L2,)) -> bool:
    """True iff every NN record and g_N, N <= nmax, agree at depths K and K+2.

    ``depth`` is one K for all coordinates or a per-coordinate sequence.
    """
    if nmax < 2:
        return True
    if depth is None:
        depth = [auto_depth(s, nmax) for s in streams]
    elif isinstance(depth, int):
        depth = [depth] * len(streams)
    a = _alpha_at(streams, depth)
    b = _alpha_at(streams, [k + 2 for k in depth])
    if a == b:
        return True
    for m in metrics:
        ta = OffsetTable(a, nmax - 1, m)
        tb = OffsetTable(b, nmax - 1, m)
        ga, ha = ta.sweep(nmax)
        gb, hb = tb.sweep(nmax)
        if not (np.array_equal(ga, gb) and np.array_equal(ha, hb)):
            return False
        for n in range(2, nmax + 1):
            ja, jb = ta.neighbours(n), tb.neighbours(n)
            if not np.array_equal(ja, jb):
                return False
    return True


@dataclass(frozen=True)
class Realization:
    alpha: tuple[Fraction, ...]
    depths: tuple[int, ...]
    escalations: int = 0
    denominators: tuple[int, ...] = field(default=())


def realize(streams: Sequence[CoefficientStream], nmax: int, depth=None, metrics=(L2,), max_escalations: int = 10) -> Realization:
    """Truncate streams for exact work up to ``nmax`` points.

    Depth defaults to the smallest K with ``q_K > nmax**2`` per coordinate;
    the result must survive :func:`stability_check`, otherwise the depth is
    raised by 2 and retried.
    """
    if depth is None:
        depths = [auto_depth(s, nmax) for s in streams]
    elif isinstance(depth, int):
        depths = [depth] * len(streams)
    else:
        depths = list(depth)
    for attempt in range(max_escalations + 1):
        if stability_check(streams, nmax, depths, metrics):
            alpha = _alpha_at(streams, depths)
            depths = [min(k, s.length) if s.is_terminating else k for s, k in zip(streams, depths)]
            return Realization(alpha, tuple(depths), attempt, tuple(a.denominator for a in alpha))
        depths = [k + 2 for k in depths]
    raise TruncationError(
        f"results for N <= {nmax} still change between depths {depths} and +2; "
        f"try --depth {max(depths) + 2} or larger"
    )
