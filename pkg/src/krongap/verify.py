"""Executable checks of the gap statements, with counterexample reporting.

Every check returns a :class:`CheckReport`. A failing report always carries
the first counterexample found with enough inputs to re-run it by hand.
"""
from __future__ import annotations

import bisect
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cf import (
    CoefficientStream,
    complement,
    convergents,
    denominators,
    format_rational,
    format_stream,
    rational_to_cf,
)
from .construction import ConstructedTuple
from .nn import OffsetTable, auto_depth, realize
from .torus import L1, L2, LINF, Metric

__all__ = [
    "CheckReport",
    "Window",
    "WindowReport",
    "SweepRow",
    "EUCLIDEAN_BOUND",
    "check_three_gap",
    "check_lemma_part1",
    "check_lemma_part2",
    "check_theorem1",
    "check_asmallest",
    "check_upper_bounds",
    "predicted_windows",
    "denominator_lists",
    "sweep",
    "check_windows",
]

DEFAULT_METRICS = (L1, L2, LINF)

# kissing numbers known exactly; bound is sigma_d + 1 for d >= 3
_KISSING = {3: 12, 4: 24, 8: 240, 24: 196560}
EUCLIDEAN_BOUND = {1: 3, 2: 5} | {d: s + 1 for d, s in _KISSING.items()}


@dataclass
class CheckReport:
    name: str
    params: dict
    passed: bool = True
    vacuous: bool = False
    counterexample: dict | None = None
    instances: int = 0
    runtime: float = 0.0
    notes: list[str] = field(default_factory=list)
    log: list[tuple] = field(default_factory=list, repr=False)

    def fail(self, **example):
        if self.passed:
            self.passed = False
            self.counterexample = example

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("log")
        out["verdict"] = "pass" if self.passed else "fail"
        return out

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = " (vacuous)" if self.vacuous else ""
        return f"[{tag}] {self.name}{extra}: {self.instances} instances, {self.runtime:.2f}s"


class _timed:
    def __init__(self, report: CheckReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime = time.perf_counter() - self.t0
        if self.report.instances == 0 and self.report.passed:
            self.report.vacuous = True


def _alpha1d(x, n_max):
    if isinstance(x, CoefficientStream):
        k = auto_depth(x, n_max)
        c = convergents(x, k)[-1]
        return Fraction(c.p, c.q), format_stream(x)
    x = Fraction(x)
    return x, format_rational(x)


# ---------------------------------------------------------------------------
# one dimension


def check_three_gap(alpha, n_max: int, index_base: int = 1) -> CheckReport:
    """At most three distinct arc lengths for every ``N <= n_max``; they sum to 1."""
    a, label = _alpha1d(alpha, n_max)
    rep = CheckReport("three-gap", {"alpha": label, "n_max": n_max, "index_base": index_base})
    with _timed(rep):
        Q, p = a.denominator, a.numerator
        pts: list[int] = []
        gaps: Counter[int] = Counter()
        start = 0 if index_base == 0 else 1
        for n in range(start, n_max + 1):
            r = n * p % Q
            i = bisect.bisect_left(pts, r)
            if i < len(pts) and pts[i] == r:
                pass  # coincident point (rational alpha), arcs unchanged
            elif not pts:
                pts.append(r)
                gaps[Q] += 1
            else:
                lo = pts[i - 1] if i > 0 else pts[-1] - Q
                hi = pts[i] if i < len(pts) else pts[0] + Q
                gaps[hi - lo] -= 1
                if not gaps[hi - lo]:
                    del gaps[hi - lo]
                gaps[r - lo] += 1
                gaps[hi - r] += 1
                pts.insert(i, r)
            if n < 1:
                continue
            N = n
            rep.instances += 1
            total = sum(g * c for g, c in gaps.items())
            if len(gaps) > 3 or total != Q:
                rep.fail(
                    N=N,
                    distinct=len(gaps),
                    gaps=[format_rational(Fraction(g, Q)) for g in sorted(gaps)],
                    total=format_rational(Fraction(total, Q)),
                )
                break
    return rep


def check_asmallest(stream: CoefficientStream, i_max: int, n_cap: int = 10**6, depth: int | None = None) -> CheckReport:
    """Ordering of the points of ``{n alpha : q_i <= n <= q_{i+1}}`` nearest 0.

    For each level ``i`` checks exactly that
    ``||q_{i+1}a|| < ||q_i a|| < ||(q_{i+1}-q_i)a|| < ||2q_i a|| < ...
    < ||(q_{i+1}-(a_{i+1}-1)q_i)a|| < ||a_{i+1}q_i a||`` and that these
    ``2a_{i+1}`` indices are exactly the smallest norms in the range (the
    latter only when the range has at most ``n_cap`` elements).
    Level ``i`` is degenerate (and skipped) when ``q_{i-1} = q_i``.
    """
    rep = CheckReport("asmallest", {"stream": format_stream(stream), "i_max": i_max})
    with _timed(rep):
        if depth is None:
            depth = i_max + 4
        if stream.is_terminating:
            depth = min(depth, stream.length)
        conv = convergents(stream, depth)
        p, Q = conv[-1].p, conv[-1].q
        q = [c.q for c in conv]

        def norm(n):
            r = n * p % Q
            return min(r, Q - r)

        for i in range(1, i_max + 1):
            # need delta_{i+1} > 0, i.e. i+1 below the truncation depth
            if i + 1 >= depth:
                rep.notes.append(f"level {i}: beyond truncation, not tested")
                continue
            qi, qn, a = q[i], q[i + 1], stream[i + 1]
            if q[i - 1] == qi:
                rep.notes.append(f"level {i}: degenerate (q_{i - 1} = q_{i})")
                continue
            chain = [qn]
            for j in range(1, a + 1):
                chain.append(j * qi)
                if j < a:
                    chain.append(qn - j * qi)
            vals = [norm(n) for n in chain]
            rep.instances += 1
            if any(x >= y for x, y in zip(vals, vals[1:])):
                rep.fail(level=i, chain=chain, norms=[format_rational(Fraction(v, Q)) for v in vals])
                break
            size = qn - qi + 1
            if size > n_cap:
                rep.notes.append(f"level {i}: range of {size} exceeds n_cap; chain only")
                continue
            rng = np.arange(qi, qn + 1, dtype=object if Q * qn >= 2**62 else np.int64)
            r = rng * p % Q
            nv = np.minimum(r, Q - r)
            others = nv[~np.isin(rng, chain)]
            if others.size and not others.min() > vals[-1]:
                k = int(rng[~np.isin(rng, chain)][np.argmin(others)])
                rep.fail(level=i, chain=chain, interloper=k, interloper_norm=format_rational(Fraction(norm(k), Q)))
                break
    return rep


# ---------------------------------------------------------------------------
# counting metric


def check_lemma_part1(alpha: Sequence, n_max: int, metric: Metric = L2) -> CheckReport:
    """``h_{1+k}(n+k) = h_1(n)`` whenever ``h_1(n+k) = h_1(n)``, for ``n+k <= n_max``."""
    alpha = tuple(Fraction(a) for a in alpha)
    rep = CheckReport(
        "lemma-part1",
        {"alpha": [format_rational(a) for a in alpha], "n_max": n_max, "metric": str(metric)},
    )
    with _timed(rep):
        if n_max < 3:
            return rep
        table = OffsetTable(alpha, n_max - 1, metric)
        _, h1 = table.sweep(n_max)
        for m in range(3, n_max + 1):
            j = table.neighbours(m)
            # n = m - k >= 2, k >= 1
            for k in range(1, m - 1):
                n = m - k
                if h1[m] != h1[n]:
                    continue
                rep.instances += 1
                h = abs(int(j[k]) - (1 + k))
                if h != h1[n]:
                    rep.fail(n=n, k=k, h1_n=int(h1[n]), h_1k_nk=h)
                    return rep
    return rep


def _tuple_alpha(obj, q_cap: int, metrics):
    if isinstance(obj, ConstructedTuple):
        streams, qs = obj.streams, obj.common_denominators
        label = [format_stream(s) for s in streams]
    else:
        streams, qs = obj
        label = [format_stream(s) if isinstance(s, CoefficientStream) else format_rational(s) for s in streams]
    if all(isinstance(s, CoefficientStream) for s in streams):
        if all(s.is_terminating for s in streams):
            alpha = tuple(
                Fraction(convergents(s, s.length)[-1].p, convergents(s, s.length)[-1].q) for s in streams
            )
        else:
            alpha = realize(streams, q_cap + 1, metrics=metrics).alpha
    else:
        alpha = tuple(Fraction(s) for s in streams)
    return alpha, list(qs), label


def check_lemma_part2(tup, metrics: Iterable[Metric] = DEFAULT_METRICS, q_cap: int = 10**4) -> CheckReport:
    """``h_1(q+1) = q`` for each common denominator ``q <= q_cap``, every metric.

    ``tup`` is a :class:`ConstructedTuple` or a pair ``(streams_or_alpha, qs)``.
    Uses a direct scan of all ``q`` other points.
    """
    metrics = tuple(metrics)
    alpha, qs, label = _tuple_alpha(tup, q_cap, metrics)
    rep = CheckReport("lemma-part2", {"alpha": label, "q_cap": q_cap, "metrics": [str(m) for m in metrics]})
    with _timed(rep):
        qs = [q for q in qs if q <= q_cap]
        L = 1
        for a in alpha:
            L = L * a.denominator // math.gcd(L, a.denominator)
        nums = [a.numerator * (L // a.denominator) for a in alpha]
        for q in qs:
            if q < 1:
                continue
            n = np.arange(2, q + 2, dtype=object)
            # displacement of z_n from z_1 is (n - 1) * alpha
            norms = []
            for num in nums:
                r = (n - 1) * num % L
                norms.append(np.minimum(r, L - r))
            for m in metrics:
                if m.is_inf:
                    keys = np.maximum.reduce(norms)
                else:
                    keys = sum(x ** m.q for x in norms)
                best = keys.min()
                j = int(n[np.flatnonzero(keys == best)[-1]])
                rep.instances += 1
                rep.log.append((len(alpha), m, q + 1, None))
                if j - 1 != q:
                    rep.fail(q=q, metric=str(m), h1=j - 1)
                    return rep
    return rep


# ---------------------------------------------------------------------------
# windows and sweeps


@dataclass
class Window:
    i: int
    q: int
    q_next: int
    g: int
    lo: int
    hi: int
    observed: dict = field(default_factory=dict)
    passed: bool | None = None

    @property
    def empty(self) -> bool:
        return self.lo > self.hi


@dataclass
class WindowReport(CheckReport):
    windows: list[Window] = field(default_factory=list)
    convention: str = "exact"


def denominator_lists(alpha: Sequence[Fraction]) -> list[list[int]]:
    """Convergent denominators ``q_0..q_K`` of each rational coordinate."""
    out = []
    for a in alpha:
        s = rational_to_cf(a)
        out.append(denominators(s, s.length))
    return out


def predicted_windows(dens: Sequence[Sequence[int]], common: Iterable[int], n_max: int, pairs_with_g2: bool = False, convention: str = "exact") -> list[Window]:
    """One-distance windows ``{2q, ..., q+}`` for each common denominator ``q``.

    ``dens`` holds the denominator list of every coordinate; ``q+`` is the
    smallest denominator after ``q`` over all coordinates. With
    ``pairs_with_g2`` (the simple pair) the two-distance windows
    ``{q+1, ..., 2q-1}`` are added. ``convention="stated"`` moves the shared
    boundary up by one: ``{q+1..2q}`` and ``{2q+1..q+}``.
    """
    if convention not in ("exact", "stated"):
        raise ValueError(f"unknown window convention {convention!r}")
    shift = 1 if convention == "stated" else 0
    out = []
    for i, q in enumerate(sorted(set(common)), start=1):
        if q + 1 > n_max:
            break
        nxt = []
        for ds in dens:
            later = [x for x in ds if x > q]
            if not later or q not in ds:
                break
            nxt.append(later[0])
        else:
            qn = min(nxt)
            if pairs_with_g2:
                out.append(Window(i, q, qn, 2, q + 1, min(2 * q - 1 + shift, n_max)))
            out.append(Window(i, q, qn, 1, 2 * q + shift, min(qn, n_max)))
    return [w for w in out if w.lo <= n_max]


@dataclass
class SweepRow:
    N: int
    g: dict
    h1: int
    window: str

    def csv_fields(self, metrics) -> list:
        return [self.N] + [self.g[m.name] for m in metrics] + [self.h1, self.window]


def sweep(streams, n_max: int, metrics: Iterable[Metric] = DEFAULT_METRICS, depth=None, common=None, pairs_with_g2: bool = False):
    """Table of ``(N, g_N per metric, h_1(N), window)`` for ``N = 2..n_max``.

    ``streams`` may be coefficient streams (truncated by :func:`realize`,
    which enforces the stability check) or exact rationals. Returns
    ``(rows, alpha, windows)``.
    """
    metrics = tuple(metrics)
    if isinstance(streams, ConstructedTuple):
        common = streams.common_denominators if common is None else common
        pairs_with_g2 = streams.kind == "simple"
        streams = streams.streams
    if all(isinstance(s, CoefficientStream) for s in streams):
        alpha = realize(streams, n_max, depth=depth, metrics=metrics).alpha
    else:
        alpha = tuple(Fraction(s) for s in streams)
    dens = denominator_lists(alpha)
    if common is None:
        common = sorted(set.intersection(*(set(ds[1:]) for ds in dens)))
    windows = predicted_windows(dens, common, n_max, pairs_with_g2)
    label = {}
    for w in windows:
        for N in range(w.lo, w.hi + 1):
            label[N] = f"g{w.g}"
    gs = {}
    h1s = None
    for m in metrics:
        g, h1 = OffsetTable(alpha, n_max - 1, m).sweep(n_max)
        gs[m.name] = g
        if h1s is None:
            h1s = h1
    rows = [
        SweepRow(N, {k: int(v[N]) for k, v in gs.items()}, int(h1s[N]), label.get(N, ""))
        for N in range(2, n_max + 1)
    ]
    return rows, alpha, windows


def check_windows(rows, windows, name="windows", params=None, metrics=DEFAULT_METRICS) -> WindowReport:
    """Every N in every predicted window shows the predicted g, all metrics."""
    rep = WindowReport(name, params or {})
    with _timed(rep):
        byN = {r.N: r for r in rows}
        for w in windows:
            if w.empty:
                w.passed = None
                rep.notes.append(f"window for q={w.q} (g={w.g}) empty, not tested")
                continue
            w.passed = True
            for m in metrics:
                seen = sorted({byN[N].g[m.name] for N in range(w.lo, w.hi + 1)})
                w.observed[m.name] = seen
                if seen != [w.g]:
                    w.passed = False
                    bad = next(N for N in range(w.lo, w.hi + 1) if byN[N].g[m.name] != w.g)
                    rep.fail(N=bad, metric=m.name, predicted=w.g, observed=byN[bad].g[m.name], window=[w.lo, w.hi])
            rep.instances += w.hi - w.lo + 1
        rep.windows = windows
    return rep


def check_theorem1(alpha1: CoefficientStream, n_max: int, metrics: Iterable[Metric] = DEFAULT_METRICS, convention: str = "exact", depth=None) -> WindowReport:
    """Gap counts of ``(alpha_1, 1 - alpha_1)`` for ``N <= n_max``.

    Always checks ``1 <= g_N <= 3``. When every coefficient of ``alpha_1``
    after ``a_1 = 1`` is at least 2, also checks ``g_N <= 2`` and the
    windows of :func:`predicted_windows` (two-distance then one-distance
    between consecutive denominators of ``1 - alpha_1``).
    """
    metrics = tuple(metrics)
    if alpha1.a0 != 0 or alpha1[1] != 1:
        raise ValueError("theorem-1 check needs alpha_1 = [0; 1, ...]")
    alpha2 = complement(alpha1)
    real = realize([alpha1, alpha2], n_max, depth=depth, metrics=metrics)
    alpha = real.alpha
    K = real.depths[0]
    big = all(alpha1[i] >= 2 for i in range(2, K + 1))
    gs = {m.name: OffsetTable(alpha, n_max - 1, m).sweep(n_max) for m in metrics}
    params = {
        "alpha1": format_stream(alpha1),
        "n_max": n_max,
        "metrics": [str(m) for m in metrics],
        "depth": list(real.depths),
        "all_coefficients_ge_2": big,
        "convention": convention,
    }
    rep = WindowReport("theorem1", params, convention=convention)
    with _timed(rep):
        cap = 2 if big else 3
        for m in metrics:
            g = gs[m.name][0]
            for N in range(2, n_max + 1):
                rep.instances += 1
                rep.log.append((2, m, N, int(g[N])))
                if not 1 <= g[N] <= cap:
                    rep.fail(N=N, metric=m.name, g=int(g[N]), bound=cap)
        if big:
            q2 = denominators(alpha2, real.depths[1])
            windows = predicted_windows(denominator_lists(alpha), q2[1:], n_max, True, convention)
            rows = [
                SweepRow(N, {m.name: int(gs[m.name][0][N]) for m in metrics}, int(gs[metrics[0].name][1][N]), "")
                for N in range(2, n_max + 1)
            ]
            sub = check_windows(rows, windows, metrics=metrics)
            rep.windows = sub.windows
            rep.notes += sub.notes
            if not sub.passed:
                rep.fail(**sub.counterexample)
        else:
            rep.notes.append("coefficients equal to 1 beyond a_1: only the <= 3 bound applies")
    return rep


def check_upper_bounds(log: Iterable[tuple]) -> CheckReport:
    """Euclidean ``g_N`` against 3 (d=1), 5 (d=2), sigma_d + 1 (d >= 3).

    ``log`` holds ``(d, metric, N, g)`` tuples; non-Euclidean entries and
    entries without ``g`` are ignored.
    """
    rep = CheckReport("upper-bounds", {})
    with _timed(rep):
        for d, m, N, g in log:
            if g is None or m != L2:
                continue
            bound = EUCLIDEAN_BOUND.get(d)
            if bound is None:
                rep.notes.append(f"no exact kissing number for d={d}")
                continue
            rep.instances += 1
            if g > bound:
                rep.fail(d=d, N=N, g=g, bound=bound)
    return rep
