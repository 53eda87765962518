"""Hot integer kernels: numba when available, pure numpy otherwise.

Set ``KRONGAP_NO_NUMBA=1`` to force the numpy path (used by the benchmark and
the fallback tests). Both paths work on int64 data that the caller has scaled
to a common denominator ``L``; every key is an exact integer, so the two
paths must agree bit for bit.

Metric exponents: ``qexp >= 1`` is L_q, ``qexp == 0`` is L_inf.
"""
from __future__ import annotations

import os

import numpy as np

INT64_MAX = np.iinfo(np.int64).max

USE_NUMBA = os.environ.get("KRONGAP_NO_NUMBA", "").strip().lower() in ("", "0", "false", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is optional
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def fits_int64(L: int, d: int, qexp: int) -> bool:
    """True when every L_q key of a scaled difference fits in int64."""
    half = L // 2
    worst = half if qexp == 0 else d * half**qexp
    return worst < INT64_MAX and L < INT64_MAX


# ---------------------------------------------------------------------------
# numpy implementations (also accept object arrays of Python ints)


def _np_row_keys(coords, L, i, qexp):
    delta = np.abs(coords - coords[i])
    norm = np.minimum(delta, L - delta)
    if qexp == 0:
        return norm.max(axis=1)
    return (norm**qexp).sum(axis=1)


def np_brute_nn(coords, L, qexp):
    n = coords.shape[0]
    keys = np.empty(n, dtype=coords.dtype)
    pos = np.empty(n, dtype=np.int64)
    for i in range(n):
        k = _np_row_keys(coords, L, i, qexp)
        k[i] = k.max() + 1
        best = k.min()
        keys[i] = best
        pos[i] = np.flatnonzero(k == best)[-1]
    return keys, pos


def np_brute_sweep(coords, L, qexp):
    """g for every prefix of the point list, by incremental exact scans."""
    n = coords.shape[0]
    g = np.zeros(n + 1, dtype=np.int64)
    if coords.dtype == object:
        sentinel = coords.shape[1] * int(L) ** max(qexp, 1) + 1
    else:
        sentinel = INT64_MAX
    best = np.full(n, sentinel, dtype=coords.dtype)
    for m in range(1, n):
        k = _np_row_keys(coords[: m + 1], L, m, qexp)[:m]
        # the new point has the largest index, so ties move to it
        np.minimum(best[:m], k, out=best[:m])
        best[m] = k.min()
        g[m + 1] = np.unique(best[: m + 1]).size
    return g


def np_offset_tables(rank):
    """Prefix minima of ``rank[1:]`` and first/last positions attaining them."""
    m = rank.shape[0]
    pm = rank.copy()
    pm[0] = INT64_MAX
    pm[1:] = np.minimum.accumulate(rank[1:])
    idx = np.arange(m, dtype=np.int64)
    strict = np.zeros(m, dtype=bool)
    strict[1] = True
    strict[2:] = pm[2:] < pm[1:-1]
    attains = np.zeros(m, dtype=bool)
    attains[1:] = rank[1:] == pm[1:]
    first = np.maximum.accumulate(np.where(strict, idx, 0))
    last = np.maximum.accumulate(np.where(attains, idx, 0))
    return pm, first, last


def np_offset_sweep(pm, last, nmax):
    """g_N and h_1(N) for N = 2..nmax from offset prefix tables."""
    g = np.zeros(nmax + 1, dtype=np.int64)
    h1 = np.zeros(nmax + 1, dtype=np.int64)
    if nmax < 2:
        return g, h1
    dec = np.zeros(nmax, dtype=np.int64)
    dec[2:] = pm[2:nmax] < pm[1 : nmax - 1]
    c = np.cumsum(dec)
    N = np.arange(2, nmax + 1)
    lo = N // 2  # ceil((N - 1) / 2)
    g[2:] = 1 + c[N - 1] - c[lo]
    h1[2:] = last[N - 1]
    return g, h1


def np_offset_nn(pm, first, last, n):
    """Nearest-neighbour index (1-based) of every point of z_1..z_n."""
    i = np.arange(1, n + 1, dtype=np.int64)
    fwd = n - i
    reach = np.maximum(i - 1, fwd)
    r = pm[reach]
    fwd_ok = (fwd >= 1) & (pm[np.maximum(fwd, 1)] == r)
    return np.where(fwd_ok, i + last[np.maximum(fwd, 1)], i - first[reach])


# ---------------------------------------------------------------------------
# numba implementations

if USE_NUMBA:

    @njit(cache=True, inline="always")
    def _nb_wrap(t, L):
        if t < 0:
            t = -t
        u = L - t
        return u if u < t else t

    @njit(cache=True)
    def _nb_row_keys(ct, L, i, upto, qexp, out):
        """Keys from point ``i`` to points ``0..upto-1``; ``ct`` is coords transposed."""
        out[:upto] = 0
        for c in range(ct.shape[0]):
            col = ct[c]
            x = col[i]
            if qexp == 0:
                for j in range(upto):
                    out[j] = max(out[j], _nb_wrap(col[j] - x, L))
            elif qexp == 1:
                for j in range(upto):
                    out[j] += _nb_wrap(col[j] - x, L)
            elif qexp == 2:
                for j in range(upto):
                    t = _nb_wrap(col[j] - x, L)
                    out[j] += t * t
            else:
                for j in range(upto):
                    t = _nb_wrap(col[j] - x, L)
                    p = t
                    for _ in range(qexp - 1):
                        p *= t
                    out[j] += p

    @njit(cache=True)
    def nb_brute_nn(coords, L, qexp):
        n = coords.shape[0]
        ct = np.ascontiguousarray(coords.T)
        keys = np.empty(n, dtype=np.int64)
        pos = np.empty(n, dtype=np.int64)
        row = np.empty(n, dtype=np.int64)
        for i in range(n):
            _nb_row_keys(ct, L, i, n, qexp, row)
            best = INT64_MAX
            bj = -1
            for j in range(n):
                if j != i and row[j] <= best:
                    best = row[j]
                    bj = j
            keys[i] = best
            pos[i] = bj
        return keys, pos

    @njit(cache=True)
    def nb_brute_sweep(coords, L, qexp):
        # distinct minima are tracked with a multiplicity map, no re-sorting
        n = coords.shape[0]
        ct = np.ascontiguousarray(coords.T)
        g = np.zeros(n + 1, dtype=np.int64)
        best = np.full(n, INT64_MAX, dtype=np.int64)
        row = np.empty(n, dtype=np.int64)
        counts = dict()
        counts[INT64_MAX] = 0
        distinct = 0
        for m in range(1, n):
            _nb_row_keys(ct, L, m, m, qexp, row)
            bm = INT64_MAX
            for j in range(m):
                k = row[j]
                if k < bm:
                    bm = k
                old = best[j]
                if k < old:
                    best[j] = k
                    if old != INT64_MAX:
                        c = counts[old] - 1
                        if c == 0:
                            del counts[old]
                            distinct -= 1
                        else:
                            counts[old] = c
                    if k in counts:
                        counts[k] += 1
                    else:
                        counts[k] = 1
                        distinct += 1
            best[m] = bm
            if bm in counts:
                counts[bm] += 1
            else:
                counts[bm] = 1
                distinct += 1
            g[m + 1] = distinct
        return g

    @njit(cache=True)
    def nb_offset_tables(rank):
        m = rank.shape[0]
        pm = np.empty(m, dtype=np.int64)
        first = np.zeros(m, dtype=np.int64)
        last = np.zeros(m, dtype=np.int64)
        pm[0] = INT64_MAX
        cur = INT64_MAX
        f = 0
        la = 0
        for t in range(1, m):
            r = rank[t]
            if r < cur:
                cur = r
                f = t
                la = t
            elif r == cur:
                la = t
            pm[t] = cur
            first[t] = f
            last[t] = la
        return pm, first, last

    @njit(cache=True)
    def nb_offset_sweep(pm, last, nmax):
        g = np.zeros(nmax + 1, dtype=np.int64)
        h1 = np.zeros(nmax + 1, dtype=np.int64)
        # c[t] = number of strict drops of pm within 2..t
        c = np.zeros(max(nmax, 1), dtype=np.int64)
        for t in range(2, nmax):
            c[t] = c[t - 1] + (1 if pm[t] < pm[t - 1] else 0)
        for n in range(2, nmax + 1):
            g[n] = 1 + c[n - 1] - c[n // 2]
            h1[n] = last[n - 1]
        return g, h1

    @njit(cache=True)
    def nb_offset_nn(pm, first, last, n):
        out = np.empty(n, dtype=np.int64)
        for i in range(1, n + 1):
            fwd = n - i
            reach = i - 1 if i - 1 > fwd else fwd
            r = pm[reach]
            if fwd >= 1 and pm[fwd] == r:
                out[i - 1] = i + last[fwd]
            else:
                out[i - 1] = i - first[reach]
        return out

    brute_nn_int64 = nb_brute_nn
    brute_sweep_int64 = nb_brute_sweep
    offset_tables = nb_offset_tables
    offset_sweep = nb_offset_sweep
    offset_nn = nb_offset_nn
else:
    brute_nn_int64 = np_brute_nn
    brute_sweep_int64 = np_brute_sweep
    offset_tables = np_offset_tables
    offset_sweep = np_offset_sweep
    offset_nn = np_offset_nn
