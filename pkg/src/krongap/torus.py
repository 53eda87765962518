"""Exact L_q distances on the torus R^d / Z^d.

Distances are never rooted. For finite ``q`` the comparison key is
``sum_i ||dx_i||^q``; for ``q = inf`` it is ``max_i ||dx_i||``. Both are
strictly monotone in the true distance, so comparing keys compares distances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = [
    "Metric",
    "L1",
    "L2",
    "LINF",
    "parse_metric",
    "parse_metrics",
    "coord_norm",
    "torus_point",
    "distance_key",
    "scaled_norm",
    "key_from_norms",
]


@dataclass(frozen=True, order=True)
class Metric:
    """L_q metric; ``q = 0`` encodes ``q = inf`` internally."""

    q: int

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"metric exponent must be >= 1 or inf, got {self.q}")

    @property
    def is_inf(self) -> bool:
        return self.q == 0

    @property
    def name(self) -> str:
        return "Linf" if self.is_inf else f"L{self.q}"

    def __str__(self) -> str:
        return "inf" if self.is_inf else str(self.q)


L1, L2, LINF = Metric(1), Metric(2), Metric(0)


def parse_metric(text) -> Metric:
    if isinstance(text, Metric):
        return text
    if isinstance(text, float) and math.isinf(text):
        return LINF
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "oo", "max", "∞"):
        return LINF
    try:
        q = int(s)
    except ValueError:
        raise ValueError(f"unsupported metric {text!r}: use a positive integer or 'inf'") from None
    if q < 1:
        raise ValueError(f"metric exponent must be >= 1, got {q}")
    return Metric(q)


def parse_metrics(text) -> tuple[Metric, ...]:
    if isinstance(text, str):
        text = [t for t in text.split(",") if t.strip()]
    return tuple(parse_metric(t) for t in text)


def coord_norm(x) -> Fraction:
    """Distance from ``x`` to the nearest integer."""
    x = Fraction(x)
    f = x - math.floor(x)
    return min(f, 1 - f)


def torus_point(coords: Sequence) -> tuple[Fraction, ...]:
    """Reduce every coordinate into [0, 1)."""
    return tuple(Fraction(c) - math.floor(Fraction(c)) for c in coords)


def key_from_norms(norms, metric: Metric):
    if metric.is_inf:
        return max(norms)
    q = metric.q
    return sum(n**q for n in norms)


def distance_key(x: Sequence, y: Sequence, metric: Metric = L2) -> Fraction:
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    norms = [coord_norm(Fraction(a) - Fraction(b)) for a, b in zip(x, y)]
    return Fraction(key_from_norms(norms, metric))


def scaled_norm(residue: int, modulus: int) -> int:
    """Torus norm of ``residue/modulus`` scaled by ``modulus``."""
    r = residue % modulus
    return min(r, modulus - r)
