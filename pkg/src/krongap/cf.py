"""Continued-fraction streams and exact convergents.

All values are exact: coefficients and convergents are Python ints and
rationals are :class:`fractions.Fraction`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

__all__ = [
    "CoefficientStream",
    "Convergent",
    "StreamError",
    "convergents",
    "rational_to_cf",
    "value_of",
    "complement",
    "parse_stream",
    "format_stream",
    "parse_rational",
    "format_rational",
]


class StreamError(ValueError):
    """Invalid coefficient stream or request beyond its length."""


class Convergent(NamedTuple):
    n: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class CoefficientStream:
    """Expansion ``[a0; a1, a2, ...]``.

    ``tail`` is one of ``"terminate"``, ``"periodic"`` (repeat ``period``
    forever after the prefix) or ``"rule"`` (``rule(i)`` gives ``a_i`` for
    every ``i`` past the prefix).
    """

    prefix: tuple[int, ...] = ()
    tail: str = "terminate"
    period: tuple[int, ...] = ()
    rule: Callable[[int], int] | None = field(default=None, compare=False)
    a0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(a) for a in self.prefix))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if any(a < 1 for a in self.prefix + self.period):
            raise StreamError("coefficients a_i (i >= 1) must be positive")
        if self.tail == "terminate":
            if self.period or self.rule is not None:
                raise StreamError("terminating stream takes no period or rule")
        elif self.tail == "periodic":
            if not self.period:
                raise StreamError("periodic tail needs a nonempty period")
        elif self.tail == "rule":
            if self.rule is None:
                raise StreamError("rule tail needs a callable")
        else:
            raise StreamError(f"unknown tail kind {self.tail!r}")

    @classmethod
    def finite(cls, coefficients, a0: int = 0) -> CoefficientStream:
        return cls(prefix=tuple(coefficients), a0=a0)

    @classmethod
    def periodic(cls, prefix, period, a0: int = 0) -> CoefficientStream:
        return cls(prefix=tuple(prefix), tail="periodic", period=tuple(period), a0=a0)

    @classmethod
    def from_rule(cls, rule, prefix=(), a0: int = 0) -> CoefficientStream:
        return cls(prefix=tuple(prefix), tail="rule", rule=rule, a0=a0)

    @property
    def is_terminating(self) -> bool:
        return self.tail == "terminate"

    @property
    def length(self) -> int | None:
        """Number of coefficients after ``a0``; ``None`` when infinite."""
        return len(self.prefix) if self.is_terminating else None

    def __getitem__(self, i: int) -> int:
        if i == 0:
            return self.a0
        if i < 0:
            raise IndexError(i)
        m = len(self.prefix)
        if i <= m:
            return self.prefix[i - 1]
        if self.tail == "terminate":
            raise StreamError(f"index {i} beyond terminating stream of length {m}")
        if self.tail == "periodic":
            return self.period[(i - m - 1) % len(self.period)]
        a = int(self.rule(i))
        if a < 1:
            raise StreamError(f"rule produced a_{i} = {a} < 1")
        return a

    def coefficients(self, depth: int) -> list[int]:
        """``[a1, ..., a_depth]``."""
        self._check_depth(depth)
        return [self[i] for i in range(1, depth + 1)]

    def truncate(self, depth: int) -> CoefficientStream:
        return CoefficientStream.finite(self.coefficients(depth), a0=self.a0)

    def _check_depth(self, depth: int) -> None:
        if depth < 0:
            raise StreamError("depth must be non-negative")
        if self.is_terminating and depth > len(self.prefix):
            raise StreamError(
                f"depth {depth} exceeds terminating stream; maximal depth is {len(self.prefix)}"
            )

    def __str__(self) -> str:
        return format_stream(self)


def convergents(stream: CoefficientStream, depth: int) -> list[Convergent]:
    """Convergents ``p_n/q_n`` for ``n = 0..depth``.

    Uses ``q_n = a_n q_{n-1} + q_{n-2}`` seeded by ``q_{-2} = 1, q_{-1} = 0``
    (likewise ``p`` with ``0, 1``).
    """
    stream._check_depth(depth)
    p2, p1, q2, q1 = 0, 1, 1, 0
    out = []
    for n in range(depth + 1):
        a = stream[n]
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append(Convergent(n, p1, q1))
    return out


def denominators(stream: CoefficientStream, depth: int) -> list[int]:
    """``[q_0, ..., q_depth]``."""
    return [c.q for c in convergents(stream, depth)]


def value_of(stream: CoefficientStream, depth: int) -> Fraction:
    c = convergents(stream, depth)[-1]
    return Fraction(c.p, c.q)


def rational_to_cf(x) -> CoefficientStream:
    """Canonical terminating expansion of a rational in (0, 1).

    Canonical means the last coefficient is never 1 (except for the
    degenerate expansion ``[0; 1]`` of 1, which is out of domain anyway).
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise StreamError(f"rational_to_cf expects 0 < x < 1, got {x}")
    num, den = x.numerator, x.denominator
    coeffs = []
    # x = num/den < 1, so a0 = 0; run Euclid on den/num
    while num:
        a, r = divmod(den, num)
        coeffs.append(a)
        den, num = num, r
    return CoefficientStream.finite(coeffs)


def complement(stream: CoefficientStream) -> CoefficientStream:
    """Expansion of ``1 - alpha`` for ``alpha = [0; 1, a2, a3, ...]``.

    ``1 - [0; 1, a2, a3, ...] = [0; a2 + 1, a3, ...]``.
    """
    if stream.a0 != 0 or stream.length == 0 or stream[1] != 1:
        raise StreamError("complement needs a0 = 0 and a1 = 1 (alpha in (1/2, 1))")
    if stream.length == 1:
        raise StreamError("complement of [0; 1] = 1 is not in (0, 1)")
    head = stream[2] + 1
    if stream.tail == "terminate":
        return CoefficientStream.finite((head,) + stream.prefix[2:])
    if stream.tail == "periodic":
        m, per = len(stream.prefix), stream.period
        if m >= 2:
            return CoefficientStream.periodic((head,) + stream.prefix[2:], per)
        # a3 onwards is the period read from the slot after a2
        s = (2 - m) % len(per)
        return CoefficientStream.periodic((head,), per[s:] + per[:s])
    src = stream
    return CoefficientStream.from_rule(lambda i: src[i + 1], prefix=(head,))


_STREAM_RE = re.compile(r"^\s*(-?\d+)\s*;\s*(.*?)\s*$")


def parse_stream(text: str) -> CoefficientStream:
    """Parse ``"0;1,2,2"`` or ``"0;1,(2,3)"`` (parenthesized periodic tail)."""
    m = _STREAM_RE.match(text)
    if not m:
        raise StreamError(f"cannot parse stream {text!r}: expected 'a0;a1,a2,...'")
    a0 = int(m.group(1))
    body = m.group(2)
    period = ()
    if "(" in body:
        head, _, rest = body.partition("(")
        if not rest.endswith(")") or ")" in rest[:-1] or "(" in rest:
            raise StreamError(f"cannot parse periodic tail in {text!r}")
        period = tuple(_ints(rest[:-1], text))
        if not period:
            raise StreamError(f"empty period in {text!r}")
        body = head.rstrip().rstrip(",")
    prefix = tuple(_ints(body, text))
    if period:
        return CoefficientStream.periodic(prefix, period, a0=a0)
    return CoefficientStream.finite(prefix, a0=a0)


def _ints(chunk: str, text: str) -> list[int]:
    chunk = chunk.strip()
    if not chunk:
        return []
    try:
        return [int(t) for t in chunk.split(",")]
    except ValueError:
        raise StreamError(f"non-integer coefficient in {text!r}") from None


def format_stream(stream: CoefficientStream, shown: int = 8) -> str:
    head = f"{stream.a0};" + ",".join(map(str, stream.prefix))
    if stream.tail == "terminate":
        return head
    sep = "," if stream.prefix else ""
    if stream.tail == "periodic":
        return head + sep + "(" + ",".join(map(str, stream.period)) + ")"
    m = len(stream.prefix)
    more = ",".join(str(stream[i]) for i in range(m + 1, m + 1 + shown))
    return head + sep + more + ",..."


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise StreamError(f"cannot parse rational {text!r}") from None


def format_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
