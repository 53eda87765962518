"""Vectors whose coordinates share convergent denominators.

Given ``alpha_1 = [0; a_1, a_2, ...]`` and indices ``k_1 < k_2 < ...`` the
general construction solves for the coefficients ``a_{k_{l+1}}`` of
``alpha_1`` so that a second number ``alpha_2`` has denominators
``q^2_l = q^1_{k_l}``. The third coordinate of the 3D triple is
``1 - alpha_1``, whose denominators are those of ``alpha_1`` shifted by one.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cf import CoefficientStream, StreamError, complement, denominators, format_stream, value_of

__all__ = [
    "ConstructionError",
    "ConstructionSchedule",
    "LedgerEntry",
    "ConstructedTuple",
    "lemma_cond_parts",
    "lemma_cond_holds",
    "suggest_coefficient",
    "solve_congruence",
    "extension_ok",
    "simple_pair",
    "general_construct",
    "extended_construct",
    "construct_3d",
]


class ConstructionError(ValueError):
    pass


@dataclass(frozen=True)
class ConstructionSchedule:
    """Index subsequence ``k`` plus caller-chosen coefficients of ``alpha_1``.

    ``free`` maps a position of ``alpha_1`` to its coefficient and overrides
    the free stream passed to the constructors. ``b`` (one entry per step)
    switches on the extended right-hand side ``b_l * q^2_{l-1}``.
    """

    k: tuple[int, ...]
    free: Mapping[int, int] = field(default_factory=dict)
    min_coefficient: int = 2
    b: tuple[int, ...] | None = None

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "free", {int(i): int(a) for i, a in dict(self.free).items()})
        if self.b is not None:
            object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if not k:
            raise ConstructionError("schedule needs at least one index")
        if k[0] < 1:
            raise ConstructionError("k_1 must be >= 1")
        for a, c in zip(k, k[1:]):
            if c <= a:
                raise ConstructionError(f"schedule must be strictly increasing, got {k}")
        if self.min_coefficient < 1:
            raise ConstructionError("min_coefficient must be >= 1")
        for i, a in self.free.items():
            if i < 1:
                raise ConstructionError(f"free position {i} must be >= 1")
            if a < self.min_coefficient:
                raise ConstructionError(
                    f"free coefficient a_{i} = {a} is below min_coefficient {self.min_coefficient}"
                )
        solved = set(self.solved_positions)
        clash = sorted(solved & set(self.free))
        if clash:
            raise ConstructionError(f"positions {clash} are solved, not free")
        if self.b is not None:
            if len(self.b) != len(k) - 1:
                raise ConstructionError(f"need one b per step: {len(k) - 1}, got {len(self.b)}")
            if any(x < 1 for x in self.b):
                raise ConstructionError("extension factors b_l must be positive")

    @property
    def solved_positions(self) -> list[int]:
        return [c for a, c in zip(self.k, self.k[1:]) if c - a >= 2]

    @classmethod
    def from_json(cls, text_or_obj) -> ConstructionSchedule:
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else dict(text_or_obj)
        unknown = set(obj) - {"k", "free", "min_coefficient", "b"}
        if unknown:
            raise ConstructionError(f"unknown schedule fields: {sorted(unknown)}")
        if "k" not in obj:
            raise ConstructionError("schedule JSON needs field 'k'")
        return cls(
            k=tuple(obj["k"]),
            free={int(i): a for i, a in obj.get("free", {}).items()},
            min_coefficient=obj.get("min_coefficient", 2),
            b=tuple(obj["b"]) if obj.get("b") is not None else None,
        )

    def to_json(self) -> str:
        obj = {
            "k": list(self.k),
            "free": {str(i): a for i, a in sorted(self.free.items())},
            "min_coefficient": self.min_coefficient,
        }
        if self.b is not None:
            obj["b"] = list(self.b)
        return json.dumps(obj)


@dataclass(frozen=True)
class LedgerEntry:
    """Common denominator bookkeeping for step ``l``.

    ``q`` is ``q^2_l``; ``q1`` is ``q^1_{k_l}`` (equal unless an extension
    factor ``b != 1`` was used); ``index3`` is the matching index in the
    third coordinate.
    """

    l: int
    q: int
    k: int
    q1: int
    index3: int | None = None
    b: int = 1

    @property
    def coincident(self) -> bool:
        return self.q == self.q1


@dataclass(frozen=True)
class ConstructedTuple:
    streams: tuple[CoefficientStream, ...]
    ledger: tuple[LedgerEntry, ...]
    solved: Mapping[int, int] = field(default_factory=dict)
    kind: str = "general"
    schedule: ConstructionSchedule | None = None

    @property
    def d(self) -> int:
        return len(self.streams)

    @property
    def common_denominators(self) -> list[int]:
        return [e.q for e in self.ledger if e.coincident]

    def alpha(self, depths: Sequence[int] | None = None) -> tuple[Fraction, ...]:
        out = []
        for i, s in enumerate(self.streams):
            k = s.length if depths is None else depths[i]
            if k is None:
                raise StreamError("infinite stream needs an explicit depth")
            out.append(value_of(s, k))
        return tuple(out)

    def one_distance_ready(self, depth: int | None = None) -> bool:
        """Every coefficient is >= 2, apart from a leading ``a_1 = 1`` of ``alpha_1``."""
        for idx, s in enumerate(self.streams):
            n = s.length if s.length is not None else depth
            if n is None:
                raise StreamError("infinite stream needs an explicit depth")
            start = 2 if idx == 0 and s[1] == 1 else 1
            if any(s[i] < 2 for i in range(start, n + 1)):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dimension": self.d,
            "streams": [format_stream(s) for s in self.streams],
            "ledger": [
                {k: v for k, v in vars(e).items() if v is not None} | {"coincident": e.coincident}
                for e in self.ledger
            ],
            "solved_coefficients": {str(i): a for i, a in sorted(self.solved.items())},
            "schedule": json.loads(self.schedule.to_json()) if self.schedule else None,
        }


# ---------------------------------------------------------------------------
# number theory


def _positive(*xs):
    for x in xs:
        if x <= 0:
            raise ValueError(f"inputs must be positive, got {x}")


def lemma_cond_parts(q_kl: int, q_km2: int, q_km3: int) -> tuple[int, int, int, int]:
    """``(b, c, d, e)`` with ``b = gcd(q_kl, q_km2)``, ``c = q_kl/b``,
    ``d = gcd(c, q_km3)``, ``e = c/d``."""
    _positive(q_kl, q_km2, q_km3)
    b = math.gcd(q_kl, q_km2)
    c = q_kl // b
    d = math.gcd(c, q_km3)
    return b, c, d, c // d


def lemma_cond_holds(q_kl: int, q_km2: int, q_km3: int, a_km1: int) -> bool:
    """Sufficient test for ``gcd(a*q_km2 + q_km3, q_kl) == 1`` with ``a = a_km1``.

    Holds iff ``gcd(d, a) == 1`` and ``e | a``. Not necessary.
    """
    _positive(a_km1)
    _, _, d, e = lemma_cond_parts(q_kl, q_km2, q_km3)
    return math.gcd(d, a_km1) == 1 and a_km1 % e == 0


def suggest_coefficient(q_kl: int, q_km2: int, q_km3: int, minimum: int = 1) -> int | None:
    """Smallest ``a >= minimum`` passing :func:`lemma_cond_holds`, or None.

    Candidates are ``e * t``; there is none when ``gcd(d, e) > 1``.
    """
    _, _, d, e = lemma_cond_parts(q_kl, q_km2, q_km3)
    if math.gcd(d, e) != 1:
        return None
    t = max(1, -(-minimum // e))
    while math.gcd(d, e * t) != 1:
        t += 1
    return e * t


def solve_congruence(q_m1: int, q_m2: int, modulus: int, rhs: int, min_a: int = 2) -> int:
    """Smallest ``a >= min_a`` with ``a*q_m1 + q_m2 = rhs (mod modulus)``."""
    if modulus < 1:
        raise ValueError("modulus must be positive")
    if math.gcd(q_m1, modulus) != 1:
        raise ConstructionError(
            f"inadmissible: gcd(q_m1={q_m1}, modulus={modulus}) != 1, coprimality precondition violated"
        )
    inv = pow(q_m1, -1, modulus)
    a = (rhs - q_m2) * inv % modulus
    if a < min_a:
        a += -(-(min_a - a) // modulus) * modulus
    return a


def extension_ok(a: int, b: int) -> bool:
    """Side condition of the extended construction: ``b <= a`` and ``a/(2b) > 2``."""
    return b <= a and Fraction(a, 2 * b) > 2


# ---------------------------------------------------------------------------
# constructions


def _denoms_upto(coeffs: dict[int, int], n: int) -> list[int]:
    """``q_{-2}, q_{-1}, q_0, ..., q_n`` as a list offset by 2."""
    q = [1, 0]
    for i in range(0, n + 1):
        a = 0 if i == 0 else coeffs[i]
        q.append(a * q[-1] + q[-2])
    return q


def simple_pair(alpha1: CoefficientStream, depth: int | None = None) -> ConstructedTuple:
    """``(alpha_1, 1 - alpha_1)``; ledger ``q^2_i = q^1_{i+1}`` for ``i = 1..depth-1``."""
    if alpha1.a0 != 0 or alpha1[1] != 1:
        raise ConstructionError("simple pair needs alpha_1 = [0; 1, ...] in (1/2, 1)")
    alpha2 = complement(alpha1)
    if depth is None:
        if alpha1.length is None:
            raise ConstructionError("infinite alpha_1 needs a ledger depth")
        depth = alpha1.length
    q1 = denominators(alpha1, depth)
    q2 = denominators(alpha2, depth - 1)
    ledger = []
    for i in range(1, depth):
        if q2[i] != q1[i + 1]:  # pragma: no cover - algebraic identity
            raise AssertionError(f"simple pair mismatch at i={i}: {q2[i]} != {q1[i + 1]}")
        ledger.append(LedgerEntry(l=i, q=q2[i], k=i + 1, q1=q1[i + 1]))
    return ConstructedTuple((alpha1, alpha2), tuple(ledger), {}, "simple")


def _free(alpha1_free, schedule, i):
    if i in schedule.free:
        return schedule.free[i]
    if alpha1_free is None:
        raise ConstructionError(f"no free coefficient given for a_{i}")
    try:
        return alpha1_free[i]
    except StreamError:
        raise ConstructionError(f"free stream does not supply a_{i}") from None


def _construct(alpha1_free, schedule: ConstructionSchedule, use_b: bool, strict_side: bool = True):
    k = schedule.k
    b = schedule.b if (use_b and schedule.b is not None) else (1,) * (len(k) - 1)
    coeffs: dict[int, int] = {}
    for i in range(1, k[0] + 1):
        coeffs[i] = _free(alpha1_free, schedule, i)
    q1 = _denoms_upto(coeffs, k[0])  # q1[n + 2] = q^1_n
    # alpha_2 coefficients and denominators; q2[l] = q^2_l with q^2_0 = 1
    a2 = [q1[k[0] + 2]]
    q2 = [1, q1[k[0] + 2]]
    ledger = [LedgerEntry(l=1, q=q2[1], k=k[0], q1=q1[k[0] + 2])]
    solved: dict[int, int] = {}
    for l in range(1, len(k)):
        kl, kn = k[l - 1], k[l]
        modulus = q2[l]
        rhs_val = b[l - 1] * q2[l - 1]
        for i in range(kl + 1, kn):
            coeffs[i] = _free(alpha1_free, schedule, i)
        q1 = _denoms_upto(coeffs, kn - 1)
        q_m1, q_m2 = q1[kn - 1 + 2], q1[kn - 2 + 2]
        if kn - kl == 1:
            # a_{kn} stays free; the congruence must already hold
            if (q_m2 - rhs_val) % modulus:
                raise ConstructionError(
                    f"step l={l}: gap-1 step needs q_{kn - 2} = rhs (mod {modulus})"
                )
            a = _free(alpha1_free, schedule, kn)
        else:
            q_m3 = q1[kn - 3 + 2]
            a_m1 = coeffs[kn - 1]
            if not lemma_cond_holds(modulus, q_m2, q_m3, a_m1):
                hint = suggest_coefficient(modulus, q_m2, q_m3, schedule.min_coefficient)
                raise ConstructionError(
                    f"step l={l}: coefficient a_{kn - 1} = {a_m1} fails the coprimality "
                    f"condition (b, c, d, e) = {lemma_cond_parts(modulus, q_m2, q_m3)}"
                    + (f"; smallest admissible choice is {hint}" if hint else "")
                )
            a = solve_congruence(q_m1, q_m2, modulus, rhs_val % modulus, schedule.min_coefficient)
            # alpha_2's new coefficient must be positive and, when asked, >= min_coefficient
            while (a * q_m1 + q_m2 - rhs_val) // modulus < schedule.min_coefficient:
                a += modulus
            if use_b and strict_side and b[l - 1] > 1 and not extension_ok(a, b[l - 1]):
                raise ConstructionError(
                    f"step l={l}: solved a_{kn} = {a} with b = {b[l - 1]} violates a/(2b) > 2"
                )
            solved[kn] = a
        coeffs[kn] = a
        qn = a * q_m1 + q_m2
        num = qn - rhs_val
        if num % modulus:  # pragma: no cover - guaranteed by the congruence
            raise AssertionError(f"inexact back-solve at l={l}")
        a_next = num // modulus
        if a_next < 1:
            raise ConstructionError(f"step l={l}: alpha_2 coefficient {a_next} < 1")
        a2.append(a_next)
        q2.append(a_next * q2[l] + q2[l - 1])
        ledger.append(LedgerEntry(l=l + 1, q=q2[l + 1], k=kn, q1=qn, b=b[l - 1]))
    alpha1 = CoefficientStream.finite([coeffs[i] for i in range(1, k[-1] + 1)])
    alpha2 = CoefficientStream.finite(a2)
    return alpha1, alpha2, ledger, solved


def general_construct(alpha1_free, schedule: ConstructionSchedule) -> ConstructedTuple:
    """Pair ``(alpha_1, alpha_2)`` with ``q^2_l = q^1_{k_l}`` for every step.

    Coefficients of ``alpha_1`` come from ``schedule.free`` or else
    ``alpha1_free``; positions ``k_{l+1}`` (gap >= 2) are solved from the
    congruence ``a q_{k-1} + q_{k-2} = q^2_{l-1} (mod q^1_{k_l})`` taking the
    smallest solution >= ``min_coefficient`` that also keeps the new
    coefficient of ``alpha_2`` >= ``min_coefficient``.
    """
    a1, a2, ledger, solved = _construct(alpha1_free, schedule, use_b=False)
    return ConstructedTuple((a1, a2), tuple(ledger), solved, "general", schedule)


def extended_construct(alpha1_free, schedule: ConstructionSchedule, strict: bool = True) -> ConstructedTuple:
    """Like :func:`general_construct` with right-hand side ``b_l * q^2_{l-1}``.

    With ``b_l = 1`` this is the general construction. For ``b_l > 1`` the
    new denominator of ``alpha_2`` is ``q^1_{k_{l+1}} - (b_l - 1) q^2_{l-1}``,
    so later ledger entries are no longer coincident; see
    :attr:`LedgerEntry.coincident`. The side condition ``a/(2b) > 2`` on
    every coefficient solved with ``b_l > 1`` is enforced unless ``strict``
    is False.
    """
    if schedule.b is None:
        raise ConstructionError("extended construction needs schedule.b")
    a1, a2, ledger, solved = _construct(alpha1_free, schedule, use_b=True, strict_side=strict)
    return ConstructedTuple((a1, a2), tuple(ledger), solved, "extended", schedule)


def construct_3d(alpha1_free, schedule: ConstructionSchedule) -> ConstructedTuple:
    """Triple ``(alpha_1, alpha_2, 1 - alpha_1)`` sharing ``q^1_{k_l}``."""
    first = _free(alpha1_free, schedule, 1)
    if first != 1:
        raise ConstructionError("3D construction needs a_1 = 1 so that 1 - alpha_1 = [0; a_2 + 1, ...]")
    if schedule.k[0] < 2:
        raise ConstructionError("3D construction needs k_1 >= 2")
    a1, a2, ledger, solved = _construct(alpha1_free, schedule, use_b=False)
    a3 = complement(a1)
    q3 = denominators(a3, a3.length)
    entries = []
    for e in ledger:
        if q3[e.k - 1] != e.q:  # pragma: no cover - algebraic identity
            raise AssertionError(f"third coordinate misses q={e.q}")
        entries.append(LedgerEntry(e.l, e.q, e.k, e.q1, index3=e.k - 1, b=e.b))
    return ConstructedTuple((a1, a2, a3), tuple(entries), solved, "3d", schedule)
