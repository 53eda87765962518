"""Acceptance gate: one test per criterion, reported as PASS/FAIL lines.

Shared experiments are module fixtures so the Euclidean bound check (8)
sees every run, whichever subset of tests is selected.
"""
import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from krongap.cf import CoefficientStream, complement, denominators, parse_stream, value_of
from krongap.construction import (
    ConstructionError,
    ConstructionSchedule,
    construct_3d,
    general_construct,
    lemma_cond_holds,
    simple_pair,
    suggest_coefficient,
)
from krongap.nn import OffsetTable, brute_g_sweep, circle_gaps, generate, nn_records, realize, stability_check
from krongap.torus import L1, L2, LINF, Metric
from krongap.verify import (
    EUCLIDEAN_BOUND,
    check_asmallest,
    check_lemma_part2,
    check_three_gap,
    check_upper_bounds,
    predicted_windows,
    sweep,
)

METRICS = (L1, L2, LINF)
N_MAX = 2000
THEOREM1_STREAMS = ["0;1,(2)", "0;1,(3,2)", "0;1,(2,3)", "0;1,(4)", "0;1,2,5,(3,2,2)"]
SILVER = parse_stream("0;1,(2)")


def acceptance(cid, title):
    return pytest.mark.acceptance(cid, title)


def oracle_q(coeffs):
    q = [1, 0]
    for a in [0] + list(coeffs):
        q.append(a * q[-1] + q[-2])
    return q[2:]


# ---------------------------------------------------------------------------
# shared experiments


@pytest.fixture(scope="module")
def random_streams():
    rng = random.Random(20240601)
    out = []
    for _ in range(200):
        out.append(CoefficientStream.finite([rng.randint(1, 9) for _ in range(25)]))
    return out


@pytest.fixture(scope="module")
def three_gap_run(random_streams):
    t0 = time.perf_counter()
    reports = [check_three_gap(value_of(s, 25), 300) for s in random_streams]
    log = []
    for s in random_streams:
        g, _ = OffsetTable([value_of(s, 25)], 299, L2).sweep(300)
        log += [(1, L2, N, int(g[N])) for N in range(2, 301)]
    return reports, log, time.perf_counter() - t0


@pytest.fixture(scope="module")
def theorem1_runs():
    """Brute-force O(N^2) sweeps of (alpha_1, 1 - alpha_1), cross-checked by offset tables."""
    runs = []
    for text in THEOREM1_STREAMS:
        a1 = parse_stream(text)
        a2 = complement(a1)
        real = realize([a1, a2], N_MAX, metrics=METRICS)
        ps = generate(real.alpha, N_MAX)
        g = {}
        for m in METRICS:
            brute = brute_g_sweep(ps, m)
            offset, _ = OffsetTable(real.alpha, N_MAX - 1, m).sweep(N_MAX)
            assert np.array_equal(brute[2:], offset[2:])
            g[m.name] = brute
        q2 = denominators(a2, real.depths[1])
        runs.append({"text": text, "streams": (a1, a2), "depths": real.depths, "alpha": real.alpha, "g": g, "q2": q2})
    return runs


@pytest.fixture(scope="module")
def triple():
    return construct_3d(SILVER, ConstructionSchedule((2, 4, 6, 8)))


@pytest.fixture(scope="module")
def triple_run(triple):
    rows, alpha, windows = sweep(triple, N_MAX, METRICS)
    ps = generate(alpha, N_MAX)
    brute = {m.name: brute_g_sweep(ps, m) for m in METRICS}
    return rows, alpha, windows, brute


def _random_alpha(rng, d):
    kind = rng.random()
    out = []
    for _ in range(d):
        if kind < 0.5:
            coeffs = [rng.randint(1, 6) for _ in range(rng.randint(6, 18))]
            out.append(value_of(CoefficientStream.finite(coeffs), len(coeffs)))
        else:
            q = rng.randint(2, 10**rng.randint(1, 6))
            out.append(Fraction(rng.randint(1, q - 1), q))
    return tuple(out)


@pytest.fixture(scope="module")
def random_instances():
    rng = random.Random(11)
    return [
        (_random_alpha(rng, d), rng.randint(2, 500), rng.choice(METRICS))
        for d in [1, 2, 3] * 33 + [2]
    ]


# ---------------------------------------------------------------------------
# criteria


@acceptance("1", "Figure-1 reproduction: 3 distinct gaps at N = 6, base 0")
def test_figure_one():
    t0 = time.perf_counter()
    alpha = value_of(parse_stream("0;2,(1)"), 40)
    gaps = circle_gaps(alpha, 6, index_base=0)
    elapsed = time.perf_counter() - t0
    assert len(gaps) == 7 and sum(gaps) == 1
    assert len(set(gaps)) == 3
    assert elapsed < 1.0


@acceptance("2", "Three Gap property on 200 random streams, N <= 300")
def test_three_gap_random(three_gap_run):
    reports, _, elapsed = three_gap_run
    bad = [r.counterexample for r in reports if not r.passed]
    assert not bad, bad[:3]
    assert sum(r.instances for r in reports) == 200 * 300
    assert elapsed < 60


def _pair_tuples():
    rng = random.Random(3)
    out = []
    for _ in range(10):
        tail = [rng.randint(1, 6) for _ in range(28)] + [rng.randint(2, 6)]
        out.append(simple_pair(CoefficientStream.finite([1] + tail)))
    return out


def _general_tuples():
    rng = random.Random(5)
    out = []
    while len(out) < 8:
        free = CoefficientStream.finite([1] + [rng.randint(2, 4) for _ in range(40)])
        k, pos = [2], 2
        while pos < 12:
            pos += rng.choice([2, 2, 3])
            k.append(pos)
        fixes = {}
        for _ in range(len(k)):
            try:
                out.append(general_construct(free, ConstructionSchedule(tuple(k), free=fixes)))
                break
            except ConstructionError as err:
                # repair the offending free coefficient with the smallest admissible value
                msg = str(err)
                pos_bad = int(msg.split("coefficient a_")[1].split(" ")[0])
                hint = msg.rsplit("is ", 1)[-1] if "smallest admissible" in msg else None
                if hint is None:
                    break
                fixes[pos_bad] = int(hint)
    return out


@acceptance("3", "h_1(q+1) = q for 20 constructed tuples, q <= 10^4, metrics {1,2,inf}")
def test_lemma_part2_tuples():
    tuples = _pair_tuples() + _general_tuples() + [
        construct_3d(SILVER, ConstructionSchedule((2, 4, 6))),
        construct_3d(parse_stream("0;1,(3,2)"), ConstructionSchedule((2, 5, 8), free={7: 3})),
    ]
    assert [t.kind for t in tuples].count("simple") == 10
    assert [t.kind for t in tuples].count("general") == 8
    assert [t.kind for t in tuples].count("3d") == 2
    t0 = time.perf_counter()
    tested = 0
    for t in tuples:
        qs = [oracle_q(s.coefficients(s.length)) for s in t.streams]
        for e in t.ledger:
            assert all(e.q in q for q in qs)
        rep = check_lemma_part2(t, METRICS, q_cap=10**4)
        assert rep.passed, rep.counterexample
        assert rep.instances >= 3
        tested += rep.instances
    assert tested >= 20 * 3
    assert time.perf_counter() - t0 < 600


def _literal_windows(q2, n_max):
    """Windows exactly as stated: g=2 on {q+1..2q}, g=1 on {2q+1..q'}."""
    out = []
    for q, qn in zip(q2[1:], q2[2:]):
        if q + 1 > n_max:
            break
        out.append((2, q + 1, min(2 * q, n_max)))
        if 2 * q + 1 <= n_max:
            out.append((1, 2 * q + 1, min(qn, n_max)))
    return [w for w in out if w[1] <= w[2]]


@acceptance("4", "Theorem-1 windows as stated: g=2 on {q+1..2q}, g=1 on {2q+1..q'}")
def test_theorem1_windows_literal(theorem1_runs):
    failures = []
    for run in theorem1_runs:
        for name, g in run["g"].items():
            vals = set(int(x) for x in g[2 : N_MAX + 1])
            assert vals <= {1, 2}, (run["text"], name, vals)
            for want, lo, hi in _literal_windows(run["q2"], N_MAX):
                for N in range(lo, hi + 1):
                    if g[N] != want:
                        failures.append((run["text"], name, N, want, int(g[N])))
    assert not failures, f"{len(failures)} mismatches, first: {failures[:5]}"


@acceptance("4*", "Theorem-1 windows with the corrected boundary: g=2 on {q+1..2q-1}, g=1 on {2q..q'}")
def test_theorem1_windows_exact(theorem1_runs):
    for run in theorem1_runs:
        a1, a2 = run["streams"]
        assert all(a1[i] >= 2 for i in range(2, run["depths"][0] + 1))
        dens = [denominators(a1, run["depths"][0]), run["q2"]]
        windows = predicted_windows(dens, run["q2"][1:], N_MAX, pairs_with_g2=True)
        covered = set()
        for w in windows:
            for N in range(w.lo, w.hi + 1):
                covered.add(N)
                for name, g in run["g"].items():
                    assert g[N] == w.g, (run["text"], name, N, w.g, int(g[N]))
        assert len([w for w in windows if w.g == 1]) >= 2
        assert covered == set(range(run["q2"][1] + 1, N_MAX + 1))


@acceptance("5", "general construction: exact ledger equalities and exact back-solves")
def test_general_construction_soundness():
    schedules = [
        ConstructionSchedule((2, 4)),
        ConstructionSchedule((2, 4, 6)),
        ConstructionSchedule((2, 5, 8), free={7: 3}),
    ]
    for sched in schedules:
        t = general_construct(SILVER, sched)
        c1 = t.streams[0].coefficients(t.streams[0].length)
        c2 = t.streams[1].coefficients(t.streams[1].length)
        q1, q2 = oracle_q(c1), [1] + oracle_q(c2)[1:]  # q2[0] = q^2_0 = 1
        assert len(t.ledger) == len(sched.k)
        for l, kl in enumerate(sched.k, start=1):
            assert q2[l] == q1[kl]
        for l in range(1, len(sched.k)):
            kl, kn = sched.k[l - 1], sched.k[l]
            num = c1[kn - 1] * q1[kn - 1] + q1[kn - 2] - q2[l - 1]
            assert num % q1[kl] == 0
            assert num // q1[kl] == c2[l]


@acceptance("6", "coprimality condition is sufficient: exhaustive over prefixes <= 4, length <= 6")
def test_lemma_cond_exhaustive():
    t0 = time.perf_counter()
    checked = 0
    for n in range(3, 7):
        for coeffs in itertools.product(range(1, 5), repeat=n):
            q = oracle_q(coeffs)
            for kn in range(3, n + 1):
                for kl in range(1, kn - 1):
                    if lemma_cond_holds(q[kl], q[kn - 2], q[kn - 3], coeffs[kn - 2]):
                        checked += 1
                        assert math.gcd(q[kn - 1], q[kl]) == 1, (coeffs, kl, kn)
    assert checked > 1000
    assert time.perf_counter() - t0 < 60


@acceptance("7", "smallest-norm chain at levels <= 8 for 50 streams")
def test_asmallest_chain():
    rng = random.Random(8)
    for _ in range(50):
        s = CoefficientStream.finite([rng.randint(1, 4) for _ in range(14)])
        rep = check_asmallest(s, 8)
        assert rep.passed, (s.prefix, rep.counterexample)
        assert rep.instances >= 7
        assert not any("n_cap" in note for note in rep.notes)


@acceptance("8", "Euclidean g_N <= 3 / 5 / 13 across all experiments")
def test_upper_bounds(three_gap_run, theorem1_runs, triple_run, random_instances):
    log = list(three_gap_run[1])
    for run in theorem1_runs:
        log += [(2, L2, N, int(run["g"]["L2"][N])) for N in range(2, N_MAX + 1)]
    rows, alpha, _, _ = triple_run
    log += [(3, L2, r.N, r.g["L2"]) for r in rows]
    for alpha, N, _ in random_instances:
        g, _ = OffsetTable(alpha, N - 1, L2).sweep(N)
        log += [(len(alpha), L2, n, int(g[n])) for n in range(2, N + 1)]
    rep = check_upper_bounds(log)
    assert rep.passed, rep.counterexample
    assert {d for d, *_ in log} == {1, 2, 3}
    assert EUCLIDEAN_BOUND[3] == 13


@acceptance("9", "3D triple: g_N = 1 on at least two predicted windows, metrics {1,2,inf}")
def test_three_dimensional_windows(triple, triple_run):
    rows, alpha, windows, brute = triple_run
    assert alpha[0] + alpha[2] == 1
    full = [w for w in windows if w.g == 1 and not w.empty and w.hi <= N_MAX]
    assert len(full) >= 2
    for w in full:
        for N in range(w.lo, w.hi + 1):
            for m in METRICS:
                assert rows[N - 2].g[m.name] == 1 == brute[m.name][N], (w, N, m)


@acceptance("10", "truncation stability at K and K+2; under-truncation is caught")
def test_truncation_stability(theorem1_runs, triple):
    for run in theorem1_runs:
        assert stability_check(run["streams"], N_MAX, list(run["depths"]), METRICS)
    assert stability_check(triple.streams, N_MAX, metrics=METRICS)
    pair = [SILVER, complement(SILVER)]
    assert denominators(SILVER, 3)[-1] < 500
    assert not stability_check(pair, 500, 3, METRICS)
    assert realize(pair, 500, depth=3, metrics=METRICS).escalations > 0


@acceptance("11", "offset-table accelerator equals the brute-force oracle on 100 random instances")
def test_accelerator_matches_brute(random_instances):
    assert len(random_instances) == 100
    for alpha, N, m in random_instances:
        ps = generate(alpha, N)
        assert nn_records(ps, m, "offset") == nn_records(ps, m, "brute"), (alpha, N, m)
