import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robuststream.core import within_rel
from robuststream.flipnum import (
    flip_bound_bounded_deletion,
    flip_bound_entropy,
    flip_bound_fp,
    flip_bound_monotone,
    flip_number,
    hold_round,
    zero_flip_number,
)


def brute_flip_number(values, eps):
    """Independent oracle: enumerate every index chain (exponential)."""
    m = len(values)
    best = 1
    for k in range(2, m + 1):
        found = False
        for chain in itertools.combinations(range(m), k):
            ok = True
            for a, b in zip(chain, chain[1:]):
                if within_rel(values[a], values[b], eps):
                    ok = False
                    break
            if ok:
                best = k
                found = True
                break
        if not found:
            break
    return best


seq_strategy = st.lists(
    st.floats(0.0, 100.0, allow_nan=False), min_size=1, max_size=9
)


@given(seq_strategy, st.sampled_from([0.1, 0.3, 0.5]))
@settings(max_examples=150, deadline=None)
def test_dp_matches_exponential_brute_force(values, eps):
    assert flip_number(values, eps).exact == brute_flip_number(values, eps)


@given(seq_strategy, st.sampled_from([0.1, 0.3]))
@settings(max_examples=100, deadline=None)
def test_witness_is_a_valid_chain(values, eps):
    rep = flip_number(values, eps)
    w = rep.witness
    assert len(w) == rep.exact
    assert list(w) == sorted(set(w))
    for a, b in zip(w, w[1:]):
        assert not within_rel(values[a], values[b], eps)


@given(
    st.lists(st.floats(0.1, 1000.0), min_size=2, max_size=30),
    st.sampled_from([0.1, 0.3]),
)
@settings(max_examples=100, deadline=None)
def test_monotone_greedy_matches_dp(values, eps):
    values = sorted(values)
    greedy = flip_number(values, eps).exact
    # force the DP path by shuffling in a no-op: evaluate on the exact
    # reversed sequence, whose flip number is identical by symmetry of the
    # chain condition under order reversal? it is not; instead compare to
    # the brute force on short prefixes
    if len(values) <= 9:
        assert greedy == brute_flip_number(values, eps)
    # greedy result must be achievable: witness validity
    rep = flip_number(values, eps)
    for a, b in zip(rep.witness, rep.witness[1:]):
        assert not within_rel(values[a], values[b], eps)


def test_flip_number_known_cases():
    assert flip_number([5.0], 0.1).exact == 1
    assert flip_number([1, 1, 1, 1], 0.5).exact == 1
    # doubling at eps=0.5: 1 is inside [1,3] around 2, so chains must skip
    # a level each time; longest chain is 1 -> 4 -> 16
    assert flip_number([1, 2, 4, 8, 16], 0.5).exact == 3
    # oscillation
    assert flip_number([1, 10, 1, 10], 0.1).exact == 4
    assert zero_flip_number([1, 1, 2, 2, 3]) == 3
    assert zero_flip_number([7]) == 1


def test_flip_number_rejects_bad_input():
    with pytest.raises(ValueError):
        flip_number([], 0.1)
    with pytest.raises(ValueError):
        flip_number([1.0, -2.0], 0.1)
    with pytest.raises(ValueError):
        flip_number([1.0], 1.5)


def test_hold_round_basic_shape():
    v = [1.0, 1.01, 1.02, 2.0, 2.01]
    w = hold_round(v, 0.2)
    assert w[0] == 1.0
    assert w[1] == 1.0 and w[2] == 1.0  # held: within 10%
    assert w[3] == 2.0  # forced to adopt
    assert w[4] == 2.0


@given(
    st.lists(st.floats(0.5, 500.0), min_size=1, max_size=40),
    st.sampled_from([0.1, 0.3]),
)
@settings(max_examples=100, deadline=None)
def test_hold_round_output_within_half_eps_of_input(values, eps):
    w = hold_round(values, eps)
    for wi, vi in zip(w, values):
        assert within_rel(wi, vi, eps / 2)


def _hold_round_guarantee_case(rng, m, eps):
    # true sequence u: random positive walk; estimate v within (1 +- eps/8)
    steps = rng.choice([1.0, 1.0, 1.0 + eps], size=m)
    u = np.cumprod(steps) * rng.uniform(1, 10)
    noise = rng.uniform(1 - eps / 8, 1 + eps / 8, size=m)
    v = u * noise
    w = hold_round(v, eps)
    for wi, ui in zip(w, u):
        assert within_rel(wi, ui, eps)
    assert zero_flip_number(w) <= flip_number(u, eps / 8, want_witness=False).exact


def test_hold_round_guarantee_sampled():
    rng = np.random.default_rng(11)
    for _ in range(50):
        _hold_round_guarantee_case(rng, 100, 0.3)


# frozen values for the analytic bounds; recomputed here from the closed
# forms with plain math as an independent route
def test_flip_bound_monotone_frozen():
    assert flip_bound_monotone(2**32, 0.1) == math.ceil(64 * math.log(2) / math.log(1 / 0.9)) + 2
    assert flip_bound_monotone(2**32, 0.1) == 424
    assert flip_bound_monotone(10, 0.5) == 9
    with pytest.raises(ValueError):
        flip_bound_monotone(0.5, 0.1)


def test_flip_bound_fp_frozen():
    assert flip_bound_fp(1024, 10**4, 16, 1, 0.1) == math.ceil(
        math.log(16**2 * 1024**2) / math.log(1 / 0.9)
    ) + 2
    assert flip_bound_fp(1024, 10**4, 16, 1, 0.1) == 187
    assert flip_bound_fp(1024, 10**4, 16, 2, 0.1) == 371
    # p = 0 also capped by the update count
    f0b = flip_bound_fp(1024, 10**4, 16, 0, 0.1)
    assert f0b == min(187, math.ceil(math.log(10**8) / math.log(1 / 0.9)) + 2) == 177


def test_flip_bound_entropy_frozen():
    b = flip_bound_entropy(1024, 10**4, 0.25)
    assert b > 2 and isinstance(b, int)
    # shrinking eps can only increase the bound
    assert flip_bound_entropy(1024, 10**4, 0.1) >= b


def test_flip_bound_bounded_deletion_monotone_in_alpha():
    b1 = flip_bound_bounded_deletion(1024, 16, 1.0, 1.0, 0.1)
    b4 = flip_bound_bounded_deletion(1024, 16, 1.0, 4.0, 0.1)
    assert b4 >= b1 > 2


@given(st.integers(2, 12), st.sampled_from([0.1, 0.3]))
@settings(max_examples=30, deadline=None)
def test_monotone_bound_dominates_exact(k, eps):
    # geometric ramp inside [1, T]: the hardest monotone case
    T = 2.0**k
    vals = [min(T, (1 + eps) ** i) for i in range(200)]
    assert flip_number(vals, eps, want_witness=False).exact <= flip_bound_monotone(T, eps)


def test_fp_bound_dominates_exact_on_insertion_streams():
    rng = np.random.default_rng(3)
    n, m, M = 256, 2000, 8
    for p in (0, 1, 2):
        for _ in range(5):
            f = np.zeros(n + 1)
            trace = []
            for _ in range(m):
                a = int(rng.integers(1, n + 1))
                f[a] += 1
                if p == 0:
                    trace.append(float((f > 0).sum()))
                else:
                    trace.append(float((f**p).sum()))
            exact = flip_number(trace, 0.1, want_witness=False).exact
            assert exact <= flip_bound_fp(n, m, M, p, 0.1)
