import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robuststream.core import (
    BOUNDED_DELETION,
    INSERTION_ONLY,
    TURNSTILE,
    ExactStats,
    FrequencyVector,
    ModelViolation,
    QuerySpec,
    StreamConfig,
    StreamUpdate,
    apply_update,
    entropy_exact,
    exact_query,
    f0_exact,
    fp_exact,
    heavy_hitters_exact,
    parse_stream_file,
    validate_update,
    within_rel,
)


def brute_vector(updates, n):
    f = [0] * (n + 1)
    for u in updates:
        f[u.a] += u.delta
    return f


updates_strategy = st.lists(
    st.builds(
        StreamUpdate,
        a=st.integers(1, 20),
        delta=st.integers(-5, 5).filter(lambda d: d != 0),
    ),
    min_size=0,
    max_size=60,
)


@given(updates_strategy)
def test_apply_update_matches_dense_brute_force(updates):
    f = FrequencyVector(20)
    for u in updates:
        f = apply_update(f, u)
    dense = brute_vector(updates, 20)
    for i in range(1, 21):
        assert f[i] == dense[i]
    # zero entries must not linger in the sparse map
    assert all(c != 0 for c in f.counts.values())


@given(updates_strategy)
def test_exact_stats_agrees_with_recomputation(updates):
    stats = ExactStats(20, p=0.5)
    for u in updates:
        stats.update(u)
    f = stats.f
    assert stats.f0 == f0_exact(f)
    assert stats.f1 == sum(abs(c) for c in f.counts.values())
    assert stats.f2 == sum(c * c for c in f.counts.values())
    assert stats.fp == pytest.approx(fp_exact(f, 0.5), abs=1e-9)
    assert stats.entropy() == pytest.approx(entropy_exact(f), abs=1e-9)


def test_exact_query_small_known_vector():
    f = FrequencyVector(10, {1: 4, 2: 2, 3: 2})
    assert exact_query(f, QuerySpec("F0", 0.1, 0.1)) == 3.0
    assert exact_query(f, QuerySpec("F2", 0.1, 0.1)) == 24.0
    assert exact_query(f, QuerySpec("Fp", 0.1, 0.1, p=1.0)) == 8.0
    # distribution (1/2, 1/4, 1/4): H = 1.5 bits
    assert exact_query(f, QuerySpec("entropy", 0.1, 0.1)) == pytest.approx(1.5)
    # ||f||_2 = sqrt(24) ~ 4.899; only coordinate 1 is above 0.5 * that
    assert exact_query(f, QuerySpec("heavy-hitters", 0.5, 0.1)) == {1}


def test_heavy_hitters_threshold_is_inclusive():
    f = FrequencyVector(4, {1: 3, 2: 4})
    l2 = math.sqrt(25)
    assert heavy_hitters_exact(f, 3 / l2) == {1, 2}
    assert heavy_hitters_exact(f, 3.0001 / l2) == {2}


def test_within_rel_closed_interval_and_rejections():
    assert within_rel(0.9, 1.0, 0.1)
    assert within_rel(1.1, 1.0, 0.1)
    assert not within_rel(1.1000001, 1.0, 0.1)
    assert within_rel(0.0, 0.0, 0.5)
    assert not within_rel(0.01, 0.0, 0.5)
    with pytest.raises(ValueError):
        within_rel(1.0, -1.0, 0.1)
    with pytest.raises(ValueError):
        within_rel(1.0, 1.0, 0.0)


@given(
    b=st.floats(0, 1e6, allow_nan=False),
    eps=st.floats(0.01, 0.99),
    a=st.floats(-1e6, 1e6, allow_nan=False),
)
def test_within_rel_matches_interval_definition(a, b, eps):
    assert within_rel(a, b, eps) == ((1 - eps) * b <= a <= (1 + eps) * b)


def test_validate_update_model_rules():
    ins = StreamConfig(100, 1000, 10)
    tur = StreamConfig(100, 1000, 10, model=TURNSTILE)
    validate_update(StreamUpdate(1, 5), ins)
    with pytest.raises(ModelViolation):
        validate_update(StreamUpdate(1, -1), ins)
    validate_update(StreamUpdate(1, -1), tur)
    with pytest.raises(ModelViolation):
        validate_update(StreamUpdate(0, 1), tur)
    with pytest.raises(ModelViolation):
        validate_update(StreamUpdate(101, 1), tur)
    with pytest.raises(ModelViolation):
        validate_update(StreamUpdate(1, 21), tur)  # |delta| > 2M


def test_apply_update_enforces_coordinate_bound():
    cfg = StreamConfig(10, 100, 5, model=TURNSTILE)
    f = FrequencyVector(10, {1: 5})
    with pytest.raises(ModelViolation):
        apply_update(f, StreamUpdate(1, 1), cfg)


def test_stream_config_rejects_bad_models():
    with pytest.raises(ValueError):
        StreamConfig(10, 10, 10, model="sliding-window")
    with pytest.raises(ValueError):
        StreamConfig(10, 10, 10, model=BOUNDED_DELETION, alpha=0.5)
    assert StreamConfig(10, 10, 10, model=BOUNDED_DELETION, alpha=2.0).alpha == 2.0


def test_parse_stream_file_comments_and_annotations():
    text = "# header comment\n3 1\n5 -2  # trailing\n\n@expect flips 4\n7 1\n"
    ups = list(parse_stream_file(io.StringIO(text)))
    assert ups == [StreamUpdate(3, 1), StreamUpdate(5, -2), StreamUpdate(7, 1)]


def test_parse_stream_file_rejects_malformed_lines():
    with pytest.raises(ValueError, match="line 2"):
        list(parse_stream_file(io.StringIO("1 1\n1 2 3\n")))


@given(updates_strategy)
@settings(max_examples=30)
def test_stream_file_round_trip(updates):
    text = "\n".join(f"{u.a} {u.delta}" for u in updates)
    assert list(parse_stream_file(io.StringIO(text))) == updates
