import numpy as np
import pytest

from robuststream.adversaries import (
    AmsAttacker,
    ReplayAdversary,
    ScriptedAdversary,
    gen_bounded_deletion,
    gen_bounded_flip_turnstile,
    gen_single_heavy,
    gen_uniform,
    gen_zipf,
    zipf_probs,
)
from robuststream.core import ExactStats, StreamConfig, StreamUpdate, validate_update
from robuststream.flipnum import flip_number
from robuststream.harness import TranscriptView, play_game
from robuststream.sketches import AMS, KMV


def drive(adv, estimates):
    """Feed a fixed estimate script to an adversary; return its updates."""
    view = TranscriptView()
    out = []
    for e in estimates:
        u = adv.next(view)
        if u is None:
            break
        out.append(u)
        view._publish(e)
    return out


def test_ams_attacker_requires_large_universe():
    with pytest.raises(ValueError):
        AmsAttacker(64, 100, seed=0)


def test_ams_attacker_opening_insert_and_budget():
    adv = AmsAttacker(64, 10**4, seed=1, C=8.0, budget=5)
    ups = drive(adv, [100.0] * 10)
    assert len(ups) == 5  # budget enforced
    assert ups[0] == StreamUpdate(1, round(8.0 * 8.0))  # C * sqrt(t)
    cfg = StreamConfig(10**4, 100, 10**6)
    for u in ups:
        validate_update(u, cfg)  # insertion-only legal


def test_ams_attacker_doubles_on_small_increase():
    adv = AmsAttacker(64, 10**4, seed=1)
    # opening, settle-baseline insert of id 2, then estimate rises by only
    # 0.2: the attacker must insert id 2 a second time
    view = TranscriptView()
    adv.next(view)
    view._publish(4096.0)
    u = adv.next(view)
    assert u == StreamUpdate(2, 1)
    view._publish(4096.2)
    assert adv.next(view) == StreamUpdate(2, 1)


def test_ams_attacker_moves_on_after_full_increase():
    adv = AmsAttacker(64, 10**4, seed=1)
    view = TranscriptView()
    adv.next(view)
    view._publish(4096.0)
    assert adv.next(view) == StreamUpdate(2, 1)
    view._publish(4099.0)  # increase ~3 > 1: anticorrelation unlikely
    assert adv.next(view) == StreamUpdate(3, 1)


def test_ams_attack_succeeds_in_game():
    wins = 0
    for seed in range(5):
        sketch = AMS(64, 1000 + seed)
        adv = AmsAttacker(64, 10**5, seed, C=8.0, budget=50 * 64)
        cfg = StreamConfig(10**5, 50 * 64, 10**6)
        tr = play_game(
            sketch, adv, "F2", cfg,
            stop_when=lambda pub, stats: pub < 0.5 * stats.f2,
        )
        if any(r.estimate < 0.5 * r.exact for r in tr.rounds):
            wins += 1
    assert wins >= 4


def test_replay_adversary_pools_failed_ids():
    adv = ReplayAdversary(1000, seed=0, replay_rounds=3)
    view = TranscriptView()
    u1 = adv.next(view)
    view._publish(1.0)
    u2 = adv.next(view)
    view._publish(2.0)
    u3 = adv.next(view)  # estimate grew: fresh again
    assert len({u1.a, u2.a, u3.a}) == 3
    view._publish(2.0)  # u3 failed to move the estimate
    u4 = adv.next(view)
    assert u4.a == u3.a  # replayed from the pool


def test_replay_adversary_is_feedback_dependent():
    """The stream it emits must genuinely depend on published outputs:
    stalling estimates trigger replay bursts, growing ones stay fresh."""
    growing = drive(ReplayAdversary(1000, seed=0), [float(i + 1) for i in range(50)])
    stalled = drive(ReplayAdversary(1000, seed=0), [1.0] * 50)
    assert [u.a for u in growing] != [u.a for u in stalled]
    # growing feedback: every insert is a fresh id
    assert len({u.a for u in growing}) == len(growing)
    # stalled feedback: ids repeat
    assert len({u.a for u in stalled}) < len(stalled)
    cfg = StreamConfig(1000, 100, 10**6)
    for u in growing + stalled:
        validate_update(u, cfg)


def test_replay_is_harmless_against_duplicate_insensitive_kmv():
    # duplicate-insensitivity is the defense replay probes for: the
    # estimate must stay accurate no matter how many replays happen
    sk = KMV(0.5, 0.5, 3, k=32)
    adv = ReplayAdversary(4000, seed=103)
    cfg = StreamConfig(4000, 8000, 10**6)
    tr = play_game(sk, adv, "F0", cfg)
    final = tr.rounds[-1]
    assert final.rel_err < 0.5


def test_scripted_adversary_replays_script_then_halts():
    script = [StreamUpdate(1, 1), StreamUpdate(2, 1)]
    adv = ScriptedAdversary(script)
    view = TranscriptView()
    assert adv.next(view) == script[0]
    assert adv.next(view) == script[1]
    assert adv.next(view) is None
    with pytest.raises(ValueError):
        ScriptedAdversary([])


def test_generators_respect_universe_and_length():
    for gen in (
        gen_uniform(100, 500, 0),
        gen_zipf(100, 500, 1.2, 0),
        gen_single_heavy(100, 500, 0),
    ):
        assert len(gen) == 500
        assert all(1 <= u.a <= 100 and u.delta == 1 for u in gen)


def test_zipf_probs_normalized_and_decreasing():
    p = zipf_probs(50, 1.2)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(np.diff(p) < 0)


def test_single_heavy_mass_concentrates():
    ups = gen_single_heavy(100, 4000, 1, heavy_frac=0.5)
    share = sum(1 for u in ups if u.a == 1) / len(ups)
    assert 0.4 < share < 0.6


def test_bounded_deletion_promise_holds_every_step():
    alpha, p = 4.0, 1.0
    ups = gen_bounded_deletion(200, 2000, alpha, p, seed=3)
    f = {}
    h = {}
    n_del = 0
    for u in ups:
        f[u.a] = f.get(u.a, 0) + u.delta
        h[u.a] = h.get(u.a, 0) + abs(u.delta)
        if u.delta < 0:
            n_del += 1
        fp_f = sum(abs(c) ** p for c in f.values())
        fp_h = sum(c**p for c in h.values())
        assert fp_f >= (1.0 / alpha) * fp_h - 1e-9
    assert n_del > 100  # the stream actually exercises deletions


def test_bounded_flip_turnstile_flip_number_within_budget():
    lam, eps = 20, 0.2
    for seed in range(3):
        ups = gen_bounded_flip_turnstile(256, 1500, 64, lam, eps, seed)
        assert len(ups) == 1500
        f = {}
        trace = []
        f1 = 0
        for u in ups:
            old = f.get(u.a, 0)
            f[u.a] = old + u.delta
            f1 += abs(f[u.a]) - abs(old)
            trace.append(float(f1))
        rep = flip_number(trace, eps / 8, want_witness=False)
        assert rep.exact <= lam
        # and the stream is genuinely turnstile
        assert any(u.delta < 0 for u in ups)
