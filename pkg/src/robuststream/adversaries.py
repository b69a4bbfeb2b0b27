"""Adaptive adversaries for the two-player streaming game, headed by the
explicit attack on the AMS sketch, plus scripted/oblivious baselines and
stream generators.

An adversary sees only the published outputs (through the opaque view the
harness passes in) and must emit updates legal for the stream model.
next() returns None to halt.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import INSERTION_ONLY, StreamUpdate

AMS_EQ_TOL = 1e-9  # relative tolerance for the "increase is exactly 1" branch


class Adversary:
    """Behavioral contract: next(view) -> StreamUpdate or None (halt),
    deterministic given (seed, transcript)."""

    model = INSERTION_ONLY

    def next(self, view) -> Optional[StreamUpdate]:
        raise NotImplementedError


class AmsAttacker(Adversary):
    """The adaptive attack on the AMS sketch.

    Starts with a heavy insert C*sqrt(t) on coordinate 1, then walks
    through fresh coordinates: insert once, watch how much the published
    estimate moved; if it moved by less than 1 insert the coordinate a
    second time, if it moved by exactly 1 flip a fair coin.  Inserting
    the sketch-column-anticorrelated coordinates twice drags ||Sf||^2
    below ||f||^2.
    """

    def __init__(self, t: int, n: int, seed: int, C: float = 8.0, budget: Optional[int] = None):
        if n < 100 * t:
            raise ValueError("attack requires n >= 100 * t")
        self.t = t
        self.n = n
        self.C = C
        self.budget = budget
        self._rng = np.random.default_rng(seed)
        self._emitted = 0
        self._i = 1  # next fresh coordinate
        self._old: Optional[float] = None
        self._phase = "init"  # init -> probe -> (maybe) second -> probe ...

    def next(self, view) -> Optional[StreamUpdate]:
        if self.budget is not None and self._emitted >= self.budget:
            return None
        u = self._decide(view)
        if u is not None:
            self._emitted += 1
        return u

    def _decide(self, view) -> Optional[StreamUpdate]:
        if self._phase == "init":
            self._phase = "settle"
            return StreamUpdate(1, round(self.C * math.sqrt(self.t)))
        if self._phase == "settle":
            # estimate after the heavy insert becomes the first baseline
            self._old = view.last_estimate
            return self._first_insert()
        if self._phase == "probe":
            new = view.last_estimate
            diff = new - self._old
            if diff < 1.0 - AMS_EQ_TOL * max(1.0, abs(new)):
                self._phase = "after-second"
                return StreamUpdate(self._i, 1)
            if abs(diff - 1.0) <= AMS_EQ_TOL * max(1.0, abs(new)):
                if self._rng.random() < 0.5:
                    self._phase = "after-second"
                    return StreamUpdate(self._i, 1)
            self._old = new
            return self._first_insert()
        # after-second: the follow-up insert has been published
        self._old = view.last_estimate
        return self._first_insert()

    def _first_insert(self) -> Optional[StreamUpdate]:
        self._i += 1
        if self._i > self.n:
            return None
        self._phase = "probe"
        return StreamUpdate(self._i, 1)


class ReplayAdversary(Adversary):
    """Probes a distinct-elements estimator for hashed-low identities.

    Inserts a fresh identity whenever the published estimate increased
    since the previous fresh insert; otherwise the fresh identity failed
    to move the estimate, so it is added to a replay pool and replayed
    for a short burst before trying fresh identities again.
    """

    def __init__(self, n: int, seed: int, replay_rounds: int = 3):
        self.n = n
        self.replay_rounds = replay_rounds
        self._rng = np.random.default_rng(seed)
        self._next_fresh = 0
        self._last_fresh: Optional[int] = None
        self._est_before_fresh: Optional[float] = None
        self._pool: List[int] = []
        self._burst_left = 0
        self._pool_pos = 0

    def _fresh(self, view) -> Optional[StreamUpdate]:
        self._next_fresh += 1
        if self._next_fresh > self.n:
            return None
        self._last_fresh = self._next_fresh
        self._est_before_fresh = view.last_estimate if view.n_rounds else 0.0
        return StreamUpdate(self._next_fresh, 1)

    def next(self, view) -> Optional[StreamUpdate]:
        if view.n_rounds == 0:
            return self._fresh(view)
        if self._burst_left > 0 and self._pool:
            self._burst_left -= 1
            a = self._pool[self._pool_pos % len(self._pool)]
            self._pool_pos += 1
            return StreamUpdate(a, 1)
        est = view.last_estimate
        if self._last_fresh is not None and est <= self._est_before_fresh:
            self._pool.append(self._last_fresh)
            self._last_fresh = None
            self._burst_left = self.replay_rounds - 1
            a = self._pool[self._pool_pos % len(self._pool)]
            self._pool_pos += 1
            return StreamUpdate(a, 1)
        return self._fresh(view)


class ScriptedAdversary(Adversary):
    """Oblivious adversary: emits a fixed update list regardless of the
    published outputs, halting when the script runs out."""

    def __init__(self, updates: Sequence[StreamUpdate]):
        if not updates:
            raise ValueError("script must be non-empty")
        self.updates = list(updates)
        self._pos = 0

    def next(self, view) -> Optional[StreamUpdate]:
        if self._pos >= len(self.updates):
            return None
        u = self.updates[self._pos]
        self._pos += 1
        return u


# ---------------------------------------------------------------------------
# Stream generators for ScriptedAdversary.


def gen_uniform(n: int, m: int, seed: int) -> List[StreamUpdate]:
    rng = np.random.default_rng(seed)
    ids = rng.integers(1, n + 1, size=m)
    return [StreamUpdate(int(a), 1) for a in ids]


def zipf_probs(n: int, s: float) -> np.ndarray:
    ranks = np.arange(1, n + 1, dtype=np.float64)
    w = ranks**-s
    return w / w.sum()


def gen_zipf(n: int, m: int, s: float, seed: int) -> List[StreamUpdate]:
    rng = np.random.default_rng(seed)
    ids = rng.choice(np.arange(1, n + 1), size=m, p=zipf_probs(n, s))
    return [StreamUpdate(int(a), 1) for a in ids]


def gen_single_heavy(n: int, m: int, seed: int, heavy_frac: float = 0.5) -> List[StreamUpdate]:
    """One dominant identity receiving heavy_frac of the updates, the rest
    uniform over the tail."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(m):
        if rng.random() < heavy_frac:
            out.append(StreamUpdate(1, 1))
        else:
            out.append(StreamUpdate(int(rng.integers(2, n + 1)), 1))
    return out


def gen_bounded_deletion(
    n: int, m: int, alpha: float, p: float, seed: int
) -> List[StreamUpdate]:
    """Turnstile stream keeping F_p(f) >= (1/alpha) * F_p(h) at every
    step, where h is the frequency vector of the absolute-value stream."""
    rng = np.random.default_rng(seed)
    f: Dict[int, int] = {}
    fp_f = 0.0
    fp_h = 0.0
    h: Dict[int, int] = {}
    out: List[StreamUpdate] = []
    support: List[int] = []
    for step in range(m):
        delete = rng.random() < 0.5 and support
        if delete:
            a = support[int(rng.integers(0, len(support)))]
            c = f.get(a, 0)
            if c <= 0:
                delete = False
            else:
                new_fp_f = fp_f - c**p + (c - 1) ** p
                new_fp_h = fp_h - h[a] ** p + (h[a] + 1) ** p
                if new_fp_f < (1.0 / alpha) * new_fp_h:
                    delete = False  # deletion would break the promise
        if delete:
            out.append(StreamUpdate(a, -1))
            fp_f += (c - 1) ** p - c**p
            fp_h += (h[a] + 1) ** p - h[a] ** p
            f[a] = c - 1
            h[a] += 1
            if f[a] == 0:
                support.remove(a)
        else:
            a = int(rng.integers(1, n + 1))
            c = f.get(a, 0)
            fp_f += (c + 1) ** p - c**p
            fp_h += (h.get(a, 0) + 1) ** p - h.get(a, 0) ** p
            f[a] = c + 1
            h[a] = h.get(a, 0) + 1
            if c == 0:
                support.append(a)
            out.append(StreamUpdate(a, 1))
    return out


def gen_bounded_flip_turnstile(
    n: int,
    m: int,
    M: int,
    lam: int,
    eps: float,
    seed: int,
    jumps: Optional[int] = None,
) -> List[StreamUpdate]:
    """Turnstile stream whose F1 trace has small flip number: one big
    opening insert, long rebalancing stretches that hold F1 nearly
    constant, and a few deliberate level jumps.

    Each jump scales F1 by (1 +- eps/4), which costs at most ~2-3 flips
    at tolerance eps/8 (a chain can straddle same-direction jumps), so
    the jump count is sized at (lam - 4) / 3 to stay inside the budget.
    """
    if jumps is None:
        jumps = max(1, (lam - 4) // 3)
    rng = np.random.default_rng(seed)
    base = max(64, M // 2)
    out = [StreamUpdate(1, base)]
    f: Dict[int, int] = {1: base}
    support = [1]
    jump_steps = set(
        int(x) for x in np.linspace(m // (jumps + 1), m - 2, jumps).astype(int)
    )
    direction = 1
    while len(out) < m:
        step = len(out)
        if step in jump_steps:
            # jump F1 by a factor (1 +- eps/4) in one update
            f1 = sum(abs(c) for c in f.values())
            delta = max(1, int(0.25 * eps * f1)) * direction
            direction = -direction
            a = 1 if delta < 0 else int(rng.integers(2, n + 1))
            if delta < 0:
                delta = -min(-delta, f.get(1, 0) - 1) if f.get(1, 0) > 1 else 1
                if delta == 0:
                    delta = 1
            f[a] = f.get(a, 0) + delta
            if a not in support and f[a] != 0:
                support.append(a)
            out.append(StreamUpdate(a, delta))
            continue
        # rebalance: +1 on a fresh-ish coordinate, then -1 on a positive one
        if step % 2 == 0:
            a = int(rng.integers(2, n + 1))
            f[a] = f.get(a, 0) + 1
            if a not in support:
                support.append(a)
            out.append(StreamUpdate(a, 1))
        else:
            cands = [a for a in support if a != 1 and f.get(a, 0) >= 1]
            if not cands and f.get(1, 0) > 1:
                cands = [1]
            if cands:
                a = cands[int(rng.integers(0, len(cands)))]
                f[a] -= 1
                if f[a] == 0:
                    support.remove(a)
                out.append(StreamUpdate(a, -1))
            else:
                a = int(rng.integers(2, n + 1))
                f[a] = f.get(a, 0) + 1
                if a not in support:
                    support.append(a)
                out.append(StreamUpdate(a, 1))
    return out[:m]
