"""Static (non-robust) sketches behind a uniform interface: fast F0,
k-minimum-values F0, AMS F2, p-stable Lp, count-sketch point queries, a
Renyi-based entropy formula, and a sampled entropy estimator.

Every sketch is deterministic given (seed, update sequence) and supports
restart() with fresh randomness, which is what the robustness wrappers
rely on.  The "bank" variants at the bottom hold many copies in shared
numpy state so the wrappers stay fast at desk scale.
"""

from __future__ import annotations

import heapq
import math
import struct
from typing import Dict, List, Optional

import numpy as np

from .core import INSERTION_ONLY, TURNSTILE, ExactStats, ModelViolation, StreamUpdate
from .hashing import (
    MERSENNE61,
    KWiseHash,
    _mulmod61_np,
    mix64,
    mix64_np,
    signs_from_keys,
    stable_abs_median,
    stable_from_keys,
)

SERIAL_MAGIC = b"RSKB"
SERIAL_VERSION = 1
TAG_F0FAST = 1
TAG_KMV = 2
TAG_AMS = 3
TAG_PSTABLE = 4
TAG_COUNTSKETCH = 5
TAG_ENTROPY_SAMPLE = 6

DELTA_MIN = 2.0**-60

# config defaults; the analyses fix only the growth rates, not constants
F0FAST_C_B = 32
F0FAST_C_D = 10
KMV_C_K = 3
PSTABLE_C_K = 5
COUNTSKETCH_C_R = 4
COUNTSKETCH_C_B = 6
ENTROPY_H_DENSITY_MAX = math.log2(math.e) / math.e  # max of -p*log2(p)


def _serial_header(tag: int) -> bytes:
    return SERIAL_MAGIC + struct.pack("<HH", SERIAL_VERSION, tag)


class StaticSketch:
    """Uniform contract for non-robust sketches.

    update() is deterministic given (state, seed, update); query() never
    mutates state; restart(seed) zeroes all state and re-draws randomness
    so that post-restart behavior is independent of pre-restart inputs.
    """

    models = (INSERTION_ONLY, TURNSTILE)
    #: True iff the state depends only on the *set* of distinct identities
    #: fed (deltas and repetitions are irrelevant).
    duplicate_insensitive = False

    def update(self, u: StreamUpdate) -> None:
        raise NotImplementedError

    def query(self) -> float:
        raise NotImplementedError

    def restart(self, seed: int) -> None:
        raise NotImplementedError

    def serialize(self) -> bytes:
        raise NotImplementedError

    def _check_model(self, u: StreamUpdate) -> None:
        if INSERTION_ONLY in self.models and TURNSTILE not in self.models:
            if u.delta < 0:
                raise ModelViolation("insertion-only sketch got a negative update")


# ---------------------------------------------------------------------------
# Fast distinct elements (level lists with saturation).


class F0Fast(StaticSketch):
    """Distinct-elements estimator with O(1) list work per update.

    Identities are routed by hash prefix into level lists L_0..L_ell;
    a list exceeding capacity B is deleted for good.  The first few
    distinct identities are also stored exactly, and the exact phase is
    sized to cover the range where no level is populated enough to
    estimate from (see exact_capacity below).
    """

    models = (INSERTION_ONLY,)
    duplicate_insensitive = True

    def __init__(self, n: int, eps: float, delta: float, seed: int):
        if not (0 < eps < 1) or not (0 < delta < 1):
            raise ValueError("eps, delta must be in (0,1)")
        if delta < DELTA_MIN:
            raise ValueError("delta underflows the configured minimum")
        self.n = n
        self.eps = eps
        self.delta = delta
        t = math.log2(max(2.0, math.log2(max(4, n)))) + math.log(1.0 / delta)
        self.B = math.ceil(F0FAST_C_B * t / eps**2)
        self.d = math.ceil(F0FAST_C_D * t)
        # levels only estimate reliably once ~2B/5 distinct ids exist, but
        # the delayed-reporting argument sizes the exact phase at d/eps;
        # take the max so there is no dead zone between the two regimes
        self.exact_capacity = max(math.ceil(self.d / eps), self.B)
        lg = math.log2(max(2, n))
        self.ell = min(max(math.ceil(2.5 * lg), math.ceil(2 * lg)), math.floor(3 * lg))
        self.ell = min(self.ell, 48)  # hash output range is capped at 2^48
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self.hash = KWiseHash.from_seed(seed, self.d, self.ell)
        self.levels: Dict[int, set] = {}
        self.deleted: set = set()
        self.exact_small: set = set()
        self.overflowed = False

    def _level(self, a: int) -> int:
        h = self.hash(a)
        return self.ell - h.bit_length() if h > 0 else self.ell

    def update(self, u: StreamUpdate) -> None:
        if u.delta < 0:
            raise ModelViolation("F0Fast is insertion-only")
        a = u.a
        if a in self.exact_small:
            pass
        elif len(self.exact_small) < self.exact_capacity:
            self.exact_small.add(a)
        else:
            self.overflowed = True
        j = self._level(a)
        if j in self.deleted:
            return
        lst = self.levels.setdefault(j, set())
        lst.add(a)
        if len(lst) > self.B:
            self.deleted.add(j)
            del self.levels[j]

    def stored_identities(self) -> int:
        return sum(len(s) for s in self.levels.values())

    def query(self) -> float:
        if not self.overflowed:
            return float(len(self.exact_small))
        best = -1
        for j, lst in self.levels.items():
            if len(lst) >= self.B / 5 and j > best:
                best = j
        if best < 0:
            # degenerate: reachable only with vanishing probability
            return float(self.exact_capacity)
        return float(2 ** (best + 1) * len(self.levels[best]))

    def serialize(self) -> bytes:
        parts = [_serial_header(TAG_F0FAST)]
        parts.append(struct.pack("<QQB", self.seed, len(self.exact_small), self.overflowed))
        parts.append(np.array(sorted(self.exact_small), dtype="<u8").tobytes())
        parts.append(struct.pack("<H", len(self.deleted)))
        parts.append(np.array(sorted(self.deleted), dtype="<u2").tobytes())
        for j in sorted(self.levels):
            lst = self.levels[j]
            parts.append(struct.pack("<HI", j, len(lst)))
            parts.append(np.array(sorted(lst), dtype="<u8").tobytes())
        return b"".join(parts)


class KMV(StaticSketch):
    """k-minimum-values distinct-elements tracker.

    Keeps the k smallest 64-bit hashes of the identities seen; exact while
    fewer than k distinct hashes exist, (k-1)/v_k afterwards.  O(log k)
    per update and duplicate-insensitive, which makes it the workhorse
    inside the F0 robustness wrappers.
    """

    models = (INSERTION_ONLY,)
    duplicate_insensitive = True

    def __init__(self, eps: float, delta: float, seed: int, k: Optional[int] = None):
        if not (0 < eps < 1) or not (0 < delta < 1):
            raise ValueError("eps, delta must be in (0,1)")
        self.eps = eps
        self.delta = max(delta, DELTA_MIN)
        self.k = k if k is not None else math.ceil(KMV_C_K * math.log(2.0 / self.delta) / eps**2)
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self._kept: set = set()
        self._heap: List[int] = []  # negated hashes: heap[0] is -max

    def update(self, u: StreamUpdate) -> None:
        if u.delta < 0:
            raise ModelViolation("KMV is insertion-only")
        self._ingest(mix64(self.seed ^ mix64(u.a)))

    def _ingest(self, h: int) -> None:
        if h in self._kept:
            return
        if len(self._kept) < self.k:
            self._kept.add(h)
            heapq.heappush(self._heap, -h)
        elif h < -self._heap[0]:
            self._kept.remove(-heapq.heappushpop(self._heap, -h))
            self._kept.add(h)

    def query(self) -> float:
        if len(self._kept) < self.k:
            return float(len(self._kept))
        vk = (-self._heap[0] + 1) / 2.0**64
        return (self.k - 1) / vk

    def serialize(self) -> bytes:
        body = np.array(sorted(self._kept), dtype="<u8").tobytes()
        return _serial_header(TAG_KMV) + struct.pack("<QI", self.seed, len(self._kept)) + body


# ---------------------------------------------------------------------------
# Linear sketches: AMS, p-stable, count-sketch.


class AMS(StaticSketch):
    """The classic F2 sketch: y = S f with +-1/sqrt(t) entries, estimate
    ||y||^2.  The matrix is regenerated per (seed, row, column), so state
    is just the t-vector y."""

    def __init__(self, t: int, seed: int):
        if t < 1:
            raise ValueError("t must be positive")
        self.t = t
        self._rows = np.arange(t, dtype=np.uint64)
        self._scale = 1.0 / math.sqrt(t)
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self.y = np.zeros(self.t, dtype=np.float64)

    def _column(self, a: int) -> np.ndarray:
        base = np.uint64(mix64(self.seed ^ mix64(a)))
        with np.errstate(over="ignore"):
            keys = base + self._rows
        return signs_from_keys(keys)

    def update(self, u: StreamUpdate) -> None:
        self.y += (u.delta * self._scale) * self._column(u.a)

    def query(self) -> float:
        return float(self.y @ self.y)

    def serialize(self) -> bytes:
        head = _serial_header(TAG_AMS) + struct.pack("<QI", self.seed, self.t)
        return head + self.y.astype("<f8").tobytes()


def ams_estimate(state: AMS) -> float:
    return state.query()


class PStable(StaticSketch):
    """Lp norm estimator from p-stable projections, median-of-rows
    normalized by the median of |standard p-stable|.

    query() returns the F_p estimate (norm**p); pstable_estimate() gives
    the raw norm estimate.
    """

    def __init__(
        self,
        p: float,
        eps: float,
        delta: float,
        seed: int,
        k: Optional[int] = None,
    ):
        if not (0 < p <= 2):
            raise ValueError("p must be in (0,2]")
        if not (0 < eps < 1):
            raise ValueError("eps must be in (0,1)")
        self.p = p
        self.eps = eps
        self.delta = max(delta, DELTA_MIN)
        # the sample median of |p-stable| spreads out as p drops below 1
        # (the density at the median flattens), hence the extra 1/p^2
        heavy_tail = max(1.0, 1.0 / p**2)
        self.k = k if k is not None else math.ceil(
            PSTABLE_C_K * heavy_tail * math.log(2.0 / self.delta) / eps**2
        )
        self._rows = np.arange(self.k, dtype=np.uint64)
        self._norm_const = stable_abs_median(p)
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self.y = np.zeros(self.k, dtype=np.float64)

    def update(self, u: StreamUpdate) -> None:
        base = np.uint64(mix64(self.seed ^ mix64(u.a)))
        with np.errstate(over="ignore"):
            keys = base + self._rows
        self.y += float(u.delta) * stable_from_keys(keys, self.p)

    def norm_query(self) -> float:
        return float(np.median(np.abs(self.y))) / self._norm_const

    def query(self) -> float:
        return self.norm_query() ** self.p

    def serialize(self) -> bytes:
        head = _serial_header(TAG_PSTABLE) + struct.pack("<QId", self.seed, self.k, self.p)
        return head + self.y.astype("<f8").tobytes()


def pstable_estimate(state: PStable) -> float:
    """Estimate of the Lp norm ||f||_p (not its p-th power)."""
    return state.norm_query()


class CountSketch:
    """Count-sketch point queries: r rows x b signed buckets, 4-wise
    independent bucket and sign hashes, estimate = median over rows.

    Not a scalar-estimate StaticSketch; its query is per-coordinate.
    """

    HASH_DEGREE = 4
    HASH_BITS = 40  # hashed into 2^40 then reduced mod b; bias ~ b/2^40

    def __init__(
        self,
        n: int,
        eps: float,
        delta: float,
        seed: int,
        r: Optional[int] = None,
        b: Optional[int] = None,
    ):
        self.n = n
        self.eps = eps
        self.delta = delta
        self.r = r if r is not None else math.ceil(COUNTSKETCH_C_R * math.log(n / delta))
        self.b = b if b is not None else math.ceil(COUNTSKETCH_C_B / eps**2)
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        deg = self.HASH_DEGREE
        raw = mix64_np(
            np.uint64(seed)
            ^ mix64_np(np.arange(2 * self.r * deg, dtype=np.uint64))
        )
        coeffs = (raw % np.uint64(MERSENNE61)).reshape(2, self.r, deg)
        self._bucket_coeffs = coeffs[0]
        self._sign_coeffs = coeffs[1]
        self.table = np.zeros((self.r, self.b), dtype=np.float64)
        self._row_idx = np.arange(self.r)

    def _hash_rows(self, a: int):
        x = np.uint64(a % MERSENNE61)
        p = np.uint64(MERSENNE61)
        mask = np.uint64((1 << self.HASH_BITS) - 1)
        out = []
        for coeffs in (self._bucket_coeffs, self._sign_coeffs):
            acc = coeffs[:, -1].copy()
            for j in range(self.HASH_DEGREE - 2, -1, -1):
                acc = _mulmod61_np(acc, x)
                with np.errstate(over="ignore"):
                    acc = acc + coeffs[:, j]
                acc = np.where(acc >= p, acc - p, acc)
            out.append(acc & mask)
        buckets = (out[0] % np.uint64(self.b)).astype(np.int64)
        signs = np.where(out[1] & np.uint64(1), 1.0, -1.0)
        return buckets, signs

    def update(self, u: StreamUpdate) -> None:
        buckets, signs = self._hash_rows(u.a)
        np.add.at(self.table, (self._row_idx, buckets), u.delta * signs)

    def point_query(self, i: int) -> float:
        buckets, signs = self._hash_rows(i)
        return float(np.median(signs * self.table[self._row_idx, buckets]))

    def serialize(self) -> bytes:
        head = _serial_header(TAG_COUNTSKETCH) + struct.pack(
            "<QII", self.seed, self.r, self.b
        )
        return head + self.table.astype("<f8").tobytes()


def countsketch_point_query(state: CountSketch, i: int) -> float:
    return state.point_query(i)


# ---------------------------------------------------------------------------
# Entropy.


def entropy_estimate(f1_est: float, fbeta_est: float, beta: float) -> float:
    """Renyi entropy H_beta in bits from estimates of ||x||_1 and
    ||x||_beta; sandwiches Shannon entropy for beta slightly above 1.

    beta - 1 can be ~1e-4, so the log of the norm ratio goes through
    log1p rather than a raw quotient of logs.
    """
    if not (1 < beta < 1.5):
        raise ValueError("beta must be in (1, 1.5)")
    if f1_est <= 0 or fbeta_est <= 0:
        raise ValueError("norm estimates must be positive")
    log_ratio = math.log1p((fbeta_est - f1_est) / f1_est) / math.log(2)
    return beta * log_ratio / (1.0 - beta)


class EntropySample(StaticSketch):
    """Additive-error entropy estimator by Horvitz-Thompson sampling of
    coordinates: each identity is kept with probability q (decided by a
    seeded hash), kept identities are counted exactly, and the plug-in
    entropy of the kept coordinates is inflated by 1/q.

    q is sized from the Chebyshev bound Var <= (1-q)/q * h_max * log2(m);
    at desk scale this drives q to ~1, i.e. the constants of sub-linear
    entropy estimation do not pay off yet, but the estimator's (eps,
    delta) contract is honest at every scale.

    query() returns 2^H so the robustness wrappers can treat entropy as a
    multiplicatively-tracked nonnegative quantity; entropy_query() gives
    the additive-scale estimate in bits.
    """

    models = (INSERTION_ONLY,)

    def __init__(self, m: int, eps: float, delta: float, seed: int):
        if not (0 < eps < 1) or not (0 < delta < 1):
            raise ValueError("eps, delta must be in (0,1)")
        self.m = m
        self.eps = eps
        self.delta = max(delta, DELTA_MIN)
        var_budget = self.delta * eps**2
        sum_h2_bound = ENTROPY_H_DENSITY_MAX * math.log2(max(2, m))
        self.q = min(1.0, sum_h2_bound / (sum_h2_bound + var_budget))
        self.restart(seed)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self._thresh = int(self.q * 2.0**64)
        self._counts: Dict[int, int] = {}
        self._s1 = 0  # sum of sampled counts
        self._slog = 0.0  # sum c*log2(c) over sampled
        self._f1 = 0

    def _sampled(self, a: int) -> bool:
        return mix64(self.seed ^ mix64(a)) < self._thresh

    def update(self, u: StreamUpdate) -> None:
        if u.delta < 0:
            raise ModelViolation("EntropySample is insertion-only")
        self._f1 += u.delta
        if not self._sampled(u.a):
            return
        old = self._counts.get(u.a, 0)
        new = old + u.delta
        self._counts[u.a] = new
        self._s1 += u.delta
        if old > 0:
            self._slog -= old * math.log2(old)
        self._slog += new * math.log2(new)

    def entropy_query(self) -> float:
        if self._f1 == 0 or self._s1 == 0:
            return 0.0
        h = (self._s1 * math.log2(self._f1) - self._slog) / self._f1
        return max(0.0, h / self.q)

    def query(self) -> float:
        return 2.0 ** self.entropy_query()

    def serialize(self) -> bytes:
        head = _serial_header(TAG_ENTROPY_SAMPLE) + struct.pack(
            "<QQI", self.seed, self._f1 & ((1 << 64) - 1), len(self._counts)
        )
        body = b"".join(
            struct.pack("<QQ", a, c) for a, c in sorted(self._counts.items())
        )
        return head + body


class ExactOracleSketch(StaticSketch):
    """Exact-oracle stub behind the StaticSketch interface; used to test
    that the wrappers reduce to pure hold-rounding of the true values."""

    def __init__(self, n: int, kind: str, p: Optional[float] = None):
        self.n = n
        self.kind = kind
        self.p = p
        self.restart(0)

    def restart(self, seed: int) -> None:
        self.seed = seed
        self._stats = ExactStats(self.n, p=self.p)

    def update(self, u: StreamUpdate) -> None:
        self._stats.update(u)

    def query(self) -> float:
        return self._stats.value(self.kind)


def strong_track(factory, eps: float, delta: float, m: int) -> StaticSketch:
    """Instantiate a one-shot (eps, delta') sketch at delta' = delta/m so
    a union bound over the m steps yields strong tracking on any fixed
    stream."""
    if m < 1:
        raise ValueError("m must be positive")
    delta_prime = delta / m
    if delta_prime < DELTA_MIN:
        raise ValueError(
            "delta/m underflows the configured minimum; use a larger delta"
        )
    return factory(eps, delta_prime)


# ---------------------------------------------------------------------------
# Banks: many sketch copies in shared state, for the wrappers.


class SketchBank:
    """Holds n_copies sketch instances; update_all feeds one update to
    every copy, query/restart address a single copy."""

    n_copies: int

    def update_all(self, u: StreamUpdate) -> None:
        raise NotImplementedError

    def query(self, c: int) -> float:
        raise NotImplementedError

    def restart(self, c: int, seed: int) -> None:
        raise NotImplementedError


class ListBank(SketchBank):
    """Generic bank over independent StaticSketch instances."""

    def __init__(self, sketches: List[StaticSketch]):
        self.sketches = sketches
        self.n_copies = len(sketches)

    def update_all(self, u: StreamUpdate) -> None:
        for s in self.sketches:
            s.update(u)

    def query(self, c: int) -> float:
        return self.sketches[c].query()

    def restart(self, c: int, seed: int) -> None:
        self.sketches[c].restart(seed)


class KMVBank(SketchBank):
    """Bank of KMV copies exploiting duplicate-insensitivity: an identity
    is forwarded to a copy only if that copy has not seen it since its
    last restart, which makes repeated identities nearly free."""

    def __init__(self, copies: List[KMV]):
        self.sketches = copies
        self.n_copies = len(copies)
        self._step = 0
        self._last_step: Dict[int, int] = {}
        self._restart_step = np.zeros(self.n_copies, dtype=np.int64)
        self._seeds = np.array([s.seed for s in copies], dtype=np.uint64)

    def _hashes(self, a: int) -> np.ndarray:
        return mix64_np(self._seeds ^ np.uint64(mix64(a)))

    def update_all(self, u: StreamUpdate) -> None:
        if u.delta < 0:
            raise ModelViolation("KMV is insertion-only")
        self._step += 1
        last = self._last_step.get(u.a, -1)
        if last < 0:
            hs = self._hashes(u.a)
            for c, s in enumerate(self.sketches):
                s._ingest(int(hs[c]))
        else:
            # copies restarted at or after the id's last occurrence have
            # forgotten it and must see it again
            stale = np.nonzero(self._restart_step >= last)[0]
            if stale.size:
                hs = self._hashes(u.a)
                for c in stale:
                    self.sketches[c]._ingest(int(hs[c]))
        self._last_step[u.a] = self._step

    def query(self, c: int) -> float:
        return self.sketches[c].query()

    def restart(self, c: int, seed: int) -> None:
        self.sketches[c].restart(seed)
        self._restart_step[c] = self._step
        self._seeds[c] = np.uint64(seed)


class AmsBank(SketchBank):
    """Bank of AMS copies with shared [copies, t] state and a capped
    per-identity cache of int8 sign matrices, invalidated lazily per copy
    restart (a per-bank generation counter makes the common hit cheap).

    Shared state is float32: entries are O(||f||_2 / sqrt(t)) and the
    rounding noise of float32 accumulation is orders of magnitude below
    the sketch's own estimation error.
    """

    CACHE_CAP = 4096

    def __init__(self, n_copies: int, t: int, seeds: List[int]):
        self.n_copies = n_copies
        self.t = t
        self._scale = 1.0 / math.sqrt(t)
        self._rows = np.arange(t, dtype=np.uint64)
        self.seeds = list(seeds)
        self.y = np.zeros((n_copies, t), dtype=np.float32)
        self._gen = np.zeros(n_copies, dtype=np.int64)
        self._gen_total = 0
        self._seed_arr = np.array(self.seeds, dtype=np.uint64)
        self._cache: Dict[int, list] = {}

    def _signs_np(self, seeds: np.ndarray, a: int) -> np.ndarray:
        """[len(seeds), t] int8 signs for identity a, one row per seed."""
        bases = mix64_np(seeds ^ np.uint64(mix64(a)))
        with np.errstate(over="ignore"):
            keys = bases[:, None] + self._rows[None, :]
        bits = (mix64_np(keys) & np.uint64(1)).astype(np.int8)
        return 2 * bits - 1

    def _signs_for(self, a: int) -> np.ndarray:
        """[copies, t] int8 signs for identity a."""
        entry = self._cache.get(a)
        if entry is not None:
            signs, total, gens = entry
            if total != self._gen_total:
                stale = np.nonzero(gens != self._gen)[0]
                signs[stale] = self._signs_np(self._seed_arr[stale], a)
                entry[1] = self._gen_total
                entry[2] = self._gen.copy()
            return signs
        signs = self._signs_np(self._seed_arr, a)
        if len(self._cache) < self.CACHE_CAP:
            self._cache[a] = [signs, self._gen_total, self._gen.copy()]
        return signs

    def update_all(self, u: StreamUpdate) -> None:
        ds = np.float32(u.delta * self._scale)
        self.y += ds * self._signs_for(u.a)

    def query(self, c: int) -> float:
        return float(self.y[c] @ self.y[c])

    def restart(self, c: int, seed: int) -> None:
        self.seeds[c] = seed
        self._seed_arr[c] = np.uint64(seed)
        self.y[c] = 0.0
        self._gen[c] += 1
        self._gen_total += 1


class CountSketchBank:
    """Many count-sketch copies sharing one frequency accumulator.

    Copies are read only at isolated query points, so per-update work is
    a single counter increment; a copy's [r, b] table is materialized on
    demand from the frequency deltas accumulated since its restart.  The
    sketch is linear, so this is identical to eager per-update ingestion
    with the same hash functions.
    """

    HASH_DEGREE = 4
    HASH_BITS = 40

    def __init__(
        self,
        n_copies: int,
        n: int,
        eps: float,
        delta: float,
        seeds: List[int],
        r: Optional[int] = None,
        b: Optional[int] = None,
    ):
        self.n_copies = n_copies
        self.n = n
        self.r = r if r is not None else math.ceil(COUNTSKETCH_C_R * math.log(n / delta))
        self.b = b if b is not None else math.ceil(COUNTSKETCH_C_B / eps**2)
        self.seeds = list(seeds)
        deg = self.HASH_DEGREE
        self._coeffs = np.zeros((2, n_copies, self.r, deg), dtype=np.uint64)
        for c in range(n_copies):
            self._set_coeffs(c, self.seeds[c])
        self._freq = np.zeros(n + 1, dtype=np.int64)
        self._snap = np.zeros((n_copies, n + 1), dtype=np.int64)

    def _set_coeffs(self, c: int, seed: int) -> None:
        deg = self.HASH_DEGREE
        raw = mix64_np(
            np.uint64(seed) ^ mix64_np(np.arange(2 * self.r * deg, dtype=np.uint64))
        )
        self._coeffs[:, c] = (raw % np.uint64(MERSENNE61)).reshape(2, self.r, deg)

    def update_all(self, u: StreamUpdate) -> None:
        self._freq[u.a] += u.delta

    def _hash_ids(self, c: int, ids: np.ndarray):
        """Buckets [r, k] and signs [r, k] of one copy over an id array."""
        x = np.asarray(ids, dtype=np.uint64) % np.uint64(MERSENNE61)
        p = np.uint64(MERSENNE61)
        mask = np.uint64((1 << self.HASH_BITS) - 1)
        out = []
        for which in range(2):
            coeffs = self._coeffs[which, c]  # [r, deg]
            acc = np.broadcast_to(coeffs[:, -1:], (self.r, x.size)).copy()
            for j in range(self.HASH_DEGREE - 2, -1, -1):
                acc = _mulmod61_np(acc, x)
                acc = acc + coeffs[:, j : j + 1]
                acc = np.where(acc >= p, acc - p, acc)
            out.append(acc & mask)
        buckets = (out[0] % np.uint64(self.b)).astype(np.int64)
        signs = np.where(out[1] & np.uint64(1), 1.0, -1.0)
        return buckets, signs

    def point_query(self, c: int, i: int) -> float:
        return float(self.point_query_all(c, np.array([i]))[0])

    def point_query_all(self, c: int, ids: np.ndarray) -> np.ndarray:
        """Vectorized point queries for one copy over an id array.

        Hashes the queried ids and the pending frequency deltas in one
        pass: the copy's table is rebuilt from the deltas, then read at
        the queried positions.
        """
        ids = np.asarray(ids, dtype=np.int64)
        diff = self._freq - self._snap[c]
        nz = np.nonzero(diff)[0]
        extra = np.setdiff1d(nz, ids)
        all_ids = np.concatenate([ids, extra]) if extra.size else ids
        buckets, signs = self._hash_ids(c, all_ids)
        weights = signs * diff[all_ids]
        flat = buckets + (np.arange(self.r, dtype=np.int64) * self.b)[:, None]
        table = np.bincount(
            flat.ravel(), weights=weights.ravel(), minlength=self.r * self.b
        ).reshape(self.r, self.b)
        k = ids.size
        vals = signs[:, :k] * table[np.arange(self.r)[:, None], buckets[:, :k]]
        return np.median(vals, axis=0)

    def restart(self, c: int, seed: int) -> None:
        self.seeds[c] = seed
        self._set_coeffs(c, seed)
        self._snap[c] = self._freq
