"""Robustness wrappers: sketch switching (plain and cyclic-restart),
computation paths, robust heavy hitters, and the keyed oracle shield.

The wrappers share one idea: the adversary only learns randomness when
the published output moves, so either keep enough fresh copies to survive
every output change (switching), or make the single copy so reliable that
every reachable output history is simultaneously correct (paths).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Set

import numpy as np

from .core import ModelViolation, StreamUpdate, within_rel
from .hashing import SeedTree, mix64
from .sketches import (
    DELTA_MIN,
    AmsBank,
    CountSketchBank,
    KMV,
    KMVBank,
    SketchBank,
    StaticSketch,
)

STATUS_OK = "ok"
STATUS_EXHAUSTED = "exhausted"


def cyclic_copy_count(eps: float) -> int:
    """Live copies needed so a restarted copy is only reused after the
    tracked quantity grew by a factor 100/eps (one (1+eps/2) step per
    switch)."""
    return math.ceil(math.log(100.0 / eps) / math.log1p(eps / 2.0))


class SketchSwitch:
    """Sketch switching over a bank of copies.

    Publishes a held output g~ and reads only the active copy; when g~
    drifts outside (1 +- eps/2) of the active copy's estimate, adopts the
    estimate and advances.  Plain mode burns through the bank once and
    reports exhaustion; cyclic mode restarts the retired copy on the
    stream suffix and cycles.
    """

    def __init__(
        self,
        bank: SketchBank,
        eps: float,
        lam: int,
        mode: str = "plain",
        seeds: Optional[SeedTree] = None,
    ):
        if mode not in ("plain", "cyclic"):
            raise ValueError("mode must be 'plain' or 'cyclic'")
        if not (0 < eps < 1):
            raise ValueError("eps must be in (0,1)")
        self.bank = bank
        self.eps = eps
        self.lam = lam
        self.mode = mode
        self.seeds = seeds if seeds is not None else SeedTree(0)
        self.rho = 0
        self.held: Optional[float] = None
        self.exhausted = False
        self.switches = 0
        self.output_changes = 0
        self.step_count = 0
        self._restart_counter = 0
        # instrumentation for the analysis invariants
        self.first_query_step = [None] * bank.n_copies  # type: List[Optional[int]]
        self._restart_value = [None] * bank.n_copies  # type: List[Optional[float]]
        self.cert_violations = 0

    def step(self, u: StreamUpdate) -> float:
        self.step_count += 1
        self.bank.update_all(u)
        if self.exhausted:
            return self.held if self.held is not None else 0.0
        c = self.rho % self.bank.n_copies
        if self.first_query_step[c] is None:
            self.first_query_step[c] = self.step_count
        y = max(0.0, self.bank.query(c))
        if self.held is None:
            self.held = y
            self.output_changes = 1
            return self.held
        if within_rel(self.held, y, self.eps / 2):
            return self.held
        # adopt and advance; the retired copy's randomness is now public
        if self._restart_value[c] is not None:
            # reused copy: the missed prefix must be a negligible fraction
            if y > 0 and self._restart_value[c] > (self.eps / 100.0) * y:
                self.cert_violations += 1
        if self.held != y:
            self.output_changes += 1
        self.held = y
        self.switches += 1
        if self.mode == "plain":
            self.rho += 1
            if self.rho >= self.bank.n_copies:
                self.exhausted = True
        else:
            self._restart_counter += 1
            seed = self.seeds.child("restart", self._restart_counter).seed()
            self.bank.restart(c, seed)
            self._restart_value[c] = self.held
            self.first_query_step[c] = None
            self.rho = (self.rho + 1) % self.bank.n_copies
        return self.held

    @property
    def status(self) -> str:
        return STATUS_EXHAUSTED if self.exhausted else STATUS_OK

    def query(self) -> float:
        return self.held if self.held is not None else 0.0


def make_robust_f0(
    n: int,
    m: int,
    eps: float,
    delta: float,
    seed_tree: SeedTree,
    mode: str = "cyclic",
    lam: Optional[int] = None,
) -> SketchSwitch:
    """Adversarially robust distinct-elements tracking via sketch
    switching over KMV copies run at (eps/8, delta/copies)."""
    from .flipnum import flip_bound_fp

    if lam is None:
        lam = flip_bound_fp(n, m, 1, 0, eps / 8)
    n_copies = cyclic_copy_count(eps) if mode == "cyclic" else lam
    inner_delta = max(delta / (n_copies * m), DELTA_MIN)
    copies = [
        KMV(eps / 8, inner_delta, seed_tree.child("copy", i).seed())
        for i in range(n_copies)
    ]
    return SketchSwitch(KMVBank(copies), eps, lam, mode=mode, seeds=seed_tree.child("switch"))


class ComputationPaths:
    """One inner sketch at drastically reduced failure probability delta0,
    with hold-rounded outputs.

    delta0 = delta / (C(m, lam) * T^lam) is astronomically small for real
    parameters; it is clamped at DELTA_MIN with a warning, and both the
    theoretical and clamped values are recorded.
    """

    T_BITS = 32  # published-output precision

    def __init__(
        self,
        factory: Callable[[float, float], StaticSketch],
        eps: float,
        delta: float,
        m: int,
        lam: int,
        seed: int = 0,
    ):
        if not (0 < eps < 1) or not (0 < delta < 1):
            raise ValueError("eps, delta must be in (0,1)")
        self.eps = eps
        self.delta = delta
        self.m = m
        self.lam = lam
        # log2(1/delta0) = log2(1/delta) + log2(C(m, lam)) + lam * T_BITS
        log2_comb = (
            math.lgamma(m + 1) - math.lgamma(lam + 1) - math.lgamma(m - lam + 1)
        ) / math.log(2) if lam <= m else 0.0
        self.log2_delta0_theoretical = -(
            math.log2(1.0 / delta) + log2_comb + lam * self.T_BITS
        )
        self.delta0 = max(2.0**self.log2_delta0_theoretical, DELTA_MIN)
        if 2.0**self.log2_delta0_theoretical < DELTA_MIN:
            warnings.warn(
                f"computation-paths delta0 = 2^{self.log2_delta0_theoretical:.0f} "
                f"underflows; clamped to 2^-60",
                stacklevel=2,
            )
        self.inner = factory(eps / 8, self.delta0)
        if seed:
            self.inner.restart(seed)
        self.held: Optional[float] = None
        self.output_changes = 0
        self.budget_exceeded = False

    def step(self, u: StreamUpdate) -> float:
        self.inner.update(u)
        v = max(0.0, self.inner.query())
        if self.held is None:
            self.held = v
            self.output_changes = 1
        elif not within_rel(self.held, v, self.eps / 2):
            self.held = v
            self.output_changes += 1
            if self.output_changes > self.lam:
                self.budget_exceeded = True
        return self.held

    @property
    def status(self) -> str:
        return STATUS_EXHAUSTED if self.budget_exceeded else STATUS_OK

    def query(self) -> float:
        if self.held is None:
            return max(0.0, self.inner.query())
        return self.held


def make_robust_fp(
    p: float,
    n: int,
    m: int,
    M: int,
    eps: float,
    delta: float,
    seed: int,
    lam: Optional[int] = None,
) -> ComputationPaths:
    """Robust F_p tracking for turnstile streams with a promised flip
    budget: computation paths over a p-stable inner sketch.

    The inner sketch's norm-level accuracy is eps/(8p) so that its F_p
    estimate lands within (1 +- eps/8).
    """
    from .flipnum import flip_bound_fp
    from .sketches import PStable

    if lam is None:
        lam = flip_bound_fp(n, m, M, p, eps / 8)

    def factory(inner_eps: float, delta0: float) -> StaticSketch:
        return PStable(p, inner_eps / max(p, 1.0), delta0, seed)

    return ComputationPaths(factory, eps, delta, m, lam, seed=seed)


def make_robust_entropy(
    n: int,
    m: int,
    eps: float,
    delta: float,
    seed: int,
    lam: Optional[int] = None,
) -> ComputationPaths:
    """Robust additive-eps entropy: computation paths over the sampled
    entropy estimator, tracked multiplicatively on 2^H.

    An additive eps in bits corresponds to a (2^eps - 1) multiplicative
    tolerance on 2^H, which is what the wrapper's hold-rounding uses.
    """
    from .flipnum import flip_bound_entropy
    from .sketches import EntropySample

    if lam is None:
        lam = flip_bound_entropy(n, m, eps)
    eps_mult = min(0.5, 2.0**eps - 1.0)

    def factory(inner_eps: float, delta0: float) -> StaticSketch:
        # inner_eps is multiplicative on 2^H; convert back to bits
        additive = math.log2(1.0 + inner_eps)
        return EntropySample(m, additive, delta0, seed)

    return ComputationPaths(factory, eps_mult, delta, m, lam, seed=seed)


@dataclass
class HHOutput:
    heavy: Set[int]
    point_estimates: Dict[int, float]
    l2_estimate: float


class RobustHeavyHitters:
    """L2 heavy hitters under adaptive streams: a robust F2 tracker plus
    cycled count-sketch copies.

    The published point-estimate table refreshes only when the F2
    estimate crosses a (1+eps/2) power boundary; at a refresh the least
    recently restarted count-sketch copy is queried once and immediately
    restarted, so its randomness is spent on a single output.
    """

    TRACKER_EPS = 0.2
    TRACKER_ROWS = 512
    CS_EPS = 0.0625  # count-sketch point-query accuracy (buckets = 6/eps^2)
    CS_DELTA = 0.05
    # row error beyond CS_EPS*l2 is a >2 sigma event per bucket, so a
    # 24-row median already drives the per-query failure rate far below
    # the refresh count; the default row formula is overkill here
    CS_ROWS = 24

    def __init__(self, n: int, m: int, eps: float, seed_tree: SeedTree):
        self.n = n
        self.m = m
        self.eps = eps
        te = self.TRACKER_EPS
        n_track = cyclic_copy_count(te)
        tracker_seeds = [seed_tree.child("f2", i).seed() for i in range(n_track)]
        self.tracker = SketchSwitch(
            AmsBank(n_track, self.TRACKER_ROWS, tracker_seeds),
            te,
            lam=10**9,
            mode="cyclic",
            seeds=seed_tree.child("f2switch"),
        )
        # reuse only after the L2 norm grew by 100/eps: each refresh is a
        # (1+eps/2) F2 step, i.e. a sqrt(1+eps/2) step in the norm
        self.n_cs = math.ceil(
            2.0 * math.log(100.0 / eps) / math.log1p(eps / 2.0)
        )
        cs_seeds = [seed_tree.child("cs", i).seed() for i in range(self.n_cs)]
        self.cs = CountSketchBank(
            self.n_cs, n, self.CS_EPS, self.CS_DELTA, cs_seeds, r=self.CS_ROWS
        )
        self._seed_tree = seed_tree
        self._restart_counter = 0
        self._next_cs = 0
        self._cs_restart_f2 = [None] * self.n_cs  # type: List[Optional[float]]
        self.cert_violations = 0
        self._last_exponent: Optional[int] = None
        self.touched: Set[int] = set()
        self.f_hat: Dict[int, float] = {}
        self.heavy: Set[int] = set()
        self.refreshes = 0
        self._pending: Dict[int, int] = {}  # per-id mass since last refresh

    def step(self, u: StreamUpdate) -> HHOutput:
        if u.delta < 0:
            raise ModelViolation("robust heavy hitters is insertion-only")
        self.touched.add(u.a)
        pend = self._pending.get(u.a, 0) + u.delta
        self._pending[u.a] = pend
        f2_est = self.tracker.step(u)
        self.cs.update_all(u)
        r_est = math.sqrt(max(f2_est, 0.0))
        if f2_est > 0:
            exponent = math.floor(math.log(f2_est) / math.log1p(self.eps / 2))
            cross = self._last_exponent is None or exponent > self._last_exponent
            # an unreported id may have climbed across the reporting
            # threshold since the last refresh; its published estimate is
            # stale by at most its pending mass, so refresh when that
            # slack could flip the containment check
            stale = (
                not cross
                and u.a not in self.heavy
                and self.f_hat.get(u.a, 0.0) + pend >= 0.7 * self.eps * r_est
            )
            if cross or stale:
                self._last_exponent = exponent if cross else self._last_exponent
                self._refresh(f2_est, r_est)
        # heavy/f_hat are replaced wholesale at refreshes, never mutated,
        # so the output can share them without a defensive copy
        return HHOutput(self.heavy, self.f_hat, r_est)

    def _refresh(self, f2_est: float, r_est: float) -> None:
        c = self._next_cs
        prior = self._cs_restart_f2[c]
        if prior is not None and f2_est > 0:
            # reused copy: the missed prefix must carry negligible L2 mass
            if math.sqrt(prior) > (self.eps / 100.0) * math.sqrt(f2_est):
                self.cert_violations += 1
        ids = np.fromiter(self.touched, dtype=np.int64)
        est = self.cs.point_query_all(c, ids)
        self.f_hat = {int(i): float(v) for i, v in zip(ids, est)}
        thresh = 0.75 * self.eps * r_est
        self.heavy = {i for i, v in self.f_hat.items() if v > thresh}
        self._restart_counter += 1
        seed = self._seed_tree.child("cs-restart", self._restart_counter).seed()
        self.cs.restart(c, seed)
        self._cs_restart_f2[c] = f2_est
        self._next_cs = (c + 1) % self.n_cs
        self._pending = {}
        self.refreshes += 1

    @property
    def status(self) -> str:
        return self.tracker.status


class OracleShield:
    """Feeds the inner distinct-elements sketch Pi(identity) instead of
    the raw identity, with Pi a keyed 64-bit mixer restricted to a range
    large enough that collisions are vanishing at desk scale.

    The inner sketch must attest duplicate-insensitivity: replaying an
    identity must leave its state untouched, which is exactly what makes
    the keyed relabeling hide everything useful from the adversary.
    """

    RANGE_BITS = 61

    def __init__(self, inner: StaticSketch, seed: int, range_bits: Optional[int] = None):
        if not inner.duplicate_insensitive:
            raise ValueError(
                "oracle shield requires a duplicate-insensitive inner sketch"
            )
        self.inner = inner
        self.seed = seed
        self.range_bits = range_bits if range_bits is not None else self.RANGE_BITS
        self._mask = (1 << self.range_bits) - 1

    def permute(self, a: int) -> int:
        return (mix64(self.seed ^ mix64(a)) & self._mask) + 1

    def step(self, u: StreamUpdate) -> float:
        if u.delta < 0:
            raise ModelViolation("oracle shield is insertion-only")
        self.inner.update(StreamUpdate(self.permute(u.a), u.delta))
        return self.inner.query()

    @property
    def status(self) -> str:
        return STATUS_OK

    def query(self) -> float:
        return self.inner.query()
