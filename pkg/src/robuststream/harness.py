"""The two-player game loop, the trial runner with statistics, and the
glue that builds algorithms and adversaries from experiment configs.

Protocol per round: the adversary (seeing only previously published,
32-bit-rounded outputs) emits an update; the algorithm processes it and
publishes an estimate; the harness records the exact value alongside.
The adversary never gets a code path to the exact oracle.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from . import adversaries as adv_mod
from .core import (
    BOUNDED_DELETION,
    INSERTION_ONLY,
    TURNSTILE,
    ExactStats,
    ModelViolation,
    StreamConfig,
    StreamUpdate,
    validate_update,
)
from .hashing import SeedTree
from .robust import (
    OracleShield,
    RobustHeavyHitters,
    make_robust_entropy,
    make_robust_f0,
    make_robust_fp,
)
from .sketches import AMS, KMV

STATUS_COMPLETED = "completed"
STATUS_EXHAUSTED = "wrapper-exhausted"
STATUS_HALTED = "attacker-halted"
STATUS_VIOLATION = "protocol-violation"

TRACE_HEADER = ["t", "update_a", "update_delta", "estimate", "exact", "rel_err", "active_copy", "status"]


class TranscriptView:
    """What the adversary is allowed to see: published outputs only."""

    __slots__ = ("_outputs",)

    def __init__(self):
        self._outputs: List[float] = []

    def _publish(self, value: float) -> None:
        self._outputs.append(value)

    @property
    def n_rounds(self) -> int:
        return len(self._outputs)

    @property
    def last_estimate(self) -> float:
        if not self._outputs:
            raise IndexError("no outputs published yet")
        return self._outputs[-1]

    def output(self, i: int) -> float:
        return self._outputs[i]


@dataclass
class RoundRecord:
    t: int
    update_a: int
    update_delta: int
    estimate: float
    exact: float
    rel_err: float
    active_copy: int
    status: str


@dataclass
class GameTranscript:
    rounds: List[RoundRecord] = field(default_factory=list)
    status: str = STATUS_COMPLETED
    diagnostic: str = ""

    def max_rel_err(self) -> float:
        return max((r.rel_err for r in self.rounds), default=0.0)

    def first_failure_step(self, eps: float) -> Optional[int]:
        for r in self.rounds:
            if r.rel_err > eps:
                return r.t
        return None


def _publish_round(value: float) -> float:
    # outputs are published at 32-bit precision
    return float(np.float32(value))


class _AlgAdapter:
    """Uniform step() over wrappers (which have step) and raw static
    sketches (update + query)."""

    def __init__(self, alg):
        self.alg = alg
        self._has_step = hasattr(alg, "step")

    def step(self, u: StreamUpdate) -> float:
        if self._has_step:
            return self.alg.step(u)
        self.alg.update(u)
        return self.alg.query()

    @property
    def status(self) -> str:
        return getattr(self.alg, "status", "ok")

    @property
    def active_copy(self) -> int:
        rho = getattr(self.alg, "rho", None)
        if rho is None:
            return -1
        n = getattr(getattr(self.alg, "bank", None), "n_copies", 0)
        return rho % n if n else rho


def play_game(
    alg,
    adversary: adv_mod.Adversary,
    kind: str,
    cfg: StreamConfig,
    p: Optional[float] = None,
    additive: bool = False,
    stop_when: Optional[Callable[[float, ExactStats], bool]] = None,
) -> GameTranscript:
    """Run the alternating game up to cfg.m rounds or adversary halt.

    With additive=True the rel_err column holds |estimate - exact|
    (entropy is judged additively); otherwise |estimate - exact| / exact.
    """
    ad = _AlgAdapter(alg)
    stats = ExactStats(cfg.n, p=p)
    view = TranscriptView()
    transcript = GameTranscript()
    for t in range(1, cfg.m + 1):
        u = adversary.next(view)
        if u is None:
            transcript.status = STATUS_HALTED
            break
        try:
            validate_update(u, cfg)
        except ModelViolation as e:
            transcript.status = STATUS_VIOLATION
            transcript.diagnostic = str(e)
            break
        stats.update(u)
        est = ad.step(u)
        published = _publish_round(est)
        view._publish(published)
        exact = stats.value(kind)
        if additive:
            err = abs(published - exact)
        elif exact != 0:
            err = abs(published - exact) / exact
        else:
            err = 0.0 if published == 0 else math.inf
        transcript.rounds.append(
            RoundRecord(t, u.a, u.delta, published, exact, err, ad.active_copy, ad.status)
        )
        if stop_when is not None and stop_when(published, stats):
            break
    if transcript.status == STATUS_COMPLETED and ad.status != "ok":
        transcript.status = STATUS_EXHAUSTED
    return transcript


def play_hh_game(
    hh: RobustHeavyHitters,
    adversary: adv_mod.Adversary,
    cfg: StreamConfig,
    eps: float,
    warmup: int = 32,
):
    """Heavy-hitters game: per step, check the two-sided containment
    (every id at eps * l2 must be reported; none at eps/2 * l2 may be).

    Returns (violations, rounds_played, status).
    """
    stats = ExactStats(cfg.n)
    view = TranscriptView()
    violations = 0
    rounds = 0
    # only ids near the eps/2 * l2 threshold can ever violate; track them
    # incrementally instead of scanning every nonzero count per step
    # (l2 is non-decreasing and counts grow one update at a time, so an
    # id is in the candidate set whenever it is above the threshold)
    candidates: set = set()
    counts = stats.f.counts
    for t in range(1, cfg.m + 1):
        u = adversary.next(view)
        if u is None:
            break
        validate_update(u, cfg)
        stats.update(u)
        out = hh.step(u)
        view._publish(_publish_round(out.l2_estimate))
        rounds = t
        l2 = stats.l2()
        thresh = 0.45 * eps * l2  # slack below eps/2 absorbs l2 growth
        if abs(counts.get(u.a, 0)) >= thresh:
            candidates.add(u.a)
        if t % 256 == 0:
            candidates = {i for i in candidates if abs(counts.get(i, 0)) >= thresh}
        if t <= warmup:
            continue
        for i in candidates:
            if abs(counts.get(i, 0)) >= eps * l2 and i not in out.heavy:
                violations += 1
        for i in out.heavy:
            if abs(counts.get(i, 0)) <= (eps / 2) * l2:
                violations += 1
    return violations, rounds, hh.status


# ---------------------------------------------------------------------------
# Config-driven experiments.


class ConfigError(ValueError):
    pass


_REQUIRED = {"problem": str, "wrapper": str, "n": int, "m": int, "eps": float, "seed": int}
_OPTIONAL = {
    "M": (int, 1_000_000),
    "delta": (float, 0.05),
    "p": (float, None),
    "alpha": (float, 1.0),
    "mode": (str, "cyclic"),
    "trials": (int, 1),
    "adversary": (dict, None),
    "out_dir": (str, None),
    "write_traces": (bool, True),
}


def validate_config(config: Dict) -> Dict:
    """Schema check with field paths in error messages; returns a config
    dict with defaults filled in."""
    out = {}
    for key, typ in _REQUIRED.items():
        if key not in config:
            raise ConfigError(f"missing required field: {key}")
        val = config[key]
        if typ is float and isinstance(val, int):
            val = float(val)
        if not isinstance(val, typ):
            raise ConfigError(f"{key}: expected {typ.__name__}, got {type(val).__name__}")
        out[key] = val
    for key, (typ, default) in _OPTIONAL.items():
        val = config.get(key, default)
        if val is not None:
            if typ is float and isinstance(val, int):
                val = float(val)
            if not isinstance(val, typ):
                raise ConfigError(f"{key}: expected {typ.__name__}, got {type(val).__name__}")
        out[key] = val
    if out["problem"] not in ("F0", "F2", "Fp", "entropy"):
        raise ConfigError(f"problem: unknown value {out['problem']!r}")
    if out["wrapper"] not in ("switch", "paths", "shield", "none"):
        raise ConfigError(f"wrapper: unknown value {out['wrapper']!r}")
    if out["adversary"] is not None and "type" not in out["adversary"]:
        raise ConfigError("adversary.type: missing")
    return out


def build_algorithm(config: Dict, seed_tree: SeedTree):
    problem, wrapper = config["problem"], config["wrapper"]
    n, m, eps, delta = config["n"], config["m"], config["eps"], config["delta"]
    seed = seed_tree.child("alg").seed()
    if problem == "F0":
        if wrapper == "switch":
            return make_robust_f0(n, m, eps, delta, seed_tree.child("alg"), mode=config["mode"])
        if wrapper == "shield":
            return OracleShield(KMV(eps, delta / m, seed), seed_tree.child("shield").seed())
        if wrapper == "none":
            return KMV(eps, delta / m, seed)
    if problem in ("F2", "Fp"):
        p = config["p"] if problem == "Fp" else 2.0
        if p is None:
            raise ConfigError("p: required for Fp")
        if wrapper == "paths":
            return make_robust_fp(p, n, m, config["M"], eps, delta, seed)
        if wrapper == "none" and p == 2.0:
            return AMS(math.ceil(2.0 / eps**2), seed)
    if problem == "entropy" and wrapper == "paths":
        return make_robust_entropy(n, m, eps, delta, seed)
    raise ConfigError(f"unsupported problem/wrapper combination: {problem}/{wrapper}")


def build_adversary(config: Dict, seed_tree: SeedTree) -> adv_mod.Adversary:
    spec = config["adversary"] or {"type": "uniform"}
    kind = spec["type"]
    n, m = config["n"], config["m"]
    seed = seed_tree.child("adv").seed()
    if kind == "replay":
        return adv_mod.ReplayAdversary(n, seed)
    if kind == "uniform":
        return adv_mod.ScriptedAdversary(adv_mod.gen_uniform(n, m, seed))
    if kind == "zipf":
        return adv_mod.ScriptedAdversary(adv_mod.gen_zipf(n, m, spec.get("s", 1.2), seed))
    if kind == "single-heavy":
        return adv_mod.ScriptedAdversary(adv_mod.gen_single_heavy(n, m, seed))
    if kind == "bounded-deletion":
        return adv_mod.ScriptedAdversary(
            adv_mod.gen_bounded_deletion(n, m, config["alpha"], config.get("p") or 1.0, seed)
        )
    if kind == "bounded-flip":
        return adv_mod.ScriptedAdversary(
            adv_mod.gen_bounded_flip_turnstile(
                n, m, config["M"], spec.get("lam", 20), config["eps"], seed
            )
        )
    if kind == "ams-attack":
        return adv_mod.AmsAttacker(
            spec["t"], n, seed, C=spec.get("c", 8.0), budget=spec.get("budget")
        )
    raise ConfigError(f"adversary.type: unknown value {kind!r}")


@dataclass
class TrialSummary:
    trials: int
    success_rate: float
    first_failure_steps: List[Optional[int]]
    max_rel_errs: List[float]
    statuses: List[str]
    master_seed: int
    config: Dict

    def to_dict(self) -> Dict:
        errs = sorted(self.max_rel_errs)

        def q(frac: float) -> float:
            if not errs:
                return 0.0
            return errs[min(len(errs) - 1, int(frac * len(errs)))]

        return {
            "trials": self.trials,
            "success_rate": self.success_rate,
            "first_failure_steps": self.first_failure_steps,
            "max_rel_errs": self.max_rel_errs,
            "max_rel_err_quantiles": {"q50": q(0.5), "q90": q(0.9), "q100": errs[-1] if errs else 0.0},
            "statuses": self.statuses,
            "master_seed": self.master_seed,
            "config": self.config,
        }


def write_trace(path: str, transcript: GameTranscript) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for r in transcript.rounds:
            w.writerow(
                [r.t, r.update_a, r.update_delta, repr(r.estimate), repr(r.exact), repr(r.rel_err), r.active_copy, r.status]
            )


def read_trace(path: str) -> GameTranscript:
    transcript = GameTranscript()
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header: {header}")
        for row in reader:
            transcript.rounds.append(
                RoundRecord(
                    int(row[0]), int(row[1]), int(row[2]), float(row[3]),
                    float(row[4]), float(row[5]), int(row[6]), row[7],
                )
            )
    return transcript


def run_trials(config: Dict) -> TrialSummary:
    """Run N independent games with seeds derived from the master seed by
    trial index; write per-trial traces and summary.json if out_dir is
    set."""
    config = validate_config(config)
    master = SeedTree(config["seed"])
    model = TURNSTILE if config["problem"] in ("F2", "Fp") else INSERTION_ONLY
    if config["alpha"] > 1.0:
        model = BOUNDED_DELETION
    cfg = StreamConfig(config["n"], config["m"], config["M"], model=model, alpha=config["alpha"])
    kind = config["problem"]
    additive = kind == "entropy"
    p = config.get("p")
    out_dir = config["out_dir"]
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    first_failures: List[Optional[int]] = []
    max_errs: List[float] = []
    statuses: List[str] = []
    successes = 0
    for trial in range(config["trials"]):
        tree = master.child("trial", trial)
        alg = build_algorithm(config, tree)
        adversary = build_adversary(config, tree)
        transcript = play_game(alg, adversary, kind, cfg, p=p, additive=additive)
        ff = transcript.first_failure_step(config["eps"])
        first_failures.append(ff)
        max_errs.append(transcript.max_rel_err())
        statuses.append(transcript.status)
        if ff is None and transcript.status in (STATUS_COMPLETED, STATUS_HALTED):
            successes += 1
        if out_dir and config["write_traces"]:
            write_trace(os.path.join(out_dir, f"trace_{trial}.csv"), transcript)
    summary = TrialSummary(
        trials=config["trials"],
        success_rate=successes / max(1, config["trials"]),
        first_failure_steps=first_failures,
        max_rel_errs=max_errs,
        statuses=statuses,
        master_seed=config["seed"],
        config=config,
    )
    if out_dir:
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary.to_dict(), fh, indent=2)
    return summary


def summary_from_traces(paths: List[str], eps: float) -> Dict:
    """Recompute the per-trial statistics from emitted CSV traces (the
    round-trip check for the summary JSON)."""
    first_failures = []
    max_errs = []
    for path in paths:
        t = read_trace(path)
        first_failures.append(t.first_failure_step(eps))
        max_errs.append(t.max_rel_err())
    return {"first_failure_steps": first_failures, "max_rel_errs": max_errs}


def run_ams_attack(
    t: int,
    n: int,
    trials: int,
    budget: int,
    C: float,
    master_seed: int,
    stop_on_success: bool = True,
) -> Dict:
    """The AMS attack experiment: plain AMS sketch vs the adaptive
    attacker; success when the published estimate drops below half the
    exact F2 (judged by the harness oracle, not the attacker)."""
    master = SeedTree(master_seed)
    cfg = StreamConfig(n, budget, max(10**9, n), model=INSERTION_ONLY)
    wins = 0
    success_steps: List[Optional[int]] = []
    for trial in range(trials):
        tree = master.child("ams-trial", trial)
        sketch = AMS(t, tree.child("sketch").seed())
        attacker = adv_mod.AmsAttacker(t, n, tree.child("attacker").seed(), C=C, budget=budget)

        def succeeded(published: float, stats: ExactStats) -> bool:
            return published < 0.5 * stats.f2

        transcript = play_game(
            sketch, attacker, "F2", cfg,
            stop_when=succeeded if stop_on_success else None,
        )
        step = None
        for r in transcript.rounds:
            if r.estimate < 0.5 * r.exact:
                step = r.t
                break
        success_steps.append(step)
        if step is not None:
            wins += 1
    return {
        "t": t, "n": n, "trials": trials, "budget": budget, "c": C,
        "successes": wins, "success_rate": wins / max(1, trials),
        "success_steps": success_steps, "master_seed": master_seed,
    }
