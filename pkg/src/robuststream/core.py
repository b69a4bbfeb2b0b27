"""Stream model, exact query oracles, and the approximate-containment predicate.

Everything downstream (sketches, robustness wrappers, the game harness)
is specified against the exact quantities computed here, so this module
favors clarity over speed except where noted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union

INSERTION_ONLY = "insertion-only"
TURNSTILE = "turnstile"
BOUNDED_DELETION = "alpha-bounded-deletion"

# desk-scale caps for the exact oracle
MAX_UNIVERSE = 1 << 20
MAX_STREAM_LEN = 10**6


class ModelViolation(ValueError):
    """An update is illegal for the configured stream model."""


@dataclass(frozen=True)
class StreamConfig:
    """Universe size n, stream length bound m, coordinate bound M, model."""

    n: int
    m: int
    M: int
    model: str = INSERTION_ONLY
    alpha: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.M < 1:
            raise ValueError("n, m, M must be positive")
        if self.model not in (INSERTION_ONLY, TURNSTILE, BOUNDED_DELETION):
            raise ValueError(f"unknown stream model: {self.model}")
        if self.model == BOUNDED_DELETION and self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        # advisory only: the analysis assumes log(mM) = O(log n)
        if math.log2(self.m * self.M) > 8 * max(1.0, math.log2(self.n)):
            warnings.warn(
                "log2(m*M) is large relative to log2(n); analytic bounds "
                "may be loose for this configuration",
                stacklevel=2,
            )


@dataclass(frozen=True)
class StreamUpdate:
    """A single update (a, delta): add delta to coordinate a."""

    a: int
    delta: int

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("delta must be nonzero")


@dataclass(frozen=True)
class QuerySpec:
    """What to estimate and at which accuracy.

    kind is one of 'F0', 'Fp', 'F2', 'entropy', 'heavy-hitters',
    'point-query'.  For 'Fp', p must lie in (0, 2].
    """

    kind: str
    eps: float
    delta: float
    p: Optional[float] = None

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ValueError("eps must be in (0,1)")
        if not (0 < self.delta < 1):
            raise ValueError("delta must be in (0,1)")
        if self.kind == "Fp":
            if self.p is None or not (0 < self.p <= 2):
                raise ValueError("Fp queries need p in (0,2]")


class FrequencyVector:
    """Sparse integer frequency vector over [1, n]."""

    __slots__ = ("n", "counts")

    def __init__(self, n: int, counts: Optional[Dict[int, int]] = None):
        self.n = n
        self.counts: Dict[int, int] = dict(counts) if counts else {}

    def __getitem__(self, i: int) -> int:
        return self.counts.get(i, 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, FrequencyVector) and (
            self.n == other.n and self.counts == other.counts
        )

    def copy(self) -> "FrequencyVector":
        return FrequencyVector(self.n, self.counts)

    def support(self) -> Set[int]:
        return {i for i, c in self.counts.items() if c != 0}

    def __repr__(self):
        return f"FrequencyVector(n={self.n}, nnz={len(self.support())})"


def validate_update(u: StreamUpdate, cfg: StreamConfig) -> None:
    """Raise ModelViolation if u is illegal under cfg."""
    if not (1 <= u.a <= cfg.n):
        raise ModelViolation(f"index {u.a} outside universe [1, {cfg.n}]")
    if abs(u.delta) > 2 * cfg.M:
        raise ModelViolation(f"|delta| = {abs(u.delta)} exceeds 2M = {2 * cfg.M}")
    if cfg.model == INSERTION_ONLY and u.delta < 0:
        raise ModelViolation("negative update in insertion-only stream")


def apply_update(
    f: FrequencyVector,
    u: StreamUpdate,
    cfg: Optional[StreamConfig] = None,
    in_place: bool = False,
) -> FrequencyVector:
    """Apply one update; returns the updated vector.

    With cfg given, the update is validated against the stream model and
    the coordinate bound M is enforced.
    """
    if cfg is not None:
        validate_update(u, cfg)
        if abs(f[u.a] + u.delta) > cfg.M:
            raise ModelViolation(
                f"coordinate {u.a} would reach {f[u.a] + u.delta}, beyond M={cfg.M}"
            )
    out = f if in_place else f.copy()
    new = out.counts.get(u.a, 0) + u.delta
    if new == 0:
        out.counts.pop(u.a, None)
    else:
        out.counts[u.a] = new
    return out


def f0_exact(f: FrequencyVector) -> int:
    return sum(1 for c in f.counts.values() if c != 0)


def fp_exact(f: FrequencyVector, p: float) -> float:
    if p == 0:
        return float(f0_exact(f))
    return float(sum(abs(c) ** p for c in f.counts.values() if c != 0))


def entropy_exact(f: FrequencyVector) -> float:
    """Empirical Shannon entropy in bits; 0 for the zero vector."""
    total = sum(abs(c) for c in f.counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    for c in f.counts.values():
        if c != 0:
            pi = abs(c) / total
            h -= pi * math.log2(pi)
    return h


def heavy_hitters_exact(f: FrequencyVector, eps: float) -> Set[int]:
    """All i with |f_i| >= eps * ||f||_2."""
    thresh = eps * math.sqrt(fp_exact(f, 2))
    return {i for i, c in f.counts.items() if abs(c) >= thresh and c != 0}


def exact_query(f: FrequencyVector, q: QuerySpec) -> Union[float, Set[int]]:
    """Brute-force oracle for every supported query kind."""
    if q.kind == "F0":
        return float(f0_exact(f))
    if q.kind == "F2":
        return fp_exact(f, 2)
    if q.kind == "Fp":
        return fp_exact(f, q.p)
    if q.kind == "entropy":
        return entropy_exact(f)
    if q.kind == "heavy-hitters":
        return heavy_hitters_exact(f, q.eps)
    raise ValueError(f"unsupported query kind: {q.kind}")


def within_rel(a: float, b: float, eps: float) -> bool:
    """True iff a lies in the closed interval [(1-eps)b, (1+eps)b].

    b must be nonnegative; the containment is not defined for negative
    reference values and we reject rather than guess.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    if b < 0:
        raise ValueError("reference value b must be nonnegative")
    return (1.0 - eps) * b <= a <= (1.0 + eps) * b


class ExactStats:
    """Incrementally maintained exact statistics of a stream.

    Tracks F0, F1, F2, an optional extra F_p, Shannon entropy, and the
    frequency vector itself in O(1) time per update.  Used by the game
    harness so that per-step oracle evaluation stays cheap.
    """

    def __init__(self, n: int, p: Optional[float] = None):
        self.n = n
        self.p = p
        self.f = FrequencyVector(n)
        self.f0 = 0
        self.f1 = 0  # sum |f_i|
        self.f2 = 0
        self.fp = 0.0
        self._sum_clog = 0.0  # sum |f_i| * log2 |f_i|

    def update(self, u: StreamUpdate) -> None:
        old = self.f[u.a]
        new = old + u.delta
        ao, an = abs(old), abs(new)
        self.f0 += (1 if new != 0 else 0) - (1 if old != 0 else 0)
        self.f1 += an - ao
        self.f2 += an * an - ao * ao
        if self.p is not None:
            self.fp += an**self.p - ao**self.p
        if ao > 0:
            self._sum_clog -= ao * math.log2(ao)
        if an > 0:
            self._sum_clog += an * math.log2(an)
        apply_update(self.f, u, in_place=True)

    def entropy(self) -> float:
        if self.f1 == 0:
            return 0.0
        return math.log2(self.f1) - self._sum_clog / self.f1

    def l2(self) -> float:
        return math.sqrt(self.f2)

    def value(self, kind: str) -> float:
        if kind == "F0":
            return float(self.f0)
        if kind == "F1":
            return float(self.f1)
        if kind == "F2":
            return float(self.f2)
        if kind == "Fp":
            return float(self.fp)
        if kind == "entropy":
            return self.entropy()
        raise ValueError(f"unsupported kind: {kind}")


def parse_stream_file(lines: Iterable[str]) -> Iterator[StreamUpdate]:
    """Parse the `a delta` per-line stream format; '#' starts a comment."""
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("@"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'a delta', got {raw!r}")
        yield StreamUpdate(int(parts[0]), int(parts[1]))


def read_stream_file(path: str) -> List[StreamUpdate]:
    with open(path) as fh:
        return list(parse_stream_file(fh))
