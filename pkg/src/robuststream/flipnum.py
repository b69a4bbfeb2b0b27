"""Flip numbers of value sequences: exact computation, the hold-rounding
transform, and analytic bounds for the standard stream statistics.

The flip number at tolerance eps is the length of the longest index chain
i_1 < ... < i_k such that each earlier chain value falls outside the
(1 +- eps) interval around the next one.  It caps how many times a
hold-rounded estimate sequence can change value, which is what the
robustness wrappers budget against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import within_rel


@dataclass(frozen=True)
class FlipReport:
    """Exact flip number plus (optionally) the analytic bound it must respect."""

    epsilon: float
    exact: int
    analytic_bound: Optional[int] = None
    witness: Optional[List[int]] = None


def _check_sequence(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("sequence must be non-empty and one-dimensional")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("sequence entries must be finite and nonnegative")
    return arr


def _violates(a: float, b: float, eps: float) -> bool:
    # chain condition: earlier value a outside [(1-eps)b, (1+eps)b]
    return a < (1.0 - eps) * b or a > (1.0 + eps) * b


def flip_number(values: Sequence[float], eps: float, want_witness: bool = True) -> FlipReport:
    """Exact flip number by longest-chain dynamic programming.

    Monotone sequences take a greedy O(m) fast path (earliest-next-violation
    is optimal there by an exchange argument); general sequences fall back
    to the O(m^2) DP, which is the ground truth the greedy is tested against.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    y = _check_sequence(values)
    m = y.size
    if m == 1:
        return FlipReport(eps, 1, witness=[0] if want_witness else None)

    diffs = np.diff(y)
    if np.all(diffs >= 0) or np.all(diffs <= 0):
        chain = _greedy_monotone_chain(y, eps)
        return FlipReport(eps, len(chain), witness=chain if want_witness else None)

    lo = (1.0 - eps) * y
    hi = (1.0 + eps) * y
    best = np.ones(m, dtype=np.int64)
    parent = np.full(m, -1, dtype=np.int64)
    for j in range(1, m):
        viol = (y[:j] < lo[j]) | (y[:j] > hi[j])
        if viol.any():
            cand = np.where(viol, best[:j], 0)
            i = int(np.argmax(cand))
            if cand[i] + 1 > best[j]:
                best[j] = cand[i] + 1
                parent[j] = i
    j = int(np.argmax(best))
    exact = int(best[j])
    witness = None
    if want_witness:
        witness = []
        while j >= 0:
            witness.append(j)
            j = int(parent[j])
        witness.reverse()
    return FlipReport(eps, exact, witness=witness)


def _greedy_monotone_chain(y: np.ndarray, eps: float) -> List[int]:
    chain = [0]
    last = y[0]
    for j in range(1, y.size):
        if _violates(last, y[j], eps):
            chain.append(j)
            last = y[j]
    return chain


def zero_flip_number(values: Sequence[float]) -> int:
    """The 0-flip number: 1 + number of indices where the value changes."""
    y = _check_sequence(values)
    return 1 + int(np.count_nonzero(np.diff(y)))


def hold_round(values: Sequence[float], eps: float) -> List[float]:
    """Hold-rounding: keep publishing the previous value while it stays
    within (1 +- eps/2) of the incoming estimate, otherwise adopt it.

    If the input tracks some true sequence u within (1 +- eps/8), the
    output tracks u within (1 +- eps) and changes value at most
    flip_number(u, eps/8) times.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    v = _check_sequence(values)
    out = [float(v[0])]
    w = float(v[0])
    for x in v[1:]:
        if not within_rel(w, float(x), eps / 2):
            w = float(x)
        out.append(w)
    return out


# ---------------------------------------------------------------------------
# Analytic bounds.  The asymptotic statements come with no constants; the
# ones below are fixed here and validated by dominance over the exact DP,
# never by their particular value.


def flip_bound_monotone(T: float, eps: float) -> int:
    """Flip-number bound for monotone sequences ranging over [1/T, T]."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    return math.ceil(math.log(T * T) / math.log(1.0 / (1.0 - eps))) + 2


def flip_bound_fp(n: int, m: int, M: int, p: float, eps: float) -> int:
    """Flip-number bound for the F_p trace of an insertion-only stream."""
    if min(n, m, M) < 1 or p < 0:
        raise ValueError("n, m, M must be positive and p >= 0")
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    denom = math.log(1.0 / (1.0 - eps))
    bound = math.ceil(max(p, 1.0) * math.log(float(M) ** 2 * float(n) ** 2) / denom) + 2
    if p == 0:
        # F0 is also capped by the number of updates
        bound = min(bound, math.ceil(math.log(float(m) ** 2) / denom) + 2)
    return bound


def entropy_interpolation_params(n: int, m: int, eps: float):
    """The (nu, beta, tau) triple used by the entropy analysis.

    beta is the Renyi order whose entropy sandwiches Shannon entropy to
    additive eps; tau is the multiplicative tolerance the norm traces are
    tracked at.
    """
    if n < 2 or m < 2:
        raise ValueError("n, m must be >= 2")
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    nu = eps / (4.0 * math.log2(n) * math.log2(m))
    beta = 1.0 + nu / (16.0 * math.log2(1.0 / nu))
    tau = eps * (beta - 1.0) / beta
    return nu, beta, tau


def flip_bound_entropy(n: int, m: int, eps: float) -> int:
    """Flip-number bound for the 2^H trace of an insertion-only stream.

    2^H is controlled through two monotone norm traces, each contributing
    one log-scale term at tolerance tau/4.
    """
    _, _, tau = entropy_interpolation_params(n, m, eps)
    return 2 * math.ceil(math.log(float(n) * float(m)) / math.log1p(tau / 4.0)) + 2


def flip_bound_bounded_deletion(n: int, M: int, p: float, alpha: float, eps: float) -> int:
    """Flip-number bound for F_p traces of alpha-bounded-deletion streams."""
    if not (1 <= p <= 2):
        raise ValueError("p must be in [1,2]")
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    if not (0 < eps < 1):
        raise ValueError("eps must be in (0,1)")
    num = p * math.log(float(M) * float(n)) + p * math.log(float(n))
    return math.ceil(num / math.log1p(eps**p / alpha)) + 2
