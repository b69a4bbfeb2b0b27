"""Seeded randomness substrate: d-wise independent polynomial hashing over
GF(2^61 - 1), deterministic seed derivation, and p-stable variate sampling.

All randomness in the library flows through a 64-bit master seed; every
hash value and every sketch entry is a pure function of (seed, inputs),
which is what makes games bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

MERSENNE61 = (1 << 61) - 1
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
MAX_RANGE = 1 << 48  # keeps modulo bias below 2^-13 against the 61-bit field


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a 64-bit avalanche-quality bijection."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64_np(x: np.ndarray) -> np.ndarray:
    """Vectorized mix64 on uint64 arrays."""
    with np.errstate(over="ignore"):
        x = x + np.uint64(_GOLDEN)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def _fnv1a(label: str) -> int:
    h = 0xCBF29CE484222325
    for b in label.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


class SeedTree:
    """Deterministic derivation of per-component seeds from a master seed.

    Distinct (label, index) paths give independent-looking 64-bit seeds
    without storing any randomness; experiments only record the master.
    """

    def __init__(self, master: int, path: Tuple[Tuple[str, int], ...] = ()):
        self.master = master & _MASK64
        self.path = path

    def child(self, label: str, index: int = 0) -> "SeedTree":
        derived = mix64(self.master ^ _fnv1a(label) ^ mix64(index & _MASK64))
        return SeedTree(derived, self.path + ((label, index),))

    def seed(self) -> int:
        return self.master

    def __repr__(self):
        return f"SeedTree(0x{self.master:016x}, path={self.path})"


# ---------------------------------------------------------------------------
# Arithmetic over GF(2^61 - 1), scalar (Python ints) and vectorized (numpy).


def _mulmod61_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b) mod 2^61-1 for uint64 arrays with entries < 2^61-1.

    Splits operands into 32-bit halves so every intermediate fits in
    uint64, then folds using 2^61 = 1 (mod p).
    """
    m32 = np.uint64(0xFFFFFFFF)
    p = np.uint64(MERSENNE61)
    with np.errstate(over="ignore"):
        a_hi = a >> np.uint64(32)
        a_lo = a & m32
        b_hi = b >> np.uint64(32)
        b_lo = b & m32
        lo = a_lo * b_lo
        mid = a_hi * b_lo + a_lo * b_hi  # < 2^62
        hi = a_hi * b_hi  # < 2^58
        r = (lo & p) + (lo >> np.uint64(61))
        r = r + (((mid & np.uint64((1 << 29) - 1)) << np.uint64(32)) + (mid >> np.uint64(29)))
        r = r + (hi << np.uint64(3))  # hi * 2^64 = 8 * hi (mod p)
        r = (r & p) + (r >> np.uint64(61))
        r = (r & p) + (r >> np.uint64(61))
        return np.where(r >= p, r - p, r)


@dataclass(frozen=True)
class KWiseHash:
    """d-wise independent hash [n] -> [0, R) via a random degree-(d-1)
    polynomial over GF(2^61 - 1), reduced mod R (R a power of two).
    """

    degree: int
    range_bits: int
    coeffs: Tuple[int, ...]

    @classmethod
    def from_seed(cls, seed: int, degree: int, range_bits: int) -> "KWiseHash":
        if degree < 2:
            raise ValueError("degree must be >= 2")
        if (1 << range_bits) > MAX_RANGE:
            raise ValueError("output range capped at 2^48")
        coeffs = []
        i = 0
        while len(coeffs) < degree:
            c = mix64(seed ^ mix64(i)) % MERSENNE61
            i += 1
            coeffs.append(c)
        return cls(degree, range_bits, tuple(coeffs))

    def __call__(self, x: int) -> int:
        return kwise_eval(self, x)

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an array of inputs."""
        xs = np.asarray(xs, dtype=np.uint64) % np.uint64(MERSENNE61)
        acc = np.full(xs.shape, self.coeffs[-1], dtype=np.uint64)
        p = np.uint64(MERSENNE61)
        for c in reversed(self.coeffs[:-1]):
            acc = _mulmod61_np(acc, xs)
            with np.errstate(over="ignore"):
                acc = acc + np.uint64(c)
            acc = np.where(acc >= p, acc - p, acc)
        return acc & np.uint64((1 << self.range_bits) - 1)


def kwise_eval(h: KWiseHash, x: int) -> int:
    """Horner evaluation of h's polynomial at x, reduced to the range."""
    acc = h.coeffs[-1]
    x = x % MERSENNE61
    for c in reversed(h.coeffs[:-1]):
        acc = (acc * x + c) % MERSENNE61
    return acc & ((1 << h.range_bits) - 1)


# ---------------------------------------------------------------------------
# p-stable sampling (Chambers-Mallows-Stuck).


def stable_sample(rng: np.random.Generator, p: float) -> float:
    """One standard p-stable variate; p = 2 is Gaussian with E[X^2] = 2,
    so sums obey 2-stability with the usual Euclidean scaling."""
    return float(stable_array(rng, p, 1)[0])


def stable_array(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    if not (0 < p <= 2):
        raise ValueError("p must be in (0, 2]")
    theta = (rng.random(size) - 0.5) * math.pi
    w = -np.log1p(-rng.random(size))
    return _cms_transform(theta, w, p)


def _cms_transform(theta: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    if p == 1.0:
        return np.tan(theta)
    ct = np.cos(theta)
    out = (np.sin(p * theta) / ct ** (1.0 / p)) * (
        np.cos((1.0 - p) * theta) / w
    ) ** ((1.0 - p) / p)
    return out


def stable_from_keys(keys: np.ndarray, p: float) -> np.ndarray:
    """Deterministic p-stable variates, one per 64-bit key.

    Lets linear sketches regenerate their entries per (seed, row, column)
    without storing the sketch matrix.
    """
    u1 = (mix64_np(keys) >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u2 = (mix64_np(keys ^ np.uint64(0xD1B54A32D192ED03)) >> np.uint64(11)).astype(
        np.float64
    ) * 2.0**-53
    theta = (u1 - 0.5) * math.pi
    w = -np.log1p(-u2)
    # u2 = 0 maps to w = 0; nudge to keep the transform finite
    w = np.maximum(w, 1e-300)
    return _cms_transform(theta, w, p)


def signs_from_keys(keys: np.ndarray) -> np.ndarray:
    """Deterministic +-1 values, one per 64-bit key."""
    return np.where(mix64_np(keys) & np.uint64(1), 1.0, -1.0)


_STABLE_MEDIAN_CACHE = {1.0: 1.0}
_STABLE_MEDIAN_SAMPLES = 10**6


def stable_abs_median(p: float) -> float:
    """Median of |X| for a standard p-stable X, estimated once per p by
    Monte Carlo and cached (closed forms exist only for special p)."""
    key = round(float(p), 12)
    if key not in _STABLE_MEDIAN_CACHE:
        rng = np.random.default_rng(0x5EEDF00D)
        _STABLE_MEDIAN_CACHE[key] = float(
            np.median(np.abs(stable_array(rng, p, _STABLE_MEDIAN_SAMPLES)))
        )
    return _STABLE_MEDIAN_CACHE[key]
