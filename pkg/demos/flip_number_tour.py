"""A short tour of flip numbers, the quantity that prices robustness.

A stream function's (eps, m)-flip number is the longest chain of times
at which its value repeatedly leaves a (1 +- eps) band.  The wrapper
cost of every robust algorithm here scales with this number, so the
whole framework rests on it being small: roughly log(m) / eps for
moments on insertion streams instead of m.
"""

import numpy as np

from robuststream.flipnum import (
    flip_bound_fp,
    flip_number,
    hold_round,
    zero_flip_number,
)

rng = np.random.default_rng(7)

# 1. a monotone trace flips only when it grows by a (1 + eps) factor
trace = np.cumsum(rng.integers(1, 4, size=5000)).astype(float)
for eps in (0.05, 0.1, 0.3):
    rep = flip_number(trace, eps)
    print(f"monotone trace, eps={eps:<4}: exact flip number {rep.exact:>4}  "
          f"(a priori F1 bound {flip_bound_fp(1024, 5000, 16, 1, eps)})")

# 2. an oscillating trace is the expensive case
osc = 100.0 + 50.0 * np.sin(np.arange(400) / 3.0)
print(f"\noscillating trace, eps=0.1: flip number "
      f"{flip_number(osc, 0.1).exact} out of {len(osc)} steps")

# 3. hold-rounding: publish a sticky version of a noisy estimate stream.
# The held trace stays within (1 +- eps) of the truth but only changes
# value about as often as the truth itself crosses an (eps/8) band.
truth = 10.0 * np.cumprod(rng.choice([0.95, 1.0, 1.06], size=300))
noisy = truth * rng.uniform(1 - 0.1 / 8, 1 + 0.1 / 8, size=300)
held = hold_round(noisy.tolist(), 0.1)
print(f"\nnoisy estimate stream: {zero_flip_number(noisy.tolist())} value changes")
print(f"after hold-rounding:   {zero_flip_number(held)} value changes "
      f"(truth's eps/8 flip number is {flip_number(truth, 0.1 / 8).exact})")
worst = max(abs(h / t - 1.0) for h, t in zip(held, truth))
print(f"worst relative error of the held trace vs truth: {worst:.3f} (allowed 0.1)")
