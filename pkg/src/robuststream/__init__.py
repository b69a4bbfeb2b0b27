"""Streaming sketches, adversarial robustness wrappers, and a two-player
game harness for evaluating them against adaptive adversaries."""

from .core import (
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
    exact_query,
    within_rel,
)
from .flipnum import FlipReport, flip_number, hold_round, zero_flip_number

__all__ = [
    "BOUNDED_DELETION",
    "INSERTION_ONLY",
    "TURNSTILE",
    "ExactStats",
    "FlipReport",
    "FrequencyVector",
    "ModelViolation",
    "QuerySpec",
    "StreamConfig",
    "StreamUpdate",
    "apply_update",
    "exact_query",
    "flip_number",
    "hold_round",
    "within_rel",
    "zero_flip_number",
]
