"""Estimating the displayed-state Markov chain and its slowed twin.

``p1`` is the per-minute transition matrix items follow while displayed.
The non-displayed matrix ``p0`` is derived from it with a per-state
slowdown factor ``epsilon``: with probability ``1 - epsilon[i]`` the item
stays put, otherwise it moves per ``p1``. Concretely

    p0[i][j] = epsilon[i] * p1[i][j]                   for j != i
    p0[i][i] = (1 - epsilon[i]) + epsilon[i] * p1[i][i]

which preserves row sums exactly. ``epsilon = 1`` makes both speeds
identical and ``epsilon = 0`` freezes non-displayed items.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DataError
from .events import ItemTimeline
from .states import StateSpace

ROW_SUM_TOL = 1e-12
DEFAULT_EPSILON = 0.1
DEFAULT_BETA = 0.9


def estimate_p1(timelines: Mapping[str, ItemTimeline], state_space: StateSpace,
                window: tuple[int, int], *, smoothing: float = 0.0) -> np.ndarray:
    """Estimate ``p1`` by counting per-minute state transitions.

    Every item contributes one transition for each minute ``t`` with
    ``t`` and ``t + 1`` inside ``window`` (a half-open minute range):
    the pair (state at t, state at t+1). Items outside their display
    window sit in state 0, so an item entering the window leaves state
    0 for a novelty-1 state, an item aging out returns to state 0, and
    every other out-of-window minute is a 0 -> 0 self-loop.

    Rows with no observed transitions get a self-loop of probability 1.
    ``smoothing`` > 0 adds that value to every cell before normalizing
    (useful for sparse corpora; off by default).
    """
    start, end = window
    if end - start < 2:
        raise DataError(f"training window [{start}, {end}) is too short to observe transitions")
    if smoothing < 0:
        raise DataError("smoothing must be >= 0")
    if not any(start <= tl.post_minute < end for tl in timelines.values()):
        raise DataError(f"training window [{start}, {end}) contains no posts")

    bins = state_space.bins
    n = state_space.n_states
    counts = np.zeros((n, n))
    span = end - start - 1  # transitions recorded per item
    max_age = bins.novelty_limits[-1] - 1
    idle = 0
    for tl in timelines.values():
        post = tl.post_minute
        # Minutes where this item's transition can touch a non-zero
        # state; everything else in the window is a 0 -> 0 loop.
        lo = max(start, post)
        hi = min(end - 2, post + max_age)
        if hi < lo:
            idle += span
            continue
        prev = classify_minute(tl, lo, state_space)
        for t in range(lo, hi + 1):
            nxt = classify_minute(tl, t + 1, state_space)
            counts[prev, nxt] += 1
            prev = nxt
        idle += span - (hi - lo + 1)
    counts[0, 0] += idle

    if smoothing > 0:
        counts += smoothing
    totals = counts.sum(axis=1)
    p1 = np.zeros_like(counts)
    observed = totals > 0
    p1[observed] = counts[observed] / totals[observed, None]
    for i in np.flatnonzero(~observed):
        p1[i, i] = 1.0
    return p1


def classify_minute(tl: ItemTimeline, t: int, state_space: StateSpace) -> int:
    """State of an item at decision minute ``t`` (0 when out of window)."""
    age = t - tl.post_minute
    if age < 0:
        return 0
    return state_space.classify(age, tl.retweets_before(t))


def derive_p0(p1: np.ndarray, epsilon) -> np.ndarray:
    """Build the non-displayed matrix from ``p1`` and slowdown factors.

    ``epsilon`` may be a scalar or a per-state vector, entries in [0, 1].
    """
    p1 = np.asarray(p1, dtype=float)
    n = p1.shape[0]
    eps = np.asarray(epsilon, dtype=float)
    if eps.ndim == 0:
        eps = np.full(n, float(eps))
    if eps.shape != (n,):
        raise DataError(f"epsilon must be a scalar or a vector of length {n}")
    if np.any(eps < 0) or np.any(eps > 1):
        raise DataError("epsilon entries must lie in [0, 1]")
    p0 = eps[:, None] * p1
    diag = np.arange(n)
    p0[diag, diag] = (1.0 - eps) + eps * p1[diag, diag]
    return p0


@dataclass(eq=False)
class TransitionModel:
    """Displayed/non-displayed transition matrices with the discount."""

    p1: np.ndarray
    p0: np.ndarray
    epsilon: np.ndarray
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        self.p1 = np.asarray(self.p1, dtype=float)
        self.p0 = np.asarray(self.p0, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        n = self.p1.shape[0]
        for name, mat in (("p1", self.p1), ("p0", self.p0)):
            if mat.shape != (n, n):
                raise DataError(f"{name} must be square with matching size")
            if np.any(mat < 0) or np.any(mat > 1):
                raise DataError(f"{name} entries must lie in [0, 1]")
            drift = np.abs(mat.sum(axis=1) - 1.0).max()
            if drift > ROW_SUM_TOL:
                raise DataError(f"{name} rows must sum to 1 (max drift {drift:.3e})")
        if self.epsilon.shape != (n,):
            raise DataError(f"epsilon must be a vector of length {n}")
        if np.any(self.epsilon < 0) or np.any(self.epsilon > 1):
            raise DataError("epsilon entries must lie in [0, 1]")
        if not (0 < self.beta <= 1):
            raise DataError("beta must lie in (0, 1]")

    @property
    def n_states(self) -> int:
        return self.p1.shape[0]


def build_model(p1: np.ndarray, epsilon=DEFAULT_EPSILON,
                beta: float = DEFAULT_BETA) -> TransitionModel:
    """Derive ``p0`` from ``p1`` and wrap everything in a model."""
    p1 = np.asarray(p1, dtype=float)
    eps = np.asarray(epsilon, dtype=float)
    if eps.ndim == 0:
        eps = np.full(p1.shape[0], float(eps))
    p0 = derive_p0(p1, eps)
    return TransitionModel(p1=p1, p0=p0, epsilon=eps, beta=beta)
