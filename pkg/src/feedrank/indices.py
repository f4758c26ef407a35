"""Priority indices for dual-speed restless bandits.

Computes a priority index G for every state via the adaptive-greedy
construction of Bertsimas and Nino-Mora: states are extracted one at a
time, highest index first, and each step solves for discounted
occupancy times of the shrinking active set.

For an active set S, the occupancy vector V solves the linear system

    V[i] = 1 + beta * sum_j p1[i][j] * V[j]    for i in S
    V[i] =     beta * sum_j p0[i][j] * V[j]    for i not in S

i.e. the expected discounted number of visits to S when items inside S
move at display speed and items outside move at the slowed speed. The
normalizing constants for a set S are

    A[i] = 1 + beta * sum_j (p1[i][j] - p0[i][j]) * V_comp[j]

with V_comp the occupancy of the complement of S. The greedy sweep
starts from the full state set (where A is identically 1), extracts the
maximizer of (adjusted reward) / A, and accumulates G as partial sums
of the extracted ratios.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexabilityError, NumericalError
from .transitions import TransitionModel

RESIDUAL_TOL_FACTOR = 1e-10
_MAX_REFINEMENTS = 2


def _as_mask(active: Iterable[int] | np.ndarray, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if isinstance(active, np.ndarray) and active.dtype == bool:
        if active.shape != (n,):
            raise ValueError(f"boolean mask must have length {n}")
        return active.copy()
    for i in active:
        if not 0 <= int(i) < n:
            raise ValueError(f"state {i} is out of range for {n} states")
        mask[int(i)] = True
    return mask


def occupancy(active: Iterable[int] | np.ndarray, model: TransitionModel) -> np.ndarray:
    """Discounted occupancy times of ``active`` from every start state.

    Solves the defining linear system directly (dense LU with partial
    pivoting) and verifies the residual against
    ``1e-10 / (1 - beta)`` in max norm, applying iterative refinement
    if the first solve falls short.
    """
    beta = model.beta
    if beta >= 1:
        raise NumericalError("occupancy requires beta < 1")
    n = model.n_states
    mask = _as_mask(active, n)
    p_mixed = np.where(mask[:, None], model.p1, model.p0)
    m = np.eye(n) - beta * p_mixed
    b = mask.astype(float)
    try:
        v = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"occupancy solve failed: {exc}") from exc
    tol = RESIDUAL_TOL_FACTOR / (1.0 - beta)
    for _ in range(_MAX_REFINEMENTS):
        residual = np.abs(m @ v - b).max()
        if residual <= tol:
            return v
        v = v + np.linalg.solve(m, b - m @ v)
    residual = np.abs(m @ v - b).max()
    if residual > tol:
        raise NumericalError(
            f"occupancy residual {residual:.3e} exceeds tolerance {tol:.3e}"
        )
    return v


def constants_a(active: Iterable[int] | np.ndarray, model: TransitionModel) -> np.ndarray:
    """Normalizing constants A for the active set, one per state."""
    n = model.n_states
    mask = _as_mask(active, n)
    v_comp = occupancy(~mask, model)
    return 1.0 + model.beta * ((model.p1 - model.p0) @ v_comp)


@dataclass(eq=False)
class IndexTable:
    """Priority index per state plus the greedy extraction trace.

    ``pi_order[k]`` is the state extracted at step ``k`` (highest index
    first) and ``y_values[k]`` the ratio extracted with it; ``g`` equals
    the partial sums of ``y_values`` scattered back to the states.
    """

    g: np.ndarray
    pi_order: np.ndarray
    y_values: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.g)

    def replay(self) -> np.ndarray:
        """Rebuild ``g`` from the extraction trace."""
        out = np.empty_like(self.g)
        out[self.pi_order] = np.cumsum(self.y_values)
        return out


def compute_indices(model: TransitionModel, rewards: Sequence[float]) -> IndexTable:
    """Run the adaptive-greedy sweep and return the index table.

    One occupancy solve per extraction step; the maximization breaks
    exact ties by lowest state index. Raises ``IndexabilityError`` if a
    normalizing constant is not strictly positive when it is needed.
    """
    r = np.asarray(rewards, dtype=float)
    n = model.n_states
    if r.shape != (n,):
        raise ValueError(f"rewards must have length {n}")

    remaining = np.ones(n, dtype=bool)
    adjust = np.zeros(n)
    g = np.zeros(n)
    pi_order = np.empty(n, dtype=int)
    y_values = np.empty(n)
    running = 0.0
    diff = model.p1 - model.p0

    for step in range(n):
        v_comp = occupancy(~remaining, model)
        a = 1.0 + model.beta * (diff @ v_comp)
        members = np.flatnonzero(remaining)
        a_members = a[members]
        bad = np.flatnonzero(a_members <= 0)
        if bad.size:
            raise IndexabilityError(
                state=int(members[bad[0]]),
                active_set=members.tolist(),
                value=float(a_members[bad[0]]),
            )
        ratios = (r[members] - adjust[members]) / a_members
        pick = int(np.argmax(ratios))  # first maximum: lowest state index
        state = int(members[pick])
        y = float(ratios[pick])
        running += y
        g[state] = running
        pi_order[step] = state
        y_values[step] = y
        adjust += a * y
        remaining[state] = False

    return IndexTable(g=g, pi_order=pi_order, y_values=y_values)


def rank_states(table: IndexTable) -> list[int]:
    """States sorted by descending G, ties broken by lowest index."""
    g = table.g
    return sorted(range(len(g)), key=lambda i: (-g[i], i))


def format_rank_grid(table: IndexTable, bins) -> str:
    """Human-readable grid of state ranks (1 = highest priority).

    Rows are popularity bins from highest to lowest, columns novelty
    bins from newest to oldest, with the out-of-window state listed
    separately.
    """
    order = rank_states(table)
    rank_of = {state: pos + 1 for pos, state in enumerate(order)}
    n_nov = bins.n_novelty_bins
    n_pop = bins.n_popularity_bins
    width = max(4, len(str(bins.n_states)) + 1)
    lines = ["state ranks by priority index (1 = ranked first)"]
    header = "pop\\nov" + "".join(f"{n:>{width}}" for n in range(1, n_nov + 1))
    lines.append(header)
    for p in range(n_pop, 0, -1):
        cells = "".join(
            f"{rank_of[(n - 1) * n_pop + p]:>{width}}" for n in range(1, n_nov + 1)
        )
        lines.append(f"{p:>7}" + cells)
    lines.append(f"state 0 rank: {rank_of[0]}")
    return "\n".join(lines)
