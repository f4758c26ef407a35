"""Independent reference implementations used to freeze expected values.

Nothing in here imports the package under test. Each oracle uses a
different algorithm than the library (simulation instead of a linear
solve, value iteration instead of adaptive greedy, linear scans instead
of bisect) so agreement is evidence, not tautology.
"""

from __future__ import annotations

import math

import numpy as np


def mc_occupancy(active, p1, p0, beta, start, n_traj, n_steps, rng):
    """Monte Carlo estimate of discounted time spent inside the active set.

    Simulates the controlled chain (rows of p1 inside the set, rows of p0
    outside) and averages sum_t beta^t * 1{X_t in S} over trajectories.
    Returns (mean, standard_error). Truncation after n_steps leaves a bias
    of at most beta**n_steps / (1 - beta).
    """
    active = np.asarray(active, dtype=bool)
    p_eff = np.where(active[:, None], p1, p0)
    cum = np.cumsum(p_eff, axis=1)
    states = np.full(n_traj, start, dtype=np.int64)
    totals = np.zeros(n_traj)
    disc = 1.0
    for _ in range(n_steps):
        totals += disc * active[states]
        u = rng.random(n_traj)
        states = (cum[states] < u[:, None]).sum(axis=1)
        disc *= beta
    se = totals.std(ddof=1) / math.sqrt(n_traj) if n_traj > 1 else float("inf")
    return float(totals.mean()), float(se)


def gittins_restart(p, rewards, beta, tol=1e-12, max_iter=200_000):
    """Gittins indices of a classical chain via the restart formulation.

    For each state i, run value iteration on the restart-in-i problem:
    V_j = max(r_j + beta*(P V)_j, r_i + beta*(P V)_i). The index is
    nu_i = (1 - beta) * V_i.
    """
    p = np.asarray(p, dtype=float)
    rewards = np.asarray(rewards, dtype=float)
    n = len(rewards)
    nu = np.zeros(n)
    for i in range(n):
        v = np.zeros(n)
        for _ in range(max_iter):
            q_cont = rewards + beta * (p @ v)
            v_new = np.maximum(q_cont, q_cont[i])
            delta = np.max(np.abs(v_new - v))
            v = v_new
            if delta < tol:
                break
        else:
            raise RuntimeError("restart value iteration did not converge")
        nu[i] = (1.0 - beta) * v[i]
    return nu


def count_transitions_bruteforce(items, novelty_limits, popularity_limits,
                                 n_pop, window):
    """Transition counts over a half-open minute window, the slow way.

    ``items`` maps item_id -> (post_minute, retweet_minutes list). Every
    item contributes one (state at t, state at t+1) pair for every t with
    t and t+1 both inside [start, end). States are computed with linear
    scans over the bin limits.
    """
    start, end = window
    n_states = 1 + (len(novelty_limits) - 1) * n_pop
    counts = np.zeros((n_states, n_states), dtype=np.int64)

    def nov_bin(age):
        if age < novelty_limits[0] or age >= novelty_limits[-1]:
            return 0
        b = 0
        for lim in novelty_limits:
            if age >= lim:
                b += 1
            else:
                break
        return b

    def pop_bin(count):
        b = 0
        for lim in popularity_limits:
            if count >= lim:
                b += 1
            else:
                break
        return min(b, n_pop)

    def state(post_minute, rts, t):
        age = t - post_minute
        nb = nov_bin(age)
        if nb == 0:
            return 0
        c = sum(1 for m in rts if m < t)
        return (nb - 1) * n_pop + pop_bin(c)

    for post_minute, rts in items.values():
        for t in range(start, end - 1):
            a = state(post_minute, rts, t)
            b = state(post_minute, rts, t + 1)
            counts[a, b] += 1
    return counts


def rows_to_probabilities(counts, smoothing=0.0):
    """Normalize a count matrix row-wise; empty rows become self loops."""
    counts = counts.astype(float) + smoothing
    p = np.zeros_like(counts)
    for i, row in enumerate(counts):
        total = row.sum()
        if total == 0:
            p[i, i] = 1.0
        else:
            p[i] = row / total
    return p


def powerlaw_alpha_mle(samples, x_min=1, cap=None):
    """Maximum-likelihood exponent of a discrete power law.

    The likelihood uses the (optionally truncated) Hurwitz zeta
    normalizer: P(x) proportional to x**-alpha on x_min..cap.
    """
    from scipy.optimize import minimize_scalar
    from scipy.special import zeta

    samples = np.asarray(samples, dtype=float)
    if np.any(samples < x_min):
        raise ValueError("sample below x_min")
    log_sum = float(np.sum(np.log(samples)))
    n = len(samples)

    def neg_loglik(alpha):
        z = zeta(alpha, x_min)
        if cap is not None:
            z -= zeta(alpha, cap + 1)
        return n * math.log(z) + alpha * log_sum / 1.0

    res = minimize_scalar(neg_loglik, bounds=(1.05, 6.0), method="bounded",
                          options={"xatol": 1e-8})
    return float(res.x)


def quantile_limits_bruteforce(counts, n_bins=10):
    """Popularity bin limits straight from the written rule.

    Bin 1 is reserved for zero counts. The remaining n_bins - 1 bins get
    lower limits at the ceil(k*m/groups)-th order statistic of the m
    nonzero counts (0-based, clamped to the last element).
    """
    nonzero = sorted(c for c in counts if c > 0)
    m = len(nonzero)
    groups = n_bins - 1
    limits = [0]
    for k in range(groups):
        idx = min(math.ceil(k * m / groups), m - 1)
        limits.append(nonzero[idx])
    limits.append(math.inf)
    return tuple(limits)


def ndcg_bruteforce(relevance_in_rank_order):
    """nDCG with the ideal ordering found by trying every permutation."""
    from itertools import permutations

    scores = list(relevance_in_rank_order)

    def dcg(seq):
        return sum((2.0 ** s - 1.0) / math.log2(1 + pos)
                   for pos, s in enumerate(seq, start=1))

    actual = dcg(scores)
    best = max(dcg(perm) for perm in permutations(scores))
    if best == 0:
        return 1.0
    return actual / best


def pearson_bruteforce(x, y):
    """Pearson correlation from the textbook definition."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    sx = math.sqrt(sum((a - mx) ** 2 for a in x) / n)
    sy = math.sqrt(sum((b - my) ** 2 for b in y) / n)
    if sx == 0 or sy == 0:
        return float("nan")
    return cov / (sx * sy)
