"""Feed construction: order the active items at a decision minute.

Three policies are supported. ``index`` sorts by the priority index of
each item's current state, ``novelty`` by post time (newest first), and
``popularity`` by cumulative retweets received before the minute. All
ties break toward the more recently posted item, then ascending item id.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError
from .events import DEFAULT_HORIZON, ItemTimeline, active_set
from .indices import IndexTable
from .states import StateSpace

POLICIES = ("index", "novelty", "popularity")


@dataclass(frozen=True)
class RankingSnapshot:
    """One policy's ordering of the active items at one minute."""

    minute: int
    policy: str
    item_ids: tuple[str, ...]
    state_indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.item_ids)


def rank_items(t: int, timelines: Mapping[str, ItemTimeline],
               state_space: StateSpace, index_table: IndexTable | None,
               policy: str, *, horizon: int = DEFAULT_HORIZON,
               active_ids: Sequence[str] | None = None) -> RankingSnapshot:
    """Rank the items active at minute ``t`` under one policy.

    ``active_ids`` may carry a precomputed active set (it must equal
    ``active_set(timelines, t, horizon)``); otherwise it is computed
    here.
    """
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if policy == "index" and index_table is None:
        raise ConfigError("the index policy needs a computed index table")
    ids = list(active_ids) if active_ids is not None else active_set(timelines, t, horizon)

    entries = []
    for iid in ids:
        tl = timelines[iid]
        state = state_space.classify(t - tl.post_minute, tl.retweets_before(t))
        entries.append((iid, tl, state))

    if policy == "index":
        g = index_table.g
        entries.sort(key=lambda e: (-g[e[2]], -e[1].post_ts, e[0]))
    elif policy == "novelty":
        entries.sort(key=lambda e: (-e[1].post_ts, e[0]))
    else:
        entries.sort(key=lambda e: (-e[1].retweets_before(t), -e[1].post_ts, e[0]))

    return RankingSnapshot(
        minute=t,
        policy=policy,
        item_ids=tuple(e[0] for e in entries),
        state_indices=tuple(e[2] for e in entries),
    )


def top_k(snapshot: RankingSnapshot, k: int) -> tuple[str, ...]:
    """First ``k`` item ids of a snapshot (all of them if k exceeds it)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return snapshot.item_ids[:k]


def write_snapshots_csv(snapshots: Iterable[RankingSnapshot], path) -> None:
    """Stream snapshots to a CSV with one row per ranked item."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["minute", "policy", "rank", "item_id", "state_index"])
        for snap in snapshots:
            for rank, (iid, state) in enumerate(zip(snap.item_ids, snap.state_indices), start=1):
                writer.writerow([snap.minute, snap.policy, rank, iid, state])
