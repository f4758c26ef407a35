import math

import numpy as np
import pytest

from feedrank.errors import ConfigError
from feedrank.events import Event, build_timelines
from feedrank.indices import IndexTable
from feedrank.ranking import rank_items, top_k, write_snapshots_csv
from feedrank.states import BinSpec, build_state_space


def make_space():
    bins = BinSpec((1, 2, 3), (0.0, 1.0, 3.0, math.inf))
    return build_state_space(bins, (1.0, 0.5), (0.1, 0.5, 1.0))


def make_table():
    g = np.array([0.0, 0.1, 0.7, 0.2, 0.3, 0.4, 0.6])
    order = np.argsort(-g, kind="stable")
    y = np.diff(np.concatenate(([0.0], g[order])))
    return IndexTable(g=g, pi_order=order, y_values=y)


def corpus():
    events = [
        Event("post", "a", "a", 0),
        Event("post", "b", "b", 30),
        Event("post", "c", "c", 65),
    ]
    events += [Event("retweet", "a", f"a-r{k}", 70 + k) for k in range(5)]
    events += [Event("retweet", "b", "b-r0", 40)]
    events += [Event("retweet", "c", f"c-r{k}", 66 + k) for k in range(2)]
    return build_timelines(events)


def test_states_at_decision_minute():
    timelines = corpus()
    space = make_space()
    snap = rank_items(2, timelines, space, make_table(), "novelty")
    by_id = dict(zip(snap.item_ids, snap.state_indices))
    # At t = 2: a is age 2 with 5 visible retweets, b age 2 with 1,
    # c age 1 with 2.
    assert by_id == {"a": 6, "b": 5, "c": 2}


def test_policy_orderings_differ():
    timelines = corpus()
    space = make_space()
    table = make_table()
    assert rank_items(2, timelines, space, table, "index").item_ids == ("c", "a", "b")
    assert rank_items(2, timelines, space, table, "novelty").item_ids == ("c", "b", "a")
    assert rank_items(2, timelines, space, None, "popularity").item_ids == ("a", "c", "b")


def test_index_ties_break_by_recency_then_id():
    timelines = build_timelines([
        Event("post", "x", "x", 10),
        Event("post", "y", "y", 40),   # same minute, later second
        Event("post", "z", "z", 40),   # identical timestamp: id decides
    ])
    space = make_space()
    table = IndexTable(g=np.full(7, 0.5), pi_order=np.arange(7),
                       y_values=np.array([0.5] + [0.0] * 6))
    snap = rank_items(1, timelines, space, table, "index")
    assert snap.item_ids == ("y", "z", "x")


def test_empty_minute_gives_empty_snapshot():
    snap = rank_items(50, corpus(), make_space(), make_table(), "novelty",
                      horizon=5)
    assert len(snap) == 0


def test_unknown_policy_and_missing_table():
    timelines = corpus()
    space = make_space()
    with pytest.raises(ConfigError):
        rank_items(2, timelines, space, make_table(), "chronological")
    with pytest.raises(ConfigError):
        rank_items(2, timelines, space, None, "index")


def test_precomputed_active_ids_match():
    timelines = corpus()
    space = make_space()
    table = make_table()
    auto = rank_items(2, timelines, space, table, "index")
    manual = rank_items(2, timelines, space, table, "index",
                        active_ids=["a", "b", "c"])
    assert auto == manual


def test_top_k():
    snap = rank_items(2, corpus(), make_space(), make_table(), "novelty")
    assert top_k(snap, 2) == ("c", "b")
    assert top_k(snap, 10) == ("c", "b", "a")
    assert top_k(snap, 0) == ()
    with pytest.raises(ValueError):
        top_k(snap, -1)


def test_snapshot_csv_layout(tmp_path):
    timelines = corpus()
    space = make_space()
    snap = rank_items(2, timelines, space, make_table(), "index")
    out = tmp_path / "snaps.csv"
    write_snapshots_csv([snap], out)
    lines = out.read_text().splitlines()
    assert lines[0] == "minute,policy,rank,item_id,state_index"
    assert lines[1] == "2,index,1,c,2"
    assert len(lines) == 4
