import math

import numpy as np
import pytest

from feedrank.errors import DataError
from feedrank.indices import compute_indices
from feedrank.model_io import ModelBundle, read_model, write_model
from feedrank.states import BinSpec
from feedrank.transitions import build_model


def make_bundle(with_index=False):
    bins = BinSpec((1, 2, 3), (0.0, 2.0, math.inf))
    rng = np.random.default_rng(77)
    n = bins.n_states
    p1 = rng.dirichlet(np.ones(n), size=n)
    model = build_model(p1, epsilon=0.1, beta=0.9)
    bundle = ModelBundle(
        bins=bins,
        r_n=(1.0, 0.25),
        r_p=(0.125, 1.0),
        epsilon=model.epsilon,
        beta=0.9,
        p1=model.p1,
        p0=model.p0,
        meta={"train_window": "[0, 100)", "items_used": "42"},
    )
    if with_index:
        space = bundle.state_space()
        bundle.index = compute_indices(model, space.reward)
    return bundle


def test_round_trip_preserves_everything(tmp_path):
    bundle = make_bundle(with_index=True)
    path = tmp_path / "model.txt"
    write_model(bundle, path)
    back = read_model(path)
    assert back.bins == bundle.bins
    assert back.r_n == bundle.r_n
    assert back.r_p == bundle.r_p
    assert back.beta == bundle.beta
    assert np.array_equal(back.epsilon, bundle.epsilon)
    assert np.array_equal(back.p1, bundle.p1)
    assert np.array_equal(back.p0, bundle.p0)
    assert back.meta == bundle.meta
    assert np.array_equal(back.index.g, bundle.index.g)
    assert np.array_equal(back.index.pi_order, bundle.index.pi_order)
    assert np.array_equal(back.index.y_values, bundle.index.y_values)


def test_rewrite_is_byte_identical(tmp_path):
    bundle = make_bundle(with_index=True)
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    write_model(bundle, a)
    write_model(read_model(a), b)
    assert a.read_bytes() == b.read_bytes()


def test_index_section_is_optional(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(with_index=False), path)
    assert read_model(path).index is None
    assert "[indices]" not in path.read_text()


def test_missing_section_rejected(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(), path)
    text = path.read_text()
    mutilated = text[:text.index("[p0]")]
    path.write_text(mutilated)
    with pytest.raises(DataError) as exc_info:
        read_model(path)
    assert "[p0]" in str(exc_info.value)


def test_garbage_line_rejected(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(), path)
    path.write_text(path.read_text() + "stray line\n")
    with pytest.raises(DataError) as exc_info:
        read_model(path)
    assert "line" in str(exc_info.value)


def test_tampered_reward_vector_rejected(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(), path)
    lines = path.read_text().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("reward = "):
            lines[i] = "reward = " + ",".join(["0.5"] * 5)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError) as exc_info:
        read_model(path)
    assert "reward" in str(exc_info.value)


def test_wrong_row_count_rejected(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(), path)
    # Remove row_4 from both matrices.
    lines = [l for l in path.read_text().splitlines()
             if not l.startswith("row_4 = ")]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError):
        read_model(path)


def test_duplicate_section_rejected(tmp_path):
    path = tmp_path / "model.txt"
    write_model(make_bundle(), path)
    path.write_text(path.read_text() + "[bins]\n")
    with pytest.raises(DataError) as exc_info:
        read_model(path)
    assert "duplicate" in str(exc_info.value)


def test_no_timestamps_in_output(tmp_path):
    # Byte determinism requires the writer never embeds wall-clock data.
    path = tmp_path / "model.txt"
    write_model(make_bundle(with_index=True), path)
    text = path.read_text().lower()
    assert "date" not in text
    assert "time" not in text
