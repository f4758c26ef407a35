"""Reading and writing the fitted model as one text artifact.

The file is self-describing: sections hold the bin limits, reward
factors, both transition matrices, the optional index table, and a
fingerprint of how the model was fitted. Floats are written with 17
significant digits so every value round-trips exactly.

    # feedrank model, format v1
    [meta]      fit fingerprint (windows, counts, filters)
    [config]    beta, per-state epsilon
    [bins]      novelty_limits, popularity_limits
    [rewards]   r_n, r_p, flat reward vector
    [p1]        row_<i> = comma-joined probabilities
    [p0]        row_<i> = comma-joined probabilities
    [indices]   g, pi_order, y_values (present once computed)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .indices import IndexTable
from .states import BinSpec, StateSpace, build_state_space
from .transitions import TransitionModel

FORMAT_HEADER = "# feedrank model, format v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_list(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",")]


@dataclass
class ModelBundle:
    """Everything the CLI persists between fit, indices, and evaluate."""

    bins: BinSpec
    r_n: tuple[float, ...]
    r_p: tuple[float, ...]
    epsilon: np.ndarray
    beta: float
    p1: np.ndarray
    p0: np.ndarray
    meta: dict[str, str] = field(default_factory=dict)
    index: IndexTable | None = None

    def state_space(self) -> StateSpace:
        return build_state_space(self.bins, self.r_n, self.r_p)

    def transition_model(self) -> TransitionModel:
        return TransitionModel(p1=self.p1, p0=self.p0, epsilon=self.epsilon,
                               beta=self.beta)


def write_model(bundle: ModelBundle, path) -> None:
    space = bundle.state_space()
    n = space.n_states
    lines = [FORMAT_HEADER, "[meta]"]
    for key, value in bundle.meta.items():
        lines.append(f"{key} = {value}")
    lines.append("[config]")
    lines.append(f"beta = {_fmt(bundle.beta)}")
    lines.append(f"epsilon = {_fmt_list(bundle.epsilon)}")
    lines.append("[bins]")
    lines.append("novelty_limits = " + ",".join(str(v) for v in bundle.bins.novelty_limits))
    pop = ",".join("inf" if v == math.inf else str(int(v))
                   for v in bundle.bins.popularity_limits)
    lines.append(f"popularity_limits = {pop}")
    lines.append("[rewards]")
    lines.append(f"r_n = {_fmt_list(bundle.r_n)}")
    lines.append(f"r_p = {_fmt_list(bundle.r_p)}")
    lines.append(f"reward = {_fmt_list(space.reward)}")
    for name, mat in (("p1", bundle.p1), ("p0", bundle.p0)):
        lines.append(f"[{name}]")
        for i in range(n):
            lines.append(f"row_{i} = {_fmt_list(mat[i])}")
    if bundle.index is not None:
        lines.append("[indices]")
        lines.append(f"g = {_fmt_list(bundle.index.g)}")
        lines.append("pi_order = " + ",".join(str(int(v)) for v in bundle.index.pi_order))
        lines.append(f"y_values = {_fmt_list(bundle.index.y_values)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_sections(path) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1]
                if name in sections:
                    raise DataError(f"duplicate section [{name}] at line {lineno}")
                current = {}
                sections[name] = current
                continue
            if current is None or "=" not in line:
                raise DataError(f"unparseable model line {lineno}: {line!r}")
            key, _, value = line.partition("=")
            current[key.strip()] = value.strip()
    return sections


def read_model(path) -> ModelBundle:
    sections = _read_sections(path)
    for required in ("config", "bins", "rewards", "p1", "p0"):
        if required not in sections:
            raise DataError(f"model file is missing the [{required}] section")
    try:
        bins = BinSpec(
            novelty_limits=tuple(int(v) for v in sections["bins"]["novelty_limits"].split(",")),
            popularity_limits=tuple(
                math.inf if tok == "inf" else int(tok)
                for tok in sections["bins"]["popularity_limits"].split(",")
            ),
        )
        beta = float(sections["config"]["beta"])
        epsilon = np.array(_parse_floats(sections["config"]["epsilon"]))
        r_n = tuple(_parse_floats(sections["rewards"]["r_n"]))
        r_p = tuple(_parse_floats(sections["rewards"]["r_p"]))
        n = bins.n_states
        p1 = np.empty((n, n))
        p0 = np.empty((n, n))
        for name, mat in (("p1", p1), ("p0", p0)):
            rows = sections[name]
            if len(rows) != n:
                raise DataError(f"[{name}] holds {len(rows)} rows, expected {n}")
            for i in range(n):
                mat[i] = _parse_floats(rows[f"row_{i}"])
    except KeyError as exc:
        raise DataError(f"model file is missing key {exc}") from exc
    except ValueError as exc:
        raise DataError(f"model file holds an unparseable value: {exc}") from exc

    index = None
    if "indices" in sections:
        idx = sections["indices"]
        try:
            index = IndexTable(
                g=np.array(_parse_floats(idx["g"])),
                pi_order=np.array([int(v) for v in idx["pi_order"].split(",")]),
                y_values=np.array(_parse_floats(idx["y_values"])),
            )
        except (KeyError, ValueError) as exc:
            raise DataError(f"model file [indices] section is invalid: {exc}") from exc
        if len(index.g) != n:
            raise DataError("index table size does not match the state space")

    bundle = ModelBundle(
        bins=bins, r_n=r_n, r_p=r_p, epsilon=epsilon, beta=beta,
        p1=p1, p0=p0, meta=dict(sections.get("meta", {})), index=index,
    )
    stored = _parse_floats(sections["rewards"]["reward"])
    recomputed = bundle.state_space().reward
    if list(recomputed) != stored:
        raise DataError("stored reward vector disagrees with r_n and r_p")
    return bundle
