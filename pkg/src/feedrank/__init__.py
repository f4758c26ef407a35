"""Feed ranking with priority indices for dual-speed restless bandits.

Items in a feed evolve through a novelty/popularity state space. Serving
an item advances it along the displayed-chain transition matrix; leaving
it unserved slows that evolution by a per-state factor. The package fits
the state space and transition model from an engagement event log,
computes a priority index for every state with an adaptive-greedy pass,
and evaluates index, novelty, and popularity rankers against utility
and attention signals.
"""

from .errors import (
    ConfigError, DataError, EventLogError, FeedrankError, IndexabilityError,
    NumericalError,
)
from .events import (
    Event, ItemTimeline, active_set, build_timelines, load_event_log,
    parse_event_log, serialize_event_log,
)
from .states import (
    BinSpec, DEFAULT_NOVELTY_LIMITS, StateSpace, build_state_space,
    fit_popularity_bins, fit_rewards,
)
from .transitions import (
    TransitionModel, build_model, classify_minute, derive_p0, estimate_p1,
)
from .indices import (
    IndexTable, compute_indices, constants_a, format_rank_grid, occupancy,
    rank_states,
)
from .ranking import RankingSnapshot, rank_items, top_k
from .evaluation import (
    EvaluationReport, attention_relevance, evaluate_run, ndcg, pearson,
    utility_relevance,
)
from .synth import GeneratorConfig, generate_markov_stream, generate_stream
from .model_io import ModelBundle, read_model, write_model
from .config import RunConfig, load_config

__version__ = "0.1.0"

__all__ = [
    "BinSpec", "ConfigError", "DEFAULT_NOVELTY_LIMITS", "DataError",
    "EvaluationReport", "Event",
    "EventLogError", "FeedrankError", "GeneratorConfig", "IndexTable",
    "IndexabilityError", "ItemTimeline", "ModelBundle", "NumericalError",
    "RankingSnapshot", "RunConfig", "StateSpace", "TransitionModel",
    "active_set", "attention_relevance", "build_model", "build_state_space",
    "build_timelines", "classify_minute", "compute_indices", "constants_a",
    "derive_p0", "estimate_p1", "evaluate_run", "fit_popularity_bins",
    "fit_rewards", "format_rank_grid", "generate_markov_stream",
    "generate_stream", "load_config", "load_event_log", "ndcg", "occupancy",
    "parse_event_log", "pearson", "rank_items", "rank_states", "read_model",
    "serialize_event_log", "top_k", "utility_relevance", "write_model",
]
