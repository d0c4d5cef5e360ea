"""The rainbow blow-up pipeline."""

from .candidacy import CandidacyGraph, pad_colour_sets
from .completion import CompletionReport, CompletionState, complete_embedding
from .config import PipelineConfig, default_eps_schedule, parse_eps_schedule, thread_count
from .driver import PartialEmbedding, Transcript, embed_quasirandom, embed_rainbow, gate_report
from .rounds import (
    EngineState,
    PruneResult,
    RoundReport,
    approx_embed_round,
    check_round_invariant,
    init_engine,
    prune_bad,
)
from .transforms import (
    PaddingRecord,
    TransformReport,
    colour_split_transform,
    equitable_partition,
    pad_h_matchings,
    refine_instance,
    split_host_colours,
)

__all__ = [
    "CandidacyGraph", "pad_colour_sets",
    "CompletionReport", "CompletionState", "complete_embedding",
    "PipelineConfig", "default_eps_schedule", "parse_eps_schedule", "thread_count",
    "PartialEmbedding", "Transcript", "embed_quasirandom", "embed_rainbow", "gate_report",
    "EngineState", "PruneResult", "RoundReport", "approx_embed_round", "check_round_invariant",
    "init_engine", "prune_bad",
    "PaddingRecord", "TransformReport", "colour_split_transform", "equitable_partition",
    "pad_h_matchings", "refine_instance", "split_host_colours",
]
