"""Rainbow blow-up embeddings and their applications."""

__version__ = "0.1.0"

from .applications import (
    GroupAction,
    PackingResult,
    bipartite_packing,
    cyclic_packing,
    distance_colouring,
    harmonious_labelling,
    odc_cover,
    orbit_colouring,
)
from .errors import (
    GateError,
    GraphFormatError,
    InstanceError,
    RainbowEmbedError,
    RetriesExhausted,
    VerificationError,
)
from .graphcore import BlowUpInstance, ColouredGraph, boundedness_condition, colouring_stats, load_coloured_graph
from .groups import AbelianGroup, parse_group_spec
from .hypermatch import NibbleConfig, WeightFunction, build_conflict_hypergraph, pseudorandom_matching
from .pipeline import PartialEmbedding, PipelineConfig, Transcript, embed_quasirandom, embed_rainbow
from .regularity import RegularityParams, check_quasirandom, check_super_regular_sampled
from .verify import check_embedding, check_harmonious, check_odc, check_packing, check_rainbow

__all__ = [
    "__version__",
    "GroupAction", "PackingResult", "bipartite_packing", "cyclic_packing", "distance_colouring",
    "harmonious_labelling", "odc_cover", "orbit_colouring",
    "GateError", "GraphFormatError", "InstanceError", "RainbowEmbedError", "RetriesExhausted",
    "VerificationError",
    "BlowUpInstance", "ColouredGraph", "boundedness_condition", "colouring_stats", "load_coloured_graph",
    "AbelianGroup", "parse_group_spec",
    "NibbleConfig", "WeightFunction", "build_conflict_hypergraph", "pseudorandom_matching",
    "PartialEmbedding", "PipelineConfig", "Transcript", "embed_quasirandom", "embed_rainbow",
    "RegularityParams", "check_quasirandom", "check_super_regular_sampled",
    "check_embedding", "check_harmonious", "check_odc", "check_packing", "check_rainbow",
]
