"""Multi-attributed community search on road-social networks."""

from .dominance import DominanceGraph, build_rdominance_graph
from .geometry import Region
from .global_search import gs_search
from .ktcore import KTCore, NoCore, core_decomposition, maximal_kt_core
from .local_search import ls_search
from .network import (
    Location, NetworkFormatError, RoadNetwork, RoadSocialNetwork, SocialNetwork, load_road_social,
    save_road_social,
)
from .results import ResultEntry, ResultSet, to_jsonl
from .synth import generate_road_social

__version__ = "0.1.0"

__all__ = [
    "DominanceGraph", "KTCore", "Location", "NetworkFormatError", "NoCore", "Region", "ResultEntry",
    "ResultSet", "RoadNetwork", "RoadSocialNetwork", "SocialNetwork", "build_rdominance_graph",
    "core_decomposition", "generate_road_social", "gs_search", "load_road_social", "ls_search",
    "maximal_kt_core", "save_road_social", "to_jsonl",
]
