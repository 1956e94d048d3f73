"""Maximum-cardinality f-matching on multigraphs, with the instrumentation
needed to watch the shortest-augmenting-trail machinery at work: blossoms
and LP duals, petalevel tracking, level graphs, and phase-count bounds."""

from .blossom import (Blossom, BlossomForest, DualState, EdgeStatus,
                      StructuredMatching, classify_edge, forest_from_json,
                      forest_to_json, p_trail, validate_blossom,
                      validate_structured, yz_hat)
from .eg import EgInstance, expected_cross_trail, generate_eg, verify_eg
from .graph import (DegreeBound, Matching, Multigraph, Trail, augment,
                    classify_trail, deficiency, edge_weight,
                    incremental_weight, parse_graph, parse_matching,
                    write_graph, write_matching)
from .levels import (IoType, LevelGraph, bottleneck_layer, build_level_graph,
                     check_advancement, compute_base_entered,
                     entrance_update_natural, entrance_update_shortened,
                     ordinary_level, petalevel, shorten_delta, track_trail)
from .oracles import (OracleResult, bipartite_flow_oracle, bound_check,
                      brute_force_max_f_matching, check_sat_monotonicity,
                      symmetric_difference_decompose)
from .phases import (BlockingSet, PhaseStats, certify, find_blocking_set,
                     solve_max_f_matching)
from .search import SearchOutcome, SearchState, f_matching_search

__all__ = [
    "Blossom", "BlossomForest", "DualState", "EdgeStatus", "StructuredMatching",
    "classify_edge", "forest_from_json", "forest_to_json", "p_trail",
    "validate_blossom", "validate_structured", "yz_hat",
    "EgInstance", "expected_cross_trail", "generate_eg", "verify_eg",
    "DegreeBound", "Matching", "Multigraph", "Trail", "augment",
    "classify_trail", "deficiency", "edge_weight", "incremental_weight",
    "parse_graph", "parse_matching", "write_graph", "write_matching",
    "IoType", "LevelGraph", "bottleneck_layer", "build_level_graph",
    "check_advancement", "compute_base_entered", "entrance_update_natural",
    "entrance_update_shortened", "ordinary_level", "petalevel",
    "shorten_delta", "track_trail",
    "OracleResult", "bipartite_flow_oracle", "bound_check",
    "brute_force_max_f_matching", "check_sat_monotonicity",
    "symmetric_difference_decompose",
    "BlockingSet", "PhaseStats", "certify", "find_blocking_set",
    "solve_max_f_matching",
    "SearchOutcome", "SearchState", "f_matching_search",
]
