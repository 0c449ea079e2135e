"""Greedy expander routing, translation to G and the congestion verifier"""
from congroute.routing.fallback import FallbackRoute, single_pair_route
from congroute.routing.greedy import GreedyRouting, greedy_route, path_length_bound, routed_floor
from congroute.routing.translate import CONGESTION_LIMIT, RoutingResult, translate
from congroute.routing.verify import verify_routing

__all__ = [
    "FallbackRoute",
    "single_pair_route",
    "GreedyRouting",
    "greedy_route",
    "path_length_bound",
    "routed_floor",
    "CONGESTION_LIMIT",
    "RoutingResult",
    "translate",
    "verify_routing",
]
