from congroute.flows.concurrent import CONCURRENT_MODE, LP_MODE, ConcurrentFlowResult, approx_concurrent_flow
from congroute.flows.maxflow import (
    FlowProblem,
    FlowResult,
    max_flow_integral,
    max_flow_value,
    min_cut,
    route_matching,
)

__all__ = [
    "CONCURRENT_MODE",
    "LP_MODE",
    "ConcurrentFlowResult",
    "approx_concurrent_flow",
    "FlowProblem",
    "FlowResult",
    "max_flow_integral",
    "max_flow_value",
    "min_cut",
    "route_matching",
]
