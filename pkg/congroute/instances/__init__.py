"""Instance normalization, LP relaxation and flow-well-linked partition"""
from congroute.instances.models import Instance, Pair, SubInstance
from congroute.instances.normalize import normalize
from congroute.instances.partition import lp_solution, lp_value, partition_flow_well_linked, select_pairs, spot_check

__all__ = [
    "Instance",
    "Pair",
    "SubInstance",
    "normalize",
    "lp_solution",
    "lp_value",
    "partition_flow_well_linked",
    "select_pairs",
    "spot_check",
]
