"""Expander construction: interface grouping, tree family and the embedded cut-matching expander"""
from congroute.expander.interfaces import connect_terminals, group_interfaces, route_between, route_within
from congroute.expander.krv import krv_build, krv_harness, krv_rounds
from congroute.expander.models import EmbeddedExpander, InterfaceGrouping, SetInterface, TreeFamily
from congroute.expander.splitting import split_off_eulerian
from congroute.expander.trees import build_trees

__all__ = [
    "connect_terminals",
    "group_interfaces",
    "route_between",
    "route_within",
    "krv_build",
    "krv_harness",
    "krv_rounds",
    "EmbeddedExpander",
    "InterfaceGrouping",
    "SetInterface",
    "TreeFamily",
    "split_off_eulerian",
    "build_trees",
]
