"""Well-linked decomposition and spanning-tree grouping"""
from congroute.decomposition.grouping import Grouping, group_by_tree, group_edges, group_terminals
from congroute.decomposition.welllinked import Decomposition, decompose, decompose_bounded

__all__ = ["Grouping", "group_by_tree", "group_edges", "group_terminals", "Decomposition", "decompose", "decompose_bounded"]
