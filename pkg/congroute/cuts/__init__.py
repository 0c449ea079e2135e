"""Sparsity and violating-cut oracles"""
from congroute.cuts.oracle import AUTO, EXACT, ORACLE_MODES, SPECTRAL, CutOracle, ViolatingCut, find_violating_cut, is_violating
from congroute.cuts.sparsity import SparsestCutInstance, approx_sparsest, brute_force_sparsest, product_sparsity, sparsity

__all__ = [
    "AUTO",
    "EXACT",
    "SPECTRAL",
    "ORACLE_MODES",
    "CutOracle",
    "ViolatingCut",
    "find_violating_cut",
    "is_violating",
    "SparsestCutInstance",
    "approx_sparsest",
    "brute_force_sparsest",
    "product_sparsity",
    "sparsity",
]
