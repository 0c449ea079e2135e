# schemas.py - Pydantic report models for congroute runs and sub-tools
from collections import Counter
from typing import Any, Dict, List, Mapping, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, Field

FLOAT_DIGITS = 6


def rounded(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(float(value), FLOAT_DIGITS)


class InvariantCheck(BaseModel):
    name: str
    stage: str
    passed: bool
    detail: str = ""
    hard: bool = True


class StageRecord(BaseModel):
    name: str
    status: str
    seconds: Optional[float] = None
    rss_mb: Optional[float] = None


class ParamEcho(BaseModel):
    """Derived parameter table as used by one sub-instance"""

    k: int
    gamma: int
    alpha_arv: int
    alpha: float
    alpha_wl: float
    beta: int
    k1: int
    p: int
    k_star: int
    k_prime: int
    eta: int
    overridden: List[str] = []
    minimal_k: Optional[str] = None
    degeneracy: Optional[str] = None


class CongestionHistogram(BaseModel):
    max_load: int = 0
    counts: Dict[int, int] = Field(default_factory=dict, description="load -> number of edges carrying it")

    @classmethod
    def from_load(cls, load: Mapping[int, int]) -> "CongestionHistogram":
        if not load:
            return cls()
        series = pd.Series(list(load.values()), dtype="int64")
        counts = series.value_counts().sort_index()
        return cls(max_load=int(series.max()), counts={int(k): int(v) for k, v in counts.items()})


class RoutedPath(BaseModel):
    pair: Tuple[int, int]
    vertices: List[int]
    edges: List[int]


class SubInstanceReport(BaseModel):
    index: int
    vertices: int
    edges: int
    candidates: int
    selected: int
    sparsity: Optional[float] = None
    product_sparsity: Optional[float] = None
    params: Optional[ParamEcho] = None
    fallback: bool = False
    reason: Optional[str] = None
    rounds: int = 0
    escalations: int = 0
    expansion: Optional[float] = None
    expansion_exact: Optional[bool] = None
    routed: int = 0
    predicted: Optional[int] = None


class RunReport(BaseModel):
    version: str
    config: Dict[str, Any]
    instance: Dict[str, int]
    lp_value: float
    subinstances: List[SubInstanceReport] = []
    routed: List[RoutedPath] = []
    histogram: CongestionHistogram = CongestionHistogram()
    routed_fraction: Optional[float] = Field(None, description="routed pairs / OPT_LP")
    fallback: bool = False
    stages: List[StageRecord] = []
    checks: List[InvariantCheck] = []
    retries: Dict[str, int] = {}
    events: List[Dict[str, Any]] = []


class VerificationReport(BaseModel):
    passed: bool
    routed: int
    limit: int
    max_load: int
    histogram: CongestionHistogram
    lp_value: Optional[float] = None
    routed_fraction: Optional[float] = None
    offending_edge: Optional[int] = None
    message: str = ""


class KrvGameReport(BaseModel):
    n: int
    player: str
    games: int
    rounds: int
    expanders: int
    success_rate: float
    min_expansion: float
    exact: bool
    seed: int


class DecompositionReport(BaseModel):
    set_size: int
    out_size: int
    k: int
    alpha: float
    gamma: int
    clusters: List[List[int]]
    boundary: List[int]
    total_boundary: int
    charge_bound: float
    bound_held: bool
    splits: int
    certified: bool


class ExpanderRoutingReport(BaseModel):
    n: int
    d: int
    ell: int
    pairs: int
    routed: int
    bound: int
    expansion_checked: bool
    paths: List[List[int]] = []


def histogram_of(load: Counter) -> CongestionHistogram:
    return CongestionHistogram.from_load(load)


__all__ = [
    "FLOAT_DIGITS",
    "rounded",
    "InvariantCheck",
    "StageRecord",
    "ParamEcho",
    "CongestionHistogram",
    "RoutedPath",
    "SubInstanceReport",
    "RunReport",
    "VerificationReport",
    "KrvGameReport",
    "DecompositionReport",
    "ExpanderRoutingReport",
    "histogram_of",
]
