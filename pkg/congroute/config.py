# config.py - Run configuration from command-line flags and the environment
import argparse
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from congroute.cuts.oracle import AUTO, DEFAULT_SIZE_BOUND, ORACLE_MODES
from congroute.errors import MalformedInputError
from congroute.family.params import OVERRIDABLE, ParamConstants

logger = logging.getLogger(__name__)

PATH_FIELDS = ("graph", "demands", "output")


class RunConfig(BaseModel):
    graph: str = Field(..., description="Graph file in the 'p n m' / 'e u v' edge-list format")
    demands: str = Field(..., description="Demand file with one 'd s t' line per pair")
    output: Optional[str] = Field(None, description="Where the JSON run report goes; stdout when unset")
    seed: int = Field(0, description="Seed of the single RNG stream driving every random choice")
    epsilon: float = Field(0.05, description="Accuracy of the LP and concurrent-flow solvers")
    c_beta: float = Field(1.0, description="Constant in β(k) = ⌈c_β·log₂(k+2)⌉")
    c_gamma: float = Field(1.0, description="Constant in γ(k) = ⌈c_γ·log₂²k⌉")
    alpha_arv: Optional[int] = Field(None, description="Sparsest-cut approximation factor; ⌈√log₂k⌉ when unset")
    retry_budget: int = Field(200, description="Resamples allowed per stochastic stage")
    escalation_budget: int = Field(3, description="Good-family restarts after a failed routing primitive")
    cut_oracle: str = Field(AUTO, description="Violating-cut oracle mode")
    size_bound: int = Field(DEFAULT_SIZE_BOUND, description="Largest terminal count the exact oracle enumerates")
    wl_spotchecks: int = Field(20, description="Random matchings routed per sub-instance")
    wl_cluster_spotchecks: int = Field(10, description="Random boundary splits checked per legal cluster")
    split_samples: Optional[int] = Field(10, description="Hub pairs re-checked per splitting-off step; all when unset")
    threshold: float = Field(0.5, description="Sparsity below which the partition stage cuts")
    timings: bool = Field(False, description="Record wall-clock and memory per stage")
    overrides: Dict[str, str] = Field(default_factory=dict, description="Fixed values for derived parameters")

    @field_validator("epsilon")
    @classmethod
    def validate_epsilon(cls, v):
        if not 0 < v < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        return v

    @field_validator("c_beta", "c_gamma", "threshold")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("retry_budget", "escalation_budget", "wl_spotchecks", "wl_cluster_spotchecks", "size_bound")
    @classmethod
    def validate_count(cls, v):
        if v < 0:
            raise ValueError("must not be negative")
        return v

    @field_validator("split_samples")
    @classmethod
    def validate_samples(cls, v):
        if v is not None and v < 1:
            raise ValueError("split_samples must be positive")
        return v

    @field_validator("cut_oracle")
    @classmethod
    def validate_oracle(cls, v):
        if v not in ORACLE_MODES:
            raise ValueError(f"cut_oracle must be one of {list(ORACLE_MODES)}")
        return v

    @field_validator("overrides")
    @classmethod
    def validate_overrides(cls, v):
        for name, value in v.items():
            if name not in OVERRIDABLE:
                raise ValueError(f"'{name}' cannot be overridden; choose from {list(OVERRIDABLE)}")
            try:
                Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"override {name}={value} is not a number")
            if name != "alpha" and Fraction(value).denominator != 1:
                raise ValueError(f"override {name}={value} must be an integer")
        return v

    def constants(self) -> ParamConstants:
        return ParamConstants(
            c_gamma=Fraction(str(self.c_gamma)),
            c_beta=Fraction(str(self.c_beta)),
            alpha_arv=self.alpha_arv,
        )

    def parsed_overrides(self) -> Dict[str, Any]:
        return {name: Fraction(value) if name == "alpha" else int(value) for name, value in self.overrides.items()}

    def echo(self) -> Dict[str, Any]:
        """Config as it enters the run report, input paths left out"""
        return self.model_dump(exclude=set(PATH_FIELDS))


def parse_overrides(items: Optional[List[str]]) -> Dict[str, str]:
    overrides: Dict[str, str] = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise MalformedInputError(f"override '{item}' is not of the form name=value")
        overrides[name.strip()] = value.strip()
    return overrides


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Flags first, then the environment: CR_SEED overrides --seed, CR_CUT_ORACLE fills an unset --cut-oracle"""
    load_dotenv()
    seed = args.seed
    env_seed = os.getenv("CR_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise MalformedInputError(f"CR_SEED={env_seed!r} is not an integer") from None
        logger.info(f"Seed {seed} taken from CR_SEED")
    oracle = args.cut_oracle or os.getenv("CR_CUT_ORACLE", AUTO)
    try:
        return RunConfig(
            graph=args.graph,
            demands=args.demands,
            output=args.output,
            seed=seed,
            epsilon=args.epsilon,
            c_beta=args.c_beta,
            c_gamma=args.c_gamma,
            alpha_arv=args.alpha_arv,
            retry_budget=args.retry_budget,
            escalation_budget=args.escalation_budget,
            cut_oracle=oracle,
            size_bound=args.size_bound,
            wl_spotchecks=args.wl_spotchecks,
            wl_cluster_spotchecks=args.wl_cluster_spotchecks,
            split_samples=None if args.exhaustive_split else args.split_samples,
            threshold=args.threshold,
            timings=args.timings,
            overrides=parse_overrides(args.override),
        )
    except ValidationError as e:
        raise MalformedInputError(f"invalid configuration: {e.errors()[0]['msg']}") from e


__all__ = ["RunConfig", "load_run_config", "parse_overrides", "PATH_FIELDS"]
