# family/params.py - Derived parameter table for a run on k terminal pairs
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional

from congroute.errors import MalformedInputError, ParameterDegeneracyError

logger = logging.getLogger(__name__)

OVERRIDABLE = ("gamma", "alpha", "k1", "p", "k_star", "k_prime")
MINIMAL_K_CEILING = 1 << 4096


def log2(k: int) -> Fraction:
    """log2 k as an exact rational when k is a power of two, else a close rational"""
    if k > 0 and k & (k - 1) == 0:
        return Fraction(k.bit_length() - 1)
    return Fraction(math.log2(k)).limit_denominator(1 << 30)


def flow_cut_gap(n: int, c_beta: Fraction = Fraction(1)) -> int:
    """β(n) = max(1, ⌈c_β · log₂(n + 2)⌉)"""
    return max(1, math.ceil(c_beta * log2(n + 2)))


@dataclass(frozen=True)
class ParamConstants:
    """Constants hidden in the asymptotic formulas"""

    c_gamma: Fraction = Fraction(1)
    c_beta: Fraction = Fraction(1)
    alpha_arv: Optional[int] = None


@dataclass(frozen=True)
class ParamTable:
    k: int
    gamma: int
    alpha_arv: int
    alpha: Fraction
    alpha_wl: Fraction
    beta: int
    k1: int
    p: int
    k_star: int
    k_prime: int
    eta: int
    overridden: tuple = ()

    @classmethod
    def for_k(
        cls,
        k: int,
        consts: ParamConstants = ParamConstants(),
        overrides: Optional[Mapping[str, object]] = None,
    ) -> "ParamTable":
        """Evaluate every formula, letting overrides replace a value before its dependents are derived"""
        if k < 1:
            raise MalformedInputError(f"k must be positive, got {k}")
        overrides = dict(overrides or {})
        unknown = set(overrides) - set(OVERRIDABLE)
        if unknown:
            raise MalformedInputError(f"unknown parameter overrides {sorted(unknown)}")
        lg = log2(max(k, 2))

        gamma = int(overrides.get("gamma", math.ceil(consts.c_gamma * lg * lg)))
        alpha_arv = consts.alpha_arv if consts.alpha_arv is not None else math.ceil(math.sqrt(float(lg)))
        alpha_arv = max(int(alpha_arv), 1)
        if "alpha" in overrides:
            alpha = Fraction(overrides["alpha"])
        else:
            alpha = 1 / (Fraction(2**11) * max(gamma, 1) * lg)
        alpha_wl = alpha / alpha_arv
        beta = flow_cut_gap(k, consts.c_beta)

        if "k1" in overrides:
            k1 = int(overrides["k1"])
        elif gamma >= 2:
            k1 = math.floor(k / (192 * gamma**3 * log2(gamma)))
        else:
            k1 = 0
        p = int(overrides.get("p", math.ceil(8 * beta / alpha_wl)))
        k_star = int(overrides.get("k_star", k1 // (6 * p) if p > 0 else 0))
        if "k_prime" in overrides:
            k_prime = int(overrides["k_prime"])
        else:
            k_prime = 2 * math.floor(Fraction(k_star, 4 * gamma**3)) if gamma > 0 else 0
        eta = math.ceil(2 * beta / alpha_wl)

        table = cls(
            k=k,
            gamma=gamma,
            alpha_arv=alpha_arv,
            alpha=alpha,
            alpha_wl=alpha_wl,
            beta=beta,
            k1=k1,
            p=p,
            k_star=k_star,
            k_prime=k_prime,
            eta=eta,
            overridden=tuple(sorted(overrides)),
        )
        logger.debug(f"ParamTable(k={k}): gamma={gamma} k1={k1} p={p} k*={k_star} k'={k_prime} eta={eta}")
        return table

    @property
    def alpha_bound(self) -> Fraction:
        """The formula value of alpha(k) for this table's gamma, used to decide whether charge bounds apply"""
        return 1 / (Fraction(2**11) * max(self.gamma, 1) * log2(max(self.k, 2)))

    @property
    def path_length(self) -> int:
        """ell = 2k*, the number of edge-disjoint paths carried between neighbouring tree vertices"""
        return 2 * self.k_star

    def degeneracy(self) -> Optional[str]:
        """Reason the table cannot drive the full algorithm, or None"""
        for name in ("gamma", "k1", "p", "k_star", "k_prime"):
            if getattr(self, name) <= 0:
                return f"{name}={getattr(self, name)} is not positive"
        if not 0 < self.alpha < 1:
            return f"alpha={self.alpha} outside (0, 1)"
        if self.k_prime % 2:
            return f"k_prime={self.k_prime} is odd"
        if self.k_star < self.k_prime:
            return f"k_star={self.k_star} is below k_prime={self.k_prime}"
        if self.k1 > 2 * self.k:
            return f"k1={self.k1} exceeds the terminal count {2 * self.k}"
        return None

    def require_usable(self) -> None:
        reason = self.degeneracy()
        if reason is not None:
            raise ParameterDegeneracyError(f"parameters degenerate at k={self.k}: {reason}", stage="params")

    def echo(self) -> Dict[str, object]:
        data = asdict(self)
        data["overridden"] = list(self.overridden)
        for key in ("alpha", "alpha_wl"):
            data[key] = float(data[key])
        return data

    @staticmethod
    def minimal_k(consts: ParamConstants = ParamConstants()) -> Optional[int]:
        """Smallest k whose formula-only table is non-degenerate; None above 2^4096.

        Doubling finds a usable k, bisection then narrows it down. The
        derived parameters are monotone in k in the regime the doubling
        reaches, so the bisection is sound there.
        """

        def usable(k: int) -> bool:
            return ParamTable.for_k(k, consts).degeneracy() is None

        high = 2
        while not usable(high):
            high <<= 1
            if high > MINIMAL_K_CEILING:
                return None
        low = high >> 1
        while high - low > 1:
            mid = (low + high) // 2
            if usable(mid):
                high = mid
            else:
                low = mid
        return high


__all__ = ["ParamTable", "ParamConstants", "OVERRIDABLE", "log2", "flow_cut_gap"]
