"""
Domain types for weighted sums X* = sum_i a_i X_i of sub-Weibull(alpha, L_i) variables
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class BetaExponent:
    """Dual exponent beta = alpha/(alpha-1) for alpha > 1, infinity otherwise"""

    value: float

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def __post_init__(self) -> None:
        if not (self.value >= 1):
            raise DomainError(f"beta must be >= 1 or infinite, got {self.value}")


INFINITE_BETA = BetaExponent(math.inf)


def beta_of(alpha: float) -> BetaExponent:
    """Return beta(alpha); alpha <= 1 yields the infinite sentinel"""
    if not (alpha > 0) or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a positive finite number, got {alpha}")
    if alpha <= 1:
        return INFINITE_BETA
    return BetaExponent(alpha / (alpha - 1))


def lbar(scales: Sequence[float]) -> np.ndarray:
    """Elementwise max{1, L_i}"""
    arr = np.asarray(scales, dtype=float)
    if arr.size and (np.any(~np.isfinite(arr)) or np.any(arr < 0)):
        raise DomainError(f"scales must be finite and nonnegative, got {arr.tolist()}")
    return np.maximum(1.0, arr)


@dataclass(frozen=True, eq=False)
class WeightedSumProblem:
    """
    The tuple (alpha, a, L). Instances are immutable; use canonicalize() to
    obtain the ordering a_1 Lbar_1 >= ... >= a_n Lbar_n assumed by the bounds.
    """

    alpha: float
    weights: Tuple[float, ...]
    scales: Tuple[float, ...]
    permutation: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
        validate(self)

    @classmethod
    def create(cls, alpha: float, weights: Sequence[float], scales: Sequence[float]) -> "WeightedSumProblem":
        return cls(alpha=float(alpha), weights=tuple(weights), scales=tuple(scales))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def L(self) -> np.ndarray:
        return np.asarray(self.scales, dtype=float)

    @property
    def lbar(self) -> np.ndarray:
        return lbar(self.scales)

    @property
    def beta(self) -> BetaExponent:
        return beta_of(self.alpha)

    @property
    def a_lbar(self) -> np.ndarray:
        """a ⊙ Lbar"""
        return self.a * self.lbar

    @property
    def a_l(self) -> np.ndarray:
        """a ⊙ L"""
        return self.a * self.L

    @property
    def is_canonical(self) -> bool:
        v = self.a_lbar
        return bool(np.all(v[:-1] >= v[1:]))

    def pairs(self) -> Tuple[Tuple[float, float], ...]:
        return tuple(zip(self.weights, self.scales))

    def scaled(self, c: float) -> "WeightedSumProblem":
        """Same problem with every weight multiplied by c >= 0"""
        if c < 0:
            raise DomainError(f"scale factor must be nonnegative, got {c}")
        return WeightedSumProblem(self.alpha, tuple(c * w for w in self.weights), self.scales, self.permutation)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedSumProblem):
            return NotImplemented
        return (self.alpha, self.weights, self.scales) == (other.alpha, other.weights, other.scales)

    def __hash__(self) -> int:
        return hash((self.alpha, self.weights, self.scales))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "weights": list(self.weights), "scales": list(self.scales)}


def validate(problem: WeightedSumProblem) -> None:
    """Check every field invariant except the ordering"""
    if not (problem.alpha > 0) or not math.isfinite(problem.alpha):
        raise DomainError(f"alpha must be a positive finite number, got {problem.alpha}")
    if len(problem.weights) == 0:
        raise DomainError("a problem needs at least one weight")
    if len(problem.weights) != len(problem.scales):
        raise DomainError(
            f"weights and scales differ in length: {len(problem.weights)} != {len(problem.scales)}"
        )
    for name, values in (("weights", problem.weights), ("scales", problem.scales)):
        for i, v in enumerate(values):
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name}[{i}] must be finite and nonnegative, got {v}")


def canonicalize(problem: WeightedSumProblem) -> WeightedSumProblem:
    """
    Reorder (a, L) jointly so that a_i * Lbar_i is nonincreasing.

    Ties keep their original relative order (stable sort). The permutation
    that maps new positions to the caller's indices is recorded, composed
    with any permutation already carried by the input.
    """
    validate(problem)
    key = problem.a_lbar
    order = np.argsort(-key, kind="stable")
    prior = problem.permutation or tuple(range(problem.n))
    return WeightedSumProblem(
        alpha=problem.alpha,
        weights=tuple(problem.weights[i] for i in order),
        scales=tuple(problem.scales[i] for i in order),
        permutation=tuple(prior[i] for i in order),
    )


def problem_from_config(cfg: "object") -> WeightedSumProblem:
    """Build a canonical problem from a config.ProblemConfig"""
    return canonicalize(
        WeightedSumProblem.create(getattr(cfg, "alpha"), getattr(cfg, "weights"), getattr(cfg, "scales"))
    )
