"""
l_beta norms, including beta = infinity and prefix-truncated norms
"""

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .model import BetaExponent


@dataclass(frozen=True)
class TruncationLevel:
    """Moment order p >= 1; keeps indices i <= floor(p)"""

    p: float

    def __post_init__(self) -> None:
        if not (self.p >= 1) or math.isnan(self.p):
            raise DomainError(f"truncation level p must be >= 1, got {self.p}")

    def prefix_length(self, n: int) -> int:
        if math.isinf(self.p):
            return n
        return min(int(math.floor(self.p)), n)


BetaLike = Union[BetaExponent, float]


def _beta_value(beta: BetaLike) -> float:
    value = beta.value if isinstance(beta, BetaExponent) else float(beta)
    if not (value >= 1):
        raise DomainError(f"norm exponent must be >= 1 or infinite, got {value}")
    return value


def lp_norm(v: Sequence[float], beta: BetaLike) -> float:
    """(sum |v_i|^beta)^(1/beta), or max |v_i| for beta = inf; rescaled by max |v_i|"""
    b = _beta_value(beta)
    arr = np.abs(np.asarray(v, dtype=float))
    if arr.size == 0:
        return 0.0
    if not np.all(np.isfinite(arr)):
        raise DomainError("lp_norm needs finite entries")
    top = float(arr.max())
    if top == 0.0 or math.isinf(b):
        return top
    scaled = arr / top
    return top * float(np.sum(scaled**b)) ** (1.0 / b)


def truncated_norm(v: Sequence[float], p: Union[TruncationLevel, float], beta: BetaLike) -> float:
    """lp_norm of the prefix (v_1, ..., v_min(floor(p), n)); v must already be in canonical order"""
    level = p if isinstance(p, TruncationLevel) else TruncationLevel(float(p))
    arr = np.asarray(v, dtype=float)
    return lp_norm(arr[: level.prefix_length(arr.size)], beta)
