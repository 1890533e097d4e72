"""
Closed-form rates and bounds for X* = sum_i a_i X_i

Every unspecified absolute constant C(alpha) appears as an explicit
``constant_c`` argument (default 1). Values that exceed 1 where a
probability is expected are returned unclamped with ``exceeds_one`` set.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .model import WeightedSumProblem, beta_of, canonicalize
from .norms import TruncationLevel, lp_norm, truncated_norm
from .solvers import bisect_level, grow_until, safe_exp, shrink_until

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    SUBGAUSSIAN = "subgaussian_branch"
    SUBEXPONENTIAL = "subexponential_branch"
    SUBWEIBULL = "subweibull_branch"
    MIXED = "mixed"


@dataclass(frozen=True)
class BoundValue:
    """A rate or bound evaluated at a given stand-in for C(alpha)"""

    value: float
    constant_c: float
    regime: Regime
    exceeds_one: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "constant_c": self.constant_c,
            "regime": self.regime.value,
            "exceeds_one": self.exceeds_one,
        }


@dataclass(frozen=True)
class GBOBoundParams:
    """Scale L* and bound value nu* of the GBO-norm bound"""

    l_star: float
    nu_star: float

    def to_dict(self) -> dict:
        return {"l_star": self.l_star, "nu_star": self.nu_star}


@dataclass(frozen=True)
class NormBracket:
    lower: float
    value: float
    upper: float

    def to_dict(self) -> dict:
        return {"lower": self.lower, "value": self.value, "upper": self.upper}


def _canonical(problem: WeightedSumProblem) -> WeightedSumProblem:
    return problem if problem.is_canonical else canonicalize(problem)


def _check_p(p: float) -> float:
    if not (p >= 1) or math.isinf(p):
        raise DomainError(f"moment order p must be a finite number >= 1, got {p}")
    return float(p)


def _check_c(constant_c: float) -> float:
    if not (constant_c > 0) or not math.isfinite(constant_c):
        raise DomainError(f"constant_c must be positive and finite, got {constant_c}")
    return float(constant_c)


def _pow_root(p: float, alpha: float) -> float:
    """p**(1/alpha), saturating to inf"""
    expo = math.log(p) / alpha
    return math.inf if expo > 709.0 else math.exp(expo)


def _max_regime(gauss: float, weib: float) -> Regime:
    if math.isclose(gauss, weib, rel_tol=1e-12):
        return Regime.MIXED
    return Regime.SUBGAUSSIAN if gauss > weib else Regime.SUBWEIBULL


def _min_regime(gauss: float, weib: float) -> Regime:
    if math.isclose(gauss, weib, rel_tol=1e-12):
        return Regime.MIXED
    return Regime.SUBGAUSSIAN if gauss < weib else Regime.SUBWEIBULL


def rate_terms(problem: WeightedSumProblem, p: float) -> "tuple[float, float]":
    """(sqrt(p) ||a⊙Lbar||_2, p^(1/alpha) ||(a_i L_i : i <= p)||_beta) for a canonical problem"""
    problem = _canonical(problem)
    p = _check_p(p)
    gauss = math.sqrt(p) * lp_norm(problem.a_lbar, 2)
    head = truncated_norm(problem.a_l, TruncationLevel(p), problem.beta)
    weib = _pow_root(p, problem.alpha) * head if head > 0 else 0.0
    return gauss, weib


def moment_rate(problem: WeightedSumProblem, p: float, constant_c: float = 1.0) -> BoundValue:
    """C * max{sqrt(p)||a⊙Lbar||_2, p^(1/alpha)||(a_i L_i : i <= p)||_beta}"""
    c = _check_c(constant_c)
    gauss, weib = rate_terms(problem, p)
    return BoundValue(c * max(gauss, weib), c, _max_regime(gauss, weib))


def rate_sum_form(problem: WeightedSumProblem, p: float) -> float:
    """The additive rate g(p) = sqrt(p)||a⊙Lbar||_2 + p^(1/alpha)||(a_i L_i : i <= p)||_beta"""
    gauss, weib = rate_terms(problem, p)
    return gauss + weib


def moment_rate_psi(a: Sequence[float], alpha: float, p: float, constant_c: float = 1.0) -> BoundValue:
    """
    Rate for psi_alpha-normalized summands: C * max{sqrt(p)||a||_2, p^(1/alpha)||(a_i : i <= p)||_beta}.

    Weights are ordered by nonincreasing |a_i| before truncation.
    """
    c = _check_c(constant_c)
    p = _check_p(p)
    beta = beta_of(alpha)
    mags = np.abs(np.asarray(a, dtype=float))
    if mags.size == 0 or not np.all(np.isfinite(mags)):
        raise DomainError("moment_rate_psi needs a nonempty vector of finite weights")
    mags = mags[np.argsort(-mags, kind="stable")]
    gauss = math.sqrt(p) * lp_norm(mags, 2)
    head = truncated_norm(mags, TruncationLevel(p), beta)
    weib = _pow_root(p, alpha) * head if head > 0 else 0.0
    return BoundValue(c * max(gauss, weib), c, _max_regime(gauss, weib))


def gbo_bound_params(problem: WeightedSumProblem, constant_c: float = 1.0) -> GBOBoundParams:
    """L* = C ||a⊙L||_beta / ||a⊙Lbar||_2 and nu* = C ||a⊙Lbar||_2"""
    c = _check_c(constant_c)
    scale = lp_norm(problem.a_lbar, 2)
    if scale == 0.0:
        raise DomainError("gbo_bound_params is undefined when all weights are zero")
    return GBOBoundParams(
        l_star=c * lp_norm(problem.a_l, problem.beta) / scale,
        nu_star=c * scale,
    )


def K_domain_threshold(problem: WeightedSumProblem) -> float:
    """||a⊙Lbar||_2 + ||a⊙L||_inf, the smallest t for which K(t) is defined"""
    return lp_norm(problem.a_lbar, 2) + lp_norm(problem.a_l, math.inf)


def K_of_t(problem: WeightedSumProblem, t: float) -> float:
    """
    K(t) = sup{p >= 1 : g(p) <= t} for the nondecreasing rate g = rate_sum_form.

    The returned p satisfies g(p) <= t and lies within relative 1e-9 of the supremum.
    """
    problem = _canonical(problem)
    threshold = K_domain_threshold(problem)
    if not math.isfinite(t) or t < threshold * (1.0 - 1e-12):
        raise DomainError(
            f"K(t) needs t >= ||a⊙Lbar||_2 + ||a⊙L||_inf = {threshold:.17g}, got {t}",
            {"threshold": threshold, "t": t},
        )
    if threshold == 0.0:
        raise DomainError("K(t) is unbounded for an all-zero problem")

    def g(p: float) -> float:
        return rate_sum_form(problem, p)

    if g(1.0) > t:
        # t sits on the threshold up to rounding
        return 1.0
    hi = grow_until(lambda x: g(x) > t, 2.0)
    result = bisect_level(g, t, 1.0, hi, decreasing=False)
    logger.debug(f"K({t:g}) = {result.root:.12g} after {result.iterations} steps")
    return result.root


def _k_regime(problem: WeightedSumProblem, k: float) -> Regime:
    gauss, weib = rate_terms(problem, k)
    return _max_regime(gauss, weib)


def tail_upper_K(problem: WeightedSumProblem, t: float, constant_c: float = 1.0) -> BoundValue:
    """exp(-K(t)/C)"""
    c = _check_c(constant_c)
    k = K_of_t(problem, t)
    value = math.exp(-k / c)
    return BoundValue(value, c, _k_regime(problem, k), value > 1.0)


def tail_lower_K(problem: WeightedSumProblem, t: float, constant_c: float = 1.0) -> BoundValue:
    """exp(-C K(t)), the matching lower form on the same domain"""
    c = _check_c(constant_c)
    k = K_of_t(problem, t)
    value = math.exp(-c * k)
    return BoundValue(value, c, _k_regime(problem, k), value > 1.0)


def tail_exponent(problem: WeightedSumProblem, t: float) -> "tuple[float, float]":
    """
    The two branches (t^2/||a⊙Lbar||_2^2, t^alpha/||a⊙L||_beta^alpha).

    A zero norm makes its branch +inf for t > 0 and 0 at t = 0. Both branches
    saturate to +inf instead of overflowing.
    """
    if not (t >= 0) or math.isinf(t):
        raise DomainError(f"t must be finite and nonnegative, got {t}")
    s2 = lp_norm(problem.a_lbar, 2)
    sb = lp_norm(problem.a_l, problem.beta)
    if t == 0.0:
        return 0.0, 0.0
    ratio = t / s2 if s2 > 0 else math.inf
    gauss = ratio * ratio
    weib = safe_exp(problem.alpha * (math.log(t) - math.log(sb))) if sb > 0 else math.inf
    return gauss, weib


def tail_closed_form(
    problem: WeightedSumProblem, t: float, constant_c: float = 1.0, side: str = "upper"
) -> BoundValue:
    """
    upper: 2 exp(-m(t)/C); lower: (1/C) exp(-C m(t)), alpha <= 1 only,
    with m(t) = min{t^2/||a⊙Lbar||_2^2, t^alpha/||a⊙L||_beta^alpha}.
    """
    c = _check_c(constant_c)
    if side not in ("upper", "lower"):
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    if side == "lower" and problem.alpha > 1:
        raise DomainError(
            f"the closed-form lower tail is only available for alpha <= 1, got {problem.alpha}"
        )
    gauss, weib = tail_exponent(problem, t)
    m = min(gauss, weib)
    regime = _min_regime(gauss, weib)
    if side == "upper":
        value = 2.0 * math.exp(-m / c)
    else:
        value = math.exp(-c * m) / c
    return BoundValue(value, c, regime, value > 1.0)


class DualFunctions:
    """
    Per-index tail exponents of Z_i/Lbar_i and their Legendre duals (alpha > 1):

        N_i(t)  = min{Lbar_i^2 t^2, ((Lbar_i/L_i) t)^alpha}
        N_i*(t) = max{t^2/(4 Lbar_i^2), (alpha-1)(L_i t/(Lbar_i alpha))^(alpha/(alpha-1))}
    """

    def __init__(self, problem: WeightedSumProblem):
        if problem.alpha <= 1:
            raise DomainError(f"dual functions need alpha > 1, got {problem.alpha}")
        self.alpha = problem.alpha
        self.beta = problem.beta.value
        self.scales = problem.L
        self.lbars = problem.lbar

    def n1(self, i: int, t: float) -> float:
        return (self.lbars[i] * t) ** 2

    def n2(self, i: int, t: float) -> float:
        if self.scales[i] == 0.0:
            return math.inf if t > 0 else 0.0
        return (self.lbars[i] / self.scales[i] * t) ** self.alpha

    def n(self, i: int, t: float) -> float:
        return min(self.n1(i, t), self.n2(i, t))

    def n1_star(self, i: int, t: float) -> float:
        return t * t / (4.0 * self.lbars[i] ** 2)

    def n2_star(self, i: int, t: float) -> float:
        x = self.scales[i] * t / (self.lbars[i] * self.alpha)
        return (self.alpha - 1.0) * x**self.beta

    def n_star(self, i: int, t: float) -> float:
        return max(self.n1_star(i, t), self.n2_star(i, t))

    def closures(self, i: int) -> "tuple[Callable[[float], float], Callable[[float], float]]":
        return (lambda t: self.n(i, t)), (lambda t: self.n_star(i, t))


def dual_moment_rate(problem: WeightedSumProblem, p: float) -> float:
    """
    inf{t > 0 : sum_{i <= p} N_i*(p a_i Lbar_i / t) <= p} + sqrt(p) (sum_{i > p} a_i^2 Lbar_i^2)^(1/2)

    The alpha > 1 characterization of ||Z*||_p up to constants.
    """
    problem = _canonical(problem)
    p = _check_p(p)
    if problem.alpha <= 1:
        raise DomainError(f"dual_moment_rate needs alpha > 1, got {problem.alpha}")
    duals = DualFunctions(problem)
    k = TruncationLevel(p).prefix_length(problem.n)
    weights = problem.a_lbar
    head_idx = [i for i in range(k) if weights[i] > 0]

    def load(t: float) -> float:
        return sum(duals.n_star(i, p * weights[i] / t) for i in head_idx)

    head = 0.0
    if head_idx:
        gauss, weib = rate_terms(problem, p)
        start = max(gauss, weib)
        hi = grow_until(lambda x: load(x) <= p, start)
        lo = shrink_until(lambda x: load(x) > p, hi)
        head = bisect_level(load, p, lo, hi, decreasing=True).root
    tail = math.sqrt(p) * lp_norm(weights[k:], 2)
    return head + tail


def moment_to_gbo(c1: float, c2: float, alpha: float) -> GBOBoundParams:
    """
    Moment growth ||X||_p <= c1 sqrt(p) + c2 p^(1/alpha) for all p >= 1 implies
    ||X||_{phi_{alpha, l}} <= 2 e c1 with l = 4^(1/alpha) c2 / (2 c1).
    """
    beta_of(alpha)
    if not (c1 > 0) or c2 < 0:
        raise DomainError(f"need c1 > 0 and c2 >= 0, got c1={c1}, c2={c2}")
    return GBOBoundParams(l_star=4.0 ** (1.0 / alpha) * c2 / (2.0 * c1), nu_star=2.0 * math.e * c1)


def lp_interpolation_bracket(problem: WeightedSumProblem, p: float) -> NormBracket:
    """
    ||a⊙L||_inf <= ||a⊙L||_p <= e^((2-alpha)/alpha) p^(-1/alpha) (sqrt(p)||a⊙L||_2 + p^(1/alpha)||a⊙L||_inf)
    for p >= 2 and alpha <= 1.
    """
    p = _check_p(p)
    if p < 2:
        raise DomainError(f"the interpolation bracket needs p >= 2, got {p}")
    alpha = problem.alpha
    if alpha > 1:
        raise DomainError(f"the interpolation bracket needs alpha <= 1, got {alpha}")
    v = problem.a_l
    sup = lp_norm(v, math.inf)
    upper = math.exp((2.0 - alpha) / alpha) / _pow_root(p, alpha) * (
        math.sqrt(p) * lp_norm(v, 2) + _pow_root(p, alpha) * sup
    )
    return NormBracket(lower=sup, value=lp_norm(v, p), upper=upper)
