"""
Orlicz-norm machinery

Generators: the GBO function phi_{alpha,L}(x) = exp(min{x^2, (x/L)^alpha}) - 1
and psi_alpha(x) = exp(x^alpha) - 1. Expectations E[g(|X|/eta)] are computed
from a survival function by tail integration,

    E[g(|X|/eta)] = int_0^inf g'(x) Pr[|X| >= eta x] dx,

in log space, then bisected in eta to the level 1. The pair-mean function
phi_p(x) = (|1+x|^p + |1-x|^p)/2 drives the sequence Orlicz norm of a
weighted sum.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .bounds import moment_rate
from .errors import ConvergenceError, DivergenceError, DomainError
from .model import WeightedSumProblem, canonicalize
from .solvers import BRACKET_LIMIT, bisect_level, grow_until, log_quad, safe_exp, shrink_until

logger = logging.getLogger(__name__)

NORM_RTOL = 1e-6

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _check_alpha(alpha: float) -> float:
    if not (alpha > 0) or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a positive finite number, got {alpha}")
    return float(alpha)


def _check_l(l: float) -> float:
    if not (l >= 0) or not math.isfinite(l):
        raise DomainError(f"scale l must be finite and nonnegative, got {l}")
    return float(l)


def crossover(alpha: float, l: float) -> Optional[float]:
    """The point x = l^(-alpha/(2-alpha)) where x^2 and (x/l)^alpha meet, for 0 < alpha < 2, l > 0"""
    if l <= 0 or alpha >= 2:
        return None
    return math.exp(-alpha / (2.0 - alpha) * math.log(l))


def _min_exponent(x: np.ndarray, alpha: float, l: float) -> np.ndarray:
    """min{x^2, (x/l)^alpha} elementwise; l = 0 leaves x^2"""
    sq = x * x
    if l == 0:
        return sq
    with np.errstate(divide="ignore", over="ignore"):
        weib = np.exp(alpha * (np.log(x) - math.log(l)))
    return np.minimum(sq, weib)


@dataclass(frozen=True)
class GBOFunction:
    """
    A Young function of the form exp(e(x)) - 1.

    kind "gbo" uses e(x) = min{x^2, (x/l)^alpha}; kind "psi" uses e(x) = x^alpha.
    """

    alpha: float
    l: float = 1.0
    kind: str = "gbo"

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        _check_l(self.l)
        if self.kind not in ("gbo", "psi"):
            raise DomainError(f"unknown generator kind {self.kind!r}")

    @classmethod
    def gbo(cls, alpha: float, l: float) -> "GBOFunction":
        return cls(float(alpha), float(l), "gbo")

    @classmethod
    def psi(cls, alpha: float) -> "GBOFunction":
        return cls(float(alpha), 1.0, "psi")

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        if self.kind == "psi":
            return ()
        x = crossover(self.alpha, self.l)
        return () if x is None else (x,)

    def exponent(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "psi":
            with np.errstate(over="ignore"):
                return np.power(x, self.alpha)
        return _min_exponent(x, self.alpha, self.l)

    def log_exponent_derivative(self, x: np.ndarray) -> np.ndarray:
        """log e'(x) on the active branch, x > 0"""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logx = np.log(x)
            log_weib = math.log(self.alpha) + (self.alpha - 1.0) * logx
            if self.kind == "psi":
                return log_weib
            log_sq = math.log(2.0) + logx
            if self.l == 0:
                return log_sq
            log_weib = log_weib - self.alpha * math.log(self.l)
            use_sq = 2.0 * logx <= self.alpha * (logx - math.log(self.l))
            return np.where(use_sq, log_sq, log_weib)

    def value(self, x: np.ndarray) -> np.ndarray:
        """exp(e(x)) - 1, saturating to +inf"""
        e = self.exponent(np.abs(np.asarray(x, dtype=float)))
        with np.errstate(over="ignore"):
            return np.expm1(e)


def gbo_value(f: GBOFunction, x: float) -> float:
    if not (x >= 0):
        raise DomainError(f"gbo_value needs x >= 0, got {x}")
    return float(f.value(np.asarray(x, dtype=float)))


def psi_function(alpha: float) -> GBOFunction:
    return GBOFunction.psi(alpha)


def gbo_interval(alpha: float) -> Tuple[float, float]:
    """The interval [min{sqrt2, 2^(1/alpha)}, max{sqrt3, 3^(1/alpha)}] containing ||Z||_{phi_{alpha,L}}"""
    _check_alpha(alpha)
    return (
        min(math.sqrt(2.0), safe_exp(math.log(2.0) / alpha)),
        max(math.sqrt(3.0), safe_exp(math.log(3.0) / alpha)),
    )


def _grid_is_nonincreasing(values: np.ndarray) -> bool:
    return bool(np.all(values[1:] <= values[:-1] + 1e-12))


@dataclass(frozen=True)
class SurvivalFunction:
    """
    t -> Pr[|X| >= t] on [0, inf), given in log form.

    The constructor spot-checks S(0) <= 1 and monotonicity on a geometric grid.
    """

    log_survival: ArrayFn
    name: str = "custom"
    breakpoints: Tuple[float, ...] = ()
    degenerate: bool = False

    def __post_init__(self) -> None:
        grid = np.concatenate(([0.0], np.logspace(-6, 6, 121)))
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logs = np.asarray(self.log_survival(grid), dtype=float)
        if np.any(np.isnan(logs)) or logs[0] > 1e-12:
            raise DomainError(f"survival function {self.name} is not a probability on [0, inf)")
        if not _grid_is_nonincreasing(logs):
            raise DomainError(f"survival function {self.name} is not nonincreasing")

    @classmethod
    def from_callable(cls, survival: Callable[[float], float], name: str = "custom") -> "SurvivalFunction":
        vec = np.vectorize(survival, otypes=[float])

        def log_survival(t: np.ndarray) -> np.ndarray:
            with np.errstate(divide="ignore"):
                return np.log(vec(t))

        return cls(log_survival, name)

    def __call__(self, t: float) -> float:
        with np.errstate(divide="ignore", over="ignore"):
            return float(np.exp(self.log_survival(np.asarray(t, dtype=float))))


def survival_Z(alpha: float, l: float) -> SurvivalFunction:
    """Pr[|Z| >= t] = exp(-min{t^2, (t/l)^alpha})"""
    alpha, l = _check_alpha(alpha), _check_l(l)
    x = crossover(alpha, l)
    return SurvivalFunction(
        lambda t: -_min_exponent(np.asarray(t, dtype=float), alpha, l),
        name=f"Z(alpha={alpha:g}, l={l:g})",
        breakpoints=() if x is None else (x,),
    )


def survival_Y() -> SurvivalFunction:
    """Pr[|Y| >= t] = exp(-t^2)"""
    return SurvivalFunction(lambda t: -np.square(np.asarray(t, dtype=float)), name="Y")


def survival_point_mass() -> SurvivalFunction:
    """X = 0 almost surely: S(t) = 1{t <= 0}"""
    return SurvivalFunction(
        lambda t: np.where(np.asarray(t, dtype=float) > 0, -np.inf, 0.0),
        name="point_mass_0",
        degenerate=True,
    )


@dataclass
class OrliczSolution:
    """
    eta_star and the final bisection state. expectation_at_eta_star is the
    bisected objective at eta_star (an expectation for the norms, a sum of
    log phi_p values for the sequence norm).
    """

    eta_star: float
    bracket: Tuple[float, float]
    iterations: int
    expectation_at_eta_star: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "eta_star": self.eta_star,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "expectation_at_eta_star": self.expectation_at_eta_star,
        }


def _solve_decreasing(objective: Callable[[float], float], level: float, start: float,
                      what: str) -> OrliczSolution:
    """Bracket and bisect a nonincreasing objective to level; returns the smallest eta with objective <= level"""
    try:
        hi = grow_until(lambda eta: objective(eta) <= level, start, limit=start * BRACKET_LIMIT)
    except ConvergenceError as e:
        raise DivergenceError(f"{what} exceeds {level:g} for every tried scale", e.diagnostics)
    lo = shrink_until(lambda eta: objective(eta) > level, hi)
    result = bisect_level(objective, level, lo, hi, decreasing=True, rtol=NORM_RTOL)
    logger.debug(f"{what}: eta* = {result.root:.9g} in {result.iterations} steps")
    return OrliczSolution(
        eta_star=result.root,
        bracket=result.bracket,
        iterations=result.iterations,
        expectation_at_eta_star=result.values[1],
    )


def log_orlicz_expectation(S: SurvivalFunction, g: GBOFunction, eta: float) -> float:
    """log E[g(|X|/eta)]; +inf when the expectation diverges"""
    if not (eta > 0):
        raise DomainError(f"eta must be positive, got {eta}")
    if S.degenerate:
        return -math.inf

    def h(x: np.ndarray) -> np.ndarray:
        return g.log_exponent_derivative(x) + g.exponent(x) + S.log_survival(eta * x)

    points = list(g.breakpoints) + [b / eta for b in S.breakpoints]
    return log_quad(h, points).log_value


def orlicz_expectation(S: SurvivalFunction, g: GBOFunction, eta: float) -> float:
    """E[g(|X|/eta)] by tail integration; +inf when divergent"""
    return safe_exp(log_orlicz_expectation(S, g, eta))


def solve_orlicz_analytic(S: SurvivalFunction, g: GBOFunction) -> OrliczSolution:
    if S.degenerate:
        return OrliczSolution(0.0, (0.0, 0.0), 0, 0.0)

    def log_e(eta: float) -> float:
        return log_orlicz_expectation(S, g, eta)

    sol = _solve_decreasing(log_e, 0.0, 1.0, f"E[g(|X|/eta)] for {S.name}")
    sol.expectation_at_eta_star = safe_exp(sol.expectation_at_eta_star)
    return sol


def orlicz_norm_analytic(S: SurvivalFunction, g: GBOFunction) -> float:
    """inf{eta > 0 : E[g(|X|/eta)] <= 1}; 0 for the point mass at 0"""
    return solve_orlicz_analytic(S, g).eta_star


def _log_empirical_expectation(xs: np.ndarray, g: GBOFunction, eta: float) -> float:
    e = g.exponent(xs / eta)
    # log(exp(e) - 1) = e + log(-expm1(-e)), zero terms drop out
    pos = e[e > 0]
    if pos.size == 0:
        return -math.inf
    with np.errstate(divide="ignore"):
        terms = pos + np.log(-np.expm1(-pos))
    return float(logsumexp(terms) - math.log(xs.size))


def solve_orlicz_sample(xs: Sequence[float], g: GBOFunction) -> OrliczSolution:
    arr = np.abs(np.asarray(xs, dtype=float))
    if arr.size == 0:
        raise DomainError("orlicz_norm_sample needs a nonempty sample")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample contains non-finite values")
    top = float(arr.max())
    if top == 0.0:
        return OrliczSolution(0.0, (0.0, 0.0), 0, 0.0)
    sol = _solve_decreasing(
        lambda eta: _log_empirical_expectation(arr, g, eta), 0.0, top, "empirical E[g(|x|/eta)]"
    )
    sol.expectation_at_eta_star = safe_exp(sol.expectation_at_eta_star)
    return sol


def orlicz_norm_sample(xs: Sequence[float], g: GBOFunction) -> float:
    """Plug-in Orlicz norm of an empirical sample; 0 for an all-zero sample"""
    return solve_orlicz_sample(xs, g).eta_star


@dataclass(frozen=True)
class PairMeanFunction:
    """phi_p(x) = (|1+x|^p + |1-x|^p)/2 for p >= 2"""

    p: float

    def __post_init__(self) -> None:
        if not (self.p >= 2) or math.isinf(self.p):
            raise DomainError(f"pair-mean function needs finite p >= 2, got {self.p}")

    def log_value(self, x: np.ndarray) -> np.ndarray:
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return np.logaddexp(self.p * np.log1p(ax), self.p * np.log(np.abs(1.0 - ax))) - math.log(2.0)

    def value(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_value(x))

    def log_derivative(self, x: np.ndarray) -> np.ndarray:
        """log phi_p'(x) for x >= 0, with phi_p'(x) = (p/2)((1+x)^(p-1) - sgn(1-x)|1-x|^(p-1))"""
        x = np.asarray(x, dtype=float)
        q = self.p - 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            base = math.log(self.p / 2.0) + q * np.log1p(x)
            below = np.log(-np.expm1(q * (np.log1p(-np.minimum(x, 1.0)) - np.log1p(x))))
            above = np.log1p(np.exp(q * (np.log(np.maximum(x, 1.0) - 1.0) - np.log1p(x))))
            out = base + np.where(x < 1.0, below, above)
        return np.where(x > 0, out, -np.inf)


def log_phi_p_Z(eta: float, p: float, alpha: float, l: float) -> float:
    """
    log E[phi_p(Z/eta)] for Pr[|Z| >= t] = exp(-min{t^2, (t/l)^alpha}), computed
    as log(1 + int_0^inf phi_p'(x) Pr[|Z| >= eta x] dx).
    """
    if not (eta > 0) or math.isinf(eta):
        raise DomainError(f"eta must be positive and finite, got {eta}")
    phi = PairMeanFunction(p)
    S = survival_Z(alpha, l)

    def h(x: np.ndarray) -> np.ndarray:
        return phi.log_derivative(x) + S.log_survival(eta * x)

    points = [1.0] + [b / eta for b in S.breakpoints]
    log_integral = log_quad(h, points).log_value
    if math.isinf(log_integral) and log_integral > 0:
        raise DivergenceError(f"E[phi_p(Z/eta)] diverges at eta={eta}, p={p}")
    return float(np.logaddexp(0.0, log_integral))


def _log_terms(eta: float, p: float, alpha: float, l: float) -> Tuple[float, float]:
    """log of the two l-dependent terms shared by both sides; -inf when l = 0"""
    if l == 0:
        return -math.inf, -math.inf
    log_eta, log_l = math.log(eta), math.log(l)
    two = (2.0 * log_l - 2.0 * log_eta + 0.5 * math.log(alpha * math.pi / 2.0)
           + (2.0 / alpha) * (math.log(2.0) - math.log(alpha) - 1.0))
    pth = (p * log_l - p * log_eta + 0.5 * math.log(alpha * math.pi / p)
           + (p / alpha) * (math.log(p) - math.log(alpha) - 1.0))
    return two, pth


def log_phi_bounds(eta: float, p: float, alpha: float, l: float) -> Tuple[float, float]:
    """
    Explicit lower and upper bounds on log E[phi_p(Z/eta)] for alpha <= 1:

        p min{1, max{p/(eta^2 e^6), p l^2/(e^4 eta^2) T2, l^p/(e^2p eta^p) Tp}}
        2p max{16p/eta^2, e^4 p l^2/eta^2 T2, e^2p l^p/eta^p Tp}

    with T2 = sqrt(alpha pi/2)(2/(alpha e))^(2/alpha) and Tp = sqrt(alpha pi/p)(p/(alpha e))^(p/alpha).
    """
    _check_alpha(alpha)
    _check_l(l)
    if alpha > 1:
        raise DomainError(f"log_phi_bounds is only available for alpha <= 1, got {alpha}")
    if not (p >= 2) or math.isinf(p):
        raise DomainError(f"p must be finite and >= 2, got {p}")
    if not (eta > 0) or math.isinf(eta):
        raise DomainError(f"eta must be positive and finite, got {eta}")
    log_p, log_eta = math.log(p), math.log(eta)
    two, pth = _log_terms(eta, p, alpha, l)
    lower_inner = max(log_p - 2.0 * log_eta - 6.0, log_p - 4.0 + two, pth - 2.0 * p)
    upper_inner = max(math.log(16.0) + log_p - 2.0 * log_eta, 4.0 + log_p + two, 2.0 * p + pth)
    lower = p * safe_exp(min(0.0, lower_inner))
    upper = safe_exp(math.log(2.0 * p) + upper_inner)
    return lower, upper


def log_phi_Y_bounds(eta: float, p: float) -> Tuple[float, float]:
    """p min{1, p/(eta^2 e^6)} <= log E[phi_p(Y/eta)] <= 16 p^2/eta^2"""
    if not (p >= 2) or math.isinf(p):
        raise DomainError(f"p must be finite and >= 2, got {p}")
    if not (eta > 0) or math.isinf(eta):
        raise DomainError(f"eta must be positive and finite, got {eta}")
    return p * min(1.0, p / (eta * eta * math.e**6)), 16.0 * p * p / (eta * eta)


def solve_sequence_orlicz(problem: WeightedSumProblem, p: float) -> OrliczSolution:
    if not problem.is_canonical:
        problem = canonicalize(problem)
    PairMeanFunction(p)  # validates p
    active = [(a, l) for a, l in problem.pairs() if a > 0]
    if not active:
        return OrliczSolution(0.0, (0.0, 0.0), 0, 0.0)

    def total(eta: float) -> float:
        return math.fsum(log_phi_p_Z(eta / a, p, problem.alpha, l) for a, l in active)

    start = moment_rate(problem, p).value
    return _solve_decreasing(total, p, start, "sum of log phi_p")


def sequence_orlicz_norm(problem: WeightedSumProblem, p: float) -> float:
    """inf{eta > 0 : sum_i log E[phi_p(a_i Z_i/eta)] <= p}; 0 when every a_i is 0"""
    return solve_sequence_orlicz(problem, p).eta_star
