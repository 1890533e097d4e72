"""
Monotone bisection and log-scaled quadrature shared by bounds and orlicz
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, MonotonicityError

logger = logging.getLogger(__name__)

RTOL = 1e-9
MAX_ITER = 200
BRACKET_LIMIT = 2.0**40


@dataclass
class RootResult:
    """
    Result of a level-crossing search.

    Attributes:
        root: The returned endpoint (the side that satisfies the level).
        bracket: Final (lo, hi) bracket.
        values: f(lo), f(hi).
        iterations: Bisection steps taken.
        converged: Whether the relative bracket width reached tolerance.
    """

    root: float
    bracket: Tuple[float, float]
    values: Tuple[float, float]
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def grow_until(pred: Callable[[float], bool], start: float, factor: float = 2.0,
               limit: float = BRACKET_LIMIT) -> float:
    """Return start * factor**k for the first k with pred true"""
    x = start
    while not pred(x):
        x *= factor
        if x > limit:
            raise ConvergenceError(
                f"bracket expansion passed {limit:g} without meeting the level",
                {"start": start, "limit": limit},
            )
        logger.debug(f"bracket grows to {x:g}")
    return x


def shrink_until(pred: Callable[[float], bool], start: float, factor: float = 0.5,
                 floor: float = 1e-300) -> float:
    """Return start * factor**k for the first k with pred true"""
    x = start
    while not pred(x):
        x *= factor
        if x < floor:
            raise ConvergenceError(
                f"bracket shrink fell below {floor:g} without meeting the level",
                {"start": start, "floor": floor},
            )
        logger.debug(f"bracket shrinks to {x:g}")
    return x


def bisect_level(
    f: Callable[[float], float],
    level: float,
    lo: float,
    hi: float,
    decreasing: bool,
    rtol: float = RTOL,
    maxiter: int = MAX_ITER,
) -> RootResult:
    """
    Bisect a monotone map to a level.

    For a nondecreasing f the invariant is f(lo) <= level < f(hi) and the
    returned root is lo (largest point known to satisfy f <= level).
    For a nonincreasing f the invariant is f(lo) > level >= f(hi) and the
    returned root is hi (smallest point known to satisfy f <= level).

    Raises:
        MonotonicityError: the bracket endpoints or a final midpoint check
            contradict the assumed direction.
        ConvergenceError: maxiter reached before the relative width fell below rtol.
    """
    f_lo, f_hi = f(lo), f(hi)
    ok_lo = f_lo <= level
    ok_hi = f_hi <= level
    if decreasing and not (not ok_lo and ok_hi):
        raise MonotonicityError(
            "initial bracket does not straddle the level for a decreasing map",
            {"lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi, "level": level},
        )
    if not decreasing and not (ok_lo and not ok_hi):
        raise MonotonicityError(
            "initial bracket does not straddle the level for an increasing map",
            {"lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi, "level": level},
        )

    iterations = 0
    while hi - lo > rtol * max(abs(hi), abs(lo), 1e-300):
        if iterations >= maxiter:
            raise ConvergenceError(
                f"bisection did not converge in {maxiter} iterations",
                {"lo": lo, "hi": hi, "f_lo": f_lo, "f_hi": f_hi, "level": level},
            )
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid <= level) != decreasing:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        iterations += 1

    _check_monotone(f, lo, hi, f_lo, f_hi, decreasing)
    logger.debug(f"bisection converged in {iterations} steps to [{lo:.12g}, {hi:.12g}]")
    return RootResult(
        root=hi if decreasing else lo,
        bracket=(lo, hi),
        values=(f_lo, f_hi),
        iterations=iterations,
        converged=True,
    )


def _check_monotone(f: Callable[[float], float], lo: float, hi: float,
                    f_lo: float, f_hi: float, decreasing: bool) -> None:
    if hi <= lo:
        return
    f_mid = f(0.5 * (lo + hi))
    if decreasing:
        ordered = f_lo >= f_mid >= f_hi and f_lo > f_hi
    else:
        ordered = f_lo <= f_mid <= f_hi and f_lo < f_hi
    if not ordered:
        raise MonotonicityError(
            "objective is not strictly monotone across the final bracket",
            {"lo": lo, "hi": hi, "f_lo": f_lo, "f_mid": f_mid, "f_hi": f_hi},
        )


# Scan grid for locating the bulk of a log-integrand on (0, inf); excludes 0 where
# integrable singularities live. Integrands with a large scale parameter peak
# far below 1e-8.
_SCAN = np.logspace(-300, 12, 7801)
_BULK = int(np.searchsorted(_SCAN, 1e-8))
_CUTOFF = math.log(1e-14) - 4.0
_EXP_CEILING = 700.0


@dataclass
class LogQuadResult:
    log_value: float
    abserr: float
    upper_limit: float
    remainder: float
    evaluations: int


def log_quad(
    h: Callable[[np.ndarray], np.ndarray],
    breakpoints: Iterable[float] = (),
    epsrel: float = 1e-10,
    check_rtol: float = 1e-7,
) -> LogQuadResult:
    """
    log of int_0^inf exp(h(x)) dx for a vectorized log-integrand h.

    The integrand is rescaled by its maximum on a geometric scan grid, the
    range is truncated at the first grid point past the peak where h falls
    below max(h) + log(1e-14) - 4, and the remainder beyond the truncation
    point is integrated separately and must be negligible. Returns
    log_value = +inf when h does not decay on the scan grid (divergent
    integral) and -inf when h is -inf everywhere.
    """
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        hv = np.asarray(h(_SCAN), dtype=float)
    hv = np.where(np.isnan(hv), -np.inf, hv)
    if np.all(np.isneginf(hv)):
        return LogQuadResult(-math.inf, 0.0, 0.0, 0.0, 0)
    peak = int(np.argmax(hv))
    if peak == 0 and np.max(hv[_BULK:]) > -math.inf:
        # h grows towards 0: scale on the bulk, the singular end is integrable
        peak = _BULK + int(np.argmax(hv[_BULK:]))
    hmax = float(hv[peak])
    if math.isinf(hmax) or peak == len(_SCAN) - 1 or hv[-1] > hmax + _CUTOFF:
        return LogQuadResult(math.inf, math.inf, math.inf, math.inf, 0)

    beyond = np.nonzero(hv[peak:] < hmax + _CUTOFF)[0]
    upper = float(_SCAN[peak + int(beyond[0])])

    def scaled(x: float) -> float:
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            val = float(h(np.asarray(x, dtype=float)))
        if math.isnan(val):
            return 0.0
        return math.exp(min(val - hmax, _EXP_CEILING))

    candidates = [float(b) for b in breakpoints] + [float(_SCAN[peak])]
    points = sorted({b for b in candidates if math.isfinite(b) and 0.0 < b < upper})
    with warnings.catch_warnings():
        # accuracy is checked against check_rtol below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        try:
            main, err, info = integrate.quad(
                scaled, 0.0, upper, points=points or None, limit=500,
                epsabs=0.0, epsrel=epsrel, full_output=1,
            )[:3]
            remainder, rem_err = integrate.quad(
                scaled, upper, math.inf, limit=200, epsabs=0.0, epsrel=1e-6
            )[:2]
        except ArithmeticError as e:
            raise ConvergenceError(
                f"quadrature arithmetic failed: {e}",
                {"upper_limit": upper, "log_scale": hmax, "peak": float(_SCAN[peak])},
            ) from e
    total = main + remainder
    if total <= 0.0 or not math.isfinite(total):
        raise ConvergenceError(
            "quadrature produced a non-positive or non-finite value",
            {"main": main, "remainder": remainder, "upper_limit": upper, "log_scale": hmax},
        )
    if err + rem_err > check_rtol * total:
        raise ConvergenceError(
            f"quadrature error {err + rem_err:.3g} exceeds {check_rtol:g} relative",
            {"main": main, "abserr": err, "remainder": remainder,
             "upper_limit": upper, "evaluations": info.get("neval")},
        )
    if remainder > 1e-12 * total:
        logger.debug(f"non-negligible quadrature remainder {remainder:.3g} beyond {upper:g}")
    return LogQuadResult(
        log_value=hmax + math.log(total),
        abserr=err + rem_err,
        upper_limit=upper,
        remainder=remainder,
        evaluations=int(info.get("neval", 0)),
    )


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b) without overflow"""
    return float(np.logaddexp(a, b))


def safe_exp(x: float) -> float:
    """exp that saturates to +inf instead of raising OverflowError"""
    if x > 709.0:
        return math.inf
    return math.exp(x)
