"""
Grouped covariance-estimation experiment

m groups of n mean-zero identity-covariance Gaussian vectors in dimension q.
For each pair (i, j) the leading error term is

    T_ij = sum_l (hat Sigma_ij^(l) - Sigma_ij^(l))^2

with the uncentered estimator hat Sigma^(l) = (1/n) sum_k X_k X_k^T.
The experiment fits the unspecified constants of the tail and quantile
bounds for T_ij to simulated data.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.special import lambertw

from .bounds import BoundValue, Regime
from .errors import DomainError
from .sampling import derive_seed, sample_gaussian_groups
from .verify import CheckReport, TightnessReport

logger = logging.getLogger(__name__)

MIN_REPS = 1000
SWEEP_SPREAD = 4.0


@dataclass(frozen=True)
class CovExperimentConfig:
    m: int
    n: int
    q: int
    reps: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("m", "n", "q", "reps"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value}")

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "q": self.q, "reps": self.reps, "seed": self.seed}


@dataclass
class CovErrorStats:
    """Leading terms T_ij of one replication; pair_terms is the symmetric q x q matrix"""

    pair_terms: np.ndarray
    sup_term: float

    def upper_terms(self) -> np.ndarray:
        """T_ij for i <= j, row major"""
        return self.pair_terms[np.triu_indices(self.pair_terms.shape[0])]


def empirical_covariance(data: np.ndarray) -> np.ndarray:
    """(1/n) sum_k x_k x_k^T for an n x q array, no centering"""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DomainError(f"expected an n x q array with n, q >= 1, got shape {x.shape}")
    return x.T @ x / x.shape[0]


def leading_term_from_data(cube: np.ndarray, sigma: Optional[np.ndarray] = None) -> CovErrorStats:
    """T_ij for an m x n x q data cube against the true covariance (identity by default)"""
    x = np.asarray(cube, dtype=float)
    if x.ndim != 3 or min(x.shape) < 1:
        raise DomainError(f"expected an m x n x q cube, got shape {x.shape}")
    q = x.shape[2]
    truth = np.eye(q) if sigma is None else np.asarray(sigma, dtype=float)
    if truth.shape != (q, q):
        raise DomainError(f"covariance must be {q} x {q}, got shape {truth.shape}")
    estimates = np.einsum("lki,lkj->lij", x, x) / x.shape[1]
    terms = np.sum((estimates - truth) ** 2, axis=0)
    return CovErrorStats(terms, float(terms.max()))


def leading_term(config: CovExperimentConfig, seed: int) -> CovErrorStats:
    cube = sample_gaussian_groups(config.m, config.n, config.q, seed).values
    return leading_term_from_data(cube)


def _rep_seed(config: CovExperimentConfig, rep: int) -> int:
    return derive_seed(config.seed, "covapp", rep)


def simulate_leading_terms(config: CovExperimentConfig, jobs: int = 1) -> List[CovErrorStats]:
    """One CovErrorStats per replication, in replication order"""
    logger.info(f"simulating {config.reps} replications of m={config.m}, n={config.n}, q={config.q}")
    return Parallel(n_jobs=jobs)(
        delayed(leading_term)(config, _rep_seed(config, rep)) for rep in range(config.reps)
    )


def _branches(t: float, m: int, n: int) -> Dict[Regime, float]:
    return {
        Regime.SUBGAUSSIAN: n * n * t * t / m,
        Regime.SUBEXPONENTIAL: n * t,
        Regime.SUBWEIBULL: n * math.sqrt(t),
    }


def _active(branches: Dict[Regime, float]) -> "tuple[float, Regime]":
    low = min(branches.values())
    hits = [r for r, v in branches.items() if math.isclose(v, low, rel_tol=1e-12)]
    return low, (hits[0] if len(hits) == 1 else Regime.MIXED)


def _check_t(t: float, m: int, n: int) -> None:
    if not (t > 0) or math.isinf(t):
        raise DomainError(f"t must be positive and finite, got {t}")
    if m < 1 or n < 1:
        raise DomainError(f"m and n must be >= 1, got m={m}, n={n}")


def theorem4_exponent(t: float, m: int, n: int) -> float:
    """min{n^2 t^2/m, n t, n sqrt(t)}"""
    _check_t(t, m, n)
    return _active(_branches(t, m, n))[0]


def theorem4_tail_upper(t: float, m: int, n: int, constant_c: float = 1.0) -> BoundValue:
    """4 exp(-c min{n^2 t^2/m, n t, n sqrt(t)}); c = 0 gives the trivial value 4"""
    _check_t(t, m, n)
    if not (constant_c >= 0) or math.isinf(constant_c):
        raise DomainError(f"constant_c must be finite and >= 0, got {constant_c}")
    low, regime = _active(_branches(t, m, n))
    value = 4.0 * math.exp(-constant_c * low)
    return BoundValue(value, constant_c, regime, value > 1.0)


def theorem4_tail_lower(t: float, m: int, n: int, constant_c: float = 1.0) -> BoundValue:
    """(1/c) exp(-c min{n^2 t^2/m, n t, n sqrt(t)})"""
    _check_t(t, m, n)
    if not (constant_c > 0) or math.isinf(constant_c):
        raise DomainError(f"constant_c must be positive and finite, got {constant_c}")
    low, regime = _active(_branches(t, m, n))
    value = math.exp(-constant_c * low) / constant_c
    return BoundValue(value, constant_c, regime, value > 1.0)


def theorem4_quantile(nu: float, m: int, n: int, constant_c: float = 1.0) -> float:
    """c ((m + sqrt(m nu) + nu)/n + nu^2/n^2), exceeded with probability at most e^(-nu)"""
    if not (nu > 0) or math.isinf(nu):
        raise DomainError(f"nu must be positive and finite, got {nu}")
    if m < 1 or n < 1:
        raise DomainError(f"m and n must be >= 1, got m={m}, n={n}")
    return constant_c * ((m + math.sqrt(m * nu) + nu) / n + nu * nu / (n * n))


def mixture_tail_bound(t: float, n: int, constant_c: float = 1.0) -> float:
    """2 exp(-c min{n t, n sqrt(t)}), the per-group squared-error tail"""
    _check_t(t, 1, n)
    return 2.0 * math.exp(-constant_c * min(n * t, n * math.sqrt(t)))


def sample_complexity_rate(m: int, n: int, q: int) -> float:
    """(m + log(q n))/n"""
    if min(m, n, q) < 1:
        raise DomainError(f"m, n, q must be >= 1, got {(m, n, q)}")
    return (m + math.log(q * n)) / n


def _stack(stats: Sequence[CovErrorStats]) -> np.ndarray:
    """reps x pairs matrix of T_ij, i <= j"""
    return np.vstack([s.upper_terms() for s in stats])


def _worst_pair_exceedance(terms: np.ndarray, threshold: float) -> float:
    return float(np.max(np.mean(terms > threshold, axis=0)))


def fit_quantile_constant(terms: np.ndarray, nu_grid: Sequence[float], m: int, n: int) -> float:
    """
    Smallest c such that, for every pair and every nu, the fraction of
    replications with T_ij > theorem4_quantile(nu, m, n, c) is at most e^(-nu).
    """
    reps = terms.shape[0]
    ordered = np.sort(terms, axis=0)
    c_fit = 0.0
    for nu in nu_grid:
        allowed = int(math.floor(reps * math.exp(-nu)))
        if allowed >= reps:
            continue
        needed = float(ordered[reps - allowed - 1].max())
        # one ulp up so that c_fit * Q(nu) is not rounded below the needed order statistic
        c_fit = max(c_fit, math.nextafter(needed / theorem4_quantile(nu, m, n), math.inf))
    return c_fit


@dataclass
class CoverageReport:
    config: CovExperimentConfig
    quantile: TightnessReport
    tail: TightnessReport
    c_fit: float
    tail_constant_upper: Optional[float]
    tail_constant_lower: Optional[float]
    centering_ratio: float

    def rows(self) -> List[Dict[str, float]]:
        out = [{"nu_or_t": g, "empirical_freq": e, "bound_value": r, "c_fit": self.c_fit}
               for g, e, r in zip(self.quantile.grid, self.quantile.empirical, self.quantile.rate)]
        out += [{"nu_or_t": g, "empirical_freq": e, "bound_value": r, "c_fit": self.c_fit}
                for g, e, r in zip(self.tail.grid, self.tail.empirical, self.tail.rate)]
        return out

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "c_fit": self.c_fit,
            "tail_constant_upper": self.tail_constant_upper,
            "tail_constant_lower": self.tail_constant_lower,
            "centering_ratio": self.centering_ratio,
            "quantile": self.quantile.to_dict(),
            "tail": self.tail.to_dict(),
        }


def _tail_report(centered: np.ndarray, t_grid: Sequence[float], m: int, n: int) -> TightnessReport:
    freqs, bounds, uppers, lowers = [], [], [], []
    warnings = []
    for t in t_grid:
        f = _worst_pair_exceedance(centered, t)
        b = theorem4_exponent(t, m, n)
        freqs.append(f)
        bounds.append(theorem4_tail_upper(t, m, n).value)
        if f > 0:
            uppers.append(math.log(4.0 / f) / b)
            lowers.append(float(lambertw(b / f).real) / b)
        else:
            warnings.append(f"t={t:g}: no exceedances, constants not constrained")
    ratio = [f / b for f, b in zip(freqs, bounds)]
    positive = [r for r in ratio if r > 0]
    return TightnessReport(
        grid=[float(t) for t in t_grid], empirical=freqs, ci_lo=freqs, ci_hi=freqs,
        rate=bounds, ratio=ratio,
        fitted_constant_upper=min(uppers) if uppers else None,
        fitted_constant_lower=max(lowers) if lowers else None,
        band_ratio=float(max(positive) / min(positive)) if positive else 1.0,
        warnings=warnings,
    )


def coverage_experiment(
    config: CovExperimentConfig,
    nu_grid: Sequence[float] = (1.0, 2.0, 4.0),
    t_grid: Optional[Sequence[float]] = None,
    jobs: int = 1,
    stats: Optional[Sequence[CovErrorStats]] = None,
) -> CoverageReport:
    """
    Fit the quantile constant c_fit on nu_grid, then compare exceedances of the
    centered statistic T_ij - c_fit m/n with the upper tail bound on t_grid.

    Frequencies are taken over replications for the worst pair (i, j).
    """
    if config.reps < MIN_REPS:
        raise DomainError(f"coverage_experiment needs reps >= {MIN_REPS}, got {config.reps}")
    if not nu_grid or any(nu <= 0 for nu in nu_grid):
        raise DomainError("nu_grid must be a nonempty list of positive numbers")
    m, n = config.m, config.n
    stats = stats if stats is not None else simulate_leading_terms(config, jobs)
    terms = _stack(stats)
    c_fit = fit_quantile_constant(terms, nu_grid, m, n)

    freqs = [_worst_pair_exceedance(terms, theorem4_quantile(nu, m, n, c_fit)) for nu in nu_grid]
    targets = [math.exp(-nu) for nu in nu_grid]
    quantile = TightnessReport(
        grid=[float(nu) for nu in nu_grid], empirical=freqs, ci_lo=freqs, ci_hi=freqs,
        rate=targets, ratio=[f / b for f, b in zip(freqs, targets)],
        fitted_constant_upper=c_fit, fitted_constant_lower=None,
        band_ratio=1.0,
    )

    if t_grid is None:
        t_grid = [s * m / n for s in (0.25, 0.5, 1.0, 2.0)]
    centered = terms - c_fit * m / n
    tail = _tail_report(centered, t_grid, m, n)

    centering_ratio = float(terms.mean() / (m / n))
    logger.info(f"c_fit={c_fit:.4g}, centering ratio={centering_ratio:.4g}")
    return CoverageReport(config, quantile, tail, c_fit, tail.fitted_constant_upper,
                          tail.fitted_constant_lower, centering_ratio)


def quantile_scaling_sweep(
    ms: Sequence[int] = (5, 20, 80),
    ns: Sequence[int] = (100, 400),
    qs: Sequence[int] = (5, 20),
    reps: int = 1000,
    seed: int = 0,
    jobs: int = 1,
) -> CheckReport:
    """
    Empirical 1 - 1/n quantile of sup_ij T_ij against (m + log(q n))/n per
    (m, n, q); passes when max ratio / min ratio stays within SWEEP_SPREAD.
    """
    rows = []
    for m in ms:
        for n in ns:
            for q in qs:
                cfg = CovExperimentConfig(m, n, q, reps, derive_seed(seed, "sweep", m, n, q))
                sups = np.array([s.sup_term for s in simulate_leading_terms(cfg, jobs)])
                quant = float(np.quantile(sups, 1.0 - 1.0 / n))
                rate = sample_complexity_rate(m, n, q)
                rows.append({"m": m, "n": n, "q": q, "quantile": quant, "rate": rate, "ratio": quant / rate})
    ratios = [r["ratio"] for r in rows]
    spread = max(ratios) / min(ratios)
    return CheckReport("quantile_scaling", rows, spread <= SWEEP_SPREAD, {"spread": spread})
