"""
Monte Carlo and quadrature checks of the moment, tail and Orlicz-norm bounds

Tightness is reported as ratio bands (empirical / rate) because the
absolute constants C(alpha) are unspecified; fitted constants are the
extreme stand-ins for C that make the bounds hold on the sampled grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import stats
from scipy.special import gammaln, lambertw, logsumexp

from .bounds import (
    K_domain_threshold,
    K_of_t,
    dual_moment_rate,
    gbo_bound_params,
    moment_rate,
    tail_closed_form,
    tail_exponent,
)
from .errors import DomainError
from .model import WeightedSumProblem, canonicalize
from .orlicz import (
    GBOFunction,
    gbo_interval,
    log_phi_bounds,
    log_phi_p_Z,
    orlicz_norm_analytic,
    orlicz_norm_sample,
    sequence_orlicz_norm,
    survival_Z,
)
from .sampling import derive_seed, make_rng, sample_Y, sample_Z, sample_Z_representation, sample_Zstar

logger = logging.getLogger(__name__)

N_BOOT = 1000
MIN_ESS = 50
MAX_TOP_WEIGHT = 0.5
KS_LEVEL = 1e-3
SANDWICH_SLACK = 0.35
INTERVAL_SLACK = 1e-4
COHERENCE_BAND = 5.0
MOMENT_BAND = (1.0 / 20.0, 20.0)
MAX_BAND_RATIO = 10.0
DUAL_BAND = (1.0 / 10.0, 10.0)
DUAL_P_GRID = (2.0, 4.0, 8.0, 16.0)
# empirical GBO norm of Z* over nu* with c = 1
GBO_SUM_CEILING = 20.0
LATALA_LOWER = (math.e - 1.0) / (2.0 * math.e**2)
LATALA_UPPER = math.e


@dataclass
class MomentEstimate:
    """Plug-in ||X||_p with a percentile bootstrap interval and weight diagnostics"""

    estimate: float
    ci: Tuple[float, float]
    ess: float
    top_weight: float
    heavy_tail_warning: bool = False

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci": list(self.ci),
            "ess": self.ess,
            "top_weight": self.top_weight,
            "heavy_tail_warning": self.heavy_tail_warning,
        }


@dataclass
class TailEstimate:
    frequency: float
    ci: Tuple[float, float]
    count: int

    def to_dict(self) -> dict:
        return {"frequency": self.frequency, "ci": list(self.ci), "count": self.count}


@dataclass
class TightnessReport:
    grid: List[float]
    empirical: List[float]
    ci_lo: List[float]
    ci_hi: List[float]
    rate: List[float]
    ratio: List[float]
    fitted_constant_upper: Optional[float]
    fitted_constant_lower: Optional[float]
    band_ratio: float
    warnings: List[str] = field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"grid_value": g, "empirical": e, "ci_lo": lo, "ci_hi": hi, "rate": r, "ratio": q}
            for g, e, lo, hi, r, q in zip(self.grid, self.empirical, self.ci_lo, self.ci_hi, self.rate, self.ratio)
        ]

    def to_dict(self) -> dict:
        return {
            "rows": self.rows(),
            "fitted_constant_upper": self.fitted_constant_upper,
            "fitted_constant_lower": self.fitted_constant_lower,
            "band_ratio": self.band_ratio,
            "warnings": list(self.warnings),
        }


@dataclass
class CheckReport:
    """Itemized pass/fail rows for a single check or suite"""

    name: str
    rows: List[Dict[str, Any]]
    passed: bool
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "summary": dict(self.summary), "rows": self.rows}


@dataclass
class KSResult:
    statistic: float
    pvalue: float
    critical_value: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_value

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "pvalue": self.pvalue,
                "critical_value": self.critical_value, "passed": self.passed}


def _band_ratio(ratios: Sequence[float]) -> float:
    arr = np.asarray(ratios, dtype=float)
    if arr.size == 0:
        return 1.0
    return float(arr.max() / arr.min())


def empirical_moment(xs: Sequence[float], p: float, n_boot: int = N_BOOT, seed: int = 0) -> MomentEstimate:
    """
    (mean |x|^p)^(1/p) through log-sum-exp, with a percentile bootstrap CI.

    Flags samples where one order statistic carries most of the p-th power
    mass (effective sample size below MIN_ESS or top weight above MAX_TOP_WEIGHT).
    """
    if not (p >= 1) or math.isinf(p):
        raise DomainError(f"p must be a finite number >= 1, got {p}")
    arr = np.abs(np.asarray(xs, dtype=float))
    if arr.size == 0:
        raise DomainError("empirical_moment needs a nonempty sample")
    with np.errstate(divide="ignore"):
        logs = np.log(arr)

    def statistic(logx: np.ndarray, axis: int = -1) -> np.ndarray:
        n = logx.shape[axis]
        return np.exp((logsumexp(p * logx, axis=axis) - math.log(n)) / p)

    estimate = float(statistic(logs))
    if estimate == 0.0:
        return MomentEstimate(0.0, (0.0, 0.0), 0.0, 0.0)

    log_w = p * logs - logsumexp(p * logs)
    weights = np.exp(log_w)
    ess = float(1.0 / np.sum(weights * weights))
    top = float(weights.max())
    heavy = ess < MIN_ESS or top > MAX_TOP_WEIGHT
    if heavy:
        logger.warning(f"moment of order {p:g} is dominated by few draws: ess={ess:.1f}, top weight={top:.3f}")

    if arr.size < 2 or float(np.ptp(arr)) == 0.0:
        ci = (estimate, estimate)
    else:
        res = stats.bootstrap(
            (logs,), statistic, n_resamples=n_boot, batch=max(1, min(n_boot, 5_000_000 // arr.size)),
            vectorized=True, method="percentile", random_state=make_rng(derive_seed(seed, "bootstrap")),
        )
        ci = (float(res.confidence_interval.low), float(res.confidence_interval.high))
    return MomentEstimate(estimate, ci, ess, top, heavy)


def empirical_tail(xs: Sequence[float], t: float) -> TailEstimate:
    """Fraction of |x| >= t with a 95% Wilson score interval"""
    if not (t >= 0):
        raise DomainError(f"t must be nonnegative, got {t}")
    arr = np.abs(np.asarray(xs, dtype=float))
    if arr.size == 0:
        raise DomainError("empirical_tail needs a nonempty sample")
    k = int(np.count_nonzero(arr >= t))
    ci = stats.binomtest(k, arr.size).proportion_ci(confidence_level=0.95, method="wilson")
    return TailEstimate(k / arr.size, (float(ci.low), float(ci.high)), k)


def rosenthal_sandwich(
    problem: WeightedSumProblem,
    p_grid: Sequence[float],
    reps: int,
    seed: int,
    jobs: int = 1,
    n_boot: int = N_BOOT,
    sample: Optional[np.ndarray] = None,
) -> TightnessReport:
    """Ratios empirical ||Z*||_p / moment_rate(problem, p, c=1) over p_grid; ratio 1 when every weight is 0"""
    problem = problem if problem.is_canonical else canonicalize(problem)
    if not np.any(problem.a > 0):
        # Z* is the point mass at 0 and every rate is 0
        rates = [moment_rate(problem, p).value for p in p_grid]
        return TightnessReport(
            grid=[float(p) for p in p_grid], empirical=[0.0] * len(rates), ci_lo=[0.0] * len(rates),
            ci_hi=[0.0] * len(rates), rate=rates, ratio=[1.0] * len(rates),
            fitted_constant_upper=1.0, fitted_constant_lower=1.0, band_ratio=1.0,
        )
    warnings: List[str] = []
    for p in p_grid:
        if p > 16:
            msg = f"p={p:g} is beyond 16; Monte Carlo moment estimates degrade"
            logger.warning(msg)
            warnings.append(msg)
    xs = sample if sample is not None else sample_Zstar(problem, reps, seed, jobs).values
    empirical, lo, hi, rate, ratio = [], [], [], [], []
    for k, p in enumerate(p_grid):
        est = empirical_moment(xs, p, n_boot, derive_seed(seed, "rosenthal", k))
        if est.heavy_tail_warning:
            warnings.append(f"p={p:g}: heavy-tail moment diagnostics (ess={est.ess:.1f})")
        r = moment_rate(problem, p).value
        empirical.append(est.estimate)
        lo.append(est.ci[0])
        hi.append(est.ci[1])
        rate.append(r)
        ratio.append(est.estimate / r)
    return TightnessReport(
        grid=[float(p) for p in p_grid], empirical=empirical, ci_lo=lo, ci_hi=hi, rate=rate, ratio=ratio,
        fitted_constant_upper=max(ratio), fitted_constant_lower=min(ratio),
        band_ratio=_band_ratio(ratio), warnings=warnings,
    )


def _upper_constant(m: float, freq: float) -> float:
    """Smallest c with freq <= 2 exp(-m/c)"""
    return m / math.log(2.0 / freq)


def _lower_constant(m: float, freq: float) -> float:
    """Smallest c with freq >= exp(-c m)/c"""
    if m == 0.0:
        return 1.0 / freq
    return float(lambertw(m / freq).real) / m


def fit_tail_constants_from_frequencies(
    problem: WeightedSumProblem, t_grid: Sequence[float], frequencies: Sequence[float],
    cis: Optional[Sequence[Tuple[float, float]]] = None,
) -> TightnessReport:
    """Fit the closed-form tail constants to given exceedance frequencies"""
    if len(t_grid) == 0:
        raise DomainError("no admissible t in the tail grid")
    uppers, lowers, rate, ratio = [], [], [], []
    for t, f in zip(t_grid, frequencies):
        if not (0 < f <= 1):
            raise DomainError(f"frequency at t={t:g} must be in (0, 1], got {f}")
        m = min(tail_exponent(problem, t))
        uppers.append(_upper_constant(m, f))
        if problem.alpha <= 1:
            lowers.append(_lower_constant(m, f))
        r = tail_closed_form(problem, t).value
        rate.append(r)
        ratio.append(f / r)
    cis = cis or [(f, f) for f in frequencies]
    return TightnessReport(
        grid=[float(t) for t in t_grid], empirical=[float(f) for f in frequencies],
        ci_lo=[c[0] for c in cis], ci_hi=[c[1] for c in cis], rate=rate, ratio=ratio,
        fitted_constant_upper=max(uppers), fitted_constant_lower=max(lowers) if lowers else None,
        band_ratio=_band_ratio(ratio),
    )


def fit_tail_constants(problem: WeightedSumProblem, sample: Sequence[float], t_grid: Sequence[float]) -> TightnessReport:
    """
    Smallest stand-ins for C making the closed-form upper bound and (alpha <= 1)
    lower bound hold at every admissible grid t, where admissible means the
    empirical frequency is at least 50/len(sample).
    """
    xs = np.asarray(sample, dtype=float)
    floor = 50.0 / xs.size
    kept_t, freqs, cis = [], [], []
    for t in t_grid:
        est = empirical_tail(xs, t)
        if est.frequency >= floor:
            kept_t.append(float(t))
            freqs.append(est.frequency)
            cis.append(est.ci)
        else:
            logger.info(f"t={t:g} dropped from tail fit: frequency {est.frequency:.3g} below {floor:.3g}")
    if not kept_t:
        raise DomainError("no admissible t in the tail grid", {"min_frequency": floor})
    return fit_tail_constants_from_frequencies(problem, kept_t, freqs, cis)


def _z_cdf(alpha: float, l: float) -> Callable[[np.ndarray], np.ndarray]:
    S = survival_Z(alpha, l)
    return lambda t: -np.expm1(S.log_survival(np.maximum(np.asarray(t, dtype=float), 0.0)))


def ks_check_Z(alpha: float, l: float, count: int, seed: int) -> KSResult:
    """One-sample KS of |Z| draws against 1 - exp(-min{t^2, (t/l)^alpha})"""
    if count < 10_000:
        raise DomainError(f"ks_check_Z needs count >= 10000, got {count}")
    mags = np.abs(sample_Z(alpha, l, count, seed).values)
    res = stats.kstest(mags, _z_cdf(alpha, l))
    return KSResult(float(res.statistic), float(res.pvalue), float(stats.kstwo.isf(KS_LEVEL, count)))


def ks_two_sample_Z(alpha: float, l: float, count: int, seed: int) -> KSResult:
    """Two-sample KS between direct inversion and the max{|Y|, l|Y|^(2/alpha)} representation"""
    direct = np.abs(sample_Z(alpha, l, count, derive_seed(seed, "direct")).values)
    rep = np.abs(sample_Z_representation(alpha, l, count, derive_seed(seed, "representation")).values)
    res = stats.ks_2samp(direct, rep)
    crit = math.sqrt(-math.log(KS_LEVEL / 2.0) / 2.0) * math.sqrt(2.0 / count)
    return KSResult(float(res.statistic), float(res.pvalue), crit)


def gbo_interval_check(alpha: float, l: float) -> CheckReport:
    """||Z||_{phi_{alpha,l}} against [min{sqrt2, 2^(1/alpha)}, max{sqrt3, 3^(1/alpha)}]"""
    norm = orlicz_norm_analytic(survival_Z(alpha, l), GBOFunction.gbo(alpha, l))
    lower, upper = gbo_interval(alpha)
    passed = lower - INTERVAL_SLACK <= norm <= upper + INTERVAL_SLACK
    row = {"alpha": alpha, "l": l, "norm": norm, "lower": lower, "upper": upper, "pass": passed}
    return CheckReport("gbo_interval", [row], passed)


def exact_moment_Y(p: float) -> float:
    """||Y||_p = Gamma(p/2 + 1)^(1/p)"""
    if not (p > 0) or math.isinf(p):
        raise DomainError(f"p must be positive and finite, got {p}")
    return math.exp(float(gammaln(p / 2.0 + 1.0)) / p)


def stirling_moment_Y(p: float) -> float:
    """(sqrt(pi p) (p/(2e))^(p/2))^(1/p), the leading Stirling term of exact_moment_Y"""
    if not (p > 0) or math.isinf(p):
        raise DomainError(f"p must be positive and finite, got {p}")
    return math.exp((0.5 * math.log(math.pi * p) + 0.5 * p * math.log(p / (2.0 * math.e))) / p)


def moment_anchor(count: int, p_grid: Sequence[float], seed: int, n_boot: int = N_BOOT) -> TightnessReport:
    """Empirical ||Y||_p against Gamma(p/2+1)^(1/p)"""
    ys = sample_Y(count, seed).values
    empirical, lo, hi, rate, ratio = [], [], [], [], []
    warnings = []
    for k, p in enumerate(p_grid):
        est = empirical_moment(ys, p, n_boot, derive_seed(seed, "anchor", k))
        exact = exact_moment_Y(p)
        if not (est.ci[0] <= exact <= est.ci[1]):
            warnings.append(f"p={p:g}: exact moment {exact:.6g} outside CI [{est.ci[0]:.6g}, {est.ci[1]:.6g}]")
        empirical.append(est.estimate)
        lo.append(est.ci[0])
        hi.append(est.ci[1])
        rate.append(exact)
        ratio.append(est.estimate / exact)
    return TightnessReport(
        grid=[float(p) for p in p_grid], empirical=empirical, ci_lo=lo, ci_hi=hi, rate=rate, ratio=ratio,
        fitted_constant_upper=max(ratio), fitted_constant_lower=min(ratio),
        band_ratio=_band_ratio(ratio), warnings=warnings,
    )


def rate_scale(p: float, alpha: float, l: float) -> float:
    """max{sqrt(p) max(1, l), p^(1/alpha) l}, the natural eta scale for log phi_p(Z/eta)"""
    return max(math.sqrt(p) * max(1.0, l), math.exp(math.log(p) / alpha) * l)


def _sandwich_row(alpha: float, l: float, p: float, factor: float, slack: float) -> Dict[str, Any]:
    eta = factor * rate_scale(p, alpha, l)
    value = log_phi_p_Z(eta, p, alpha, l)
    lower, upper = log_phi_bounds(eta, p, alpha, l)
    passed = lower <= value * (1.0 + 1e-9) and value <= upper * (1.0 + slack)
    return {"alpha": alpha, "l": l, "p": p, "eta": eta, "lower": lower, "value": value,
            "upper": upper, "pass": passed}


def log_phi_sandwich_grid(
    alphas: Sequence[float] = (0.25, 0.5, 1.0),
    ls: Sequence[float] = (0.0, 0.5, 1.0, 2.0),
    ps: Sequence[float] = (2.0, 4.0, 8.0),
    eta_factors: Sequence[float] = (0.5, 1.0, 2.0, 5.0, 10.0),
    slack: float = SANDWICH_SLACK,
    jobs: int = 1,
) -> CheckReport:
    """lower <= log E[phi_p(Z/eta)] <= upper (1 + slack) across the grid, itemized per point"""
    points = [(a, l, p, f) for a in alphas for l in ls for p in ps for f in eta_factors]
    rows = Parallel(n_jobs=jobs)(delayed(_sandwich_row)(a, l, p, f, slack) for a, l, p, f in points)
    failures = [r for r in rows if not r["pass"]]
    for r in failures:
        logger.warning(f"log phi sandwich fails at alpha={r['alpha']}, l={r['l']}, p={r['p']}, eta={r['eta']:.4g}")
    return CheckReport("log_phi_sandwich", rows, not failures, {"points": len(rows), "failures": len(failures)})


def latala_check(
    problem: WeightedSumProblem, p_grid: Sequence[float], reps: int, seed: int,
    jobs: int = 1, n_boot: int = N_BOOT,
) -> CheckReport:
    """(e-1)/(2e^2) |||a Z|||_p <= ||Z*||_p <= e |||a Z|||_p with the bootstrap CI inside the bracket"""
    problem = problem if problem.is_canonical else canonicalize(problem)
    xs = sample_Zstar(problem, reps, seed, jobs).values
    norms = Parallel(n_jobs=jobs)(delayed(sequence_orlicz_norm)(problem, p) for p in p_grid)
    rows = []
    for k, (p, mnorm) in enumerate(zip(p_grid, norms)):
        est = empirical_moment(xs, p, n_boot, derive_seed(seed, "latala", k))
        lower, upper = LATALA_LOWER * mnorm, LATALA_UPPER * mnorm
        rows.append({
            "p": p, "sequence_norm": mnorm, "lower": lower, "upper": upper,
            "estimate": est.estimate, "ci_lo": est.ci[0], "ci_hi": est.ci[1],
            "pass": lower <= est.ci[0] and est.ci[1] <= upper,
        })
    return CheckReport("latala", rows, all(r["pass"] for r in rows))


def dual_rate_check(problem: WeightedSumProblem, p_grid: Sequence[float]) -> CheckReport:
    """Ratios dual_moment_rate / moment_rate for 1 < alpha <= 2; each must lie in DUAL_BAND"""
    if not (1 < problem.alpha <= 2):
        raise DomainError(f"dual_rate_check needs 1 < alpha <= 2, got {problem.alpha}")
    rows = []
    for p in p_grid:
        dual = dual_moment_rate(problem, p)
        rate = moment_rate(problem, p).value
        ratio = dual / rate
        rows.append({"p": p, "dual_rate": dual, "moment_rate": rate, "ratio": ratio,
                     "pass": DUAL_BAND[0] <= ratio <= DUAL_BAND[1]})
    ratios = [r["ratio"] for r in rows]
    return CheckReport("dual_rate", rows, all(r["pass"] for r in rows), {"band_ratio": _band_ratio(ratios)})


def gbo_sum_check(problem: WeightedSumProblem, reps: int, seed: int, jobs: int = 1) -> CheckReport:
    """Empirical ||Z*||_{phi_{alpha, L*}} (c = 1) relative to ||a⊙Lbar||_2, at most GBO_SUM_CEILING"""
    problem = problem if problem.is_canonical else canonicalize(problem)
    params = gbo_bound_params(problem)
    xs = sample_Zstar(problem, reps, seed, jobs).values
    norm = orlicz_norm_sample(xs, GBOFunction.gbo(problem.alpha, params.l_star))
    ratio = norm / params.nu_star
    row = {"l_star": params.l_star, "nu_star": params.nu_star, "empirical_norm": norm, "ratio": ratio,
           "ceiling": GBO_SUM_CEILING, "pass": 0.0 < ratio <= GBO_SUM_CEILING}
    return CheckReport("gbo_sum", [row], row["pass"])


def tail_coherence(problem: WeightedSumProblem, sample: Sequence[float], t_grid: Sequence[float]) -> CheckReport:
    """
    Compare the fitted K-based bound exp(-K(t)/c_K) with the fitted closed-form
    upper bound at each admissible t (alpha <= 1); pass within a factor COHERENCE_BAND.
    """
    problem = problem if problem.is_canonical else canonicalize(problem)
    if problem.alpha > 1:
        raise DomainError(f"tail_coherence needs alpha <= 1, got {problem.alpha}")
    xs = np.asarray(sample, dtype=float)
    threshold = K_domain_threshold(problem)
    floor = 50.0 / xs.size
    kept = []
    for t in t_grid:
        est = empirical_tail(xs, t)
        if t >= threshold and floor <= est.frequency < 1.0:
            kept.append((float(t), est.frequency, K_of_t(problem, t)))
    if not kept:
        raise DomainError("no admissible t for tail coherence", {"threshold": threshold, "min_frequency": floor})
    c_k = max(k / math.log(1.0 / f) for _, f, k in kept)
    closed = fit_tail_constants_from_frequencies(problem, [t for t, _, _ in kept], [f for _, f, _ in kept])
    c_up = float(closed.fitted_constant_upper or 0.0)
    rows = []
    for t, f, k in kept:
        k_bound = math.exp(-k / c_k)
        closed_bound = tail_closed_form(problem, t, c_up).value
        ratio = k_bound / closed_bound
        rows.append({"t": t, "frequency": f, "K": k, "k_bound": k_bound, "closed_bound": closed_bound,
                     "ratio": ratio, "pass": 1.0 / COHERENCE_BAND <= ratio <= COHERENCE_BAND})
    return CheckReport("tail_coherence", rows, all(r["pass"] for r in rows),
                       {"constant_K": c_k, "constant_closed_form": c_up})


@dataclass(frozen=True)
class NamedProblem:
    name: str
    problem: WeightedSumProblem


def _scale_pattern(pattern: str, n: int) -> List[float]:
    if pattern == "constant":
        return [1.0] * n
    if pattern == "increasing":
        return [float(x) for x in np.linspace(0.5, 2.0, n)] if n > 1 else [0.5]
    cycle = (0.0, 2.0, 0.5)
    return [cycle[i % len(cycle)] for i in range(n)]


def standard_battery() -> List[NamedProblem]:
    """27 problems: alpha in {0.5, 1, 2} x n in {1, 4, 16} x scales constant/increasing/mixed, a_i = 1/sqrt(n)"""
    out = []
    for alpha in (0.5, 1.0, 2.0):
        for n in (1, 4, 16):
            for pattern in ("constant", "increasing", "mixed"):
                problem = WeightedSumProblem.create(alpha, [1.0 / math.sqrt(n)] * n, _scale_pattern(pattern, n))
                out.append(NamedProblem(f"alpha={alpha:g}/n={n}/{pattern}", canonicalize(problem)))
    return out


def latala_battery() -> List[NamedProblem]:
    """Six n = 4 problems from the standard battery (constant and mixed scales)"""
    return [b for b in standard_battery() if "/n=4/" in b.name and not b.name.endswith("increasing")]


def band_checks(report: TightnessReport) -> Dict[str, bool]:
    lo, hi = MOMENT_BAND
    return {
        "ratios_in_band": all(lo <= r <= hi for r in report.ratio),
        "band_ratio_ok": report.band_ratio <= MAX_BAND_RATIO,
    }


@dataclass
class SuiteResult:
    """Outcome of one CLI verification suite: a JSON report plus flat CSV rows"""

    suite: str
    passed: bool
    report: Dict[str, Any]
    rows: List[Dict[str, Any]]


DEFAULT_P_GRID = (1.0, 2.0, 4.0, 8.0)
LAW_GRID = (0.5, 1.0, 2.0)


def _suite_sampler(seed: int, count: Optional[int], jobs: int, **_: Any) -> SuiteResult:
    count = count or 1_000_000
    rows = []
    for k, (alpha, l) in enumerate((a, l) for a in LAW_GRID for l in LAW_GRID):
        one = ks_check_Z(alpha, l, count, derive_seed(seed, "ks", k))
        rows.append({"check": "ks_one_sample", "alpha": alpha, "l": l, **one.to_dict()})
        if alpha <= 1:
            two = ks_two_sample_Z(alpha, l, count, derive_seed(seed, "ks2", k))
            rows.append({"check": "ks_two_sample", "alpha": alpha, "l": l, **two.to_dict()})
    passed = all(r["passed"] for r in rows)
    return SuiteResult("sampler", passed, {"count": count, "checks": rows}, rows)


def _suite_gbo(jobs: int, **_: Any) -> SuiteResult:
    points = [(a, l) for a in LAW_GRID for l in LAW_GRID]
    reports = Parallel(n_jobs=jobs)(delayed(gbo_interval_check)(a, l) for a, l in points)
    rows = [r.rows[0] for r in reports]
    passed = all(r.passed for r in reports)
    return SuiteResult("gbo", passed, {"checks": rows}, rows)


def _suite_rosenthal(seed: int, reps: Optional[int], p_grid: Optional[Sequence[float]], jobs: int,
                     n_boot: int, **_: Any) -> SuiteResult:
    reps = reps or 100_000
    p_grid = list(p_grid or DEFAULT_P_GRID)
    problems, rows = [], []
    for k, item in enumerate(standard_battery()):
        report = rosenthal_sandwich(item.problem, p_grid, reps, derive_seed(seed, "battery", k), jobs, n_boot)
        checks = band_checks(report)
        problems.append({"problem": item.name, **report.to_dict(), **checks})
        rows += [{"problem": item.name, **row} for row in report.rows()]
    passed = all(p["ratios_in_band"] and p["band_ratio_ok"] for p in problems)
    return SuiteResult("rosenthal", passed, {"reps": reps, "p_grid": p_grid, "problems": problems}, rows)


def _default_t_grid(problem: WeightedSumProblem) -> List[float]:
    threshold = K_domain_threshold(problem)
    return [threshold * s for s in (0.25, 0.5, 1.0, 1.5, 2.0, 3.0)]


def _suite_tails(seed: int, reps: Optional[int], t_grid: Optional[Sequence[float]], jobs: int,
                 **_: Any) -> SuiteResult:
    reps = reps or 1_000_000
    problems, rows = [], []
    passed = True
    for k, item in enumerate(b for b in standard_battery() if b.problem.alpha <= 1):
        grid = list(t_grid or _default_t_grid(item.problem))
        fits = []
        for rep_tag in ("first", "second"):
            xs = sample_Zstar(item.problem, reps, derive_seed(seed, "tails", k, rep_tag), jobs).values
            fits.append((xs, fit_tail_constants(item.problem, xs, grid)))
        xs, fit = fits[0]
        other = fits[1][1]
        stable = _within_factor(fit.fitted_constant_upper, other.fitted_constant_upper, 2.0) and \
            _within_factor(fit.fitted_constant_lower, other.fitted_constant_lower, 2.0)
        in_band = 0.1 <= (fit.fitted_constant_upper or 0.0) <= 20.0
        try:
            coherence = tail_coherence(item.problem, xs, grid).to_dict()
        except DomainError as e:
            coherence = {"name": "tail_coherence", "passed": False, "error": str(e)}
        ok = stable and in_band and coherence["passed"]
        passed = passed and ok
        problems.append({"problem": item.name, "fit": fit.to_dict(), "second_fit": other.to_dict(),
                         "stable": stable, "in_band": in_band, "coherence": coherence, "passed": ok})
        rows += [{"problem": item.name, **row} for row in fit.rows()]
    return SuiteResult("tails", passed, {"reps": reps, "problems": problems}, rows)


def _within_factor(a: Optional[float], b: Optional[float], factor: float) -> bool:
    if a is None or b is None:
        return a is None and b is None
    if a <= 0 or b <= 0:
        return False
    return max(a, b) / min(a, b) <= factor


def _suite_latala(seed: int, reps: Optional[int], p_grid: Optional[Sequence[float]], jobs: int,
                  n_boot: int, **_: Any) -> SuiteResult:
    reps = reps or 100_000
    p_grid = [p for p in (p_grid or (2.0, 4.0, 8.0)) if p >= 2]
    problems, rows = [], []
    for k, item in enumerate(latala_battery()):
        report = latala_check(item.problem, p_grid, reps, derive_seed(seed, "latala", k), jobs, n_boot)
        problems.append({"problem": item.name, **report.to_dict()})
        rows += [{"problem": item.name, **row} for row in report.rows]
    passed = all(p["passed"] for p in problems)
    return SuiteResult("latala", passed, {"reps": reps, "p_grid": p_grid, "problems": problems}, rows)


def _suite_moments(seed: int, count: Optional[int], p_grid: Optional[Sequence[float]], n_boot: int,
                   **_: Any) -> SuiteResult:
    count = count or 1_000_000
    report = moment_anchor(count, list(p_grid or (2.0, 4.0, 6.0, 8.0)), seed, n_boot)
    passed = not report.warnings and exact_moment_Y(2.0) == 1.0
    return SuiteResult("moments", passed, {"count": count, **report.to_dict()}, report.rows())


def _suite_logphi(jobs: int, **_: Any) -> SuiteResult:
    report = log_phi_sandwich_grid(jobs=jobs)
    return SuiteResult("logphi", report.passed, report.to_dict(), report.rows)


def _suite_dual(p_grid: Optional[Sequence[float]], **_: Any) -> SuiteResult:
    problems, rows = [], []
    for item in standard_battery():
        if not (1 < item.problem.alpha <= 2):
            continue
        report = dual_rate_check(item.problem, list(p_grid or DUAL_P_GRID))
        problems.append({"problem": item.name, **report.to_dict()})
        rows += [{"problem": item.name, **row} for row in report.rows]
    passed = all(p["passed"] for p in problems)
    return SuiteResult("dual", passed, {"problems": problems}, rows)


def _suite_gbo_sum(seed: int, reps: Optional[int], jobs: int, **_: Any) -> SuiteResult:
    reps = reps or 100_000
    rows = []
    for k, item in enumerate(standard_battery()):
        report = gbo_sum_check(item.problem, reps, derive_seed(seed, "gbo_sum", k), jobs)
        rows.append({"problem": item.name, **report.rows[0]})
    ratios = [r["ratio"] for r in rows]
    passed = all(r["pass"] for r in rows)
    return SuiteResult("gbo_sum", passed, {"reps": reps, "band_ratio": _band_ratio(ratios), "problems": rows}, rows)


SUITES: Dict[str, Callable[..., SuiteResult]] = {
    "sampler": _suite_sampler,
    "gbo": _suite_gbo,
    "rosenthal": _suite_rosenthal,
    "tails": _suite_tails,
    "latala": _suite_latala,
    "moments": _suite_moments,
    "logphi": _suite_logphi,
    "dual": _suite_dual,
    "gbo_sum": _suite_gbo_sum,
}


def run_suite(
    suite: str,
    seed: int,
    jobs: int = 1,
    reps: Optional[int] = None,
    count: Optional[int] = None,
    p_grid: Optional[Sequence[float]] = None,
    t_grid: Optional[Sequence[float]] = None,
    n_boot: int = N_BOOT,
) -> SuiteResult:
    if suite not in SUITES:
        raise DomainError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    logger.info(f"running verification suite {suite} with seed {seed}")
    return SUITES[suite](seed=seed, jobs=jobs, reps=reps, count=count, p_grid=p_grid, t_grid=t_grid,
                         n_boot=n_boot)
