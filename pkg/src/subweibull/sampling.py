"""
Seeded exact samplers for Y, Z, Z*, Rademacher signs and Gaussian groups

Every stream is a numpy PCG64 generator keyed by a child seed from
derive_seed(), so a draw depends only on (seed, role, indices) and never
on worker count or execution order.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import numpy as np
from joblib import Parallel, delayed

from .errors import DomainError
from .model import WeightedSumProblem, canonicalize

logger = logging.getLogger(__name__)

GENERATOR_ID = "numpy-PCG64/blake2b64-substreams"
GAUSSIAN_ID = "numpy-PCG64/ziggurat"

# Z* realizations are generated in fixed blocks: realization r of index i
# comes from substream (i, r // ZSTAR_BLOCK) at offset r % ZSTAR_BLOCK.
ZSTAR_BLOCK = 4096

_SEED_MASK = (1 << 64) - 1


@dataclass
class SampleBatch:
    values: np.ndarray
    seed: int
    generator_id: str
    spec: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def describe(self) -> str:
        """One-line description of the law, used as a CSV header"""
        parts = [f"{k}={v}" for k, v in self.spec.items()]
        return " ".join(parts)

    def metadata(self) -> Dict[str, Any]:
        return {"seed": self.seed, "generator_id": self.generator_id, "spec": dict(self.spec),
                "shape": list(self.values.shape)}


def derive_seed(parent_seed: int, role_tag: str, *indices: int) -> int:
    """
    Child seed = first 8 bytes (little endian) of BLAKE2b over "parent:tag:i:j...".

    Decimal rendering keeps the mix independent of integer width.
    """
    key = ":".join([str(int(parent_seed) & _SEED_MASK), role_tag] + [str(int(i)) for i in indices])
    digest = hashlib.blake2b(key.encode("ascii"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))


def _check_count(count: int) -> int:
    if int(count) < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    return int(count)


def _exponential_from_uniform(r: np.ndarray) -> np.ndarray:
    """s = -ln U with U = 1 - r in (0, 1] for r in [0, 1)"""
    return -np.log1p(-r)


def y_magnitude(s: np.ndarray) -> np.ndarray:
    return np.sqrt(s)


def z_magnitude(s: np.ndarray, alpha: float, l: float) -> np.ndarray:
    """|Z| = max{sqrt(s), l s^(1/alpha)}, the inverse of t -> min{t^2, (t/l)^alpha}"""
    root = np.sqrt(s)
    if l == 0:
        return root
    with np.errstate(over="ignore"):
        return np.maximum(root, l * np.power(s, 1.0 / alpha))


def _signs(rng: np.random.Generator, count: int) -> np.ndarray:
    return np.where(rng.random(count) < 0.5, -1.0, 1.0)


def sample_rademacher(count: int, seed: int) -> SampleBatch:
    count = _check_count(count)
    values = _signs(make_rng(derive_seed(seed, "sign")), count)
    return SampleBatch(values, seed, GENERATOR_ID, {"law": "rademacher", "count": count})


def sample_Y(count: int, seed: int) -> SampleBatch:
    """Symmetric Y with Pr[|Y| >= t] = exp(-t^2)"""
    count = _check_count(count)
    s = _exponential_from_uniform(make_rng(derive_seed(seed, "magnitude")).random(count))
    signs = _signs(make_rng(derive_seed(seed, "sign")), count)
    return SampleBatch(signs * y_magnitude(s), seed, GENERATOR_ID, {"law": "Y", "count": count})


def _check_law(alpha: float, l: float) -> None:
    if not (alpha > 0) or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a positive finite number, got {alpha}")
    if not (l >= 0) or not math.isfinite(l):
        raise DomainError(f"l must be finite and nonnegative, got {l}")


def sample_Z(alpha: float, l: float, count: int, seed: int) -> SampleBatch:
    """Symmetric Z with Pr[|Z| >= t] = exp(-min{t^2, (t/l)^alpha}), by direct inversion"""
    _check_law(alpha, l)
    count = _check_count(count)
    s = _exponential_from_uniform(make_rng(derive_seed(seed, "magnitude")).random(count))
    signs = _signs(make_rng(derive_seed(seed, "sign")), count)
    return SampleBatch(
        signs * z_magnitude(s, alpha, l), seed, GENERATOR_ID,
        {"law": "Z", "alpha": alpha, "l": l, "count": count},
    )


def sample_Z_representation(alpha: float, l: float, count: int, seed: int) -> SampleBatch:
    """Z through max{|Y|, l |Y|^(2/alpha)} on an independent Y stream"""
    _check_law(alpha, l)
    count = _check_count(count)
    y = np.abs(sample_Y(count, derive_seed(seed, "representation")).values)
    with np.errstate(over="ignore"):
        mags = np.maximum(y, l * np.power(y, 2.0 / alpha)) if l > 0 else y
    signs = _signs(make_rng(derive_seed(seed, "sign")), count)
    return SampleBatch(
        signs * mags, seed, GENERATOR_ID,
        {"law": "Z_representation", "alpha": alpha, "l": l, "count": count},
    )


def _zstar_block(problem: WeightedSumProblem, seed: int, block: int, size: int) -> np.ndarray:
    total = np.zeros(size)
    for i, (a, l) in enumerate(problem.pairs()):
        if a == 0:
            continue
        draws = make_rng(derive_seed(seed, "zstar", i, block)).random((2, ZSTAR_BLOCK))[:, :size]
        mags = z_magnitude(_exponential_from_uniform(draws[0]), problem.alpha, l)
        total += a * np.where(draws[1] < 0.5, -mags, mags)
    return total


def sample_Zstar(problem: WeightedSumProblem, reps: int, seed: int, jobs: int = 1) -> SampleBatch:
    """
    reps i.i.d. realizations of Z* = sum_i a_i Z_i.

    Blocks of ZSTAR_BLOCK realizations run in parallel; results are
    concatenated in block order so the output is independent of jobs.
    """
    reps = _check_count(reps)
    if not problem.is_canonical:
        problem = canonicalize(problem)
    blocks = [(b, min(ZSTAR_BLOCK, reps - b * ZSTAR_BLOCK)) for b in range((reps + ZSTAR_BLOCK - 1) // ZSTAR_BLOCK)]
    logger.debug(f"sampling Z* with {reps} reps in {len(blocks)} blocks on {jobs} workers")
    if jobs == 1 or len(blocks) == 1:
        parts = [_zstar_block(problem, seed, b, size) for b, size in blocks]
    else:
        parts = Parallel(n_jobs=jobs)(delayed(_zstar_block)(problem, seed, b, size) for b, size in blocks)
    return SampleBatch(
        np.concatenate(parts), seed, GENERATOR_ID,
        {"law": "Zstar", "alpha": problem.alpha, "weights": list(problem.weights),
         "scales": list(problem.scales), "reps": reps},
    )


def sample_gaussian_groups(m: int, n: int, q: int, seed: int) -> SampleBatch:
    """m groups x n observations x q dimensions of i.i.d. standard normals"""
    for name, v in (("m", m), ("n", n), ("q", q)):
        if int(v) < 1:
            raise DomainError(f"{name} must be >= 1, got {v}")
    cube = make_rng(derive_seed(seed, "gaussian")).standard_normal((int(m), int(n), int(q)))
    return SampleBatch(cube, seed, GAUSSIAN_ID, {"law": "gaussian", "m": m, "n": n, "q": q})


def lag1_autocorrelation(xs: Iterable[float]) -> Optional[float]:
    """Sample lag-1 autocorrelation; None for a constant or too-short stream"""
    arr = np.asarray(list(xs) if not isinstance(xs, np.ndarray) else xs, dtype=float)
    if arr.size < 3:
        return None
    centered = arr - arr.mean()
    denom = float(np.dot(centered, centered))
    if denom == 0.0:
        return None
    return float(np.dot(centered[:-1], centered[1:]) / denom)
