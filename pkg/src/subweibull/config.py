"""
Configuration models and environment lookup

Config files are JSON documents. Every model forbids unknown keys so a
misspelled field (``scale`` for ``scales``) fails loudly instead of
silently falling back to a default.
"""

import json
import math
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

import psutil
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError

T = TypeVar("T", bound=BaseModel)


def getenv_with_dotenv(name: str, default: Optional[str] = None) -> Optional[str]:
    """
    Get an environment variable, checking a .env file in the cwd first

    Args:
        name: Environment variable name
        default: Default value if not found

    Returns:
        Value from .env, the process environment, or default
    """
    env_file_path = os.path.join(os.getcwd(), ".env")
    if os.path.exists(env_file_path):
        try:
            with open(env_file_path, "r", encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line or line.startswith("#") or "=" not in line:
                        continue
                    key, value = line.split("=", 1)
                    if key.strip() != name:
                        continue
                    value = value.strip()
                    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
                        value = value[1:-1]
                    return value
        except OSError:
            pass
    return os.getenv(name, default)


def env_flag(name: str) -> bool:
    value = getenv_with_dotenv(name, "false") or "false"
    return value.lower() in ("true", "1", "yes", "on")


def default_jobs() -> int:
    """Worker count from SUBWEIBULL_JOBS, else the number of physical cores"""
    raw = getenv_with_dotenv("SUBWEIBULL_JOBS")
    if raw:
        try:
            jobs = int(raw)
        except ValueError:
            raise ConfigError(f"SUBWEIBULL_JOBS must be an integer, got {raw!r}")
        if jobs < 1:
            raise ConfigError(f"SUBWEIBULL_JOBS must be >= 1, got {jobs}")
        return jobs
    return psutil.cpu_count(logical=False) or 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class ProblemConfig(_Strict):
    """Schema for a weighted-sum problem: alpha, weights[], scales[]"""

    alpha: float = Field(gt=0)
    weights: List[float] = Field(min_length=1)
    scales: List[float] = Field(min_length=1)

    @field_validator("weights", "scales")
    @classmethod
    def _nonnegative(cls, values: List[float]) -> List[float]:
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"entries must be finite and >= 0, got {v}")
        return values


BoundOperation = Literal[
    "moment_rate",
    "moment_rate_psi",
    "gbo_bound_params",
    "K_of_t",
    "tail_upper_K",
    "tail_lower_K",
    "tail_closed_form",
    "dual_moment_rate",
    "rate_sum_form",
    "lp_interpolation_bracket",
]


class BoundsConfig(_Strict):
    problem: Optional[ProblemConfig] = None
    operation: Optional[BoundOperation] = None
    p: Optional[float] = None
    t: Optional[float] = None
    constant_c: float = Field(default=1.0, gt=0)
    side: Literal["upper", "lower"] = "upper"


class OrliczConfig(_Strict):
    mode: Literal["analytic", "sample", "sequence", "log_phi"] = "analytic"
    law: Literal["Z", "Y"] = "Z"
    alpha: Optional[float] = Field(default=None, gt=0)
    l: float = Field(default=1.0, ge=0)
    generator: Literal["gbo", "psi"] = "gbo"
    g_alpha: Optional[float] = Field(default=None, gt=0)
    g_l: Optional[float] = Field(default=None, ge=0)
    sample_path: Optional[str] = None
    problem: Optional[ProblemConfig] = None
    p: Optional[float] = None
    eta: Optional[float] = Field(default=None, gt=0)


class SampleConfig(_Strict):
    law: Literal["Y", "Z", "Zstar", "gaussian", "rademacher"] = "Z"
    alpha: Optional[float] = Field(default=None, gt=0)
    l: float = Field(default=1.0, ge=0)
    count: int = Field(default=1000, ge=1)
    problem: Optional[ProblemConfig] = None
    reps: int = Field(default=1000, ge=1)
    m: int = Field(default=1, ge=1)
    n: int = Field(default=1, ge=1)
    q: int = Field(default=1, ge=1)


VerifySuite = Literal[
    "sampler", "gbo", "rosenthal", "tails", "latala", "moments", "logphi", "dual", "gbo_sum"
]


class VerifyConfig(_Strict):
    suite: VerifySuite = "gbo"
    reps: Optional[int] = Field(default=None, ge=1)
    count: Optional[int] = Field(default=None, ge=1)
    p_grid: Optional[List[float]] = None
    t_grid: Optional[List[float]] = None
    n_boot: int = Field(default=1000, ge=10)


class CovappConfig(_Strict):
    m: int = Field(default=20, ge=1)
    n: int = Field(default=200, ge=1)
    q: int = Field(default=10, ge=1)
    reps: int = Field(default=5000, ge=1)
    nu_grid: List[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0])
    t_grid: Optional[List[float]] = None

    @field_validator("nu_grid")
    @classmethod
    def _positive_nu(cls, values: List[float]) -> List[float]:
        if not values or any(v <= 0 for v in values):
            raise ValueError("nu_grid must be a nonempty list of positive numbers")
        return values


def _describe_validation_error(path: Union[str, Path], err: ValidationError) -> str:
    lines = [f"invalid config {path}:"]
    for item in err.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"  field {loc}: {item['msg']}")
    return "\n".join(lines)


def load_config(path: Optional[Union[str, Path]], model: Type[T], overrides: Optional[Dict[str, Any]] = None) -> T:
    """
    Load and validate a JSON config file, then apply non-None overrides

    Args:
        path: Config file path, or None to start from the model defaults
        model: The pydantic model to validate against
        overrides: CLI values that take precedence over the file

    Raises:
        ConfigError: unreadable file, JSON syntax error (with line/column) or schema violation
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        try:
            data = json.loads(text, parse_constant=_reject_constant)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
                {"line": e.lineno, "column": e.colno},
            )
        except ValueError as e:
            raise ConfigError(f"invalid number in {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a JSON object at top level")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe_validation_error(path or "<flags>", e),
                          {"fields": [".".join(map(str, i["loc"])) for i in e.errors()]})


def _reject_constant(name: str) -> float:
    raise ValueError(f"{name} is not accepted in config files")
