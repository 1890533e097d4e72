"""
Run orchestration: output directory, deterministic serialization and the run manifest
"""

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import psutil

from .config import default_jobs

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = ".17g"


def to_jsonable(value: Any) -> Any:
    """
    Convert results to plain JSON types. Floats keep Python's shortest
    round-trip repr; non-finite floats become the strings "inf", "-inf", "nan".
    """
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        f = float(value)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return format(f, CSV_FLOAT_FORMAT)
    if value is None:
        return ""
    return str(value)


@dataclass
class RunManifest:
    """What ran, with which inputs, and where the outputs went"""

    command: str
    config: Dict[str, Any]
    seed: Optional[int]
    version: str
    jobs: int
    started_at: str
    wall_time: float = 0.0
    peak_rss_mb: float = 0.0
    outputs: List[str] = field(default_factory=list)
    exit_code: int = 0


class ExperimentRuntime:
    """
    Owns the output directory of one CLI command. Data files written here
    never contain timestamps; only manifest.json records wall-clock facts.
    """

    def __init__(self, command: str, out_dir: Optional[str] = None, seed: Optional[int] = None,
                 jobs: Optional[int] = None, config: Optional[Dict[str, Any]] = None):
        from . import __version__

        self.command = command
        self.out_dir = Path(out_dir) if out_dir else Path("runs") / command
        self.seed = seed
        self.jobs = jobs if jobs is not None else default_jobs()
        self._t0 = time.perf_counter()
        self.manifest = RunManifest(
            command=command,
            config=to_jsonable(config or {}),
            seed=seed,
            version=__version__,
            jobs=self.jobs,
            started_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        self.out_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"{command}: writing outputs to {self.out_dir} with {self.jobs} jobs")

    def set_config(self, config: Dict[str, Any]) -> None:
        """Snapshot of the validated config, recorded in the manifest"""
        self.manifest.config = to_jsonable(config)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _record(self, path: Path) -> None:
        if str(path) not in self.manifest.outputs:
            self.manifest.outputs.append(str(path))

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.path(name)
        path.write_text(dumps(payload), encoding="utf-8")
        self._record(path)
        return path

    def write_csv(self, name: str, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None,
                  header_comment: Optional[str] = None) -> Path:
        """Rows as CSV; columns default to the union of row keys in first-seen order"""
        if columns is None:
            seen: Dict[str, None] = {}
            for row in rows:
                for key in row:
                    seen.setdefault(key, None)
            columns = list(seen)
        path = self.path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(c)) for c in columns])
        self._record(path)
        return path

    def write_column(self, name: str, values: Iterable[float], header: str) -> Path:
        """One value per row under a single header line"""
        path = self.path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"{header}\n")
            for v in values:
                f.write(format_cell(float(v)) + "\n")
        self._record(path)
        return path

    def finish(self, exit_code: int = 0) -> Path:
        self.manifest.wall_time = round(time.perf_counter() - self._t0, 3)
        self.manifest.peak_rss_mb = round(psutil.Process().memory_info().rss / 2**20, 1)
        self.manifest.exit_code = exit_code
        path = self.path("manifest.json")
        path.write_text(dumps(asdict(self.manifest)), encoding="utf-8")
        logger.info(f"{self.command}: finished in {self.manifest.wall_time:.3f}s")
        return path
