"""
Run configuration files for sweeps and validation runs.

Files are flat KEY=VALUE text (comments start with '#'), read with
python-dotenv. Lists are comma separated.
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from dotenv import dotenv_values

from src.config.settings import MonteCarloConfig, settings
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

MIN_SWEEP_SAMPLES = 10_000

_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)$")

ALL_BOUND_KINDS = ("JOINT_ACH", "ENSEMBLE_CONV", "METACONVERSE", "DT_GENIE",
                   "PREAMBLE_ACH", "PREAMBLE_CONV")

SWEEP_KEYS = {
    "SNR_DB_LIST", "N_LIST", "EPS_IE", "EPS_MD", "EPS_FA", "P_GRID", "BOUND_KINDS",
    "MC_SAMPLES", "CONFIDENCE_LEVEL", "MASTER_SEED", "OUTPUT", "THREADS",
}

VALIDATION_KEYS = {
    "SNR_DB", "N", "M", "P", "EPS_IE", "EPS_MD", "EPS_FA", "N_CODEBOOKS", "TRIALS",
    "MC_SAMPLES", "CONFIDENCE_LEVEL", "MASTER_SEED", "GAMMA2_OFFSET", "OUTPUT",
}


@dataclass(frozen=True)
class SweepConfig:
    """A rate-curve sweep: every (snr, n, kind) point is one task."""

    snr_db_list: Tuple[float, ...]
    n_list: Tuple[int, ...]
    efa: float
    emd: float
    eie: float
    p_grid: Tuple[float, ...]
    bound_kinds: Tuple[str, ...]
    samples: int
    confidence_level: float
    master_seed: int
    output: str
    threads: int = 1

    def mc_config(self, seed: int) -> MonteCarloConfig:
        return MonteCarloConfig(samples=self.samples, seed=seed,
                                confidence_level=self.confidence_level,
                                min_effective_samples=settings.min_effective_samples,
                                moderate_tail_factor=settings.moderate_tail_factor,
                                threads=1)


@dataclass(frozen=True)
class ValidationConfig:
    """A desk-scale decoder validation run."""

    snr_db: float
    n: int
    m: Optional[int]
    p: float
    efa: float
    emd: float
    eie: float
    n_codebooks: int
    trials: int
    samples: int
    confidence_level: float
    master_seed: int
    gamma2_offset: float
    output: str

    def mc_config(self) -> MonteCarloConfig:
        return MonteCarloConfig(samples=self.samples, seed=self.master_seed,
                                confidence_level=self.confidence_level,
                                min_effective_samples=settings.min_effective_samples,
                                moderate_tail_factor=settings.moderate_tail_factor)


def _scan_lines(path: Path) -> Dict[str, int]:
    """Check line syntax; return the line number of every key."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    positions: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _LINE.match(raw)
        if not match:
            raise ConfigError(f"expected KEY=VALUE, got {stripped!r}", line=number)
        key = match.group(1)
        if key in positions:
            raise ConfigError(f"duplicate key {key} (first set on line {positions[key]})", line=number)
        positions[key] = number
    return positions


def _read(path: str, allowed: set) -> Tuple[Dict[str, str], Dict[str, int]]:
    path = Path(path)
    positions = _scan_lines(path)
    values = {k: (v or "").strip() for k, v in dotenv_values(path).items()}
    for key in values:
        if key not in allowed:
            raise ConfigError(f"unknown key {key}", line=positions.get(key))
    return values, positions


class _Fields:
    """Typed access to raw config values with field diagnostics."""

    def __init__(self, values: Dict[str, str]):
        self.values = values

    def _convert(self, key: str, raw: str, kind: Callable):
        try:
            return kind(raw)
        except (ValueError, OverflowError):
            raise ConfigError(f"invalid value {raw!r}", field=key)

    def get(self, key: str, kind: Callable, default=None, required: bool = False):
        raw = self.values.get(key, "")
        if raw == "":
            if required:
                raise ConfigError("required value is missing", field=key)
            return default
        return self._convert(key, raw, kind)

    def get_list(self, key: str, kind: Callable, default=None, required: bool = False) -> List:
        raw = self.values.get(key, "")
        if raw == "":
            if required:
                raise ConfigError("list must not be empty", field=key)
            return list(default or [])
        items = [item.strip() for item in raw.split(",")]
        if any(item == "" for item in items):
            raise ConfigError(f"empty list element in {raw!r}", field=key)
        return [self._convert(key, item, kind) for item in items]


def _as_int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(raw)
    return int(value)


def _probability(fields: _Fields, key: str, default: Optional[float] = None) -> float:
    value = fields.get(key, float, default=default, required=default is None)
    if not 0.0 < value < 1.0:
        raise ConfigError(f"must lie in (0,1), got {value}", field=key)
    return value


def _common(fields: _Fields) -> Tuple[float, float, float, int, float, int]:
    efa = _probability(fields, "EPS_FA")
    emd = _probability(fields, "EPS_MD")
    eie = _probability(fields, "EPS_IE")
    samples = fields.get("MC_SAMPLES", _as_int, default=settings.default_samples)
    confidence = _probability(fields, "CONFIDENCE_LEVEL", default=settings.confidence_level)
    seed = fields.get("MASTER_SEED", _as_int, default=settings.default_seed)
    if seed < 0:
        raise ConfigError(f"must be nonnegative, got {seed}", field="MASTER_SEED")
    return efa, emd, eie, samples, confidence, seed


def load_sweep_config(path: str) -> SweepConfig:
    """
    Parse a sweep configuration file.

    Raises:
        ConfigError: with a line number for malformed lines, a field name for
            bad values
    """
    values, _ = _read(path, SWEEP_KEYS)
    fields = _Fields(values)

    snr_db_list = fields.get_list("SNR_DB_LIST", float, required=True)
    n_list = fields.get_list("N_LIST", _as_int, required=True)
    if any(n < 1 for n in n_list):
        raise ConfigError("blocklengths must be positive", field="N_LIST")
    efa, emd, eie, samples, confidence, seed = _common(fields)
    if samples < MIN_SWEEP_SAMPLES:
        raise ConfigError(f"must be at least {MIN_SWEEP_SAMPLES}, got {samples}", field="MC_SAMPLES")

    p_grid = fields.get_list("P_GRID", float, default=[0.5])
    if any(not 0.5 <= p <= 1.0 for p in p_grid):
        raise ConfigError("grid values must lie in [0.5, 1]", field="P_GRID")

    kinds = [k.upper() for k in fields.get_list("BOUND_KINDS", str, default=list(ALL_BOUND_KINDS))]
    unknown = [k for k in kinds if k not in ALL_BOUND_KINDS]
    if unknown:
        raise ConfigError(f"unknown bound kinds {unknown}", field="BOUND_KINDS")
    if "PREAMBLE_ACH" in kinds or "PREAMBLE_CONV" in kinds:
        if any(n < 2 for n in n_list):
            raise ConfigError("preamble bounds need n >= 2", field="N_LIST")

    threads = fields.get("THREADS", _as_int, default=settings.threads)
    if threads < 1:
        raise ConfigError(f"must be positive, got {threads}", field="THREADS")

    config = SweepConfig(
        snr_db_list=tuple(snr_db_list),
        n_list=tuple(n_list),
        efa=efa,
        emd=emd,
        eie=eie,
        p_grid=tuple(p_grid),
        bound_kinds=tuple(dict.fromkeys(kinds)),
        samples=samples,
        confidence_level=confidence,
        master_seed=seed,
        output=fields.get("OUTPUT", str, default="results/rate_curve.csv"),
        threads=threads,
    )
    logger.info(f"Loaded sweep config {path}: {len(config.snr_db_list)} SNRs x "
                f"{len(config.n_list)} blocklengths x {len(config.bound_kinds)} bounds")
    return config


def load_validation_config(path: str) -> ValidationConfig:
    """Parse a validation configuration file."""
    values, _ = _read(path, VALIDATION_KEYS)
    fields = _Fields(values)

    n = fields.get("N", _as_int, required=True)
    if n < 1:
        raise ConfigError(f"must be positive, got {n}", field="N")
    m = fields.get("M", _as_int)
    if m is not None and m < 1:
        raise ConfigError(f"must be positive, got {m}", field="M")
    p = fields.get("P", float, default=0.5)
    if not 0.5 <= p <= 1.0:
        raise ConfigError(f"must lie in [0.5, 1], got {p}", field="P")
    efa, emd, eie, samples, confidence, seed = _common(fields)
    if samples < 1:
        raise ConfigError(f"must be positive, got {samples}", field="MC_SAMPLES")

    n_codebooks = fields.get("N_CODEBOOKS", _as_int, default=50)
    if n_codebooks < 1:
        raise ConfigError(f"must be positive, got {n_codebooks}", field="N_CODEBOOKS")
    trials = fields.get("TRIALS", _as_int, default=100_000)
    if trials < 1:
        raise ConfigError(f"must be positive, got {trials}", field="TRIALS")

    return ValidationConfig(
        snr_db=fields.get("SNR_DB", float, required=True),
        n=n,
        m=m,
        p=p,
        efa=efa,
        emd=emd,
        eie=eie,
        n_codebooks=n_codebooks,
        trials=trials,
        samples=samples,
        confidence_level=confidence,
        master_seed=seed,
        gamma2_offset=fields.get("GAMMA2_OFFSET", float, default=0.0),
        output=fields.get("OUTPUT", str, default="results/validation_report.txt"),
    )
