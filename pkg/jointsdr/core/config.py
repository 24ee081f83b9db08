"""
Configuration management for jointsdr.

Process-level settings come from environment variables (``JOINTSDR_`` prefix)
through pydantic-settings. Experiments are described by validated pydantic
models that can be loaded from a JSON document or from a key-value file.

SNR convention used throughout the harness::

    SNR_dB = 10 * log10(Nt * Es / N0),  Es = 2 (energy of +-1+-j),  N0 = 2 * sigma_n^2

so the per-real-dimension noise variance is ``sigma_n^2 = Nt / 10**(SNR_dB / 10)``.
The x-axis convention only shifts curves horizontally; it is fixed here so
that every receiver is compared on the same axis.
"""

import json
import math
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from jointsdr.core.errors import ConfigurationError

SYMBOL_ENERGY = 2.0


class LogLevel(str, Enum):
    """Available log levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class SolverBackend(str, Enum):
    """Available conic solver back-ends."""
    INTERIOR_POINT = "interior-point"
    CVXPY = "cvxpy"


class ReceiverType(str, Enum):
    """Receivers the harness can simulate."""
    DISJOINT_ML_SDR = "disjoint-ml-sdr"
    JOINT_ML_SDR = "joint-ml-sdr"
    TURBO_MULTI = "turbo-multi"
    TURBO_SINGLE = "turbo-single"
    FULL_LIST_TURBO = "full-list-turbo"
    ML_ORACLE = "ml-oracle"


class ExtractionMethod(str, Enum):
    """Ways to turn an SDR solution into symbol estimates."""
    DIRECT = "direct"
    RANK1 = "rank1"
    RANDOMIZED = "randomized"


class DecoderType(str, Enum):
    """Channel decoder applied after non-iterative detection."""
    NONE = "none"
    BF = "bf"
    SPA = "spa"


class TurboMode(str, Enum):
    """Iterative receiver schedule."""
    MULTI = "multi"
    SINGLE = "single"


class ExitDetector(str, Enum):
    """Detectors measured by the EXIT harness."""
    JOINT_MAP_SDR = "joint-map-sdr"
    FULL_LIST = "full-list"


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="JOINTSDR_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    app_name: str = Field(default="jointsdr", description="Application name")
    version: str = Field(default="0.1.0", description="Application version")
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")
    json_logs: bool = Field(default=False, description="Render logs as JSON lines")

    workers: int = Field(default=1, ge=1, description="Trial-parallel worker processes")
    solver_backend: SolverBackend = Field(
        default=SolverBackend.INTERIOR_POINT, description="Conic solver back-end"
    )
    trace_solver: bool = Field(
        default=False, description="Log one debug event per interior-point iteration"
    )
    metrics_textfile: Optional[Path] = Field(
        default=None, description="Write Prometheus metrics to this file after a run"
    )


class SolverConfig(BaseModel):
    """Interior-point termination and step parameters."""
    gap_tol: float = Field(default=1e-6, gt=0, description="Duality gap over 1 + |primal| + |dual|")
    feas_tol: float = Field(
        default=1e-7, gt=0, description="Residual norms over 1 + norm of b, h, C or c; absolute for eigenvalues"
    )
    max_iterations: int = Field(default=100, gt=0)
    step_fraction: float = Field(default=0.98, gt=0, lt=1, description="Fraction to boundary")


class TurboConfig(BaseModel):
    """Iterative receiver parameters."""
    max_turbo_iters: int = Field(default=3, ge=1)
    P: int = Field(default=2, ge=1, description="Hamming radius of candidate lists")
    clip: float = Field(default=8.0, gt=0, description="Clip bound for detector extrinsics")
    spa_iters: int = Field(default=30, ge=1)
    mode: TurboMode = TurboMode.MULTI


class CodeConfig(BaseModel):
    """LDPC code selection: an alist file or a generated regular code."""
    nc: int = Field(default=256, gt=1)
    kc: int = Field(default=128, gt=0)
    col_weight: int = Field(default=3, ge=1)
    seed: int = Field(default=1, description="Seed of the code construction")
    alist: Optional[Path] = Field(default=None, description="Read H from this alist file")
    fs_degree_cap: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _check_rate(self) -> "CodeConfig":
        if self.alist is None and not self.nc > self.kc:
            raise ValueError("nc must exceed kc")
        return self


class ExitConfig(BaseModel):
    """EXIT chart measurement grid."""
    ia_grid: List[float] = Field(default=[0.0, 0.2, 0.4, 0.6, 0.8, 0.9])
    codewords: int = Field(default=20, gt=0, description="Codewords per (SNR, I_A) point")
    detector: ExitDetector = ExitDetector.JOINT_MAP_SDR
    bins: int = Field(default=100, gt=1)

    @field_validator("ia_grid", mode="before")
    @classmethod
    def _split_grid(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("ia_grid")
    @classmethod
    def _check_grid(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("ia_grid must not be empty")
        if any(not 0.0 <= ia < 1.0 for ia in value):
            raise ValueError("a-priori information must lie in [0, 1)")
        return value


class ExperimentConfig(BaseModel):
    """A complete Monte Carlo experiment."""
    code: CodeConfig = Field(default_factory=CodeConfig)
    nt: int = Field(default=4, ge=1)
    nr: int = Field(default=4, ge=1)
    snr_db: List[float] = Field(default=[8.0, 10.0, 12.0])
    receiver: ReceiverType = ReceiverType.JOINT_ML_SDR
    extraction: ExtractionMethod = ExtractionMethod.DIRECT
    decoder: DecoderType = DecoderType.SPA
    max_codewords: int = Field(default=1000, gt=0)
    max_bit_errors: int = Field(default=200, gt=0)
    seed: int = Field(default=2024)
    block_fading: bool = Field(default=False, description="One channel draw per codeword")
    randomization_trials: int = Field(default=50, ge=1)
    bf_iters: int = Field(default=50, ge=1)
    turbo: TurboConfig = Field(default_factory=TurboConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    exit: ExitConfig = Field(default_factory=ExitConfig)
    trace_path: Optional[Path] = Field(default=None, description="JSON-lines turbo trace")
    dump_sdpa: Optional[Path] = Field(default=None, description="SDPA dump of the first SDP of the first trial")

    @field_validator("snr_db", mode="before")
    @classmethod
    def _split_snr(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("snr_db")
    @classmethod
    def _check_snr(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("SNR grid must not be empty")
        return value

    @model_validator(mode="after")
    def _check_combination(self) -> "ExperimentConfig":
        if self.receiver == ReceiverType.ML_ORACLE and self.decoder == DecoderType.SPA:
            raise ValueError("ml-oracle produces hard decisions; use decoder none or bf")
        if (
            self.receiver in (ReceiverType.DISJOINT_ML_SDR, ReceiverType.JOINT_ML_SDR)
            and self.extraction == ExtractionMethod.RANDOMIZED
            and self.decoder == DecoderType.SPA
        ):
            raise ValueError("randomized extraction is hard-output only; use decoder none or bf")
        if self.code.alist is None and self.code.nc % (2 * self.nt) != 0:
            raise ValueError(
                f"codeword length {self.code.nc} is not a multiple of 2*nt={2 * self.nt}"
            )
        if self.receiver in _TURBO_MODES:
            self.turbo = self.turbo.model_copy(update={"mode": _TURBO_MODES[self.receiver]})
        return self

    @property
    def is_iterative(self) -> bool:
        return self.receiver in (
            ReceiverType.TURBO_MULTI,
            ReceiverType.TURBO_SINGLE,
            ReceiverType.FULL_LIST_TURBO,
        )

    @property
    def iterations(self) -> int:
        """Number of per-iteration BER records per SNR point."""
        return self.turbo.max_turbo_iters if self.is_iterative else 1


_TURBO_MODES = {
    ReceiverType.TURBO_MULTI: TurboMode.MULTI,
    ReceiverType.TURBO_SINGLE: TurboMode.SINGLE,
}


def _as_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


def noise_var_from_snr_db(snr_db: float, nt: int) -> float:
    """Per-real-dimension noise variance for an SNR in dB."""
    return nt * SYMBOL_ENERGY / (2.0 * 10.0 ** (snr_db / 10.0))


def snr_db_from_noise_var(noise_var: float, nt: int) -> float:
    """Inverse of :func:`noise_var_from_snr_db`."""
    return 10.0 * math.log10(nt * SYMBOL_ENERGY / (2.0 * noise_var))


def _nest(flat: Dict[str, Optional[str]]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if value is None or value == "":
            continue
        node = nested
        *parents, leaf = key.strip().split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return nested


def load_experiment_config(
    path: Union[str, Path],
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Load an experiment from a JSON document or a key-value file.

    Key-value files hold one ``key = value`` per line, ``#`` comments, dotted
    keys for nested sections (``turbo.P = 3``) and comma separated lists
    (``snr_db = 8, 10, 12``).

    Args:
        path: Configuration file
        overrides: Top-level values that replace the file's (CLI flags)

    Raises:
        ConfigurationError: If the file is missing or unreadable
        pydantic.ValidationError: If values fail validation
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")

    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc
    else:
        data = _nest(dotenv_values(path))

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return ExperimentConfig.model_validate(data)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get the process settings."""
    return Settings()
