"""
Result records and their on-disk formats.

BER results go to a CSV with a fixed header, the info-bit counts to a
companion ``<stem>.info.csv`` next to it, EXIT points to their own CSV and
per-iteration turbo traces to JSON lines.
"""

import csv
import json
from pathlib import Path
from typing import IO, Any, Dict, Iterable, List, Optional, Union

from pydantic import BaseModel, Field, computed_field

from jointsdr.core.logging import get_logger

logger = get_logger("harness.results")

BER_HEADER = ["snr_db", "iteration", "codewords", "bits", "bit_errors", "ber", "avg_runtime_s"]
INFO_HEADER = ["snr_db", "iteration", "codewords", "info_bits", "info_bit_errors", "info_ber"]
EXIT_HEADER = ["snr_db", "i_a", "i_e"]


class BerRecord(BaseModel):
    """BER of one (SNR point, iteration) pair."""
    snr_db: float
    iteration: int = Field(ge=1)
    codewords: int = Field(ge=0)
    bits: int = Field(ge=0)
    bit_errors: int = Field(ge=0)
    avg_runtime_s: float = Field(ge=0.0)
    info_bits: int = Field(default=0, ge=0)
    info_bit_errors: int = Field(default=0, ge=0)
    failed_trials: int = Field(default=0, ge=0)

    @computed_field
    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @computed_field
    @property
    def info_ber(self) -> float:
        return self.info_bit_errors / self.info_bits if self.info_bits else 0.0


class ExitRecord(BaseModel):
    """Measured detector transfer point."""
    snr_db: float
    i_a: float
    i_e: float
    codewords: int = 0


def info_csv_path(path: Union[str, Path]) -> Path:
    """``results.csv`` -> ``results.info.csv``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.info.csv")


def _write_rows(path: Path, header: List[str], rows: Iterable[Dict[str, Any]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=header, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_ber_csv(records: List[BerRecord], path: Union[str, Path]) -> Path:
    """Write the BER CSV and its info-bit companion; returns the companion path."""
    path = Path(path)
    rows = [record.model_dump() for record in records]
    _write_rows(path, BER_HEADER, rows)
    companion = info_csv_path(path)
    _write_rows(companion, INFO_HEADER, rows)
    logger.info("BER results written", path=str(path), info_path=str(companion), records=len(records))
    return companion


def write_exit_csv(records: List[ExitRecord], path: Union[str, Path]) -> None:
    path = Path(path)
    _write_rows(path, EXIT_HEADER, (record.model_dump() for record in records))
    logger.info("EXIT results written", path=str(path), records=len(records))


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TraceWriter:
    """JSON-lines sink for per-iteration receiver traces."""

    def __init__(self, path: Optional[Union[str, Path]]):
        self.path = Path(path) if path is not None else None
        self._handle: Optional[IO[str]] = None
        self.lines = 0

    def __enter__(self) -> "TraceWriter":
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("w", encoding="utf-8")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
            logger.info("Trace written", path=str(self.path), lines=self.lines)

    @property
    def enabled(self) -> bool:
        return self._handle is not None

    def write(self, entry: Dict[str, Any]) -> None:
        if self._handle is None:
            return
        self._handle.write(json.dumps(entry) + "\n")
        self.lines += 1
