from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _dotenv_files() -> Tuple[str, ...]:
    """
    .env lookup, lowest priority first: the repo root, the working directory, then
    PH_BLOCH_ENV_FILE when set (a run directory can carry its own scan settings).
    """
    files = [str(Path(__file__).resolve().parents[2] / ".env"), ".env"]
    override = os.environ.get("PH_BLOCH_ENV_FILE")
    if override:
        files.append(override)
    return tuple(files)


def _settings_config() -> SettingsConfigDict:
    return SettingsConfigDict(
        env_prefix="",
        env_file=_dotenv_files(),
        env_file_encoding="utf-8",
        extra="ignore",
    )


def normalize_log_level(value: object) -> str:
    """'info', ' "INFO" ' and 20 all become 'INFO'; anything else is rejected."""
    text = str(value).strip().strip("'\"").strip().upper()
    if text.isdigit():
        text = logging.getLevelName(int(text))
    if text not in LOG_LEVELS:
        raise ValueError("log level must be one of %s" % ", ".join(LOG_LEVELS))
    return text


class ScanSettings(BaseSettings):
    model_config = _settings_config()

    # Candidate pairs (smallest image/domain distance ratio) handed to Newton refinement.
    refine_candidates: int = Field(default=32, alias="PH_BLOCH_SCAN_REFINE_CANDIDATES")
    # Extra near-diagonal pairs, as a fraction of the uniform pair count.
    near_diagonal_fraction: float = Field(default=0.25, alias="PH_BLOCH_SCAN_NEAR_DIAGONAL_FRACTION")
    # Multistart points per covering target.
    newton_starts: int = Field(default=32, alias="PH_BLOCH_SCAN_NEWTON_STARTS")
    # Sample size for sampled suprema (sup ||omega||, sup ||f||) in hypothesis checks.
    hypothesis_samples: int = Field(default=4000, alias="PH_BLOCH_SCAN_HYPOTHESIS_SAMPLES")

    @field_validator("near_diagonal_fraction")
    @classmethod
    def _clamp_fraction(cls, v: float) -> float:
        return max(0.0, min(1.0, float(v)))


class AppSettings(BaseSettings):
    model_config = _settings_config()

    log_level: str = Field(default="WARNING", alias="PH_BLOCH_LOG_LEVEL")

    seed: int = Field(default=42, alias="PH_BLOCH_SEED")
    samples: int = Field(default=100_000, alias="PH_BLOCH_SAMPLES")
    tol: float = Field(default=1e-9, alias="PH_BLOCH_TOL")
    workers: int = Field(default=1, alias="PH_BLOCH_WORKERS")

    grid_points: int = Field(default=1000, alias="PH_BLOCH_GRID_POINTS")
    volume_budget: int = Field(default=14, alias="PH_BLOCH_VOLUME_BUDGET")
    pairs: int = Field(default=100_000, alias="PH_BLOCH_PAIRS")
    targets: int = Field(default=1000, alias="PH_BLOCH_TARGETS")

    connectivity_points: int = Field(default=2000, alias="PH_BLOCH_CONNECTIVITY_POINTS")
    connectivity_k: int = Field(default=8, alias="PH_BLOCH_CONNECTIVITY_K")
    connectivity_pairs: int = Field(default=10_000, alias="PH_BLOCH_CONNECTIVITY_PAIRS")

    perturbations: int = Field(default=20, alias="PH_BLOCH_PERTURBATIONS")

    scan: ScanSettings = ScanSettings()

    @field_validator("log_level", mode="before")
    @classmethod
    def _log_level(cls, v: object) -> str:
        return normalize_log_level(v)

    @field_validator("workers", "samples", "pairs", "targets", "grid_points")
    @classmethod
    def _at_least_one(cls, v: int) -> int:
        return max(1, int(v))
