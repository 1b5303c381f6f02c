"""Configuration loading for gridwqo.

Handles the optional gridwqo.json settings file, matrix files in the
rows-top-to-bottom text format, permutation arguments, and the wall-clock
budget shared by the long-running searches.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import logging
from pathlib import Path
import time
from typing import Any

from src.core import Permutation
from src.matrix import GriddingMatrix, parse_matrix

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS_PATH = Path("gridwqo.json")
DEFAULT_MAX_BASIS_LENGTH = 8
MAX_WORKERS = 8


class BudgetExceeded(RuntimeError):
    """Raised when a search runs past its wall-clock budget."""


@dataclass
class Settings:
    """Tunable limits for searches, overridable from the command line."""

    max_basis_length: int = DEFAULT_MAX_BASIS_LENGTH
    jobs: int = 1
    budget_seconds: float | None = None
    max_workers: int = MAX_WORKERS

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Settings:
        """Create Settings from dictionary."""
        return cls(
            max_basis_length=data.get("max_basis_length", DEFAULT_MAX_BASIS_LENGTH),
            jobs=data.get("jobs", 1),
            budget_seconds=data.get("budget_seconds"),
            max_workers=data.get("max_workers", MAX_WORKERS),
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        result: dict[str, Any] = {
            "max_basis_length": self.max_basis_length,
            "jobs": self.jobs,
            "max_workers": self.max_workers,
        }
        if self.budget_seconds is not None:
            result["budget_seconds"] = self.budget_seconds
        return result

    def validate(self) -> None:
        """
        Check field ranges.

        Raises:
            ValueError: If any limit is non-positive
        """
        if self.max_basis_length < 1:
            raise ValueError("max_basis_length must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")
        if self.max_workers < 1:
            raise ValueError("max_workers must be positive")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            raise ValueError("budget_seconds must be positive")

    def worker_count(self) -> int:
        if self.jobs > self.max_workers:
            logger.warning(
                "Requested %d jobs, capping at max_workers=%d", self.jobs, self.max_workers
            )
            return self.max_workers
        return self.jobs


class Budget:
    """A wall-clock deadline checked from inside search loops."""

    def __init__(self, seconds: float | None) -> None:
        self.seconds = seconds
        self.deadline = None if seconds is None else time.monotonic() + seconds

    @classmethod
    def unlimited(cls) -> Budget:
        return cls(None)

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    def check(self) -> None:
        """Raise BudgetExceeded once the deadline has passed."""
        if self.expired():
            raise BudgetExceeded(f"Search exceeded the budget of {self.seconds} seconds")


def check_budget(budget: Budget | None) -> None:
    if budget is not None:
        budget.check()


def load_settings(config_path: Path = DEFAULT_SETTINGS_PATH) -> Settings:
    """
    Load settings from JSON file.

    A missing file yields the defaults.

    Raises:
        ValueError: If the file is not a JSON object or a field is out of range
    """
    if not config_path.exists():
        return Settings()

    with config_path.open(encoding="utf-8") as f:
        data = json.load(f)

    if not isinstance(data, dict):
        raise ValueError(f"{config_path} must contain a JSON object")

    settings = Settings.from_dict(data)
    settings.validate()
    return settings


def load_matrix(path: Path) -> GriddingMatrix:
    """
    Load a matrix file.

    Raises:
        FileNotFoundError: If the file is missing
        MatrixError: If the contents are malformed
    """
    if not path.exists():
        raise FileNotFoundError(f"Matrix file not found: {path}")
    return parse_matrix(path.read_text(encoding="utf-8"))


def parse_permutation_arg(text: str) -> Permutation:
    """Parse a command-line permutation in spaced one-line form."""
    return Permutation.parse(text)
