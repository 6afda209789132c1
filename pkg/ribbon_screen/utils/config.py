"""Run configuration shared by the command line, the bench commands and the DocTypes."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ribbon_screen.exceptions import ConfigurationError

OUTPUT_FORMATS = ("human", "structured")


@dataclass(frozen=True)
class RunConfig:
    """Ceilings, tolerances and switches for one run.

    ``grid_ceiling`` bounds the grid size for full state enumeration,
    ``cover_ceiling`` the matrix size for the exact permanent and
    ``complex_ceiling`` the number of generators of a cover complex.
    """

    subcommand: str | None = None
    inputs: tuple[str, ...] = ()
    grid_ceiling: int = 8
    cover_ceiling: int = 24
    complex_ceiling: int = 200_000
    tol: float = 1e-9
    n_max: int = 40
    workers: int = 1
    output_format: str = "human"
    sheet_shift: int = 1
    max_iterations: int = 100_000
    closeness: float = 1e-9
    volume_ratio_b: float | None = None
    systole: str | None = None
    experimental_cover_rule: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("grid_ceiling", "cover_ceiling", "complex_ceiling", "n_max", "max_iterations"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if self.grid_ceiling < 2:
            raise ConfigurationError("grid_ceiling must be at least 2")
        if not self.tol > 0:
            raise ConfigurationError(f"tol must be positive, got {self.tol}")
        if self.closeness < 0:
            raise ConfigurationError(f"closeness must be nonnegative, got {self.closeness}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be at least 1, got {self.workers}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(f"unknown output format {self.output_format!r}")
        if self.sheet_shift not in (1, -1):
            raise ConfigurationError(f"sheet_shift must be +1 or -1, got {self.sheet_shift}")
        if self.volume_ratio_b is not None and not self.volume_ratio_b > 0:
            raise ConfigurationError(f"b must be positive, got {self.volume_ratio_b}")

    def replace(self, **overrides) -> RunConfig:
        """Copy with the given overrides; ``None`` values keep the current setting."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return dataclasses.replace(self, **changes)


DEFAULT_CONFIG = RunConfig()
