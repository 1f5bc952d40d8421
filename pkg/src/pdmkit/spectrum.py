"""Bound-state spectra returned by the solvers and the PCT predictor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Level", "Spectrum"]


@dataclass(frozen=True)
class Level:
    n_r: int
    energy: float
    node_count: int
    est_error: float = float("nan")
    reliable: bool = True


@dataclass
class Spectrum:
    """Levels ordered by radial quantum number.

    ``missing`` carries one diagnostic line per requested level that was not
    found in the scanned energy window.
    """

    levels: list[Level]
    solver: str
    missing: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)

    @property
    def energies(self) -> np.ndarray:
        return np.array([lv.energy for lv in self.levels], dtype=float)

    def energy(self, n_r: int) -> float:
        for lv in self.levels:
            if lv.n_r == n_r:
                return lv.energy
        raise KeyError(f"level n_r={n_r} not in {self.solver} spectrum")
