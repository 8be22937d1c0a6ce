"""Time grids for scenario evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TimeGrid", "log_grid", "linear_grid"]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing, strictly positive evaluation times."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("a time grid must be a 1-d array with at least one point")
        if not np.all(t > 0):
            raise ValueError("time grid values must be strictly positive")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("time grid must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return iter(self.times)


def log_grid(t_min: float, t_max: float, points: int) -> TimeGrid:
    if t_min <= 0:
        raise ValueError("t_min must be positive for a log grid")
    if not (t_max > t_min):
        raise ValueError("t_max must exceed t_min")
    if points < 2:
        raise ValueError("a grid needs at least 2 points")
    return TimeGrid(np.logspace(np.log10(t_min), np.log10(t_max), points))


def linear_grid(t_min: float, t_max: float, points: int) -> TimeGrid:
    if t_min <= 0:
        raise ValueError("t_min must be positive")
    if not (t_max > t_min):
        raise ValueError("t_max must exceed t_min")
    if points < 2:
        raise ValueError("a grid needs at least 2 points")
    return TimeGrid(np.linspace(t_min, t_max, points))
