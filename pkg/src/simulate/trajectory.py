"""
DelaySSM — Trajectory container shared by the DDE, chain and ROM solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from src.core.errors import DimensionMismatchError, IntegrationError


class TrajectorySource(str, Enum):
    DDE = "DDE"
    CHAIN = "chain-ODE"
    ROM = "ROM"


@dataclass
class Trajectory:
    times: np.ndarray  # (m,), strictly increasing
    states: np.ndarray  # (m, d)
    source: TrajectorySource
    derivs: np.ndarray | None = None  # (m, d) slopes at the nodes, cubic Hermite data
    reduced: np.ndarray | None = field(default=None, repr=False)  # ROM only: p(t)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.states.shape[0] != self.times.size:
            raise DimensionMismatchError("trajectory states", self.times.size, self.states.shape[0])
        if self.derivs is not None and np.shape(self.derivs) != self.states.shape:
            raise DimensionMismatchError("trajectory derivatives", self.states.size, np.size(self.derivs))
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise IntegrationError("trajectory times are not strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def interpolant(self):
        """C¹ dense output: cubic Hermite with the stored slopes, cubic spline otherwise."""
        if self.derivs is not None:
            return CubicHermiteSpline(self.times, self.states, self.derivs, axis=0)
        return CubicSpline(self.times, self.states, axis=0)

    def resample(self, dt: float, t0: float | None = None) -> Trajectory:
        if not dt > 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        t0 = self.times[0] if t0 is None else t0
        t = np.arange(t0, self.times[-1] + 0.5 * dt, dt)
        t = t[t <= self.times[-1]]
        spline = self.interpolant()
        derivs = spline.derivative()(t) if self.derivs is not None else None
        return replace(self, times=t, states=spline(t), derivs=derivs, reduced=None)

    def observable(self, index: int) -> np.ndarray:
        if not 0 <= index < self.dim:
            raise ValueError(f"observable index {index} outside 0..{self.dim - 1}")
        return self.states[:, index]

    def tail(self, fraction: float) -> Trajectory:
        """The part after the first `fraction` of the time span."""
        cut = self.times[0] + fraction * (self.times[-1] - self.times[0])
        keep = self.times >= cut
        return replace(
            self,
            times=self.times[keep],
            states=self.states[keep],
            derivs=None if self.derivs is None else self.derivs[keep],
            reduced=None if self.reduced is None else self.reduced[keep],
        )
