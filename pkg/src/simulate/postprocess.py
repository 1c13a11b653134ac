"""
DelaySSM — Steady-state classification and stroboscopic sections.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import find_peaks

from src.core.config import settings
from src.simulate.trajectory import Trajectory

logger = logging.getLogger(__name__)

PERIODIC_TOL = 1e-4
DECAY_TOL = 1e-6
DECAY_FIT_R2 = 0.99
MIN_PEAKS = 4


class ResponseKind(str, Enum):
    DECAY = "decay"
    PERIODIC = "periodic"
    QUASI_PERIODIC = "quasi-periodic"
    INCONCLUSIVE = "inconclusive"


@dataclass
class SteadyState:
    kind: ResponseKind
    amplitude: float | None = None
    amp_band: tuple[float, float] | None = None
    periods: tuple[float, ...] = ()
    n_peaks: int = 0
    message: str = ""
    peak_times: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    peak_values: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def _uniform(traj: Trajectory) -> Trajectory:
    steps = np.diff(traj.times)
    if steps.size and np.ptp(steps) > 1e-9 * steps.mean():
        return traj.resample(float(np.median(steps)))
    return traj


def _refined_peaks(t: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Local maxima polished by the parabola through each peak and its neighbours."""
    idx, _ = find_peaks(x)
    idx = idx[(idx > 0) & (idx < x.size - 1)]
    if not idx.size:
        return np.zeros(0), np.zeros(0)
    y0, y1, y2 = x[idx - 1], x[idx], x[idx + 1]
    denom = y0 - 2 * y1 + y2
    shift = np.where(denom != 0, 0.5 * (y0 - y2) / np.where(denom != 0, denom, 1.0), 0.0)
    h = t[1] - t[0]
    return t[idx] + shift * h, y1 - 0.25 * (y0 - y2) * shift


def _log_linear_r2(t: np.ndarray, h: np.ndarray) -> float:
    y = np.log(h)
    coef = np.polyfit(t, y, 1)
    resid = y - np.polyval(coef, t)
    ss = np.sum((y - y.mean()) ** 2)
    return 1.0 - float(np.sum(resid**2) / ss) if ss > 0 else 1.0


def steady_state(
    traj: Trajectory,
    observable: int | None = None,
    transient_fraction: float | None = None,
    periodic_tol: float = PERIODIC_TOL,
    decay_tol: float = DECAY_TOL,
) -> SteadyState:
    """
    Classify the post-transient response of one observable from its peak sequence.

    decay: the tail falls below decay_tol × the overall maximum, or the peaks shrink
    log-linearly; periodic: peaks agree within periodic_tol relative; quasi-periodic:
    peaks fill a band, reported as (min, max) with the carrier and envelope periods.
    """
    obs = settings.OBSERVABLE_INDEX if observable is None else observable
    fraction = settings.TRANSIENT_FRACTION if transient_fraction is None else transient_fraction
    scale = float(np.abs(traj.observable(obs)).max())
    tail = _uniform(traj.tail(fraction))
    x = tail.observable(obs)

    if scale == 0 or np.abs(x).max() <= decay_tol * scale:
        return SteadyState(kind=ResponseKind.DECAY, message="response below decay tolerance")

    tp, hp = _refined_peaks(tail.times, x)
    if tp.size < MIN_PEAKS:
        return SteadyState(
            kind=ResponseKind.INCONCLUSIVE, n_peaks=int(tp.size), peak_times=tp, peak_values=hp,
            message=f"only {tp.size} peaks after the transient; integrate longer",
        )

    carrier = float(np.median(np.diff(tp)))
    spread = float(np.ptp(hp) / np.abs(hp).max())
    common = dict(n_peaks=int(tp.size), peak_times=tp, peak_values=hp)

    if spread <= periodic_tol:
        return SteadyState(kind=ResponseKind.PERIODIC, amplitude=float(hp.mean()), periods=(carrier,), **common)

    steps = np.diff(hp)
    if np.all(steps < 0) and np.all(hp > 0) and _log_linear_r2(tp, hp) >= DECAY_FIT_R2:
        return SteadyState(kind=ResponseKind.DECAY, message="peak envelope decays exponentially", **common)
    if np.all(steps < 0) or np.all(steps > 0):
        return SteadyState(
            kind=ResponseKind.INCONCLUSIVE, amp_band=(float(hp.min()), float(hp.max())),
            message="peak envelope still drifting monotonically", **common,
        )

    periods = (carrier,)
    env_idx, _ = find_peaks(hp)
    if env_idx.size >= 2:
        periods = (carrier, float(np.median(np.diff(tp[env_idx]))))
    return SteadyState(
        kind=ResponseKind.QUASI_PERIODIC, amplitude=float(hp.max()),
        amp_band=(float(hp.min()), float(hp.max())), periods=periods, **common,
    )


def poincare_section(
    traj: Trajectory,
    Omega: float,
    t0: float | None = None,
    phase: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    States at t_k = t0 + 2πk/Ω read from the dense output.

    t0 defaults to the first time after the transient with Ωt ≡ phase (mod 2π).
    Returns (times, states).
    """
    if not Omega > 0:
        raise ValueError(f"Omega must be > 0, got {Omega}")
    period = 2 * np.pi / Omega
    if t0 is None:
        start = traj.times[0] + settings.TRANSIENT_FRACTION * (traj.times[-1] - traj.times[0])
        t0 = (np.ceil((Omega * start - phase) / (2 * np.pi)) * 2 * np.pi + phase) / Omega
    times = np.arange(t0, traj.times[-1] + 1e-12, period)
    times = times[(times >= traj.times[0]) & (times <= traj.times[-1])]
    states = traj.interpolant()(times) if times.size else np.zeros((0, traj.dim))
    logger.debug(f"Poincaré section: {times.size} points, period {period:.6g}")
    return times, states
