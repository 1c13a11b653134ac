"""
DelaySSM — Method-of-steps DDE integrator.
Classical RK4 on a uniform grid commensurate with the delay; delayed values come
from the history (t − τ_d ≤ 0) or from the cubic Hermite dense output of the
grid computed one delay earlier.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from src.core.config import settings
from src.core.errors import IntegrationError
from src.model.delay_system import DelaySystem, InitialHistory, eval_autonomous
from src.simulate.trajectory import Trajectory, TrajectorySource

logger = logging.getLogger(__name__)

MIN_STEPS_PER_DELAY = 20
DEFAULT_STEPS_PER_DELAY = 50


def steps_per_delay(tau_d: float, dt: float) -> int:
    """m with dt = τ_d/m; raises unless m is an integer ≥ MIN_STEPS_PER_DELAY."""
    if not dt > 0:
        raise IntegrationError(f"dt must be > 0, got {dt}", dt=dt)
    m = tau_d / dt
    m_int = int(round(m))
    if abs(m - m_int) > 1e-9 * max(m, 1.0):
        raise IntegrationError(f"dt={dt} does not divide tau_d={tau_d}", dt=dt, tau_d=tau_d)
    if m_int < MIN_STEPS_PER_DELAY:
        raise IntegrationError(
            f"dt={dt} gives {m_int} steps per delay, need at least {MIN_STEPS_PER_DELAY}",
            dt=dt, tau_d=tau_d,
        )
    return m_int


def _hermite_mid(x0: np.ndarray, x1: np.ndarray, d0: np.ndarray, d1: np.ndarray, h: float) -> np.ndarray:
    return 0.5 * (x0 + x1) + 0.125 * h * (d0 - d1)


def integrate_dde(
    sys: DelaySystem,
    hist: InitialHistory,
    t_end: float,
    dt: float | None = None,
) -> Trajectory:
    """
    Trajectory of ẋ = A_u0 x + A_uN x(t − τ_d) + f_nl + ε g(Ωt) on [0, t_end].

    The grid is rounded up to whole steps; forcing is evaluated at the stage times.
    """
    tau = sys.tau_d
    dt = tau / DEFAULT_STEPS_PER_DELAY if dt is None else dt
    m = steps_per_delay(tau, dt)
    dt = tau / m
    hist.check_covers(tau)
    if not t_end > 0:
        raise IntegrationError(f"t_end must be > 0, got {t_end}")

    n_steps = int(np.ceil(t_end / dt - 1e-9))
    times = dt * np.arange(n_steps + 1)
    X = np.empty((n_steps + 1, sys.n))
    D = np.empty_like(X)
    X[0] = hist.value(0.0)

    def node(j: int) -> np.ndarray:
        return hist.value(j * dt) if j <= 0 else X[j]

    def mid(j: int) -> np.ndarray:
        if j + 1 <= 0:
            return hist.value((j + 0.5) * dt)
        return _hermite_mid(X[j], X[j + 1], D[j], D[j + 1], dt)

    def f(t: float, x: np.ndarray, xd: np.ndarray) -> np.ndarray:
        return eval_autonomous(sys, x, xd) + sys.forcing_at(t)

    started = time.monotonic()
    blowup = settings.BLOWUP_NORM
    for k in range(n_steps):
        t = times[k]
        j = k - m
        x = X[k]
        x_mid_delayed = mid(j)
        k1 = f(t, x, node(j))
        D[k] = k1
        k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1, x_mid_delayed)
        k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2, x_mid_delayed)
        k4 = f(t + dt, x + dt * k3, node(j + 1))
        X[k + 1] = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

        norm = np.linalg.norm(X[k + 1])
        if not np.isfinite(norm) or norm > blowup:
            raise IntegrationError(
                f"DDE state blew up at t={times[k + 1]:.6g} (|x|={norm:.3e})",
                t=float(times[k + 1]), norm=float(norm), last_state=X[k].tolist(),
            )
    D[n_steps] = f(times[n_steps], X[n_steps], node(n_steps - m))

    logger.info("DDE integrated", extra={"props": {
        "system": sys.name, "steps": n_steps, "dt": dt, "t_end": float(times[-1]),
        "seconds": round(time.monotonic() - started, 3),
    }})
    return Trajectory(times=times, states=X, source=TrajectorySource.DDE, derivs=D)
