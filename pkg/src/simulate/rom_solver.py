"""
DelaySSM — Transient prediction from the reduced-order model.
"""

from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import solve_ivp

from src.core.errors import IntegrationError
from src.simulate.trajectory import Trajectory, TrajectorySource
from src.ssm.expansion import Rom, SsmExpansion
from src.ssm.reduced import lift

logger = logging.getLogger(__name__)

SAMPLES_PER_PERIOD = 64


def rom_trajectory(
    rom: Rom,
    ssm: SsmExpansion | None,
    p0: complex,
    t_end: float,
    dt_out: float | None = None,
) -> Trajectory:
    """
    Reduced flow from p0 lifted to the chain (or p itself when no expansion is given).

    Integrated in the frame rotating with the forcing, p = q e^{iΩt}; unforced ROMs use Ω = 0,
    which is ρ̇ = a(ρ), θ̇ = b(ρ).
    """
    if not t_end > 0:
        raise IntegrationError(f"t_end must be > 0, got {t_end}")
    forced = rom.epsilon > 0 and rom.Omega is not None
    Omega = float(rom.Omega) if forced else 0.0
    if dt_out is None:
        dt_out = 2 * np.pi / max(abs(rom.lam.imag), 1e-3) / SAMPLES_PER_PERIOD
    t = np.arange(0.0, t_end + 0.5 * dt_out, dt_out)
    t = t[t <= t_end]

    sol = solve_ivp(
        lambda _, y: [rom.radial_field(y[0], Omega)],
        (0.0, t_end), [complex(p0)], method="DOP853", rtol=1e-10, atol=1e-12, t_eval=t,
    )
    if sol.status < 0:
        raise IntegrationError(f"reduced flow failed: {sol.message}", t=float(sol.t[-1]) if sol.t.size else 0.0)
    p = sol.y[0] * np.exp(1j * Omega * sol.t)

    if ssm is None:
        states = np.column_stack([np.abs(p), np.angle(p)])
    else:
        states = lift(ssm, p, sol.t if forced else None)

    logger.info("ROM trajectory integrated", extra={"props": {
        "p0": str(complex(p0)), "t_end": t_end, "samples": int(sol.t.size), "forced": forced,
    }})
    return Trajectory(times=sol.t, states=states, source=TrajectorySource.ROM, reduced=p)
