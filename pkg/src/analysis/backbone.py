"""
DelaySSM — Backbone curves and convergence-domain estimates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.core.config import settings
from src.ssm.expansion import Rom, SsmExpansion
from src.ssm.polynomial import evaluate

logger = logging.getLogger(__name__)

THETA_SAMPLES = 128


@dataclass
class BackbonePoint:
    rho: float
    omega: float
    phys_amp: float = float("nan")


def observable_amplitude(
    ssm: SsmExpansion,
    rho: float,
    observable: int | None = None,
    phase: float = 0.0,
    forced: bool = False,
    n_theta: int = THETA_SAMPLES,
) -> float:
    """
    max over one revolution of the observable on the lifted orbit p = ρ e^{i(φ + phase)}.

    With forced=True, φ doubles as the forcing phase Ωt and the forced correction is added.
    """
    obs = settings.OBSERVABLE_INDEX if observable is None else observable
    phi = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    p = rho * np.exp(1j * (phi + phase))
    values = evaluate(ssm.W[:, :, obs : obs + 1], p)[:, 0].real
    if forced and ssm.x0_nonauto is not None and ssm.epsilon > 0:
        values = values + ssm.epsilon * np.real(ssm.x0_nonauto[obs] * np.exp(1j * phi))
    return float(values.max())


def backbone(
    rom: Rom,
    rho_max: float,
    n_points: int,
    ssm: SsmExpansion | None = None,
    observable: int | None = None,
) -> list[BackbonePoint]:
    """Ω = b(ρ) on a uniform ρ-grid; physical amplitude when an expansion is supplied."""
    if not rho_max > 0:
        raise ValueError(f"rho_max must be > 0, got {rho_max}")
    rhos = np.linspace(0.0, rho_max, n_points)
    omegas = rom.b(rhos)
    points = []
    for rho, omega in zip(rhos, omegas, strict=True):
        amp = observable_amplitude(ssm, rho, observable) if ssm is not None else float("nan")
        points.append(BackbonePoint(rho=float(rho), omega=float(omega), phys_amp=amp))
    return points


def convergence_domain(
    backbones_by_order: dict[int, list[BackbonePoint]],
    tol: float | None = None,
) -> dict[int, float]:
    """
    Per order O, the largest ρ up to which the O-backbone agrees with the next lower
    order within `tol` relative in frequency (contiguous from ρ = 0).
    """
    tol = settings.BACKBONE_AGREEMENT_TOL if tol is None else tol
    orders = sorted(backbones_by_order)
    if len(orders) < 2:
        raise ValueError("convergence_domain needs backbones for at least two orders")

    estimates: dict[int, float] = {}
    for lower, upper in zip(orders, orders[1:]):
        hi = backbones_by_order[upper]
        lo = backbones_by_order[lower]
        rho = np.array([pt.rho for pt in hi])
        w_hi = np.array([pt.omega for pt in hi])
        w_lo = np.interp(rho, [pt.rho for pt in lo], [pt.omega for pt in lo])
        bad = np.flatnonzero(np.abs(w_hi - w_lo) > tol * np.abs(w_hi))
        if not len(bad):
            estimates[upper] = float(rho[-1])
        else:
            estimates[upper] = float(rho[max(bad[0] - 1, 0)])

    logger.info("Convergence domain estimated", extra={"props": {"estimates": estimates}})
    return estimates
