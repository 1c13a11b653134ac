"""
DelaySSM — Limit-cycle roots of a(ρ) with spurious-root filtering.
A nontrivial root ρ* of a(ρ) is a limit cycle of the reduced flow. It is trusted
only when it persists across the top three expansion orders and stays clear of the
convergence-domain boundary.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as P

from src.core.config import settings
from src.core.errors import CycleNotFoundError, RootFindingError
from src.ssm.expansion import Rom, SsmExpansion
from src.ssm.polynomial import evaluate

logger = logging.getLogger(__name__)


class RootStatus(str, Enum):
    CONVERGED = "converged"
    SPURIOUS = "spurious"


@dataclass
class ClassifiedRoot:
    rho: float
    status: RootStatus
    reason: str = ""


@dataclass
class RootClassification:
    roots_by_order: dict[int, list[float]]
    classified: list[ClassifiedRoot] = field(default_factory=list)

    @property
    def converged(self) -> list[float]:
        return [r.rho for r in self.classified if r.status == RootStatus.CONVERGED]

    @property
    def has_limit_cycle(self) -> bool:
        return bool(self.converged)


def positive_roots(a_coeffs: Sequence[float]) -> list[float]:
    """Real positive roots of a(ρ), ascending; odd a(ρ) is solved as a polynomial in ρ²."""
    a = P.polytrim(np.asarray(a_coeffs, dtype=float))
    if len(a) < 2:
        return []
    if np.all(a[0::2] == 0):
        # a(ρ)/ρ = Σ a_{2j+1} s^j with s = ρ²
        c = P.polytrim(a[1::2])
        if len(c) < 2:
            return []
        s = P.polyroots(c)
        real = s[(np.abs(s.imag) <= 1e-9 * np.maximum(1.0, np.abs(s))) & (s.real > 0)].real
        return sorted(float(r) for r in np.sqrt(real))
    r = P.polyroots(a)
    real = r[(np.abs(r.imag) <= 1e-9 * np.maximum(1.0, np.abs(r))) & (r.real > 0)].real
    return sorted(float(x) for x in real)


def limit_cycle_roots(
    a_by_order: dict[int, Sequence[float]],
    conv_radius: float | None = None,
    agreement_tol: float | None = None,
    boundary_margin: float | None = None,
) -> RootClassification:
    """Classify the top-order nontrivial roots as CONVERGED or SPURIOUS."""
    tol = settings.ROOT_AGREEMENT_TOL if agreement_tol is None else agreement_tol
    margin = settings.ROOT_BOUNDARY_MARGIN if boundary_margin is None else boundary_margin
    if len(a_by_order) < 3:
        raise RootFindingError(f"need a(rho) for at least three orders, got {sorted(a_by_order)}")

    roots = {order: positive_roots(coeffs) for order, coeffs in sorted(a_by_order.items())}
    top, *lower = sorted(roots, reverse=True)[:3]
    result = RootClassification(roots_by_order=roots)

    for rho in roots[top]:
        persistent = all(
            any(abs(r - rho) <= tol * rho for r in roots[order]) for order in lower
        )
        if not persistent:
            status, reason = RootStatus.SPURIOUS, f"does not persist across orders {top}, {lower[0]}, {lower[1]}"
        elif conv_radius is not None and rho >= (1.0 - margin) * conv_radius:
            status, reason = RootStatus.SPURIOUS, f"within {margin:.0%} of the convergence boundary {conv_radius:.4g}"
        else:
            status, reason = RootStatus.CONVERGED, ""
        result.classified.append(ClassifiedRoot(rho=rho, status=status, reason=reason))

    logger.info("Limit-cycle roots classified", extra={"props": {
        "top_order": top,
        "roots": {o: [round(r, 6) for r in rs] for o, rs in roots.items()},
        "converged": result.converged,
    }})
    return result


# ============================================
# Limit-cycle prediction
# ============================================
@dataclass
class LimitCyclePrediction:
    rho_star: float
    frequency: float
    period: float
    theta: np.ndarray
    orbit: np.ndarray  # (n_theta, dim) lifted chain states
    amplitude: float  # max of the observable over the orbit


def limit_cycle_predict(
    rom: Rom,
    ssm: SsmExpansion | None,
    rho_star: float,
    n_theta: int = 256,
    observable: int | None = None,
) -> LimitCyclePrediction:
    """Period 2π/b(ρ*) and the lifted physical orbit over θ ∈ [0, 2π)."""
    omega = float(rom.b(rho_star))
    if omega <= 0:
        raise CycleNotFoundError(f"b(rho*) = {omega:.4g} <= 0 at rho* = {rho_star:.6g}", rho=rho_star)
    obs = settings.OBSERVABLE_INDEX if observable is None else observable
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    orbit = evaluate(ssm.W, rho_star * np.exp(1j * theta)).real if ssm is not None else np.zeros((n_theta, 0))
    amplitude = float(orbit[:, obs].max()) if orbit.size else float("nan")
    prediction = LimitCyclePrediction(
        rho_star=rho_star, frequency=omega, period=2 * np.pi / omega,
        theta=theta, orbit=orbit, amplitude=amplitude,
    )
    logger.info(f"Limit cycle predicted: rho*={rho_star:.6g}, period={prediction.period:.6g}")
    return prediction
