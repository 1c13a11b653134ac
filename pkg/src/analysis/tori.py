"""
DelaySSM — Limit cycles of the forced reduced flow and their tori.
In the frame rotating with the forcing, q = ρ e^{iψ} obeys

    q̇ = q (λ − iΩ + Σ γ_j |q|^{2j}) + ε f_eff(Ω).

A limit cycle of this planar flow is a torus of the chain system, obtained by lifting
p = q e^{iΩt} together with the forced correction.
"""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial.distance import directed_hausdorff
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from src.analysis.frc import (
    _column_roots,
    _forced_expansion,
    default_rho_max,
    fixed_point_jacobian,
    fixed_point_phase,
    is_stable,
)
from src.chain.chain_system import ChainSystem
from src.core.config import settings
from src.core.errors import CycleNotFoundError
from src.ssm.expansion import Rom, SsmExpansion
from src.ssm.polynomial import evaluate

logger = logging.getLogger(__name__)

RETURN_TOL = 1e-8
HORIZON = 2000.0
HORIZON_ATTEMPTS = 4
CYCLE_SAMPLES = 256
ODE_RTOL = 1e-11
ODE_ATOL = 1e-13


class CycleStatus(str, Enum):
    CYCLE = "cycle"
    STABLE_FIXED_POINT = "stable_fixed_point"
    FAILED = "failed"


@dataclass
class RomCycle:
    Omega: float
    epsilon: float
    period: float
    samples: np.ndarray  # (n, 2): ρ, ψ over one period, endpoints included
    q: np.ndarray  # complex rotating-frame samples
    stable: bool
    multiplier: float


@dataclass
class RomCycleResult:
    Omega: float
    status: CycleStatus
    cycle: RomCycle | None = None
    amp_band: tuple[float, float] | None = None
    message: str = ""
    torus: np.ndarray | None = field(default=None, repr=False)  # rows (Ω, phase1, phase2, observable)


def integrate_reduced(rom: Rom, q0: complex, Omega: float, t_end: float, **kwargs):
    """Rotating-frame reduced flow from q0 (scipy solve_ivp result, complex state)."""
    return solve_ivp(
        lambda t, y: [rom.radial_field(y[0], Omega)],
        (0.0, t_end), [complex(q0)],
        method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL, **kwargs,
    )


def _section_event(q_fp: complex):
    def event(t, y):
        return np.imag(y[0] - q_fp)
    return event


def _returns(sol, q_fp: complex) -> tuple[np.ndarray, np.ndarray]:
    """Section crossings on the ray Re(q − q_fp) > 0."""
    t_ev = sol.t_events[0]
    if not len(t_ev):
        return t_ev, np.zeros(0, dtype=complex)
    q_ev = np.asarray(sol.y_events[0])[:, 0]
    keep = np.real(q_ev - q_fp) > 0
    return t_ev[keep], q_ev[keep]


def _hunt_cycle(rom: Rom, Omega: float, q_fp: complex, escape: float) -> tuple[float | None, complex]:
    """
    Integrate until successive section returns agree to RETURN_TOL.

    Returns (period, return point), or (None, q_end) when the orbit settles on a fixed
    point. The horizon doubles on each retry, continuing from the last state.
    """
    state = {"q0": q_fp + 1e-4 * (1.0 + abs(q_fp)), "horizon": HORIZON}

    def escaped(t, y):
        return escape - abs(y[0])
    escaped.terminal = True

    def attempt() -> tuple[float | None, complex]:
        sol = integrate_reduced(rom, state["q0"], Omega, state["horizon"], events=[_section_event(q_fp), escaped])
        if len(sol.t_events[1]):
            raise CycleNotFoundError(f"reduced flow left |q| < {escape:.4g}", Omega=Omega)
        t_ret, q_ret = _returns(sol, q_fp)
        if len(q_ret) >= 3 and abs(q_ret[-1] - q_ret[-2]) < RETURN_TOL:
            return float(t_ret[-1] - t_ret[-2]), complex(q_ret[-1])
        q_end = complex(sol.y[0, -1])
        if abs(rom.radial_field(q_end, Omega)) < RETURN_TOL:
            return None, q_end
        logger.debug(f"Returns not converged by t={state['horizon']:.4g} at Omega={Omega:.6g}")
        state["q0"] = q_end
        state["horizon"] *= 2.0
        raise CycleNotFoundError("section returns did not converge", Omega=Omega, horizon=state["horizon"])

    for retry in Retrying(
        stop=stop_after_attempt(HORIZON_ATTEMPTS),
        retry=retry_if_exception_type(CycleNotFoundError),
        reraise=True,
    ):
        with retry:
            return attempt()
    raise CycleNotFoundError("cycle hunt exhausted", Omega=Omega)


def _multiplier(rom: Rom, Omega: float, q_fp: complex, q_star: complex, period: float) -> float:
    """Slope of the first-return map on the section ray at the cycle."""
    delta = 1e-6 * max(1.0, abs(q_star - q_fp))
    sol = integrate_reduced(rom, q_star + delta, Omega, 3.0 * period, events=[_section_event(q_fp)])
    t_ret, q_ret = _returns(sol, q_fp)
    later = q_ret[t_ret > 0.5 * period]
    if not len(later):
        raise CycleNotFoundError("perturbed orbit did not return", Omega=Omega)
    return float(np.real(later[0] - q_star) / delta)


def _unstable_fixed_point(rom: Rom, Omega: float, rho_max: float) -> complex | None:
    if rom.epsilon == 0:
        return 0j if rom.lam.real > 0 else None
    rho_grid = np.linspace(0.0, rho_max, settings.RHO_GRID_POINTS)
    candidates = []
    for rho in _column_roots(rom, Omega, rho_grid):
        trace, det = fixed_point_jacobian(rom, rho, Omega)
        if not is_stable(trace, det):
            q = rho * np.exp(1j * fixed_point_phase(rom, rho, Omega))
            # unstable foci/nodes first, saddles last
            candidates.append((det <= 0, q))
    if not candidates:
        return None
    return sorted(candidates, key=lambda c: c[0])[0][1]


def find_rom_cycle(rom: Rom, Omega: float, rho_max: float | None = None) -> RomCycleResult:
    """Attracting cycle of the reduced flow at one forcing frequency."""
    rho_max = rho_max or default_rho_max(rom, (Omega, Omega))
    q_fp = _unstable_fixed_point(rom, Omega, rho_max)
    if q_fp is None:
        return RomCycleResult(Omega=Omega, status=CycleStatus.STABLE_FIXED_POINT,
                              message="all fixed points stable; no cycle")

    try:
        period, q_star = _hunt_cycle(rom, Omega, q_fp, escape=2.0 * rho_max)
        if period is None:
            return RomCycleResult(Omega=Omega, status=CycleStatus.STABLE_FIXED_POINT,
                                  message=f"orbit settled on q={q_star:.6g}")
        mult = _multiplier(rom, Omega, q_fp, q_star, period)
    except CycleNotFoundError as e:
        logger.warning(f"ROM cycle hunt failed at Omega={Omega:.6g}: {e}")
        return RomCycleResult(Omega=Omega, status=CycleStatus.FAILED, message=str(e))

    t = np.linspace(0.0, period, CYCLE_SAMPLES + 1)
    sol = integrate_reduced(rom, q_star, Omega, period, t_eval=t)
    q = sol.y[0]
    cycle = RomCycle(
        Omega=Omega, epsilon=rom.epsilon, period=period,
        samples=np.column_stack([np.abs(q), np.angle(q)]), q=q,
        stable=abs(mult) < 1.0, multiplier=mult,
    )
    logger.info(f"ROM cycle at Omega={Omega:.6g}: T={period:.6g}, multiplier={mult:.4g}")
    return RomCycleResult(Omega=Omega, status=CycleStatus.CYCLE, cycle=cycle)


# ============================================
# Torus lift
# ============================================
def torus_observable(
    cycle: RomCycle,
    ssm: SsmExpansion,
    observable: int | None = None,
    n_phase: int = 64,
) -> np.ndarray:
    """Observable on the torus grid (cycle phase × forcing phase), shape (n_cycle, n_phase)."""
    obs = settings.OBSERVABLE_INDEX if observable is None else observable
    phi = np.linspace(0.0, 2 * np.pi, n_phase, endpoint=False)
    p = cycle.q[:, None] * np.exp(1j * phi)[None, :]
    values = evaluate(ssm.W[:, :, obs : obs + 1], p)[..., 0].real
    if ssm.x0_nonauto is not None and ssm.epsilon > 0:
        values = values + ssm.epsilon * np.real(ssm.x0_nonauto[obs] * np.exp(1j * phi))[None, :]
    return values


def torus_section(cycle: RomCycle, ssm: SsmExpansion, phase: float = 0.0) -> np.ndarray:
    """Chain states where the torus meets the stroboscopic section Ωt ≡ phase (mod 2π)."""
    p = cycle.q * np.exp(1j * phase)
    z = evaluate(ssm.W, p).real
    if ssm.x0_nonauto is not None and ssm.epsilon > 0:
        z = z + ssm.epsilon * np.real(ssm.x0_nonauto * np.exp(1j * phase))
    return z


def hausdorff_relative(curve_a: np.ndarray, curve_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between point sets, relative to the diameter of curve_b."""
    d = max(directed_hausdorff(curve_a, curve_b)[0], directed_hausdorff(curve_b, curve_a)[0])
    span = np.ptp(curve_b, axis=0)
    return float(d / max(np.linalg.norm(span), 1e-300))


def rom_limit_cycles(
    rom: Rom,
    ssm: SsmExpansion | None,
    Omega_range: tuple[float, float],
    n_grid: int = 1,
    cs: ChainSystem | None = None,
    threads: int | None = None,
    observable: int | None = None,
    rho_max: float | None = None,
    Omegas: Sequence[float] | None = None,
) -> list[RomCycleResult]:
    """
    Cycle hunt per Ω on a uniform grid over Omega_range (or at the explicit `Omegas`);
    cycles are lifted to tori when an expansion is supplied.
    """
    threads = threads or settings.THREADS
    if Omegas is None:
        Omegas = np.linspace(Omega_range[0], Omega_range[1], n_grid) if n_grid > 1 else np.array([Omega_range[0]])

    def one(Omega: float) -> RomCycleResult:
        res = find_rom_cycle(rom, float(Omega), rho_max)
        if res.cycle is not None and ssm is not None:
            forced = _forced_expansion(ssm, cs, rom.epsilon, float(Omega))
            grid = torus_observable(res.cycle, forced, observable)
            peaks = grid.max(axis=1)
            res.amp_band = (float(peaks.min()), float(peaks.max()))
            n_cyc, n_phi = grid.shape
            ph1 = np.repeat(np.linspace(0.0, 2 * np.pi, n_cyc), n_phi)
            ph2 = np.tile(np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False), n_cyc)
            res.torus = np.column_stack([np.full(ph1.size, Omega), ph1, ph2, grid.ravel()])
        return res

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, Omegas))

    logger.info("ROM cycles hunted", extra={"props": {
        "epsilon": rom.epsilon,
        "statuses": dict(Counter(r.status.value for r in results)),
    }})
    return results
