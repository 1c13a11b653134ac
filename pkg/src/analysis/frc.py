"""
DelaySSM — Forced response curves of the reduced model.
Fixed points of the forced polar reduced flow

    ρ̇ = a(ρ) + ε Re(f_eff e^{−iψ}),   ρψ̇ = ρ(b(ρ) − Ω) + ε Im(f_eff e^{−iψ}),

with ψ the phase lag to the forcing, satisfy a² + ρ²(b − Ω)² = ε²|f_eff(Ω)|².
Roots are bracketed on a ρ-grid per Ω and polished with Brent's method.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.optimize
from numpy.polynomial import polynomial as P

from src.analysis.backbone import observable_amplitude
from src.analysis.roots import positive_roots
from src.chain.chain_system import ChainSystem
from src.core.config import settings
from src.model.delay_system import ForcingTag
from src.ssm.expansion import Rom, SsmExpansion
from src.ssm.parameterization import nonauto_correction

logger = logging.getLogger(__name__)

SN_BISECTIONS = 50


class BifFlag(str, Enum):
    NONE = "none"
    SN = "SN"
    HB = "HB"


@dataclass
class FrcPoint:
    Omega: float
    rho: float
    theta: float
    stable: bool
    bif_flag: BifFlag = BifFlag.NONE
    phys_amp: float = float("nan")
    residual: float = 0.0


@dataclass
class FrcResult:
    epsilon: float
    Omegas: np.ndarray
    counts: np.ndarray
    points: list[FrcPoint] = field(default_factory=list)
    sn_points: list[FrcPoint] = field(default_factory=list)
    hb_points: list[FrcPoint] = field(default_factory=list)

    def all_points(self) -> list[FrcPoint]:
        return sorted(self.points + self.sn_points + self.hb_points, key=lambda pt: (pt.Omega, pt.rho))


# ============================================
# Fixed-point algebra
# ============================================
def amplitude_equation(rom: Rom, rho, Omega: float):
    """G(ρ, Ω) = a² + ρ²(b − Ω)² − ε²|f_eff(Ω)|²."""
    return rom.a(rho) ** 2 + rho**2 * (rom.b(rho) - Omega) ** 2 - (rom.epsilon * abs(rom.f_eff(Omega))) ** 2


def fixed_point_phase(rom: Rom, rho: float, Omega: float) -> float:
    """ψ with e^{iψ} = −ε f_eff / (a + iρ(b − Ω))."""
    return float(np.angle(-rom.epsilon * rom.f_eff(Omega) / (rom.a(rho) + 1j * rho * (rom.b(rho) - Omega))))


def fixed_point_residual(rom: Rom, rho: float, theta: float, Omega: float) -> float:
    return float(abs(
        rom.a(rho) + 1j * rho * (rom.b(rho) - Omega) + rom.epsilon * rom.f_eff(Omega) * np.exp(-1j * theta)
    ))


def fixed_point_jacobian(rom: Rom, rho: float, Omega: float) -> tuple[float, float]:
    """(trace, det) of the 2×2 Jacobian of (ρ̇, ψ̇) at a fixed point."""
    a, da = rom.a(rho), rom.da(rho)
    detune = rom.b(rho) - Omega
    trace = da + a / rho
    det = a * da / rho + detune * (rho * rom.db(rho) + detune)
    return float(trace), float(det)


def is_stable(trace: float, det: float) -> bool:
    return trace < 0 and det > 0


def default_rho_max(rom: Rom, Omega_range: tuple[float, float]) -> float:
    if rom.conv_radius is not None:
        return settings.RHO_GRID_FACTOR * rom.conv_radius
    roots = positive_roots(rom.a_coeffs)
    if roots:
        return 2.0 * max(roots)
    f_max = max(abs(rom.f_eff(w)) for w in Omega_range)
    return min(1e6, 2.0 * rom.epsilon * f_max / max(abs(rom.lam.real), 1e-6))


# ============================================
# Per-Ω solves
# ============================================
def _sign_changes(G: np.ndarray) -> np.ndarray:
    s = np.sign(G)
    return np.flatnonzero(s[:-1] * s[1:] < 0)


def _column_roots(rom: Rom, Omega: float, rho_grid: np.ndarray) -> list[float]:
    G = amplitude_equation(rom, rho_grid, Omega)
    roots = []
    for i in _sign_changes(G):
        roots.append(scipy.optimize.brentq(
            lambda r: amplitude_equation(rom, r, Omega), rho_grid[i], rho_grid[i + 1], xtol=1e-15, rtol=1e-15,
        ))
    exact = rho_grid[1:-1][G[1:-1] == 0]
    return sorted(roots + [float(r) for r in exact])


def _count(rom: Rom, Omega: float, rho_grid: np.ndarray) -> int:
    return len(_sign_changes(amplitude_equation(rom, rho_grid, Omega)))


def _make_point(rom: Rom, rho: float, Omega: float, flag: BifFlag = BifFlag.NONE) -> FrcPoint:
    theta = fixed_point_phase(rom, rho, Omega)
    trace, det = fixed_point_jacobian(rom, rho, Omega)
    return FrcPoint(
        Omega=float(Omega), rho=float(rho), theta=theta,
        stable=is_stable(trace, det) if flag == BifFlag.NONE else False,
        bif_flag=flag, residual=fixed_point_residual(rom, rho, theta, Omega),
    )


def _refine_saddle_node(rom: Rom, lo: float, hi: float, rho_grid: np.ndarray) -> FrcPoint:
    """Bisect on the root count between two Ω columns; the SN is the merging root pair."""
    c_lo = _count(rom, lo, rho_grid)
    for _ in range(SN_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if _count(rom, mid, rho_grid) == c_lo:
            lo = mid
        else:
            hi = mid
    many = lo if c_lo > _count(rom, hi, rho_grid) else hi
    roots = np.array(_column_roots(rom, many, rho_grid))
    gaps = np.diff(roots)
    i = int(np.argmin(gaps))
    return _make_point(rom, 0.5 * (roots[i] + roots[i + 1]), many, BifFlag.SN)


def _hopf_points(rom: Rom, Omega_range: tuple[float, float], rho_max: float) -> list[FrcPoint]:
    """Fixed points with zero trace and positive determinant."""
    a = P.polytrim(rom.a_coeffs)
    # ρ·trace = ρa' + a
    rho_trace = (np.arange(len(a)) + 1) * a
    f2 = (rom.epsilon * abs(rom.modal_force)) ** 2
    found = []
    for rho in positive_roots(rho_trace):
        if rho > rho_max:
            continue
        ar, br = rom.a(rho), rom.b(rho)
        # G(ρ_H, Ω) as a polynomial in Ω
        coeffs = [rho**2 * br**2 + ar**2, -2 * rho**2 * br, rho**2]
        if rom.forcing_tag == ForcingTag.OMEGA_SQUARED:
            coeffs += [0.0, -f2]
        else:
            coeffs[0] -= f2
        for w in P.polyroots(coeffs):
            if abs(w.imag) > 1e-9 or not Omega_range[0] <= w.real <= Omega_range[1]:
                continue
            _, det = fixed_point_jacobian(rom, rho, w.real)
            if det > 0:
                found.append(_make_point(rom, rho, w.real, BifFlag.HB))
    return found


def frc_periodic(
    rom: Rom,
    Omega_range: tuple[float, float],
    n_grid: int,
    ssm: SsmExpansion | None = None,
    cs: ChainSystem | None = None,
    rho_max: float | None = None,
    n_rho: int | None = None,
    threads: int | None = None,
    observable: int | None = None,
) -> FrcResult:
    """
    Forced response curve over Ω with stability, SN and HB flags.

    With `ssm` the physical amplitude of each periodic orbit is added; with `cs` as
    well, the forced correction is recomputed at every Ω.
    """
    n_rho = n_rho or settings.RHO_GRID_POINTS
    threads = threads or settings.THREADS
    rho_max = rho_max or default_rho_max(rom, Omega_range)
    Omegas = np.linspace(Omega_range[0], Omega_range[1], n_grid)

    if rom.epsilon == 0:
        points = []
        for rho in positive_roots(rom.a_coeffs):
            w = float(rom.b(rho))
            if Omega_range[0] <= w <= Omega_range[1]:
                points.append(FrcPoint(Omega=w, rho=rho, theta=0.0, stable=bool(rom.da(rho) < 0)))
        return FrcResult(epsilon=0.0, Omegas=Omegas, counts=np.zeros(n_grid, dtype=int), points=points)

    rho_grid = np.linspace(0.0, rho_max, n_rho)

    def solve_column(Omega: float) -> list[FrcPoint]:
        pts = [_make_point(rom, rho, Omega) for rho in _column_roots(rom, Omega, rho_grid)]
        if ssm is not None:
            forced = _forced_expansion(ssm, cs, rom.epsilon, Omega)
            for pt in pts:
                pt.phys_amp = observable_amplitude(forced, pt.rho, observable, phase=pt.theta, forced=cs is not None)
        return pts

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        columns = list(pool.map(solve_column, Omegas))
    counts = np.array([len(col) for col in columns])

    result = FrcResult(epsilon=rom.epsilon, Omegas=Omegas, counts=counts)
    result.points = [pt for col in columns for pt in col]

    for i in np.flatnonzero(np.abs(np.diff(counts)) == 2):
        result.sn_points.append(_refine_saddle_node(rom, Omegas[i], Omegas[i + 1], rho_grid))
    odd = np.flatnonzero((np.diff(counts) != 0) & (np.abs(np.diff(counts)) != 2))
    for i in odd:
        logger.warning(f"Root count jumps {counts[i]} -> {counts[i + 1]} between Omega={Omegas[i]:.6g} and {Omegas[i + 1]:.6g}")
    result.hb_points = _hopf_points(rom, Omega_range, rho_max)

    for pt in result.sn_points + result.hb_points:
        if ssm is not None:
            forced = _forced_expansion(ssm, cs, rom.epsilon, pt.Omega)
            pt.phys_amp = observable_amplitude(forced, pt.rho, observable, phase=pt.theta, forced=cs is not None)

    logger.info("FRC computed", extra={"props": {
        "epsilon": rom.epsilon, "n_grid": n_grid, "points": len(result.points),
        "SN": [round(p.Omega, 6) for p in result.sn_points],
        "HB": [round(p.Omega, 6) for p in result.hb_points],
    }})
    return result


def _forced_expansion(ssm: SsmExpansion, cs: ChainSystem | None, epsilon: float, Omega: float) -> SsmExpansion:
    if cs is None:
        return ssm
    return nonauto_correction(ssm, cs.with_forcing(epsilon, Omega), Omega)


def bifurcation_summary(result: FrcResult) -> dict:
    """Structured report of the flagged points."""
    return {
        "epsilon": result.epsilon,
        "saddle_node": [{"Omega": p.Omega, "rho": p.rho} for p in result.sn_points],
        "hopf": [{"Omega": p.Omega, "rho": p.rho} for p in result.hb_points],
    }


# ============================================
# Order-to-order FRC convergence
# ============================================
@dataclass
class FrcConvergence:
    orders: tuple[int, int]
    Omegas: np.ndarray
    rel_diff: np.ndarray  # per Ω, largest-amplitude solution of the two orders
    flagged: np.ndarray  # Ω values where the orders disagree

    @property
    def converged(self) -> bool:
        return not len(self.flagged)


def frc_convergence(
    roms_by_order: dict[int, Rom],
    Omega_range: tuple[float, float],
    n_grid: int,
    rho_max: float | None = None,
    tol: float | None = None,
) -> FrcConvergence:
    """Compare the top two orders' FRCs; disagreement in root count or amplitude is flagged."""
    tol = settings.ROOT_AGREEMENT_TOL if tol is None else tol
    hi_order, lo_order = sorted(roms_by_order, reverse=True)[:2]
    hi, lo = roms_by_order[hi_order], roms_by_order[lo_order]
    rho_max = rho_max or max(default_rho_max(hi, Omega_range), default_rho_max(lo, Omega_range))
    rho_grid = np.linspace(0.0, rho_max, settings.RHO_GRID_POINTS)
    Omegas = np.linspace(Omega_range[0], Omega_range[1], n_grid)

    rel = np.zeros(n_grid)
    for i, w in enumerate(Omegas):
        r_hi, r_lo = _column_roots(hi, w, rho_grid), _column_roots(lo, w, rho_grid)
        if len(r_hi) != len(r_lo):
            rel[i] = np.inf
        elif r_hi:
            rel[i] = abs(r_hi[-1] - r_lo[-1]) / r_hi[-1]
    flagged = Omegas[rel > tol]
    if len(flagged):
        logger.warning(
            f"FRC not converged between orders {lo_order} and {hi_order} at {len(flagged)} frequencies",
            extra={"props": {"Omega_min": float(flagged.min()), "Omega_max": float(flagged.max())}},
        )
    return FrcConvergence(orders=(lo_order, hi_order), Omegas=Omegas, rel_diff=rel, flagged=flagged)
