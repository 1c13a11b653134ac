"""
DelaySSM — Parameter and discretization sweeps.
Leading chain eigenvalue along a parameter family, Hopf-point bisection on its real
part, and convergence of the chain eigenvalue toward the exact characteristic root.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.optimize

from src.chain.chain_system import build_chain
from src.core.config import settings
from src.core.errors import HopfLocusError
from src.model.delay_system import DelaySystem
from src.spectral.characteristic import refine_characteristic_root
from src.spectral.eigen import compute_spectrum

logger = logging.getLogger(__name__)

SystemFamily = Callable[[float], DelaySystem]


def leading_eigenvalue(sys: DelaySystem, N: int) -> complex:
    """Rightmost eigenvalue of the chain approximation (Im ≥ 0 member of its pair)."""
    return complex(compute_spectrum(build_chain(sys, N), k=1, vectors=False).eigenvalues[0])


def sweep_leading_eigenvalue(
    family: SystemFamily,
    values: Sequence[float],
    N: int,
    threads: int | None = None,
) -> list[tuple[float, complex]]:
    """Leading eigenvalue at every parameter value; evaluated concurrently."""
    threads = threads or settings.THREADS
    values = list(values)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        lams = list(pool.map(lambda p: leading_eigenvalue(family(p), N), values))
    return list(zip(values, lams, strict=True))


# ============================================
# Hopf locus
# ============================================
@dataclass
class HopfLocus:
    value: float
    bracket: tuple[float, float]
    re_bracket: tuple[float, float]
    eigenvalue: complex
    evaluations: int


def hopf_locus(
    family: SystemFamily,
    param_range: tuple[float, float],
    N: int,
    tol: float | None = None,
) -> HopfLocus:
    """Bisection on Re λ_leading(param) until the bracket is narrower than 2·tol."""
    tol = settings.HOPF_TOL if tol is None else tol
    lo, hi = param_range

    @lru_cache(maxsize=None)
    def lead(p: float) -> complex:
        return leading_eigenvalue(family(p), N)

    def re_lead(p: float) -> float:
        return lead(float(p)).real

    re_lo, re_hi = re_lead(lo), re_lead(hi)
    if np.sign(re_lo) == np.sign(re_hi):
        raise HopfLocusError(lo, hi, re_lo, re_hi)

    value = scipy.optimize.bisect(re_lead, lo, hi, xtol=tol)
    left, right = max(lo, value - tol), min(hi, value + tol)
    bracket_re = (re_lead(left), re_lead(right))
    if np.sign(bracket_re[0]) == np.sign(bracket_re[1]):
        logger.warning(f"Hopf bracket [{left:.6g}, {right:.6g}] does not straddle Re(lambda)=0")

    result = HopfLocus(
        value=float(value),
        bracket=(left, right),
        re_bracket=bracket_re,
        eigenvalue=lead(float(value)),
        evaluations=lead.cache_info().currsize,
    )
    logger.info(f"Hopf point located at {value:.6g}", extra={"props": {
        "N": N, "bracket": result.bracket, "eigenvalue": f"{result.eigenvalue:.6g}",
    }})
    return result


# ============================================
# Discretization convergence
# ============================================
@dataclass
class ConvergenceRow:
    N: int
    eigenvalue: complex
    error: float


@dataclass
class ConvergenceStudy:
    exact: complex
    rows: list[ConvergenceRow] = field(default_factory=list)
    order: float = float("nan")


def convergence_study(
    sys: DelaySystem,
    N_list: Sequence[int],
    threads: int | None = None,
) -> ConvergenceStudy:
    """
    Leading chain eigenvalue for every N against the exact characteristic root,
    with the fitted order (slope of log |error| against log 1/N).
    """
    N_list = sorted(N_list)
    threads = threads or settings.THREADS
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        lams = list(pool.map(lambda N: leading_eigenvalue(sys, N), N_list))

    # oracle seeded by the finest chain eigenvalue
    exact = refine_characteristic_root(sys, lams[-1])
    if not exact.converged:
        logger.warning(f"Oracle root did not converge from {lams[-1]:.6g}")

    rows = [ConvergenceRow(N, lam, float(abs(lam - exact.value))) for N, lam in zip(N_list, lams, strict=True)]
    study = ConvergenceStudy(exact=exact.value, rows=rows)
    errors = np.array([r.error for r in rows])
    if len(rows) >= 2 and np.all(errors > 0):
        study.order = float(np.polyfit(np.log(1.0 / np.array(N_list, dtype=float)), np.log(errors), 1)[0])

    logger.info(f"Convergence order {study.order:.3f}", extra={"props": {
        "N_list": N_list, "exact": f"{exact.value:.8g}",
    }})
    return study
