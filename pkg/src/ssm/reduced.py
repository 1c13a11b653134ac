"""
DelaySSM — Moving between reduced and chain coordinates.
lift maps p (and optionally the forcing time) onto the chain state
z = W(p) + ε Re(x0 e^{iΩt}); project_initial maps a DDE history to p(0).
"""

from __future__ import annotations

import logging
from enum import Enum

import numpy as np
import scipy.optimize

from src.chain.chain_system import ChainSystem, chain_state_from_history
from src.model.delay_system import InitialHistory
from src.ssm.expansion import SsmExpansion
from src.ssm.polynomial import evaluate

logger = logging.getLogger(__name__)


class ProjectionMethod(str, Enum):
    ADJOINT = "adjoint"
    TRANSPOSE = "transpose"
    MINIMIZE = "minimize"


def lift(ssm: SsmExpansion, p, t=None) -> np.ndarray:
    """
    Real chain state(s) on the SSM for scalar or array p.

    With t given and forcing configured, the leading-order forced correction is added;
    t must broadcast against p.
    """
    p = np.asarray(p, dtype=complex)
    if ssm.conv_radius is not None and np.any(np.abs(p) > ssm.conv_radius):
        logger.warning(f"|p| up to {np.abs(p).max():.4g} exceeds the convergence radius {ssm.conv_radius:.4g}")
    z = evaluate(ssm.W, p).real
    if t is not None and ssm.x0_nonauto is not None and ssm.epsilon > 0:
        phase = np.exp(1j * ssm.Omega * np.asarray(t, dtype=float))
        z = z + ssm.epsilon * np.real(phase[..., None] * ssm.x0_nonauto)
    return z


def project_initial(
    ssm: SsmExpansion,
    hist: InitialHistory,
    cs: ChainSystem,
    method: ProjectionMethod | str = ProjectionMethod.ADJOINT,
) -> complex:
    """
    Reduced initial condition for a DDE history.

    adjoint: p0 = uᴴz0 (spectral projection); transpose: p0 = vᵀz0;
    minimize: argmin ‖z0 − W(p)‖ seeded by the adjoint projection.
    """
    method = ProjectionMethod(method)
    z0 = chain_state_from_history(cs, hist)
    master = ssm.master

    if method == ProjectionMethod.TRANSPOSE:
        p0 = complex(master.v @ z0)
    else:
        p0 = complex(np.vdot(master.u, z0))

    if method == ProjectionMethod.MINIMIZE and np.any(z0):
        def residual(x):
            return lift(ssm, complex(x[0], x[1])) - z0

        sol = scipy.optimize.least_squares(residual, [p0.real, p0.imag], xtol=1e-12, ftol=1e-12)
        if not sol.success:
            logger.warning(f"Distance minimization did not converge: {sol.message}")
        p0 = complex(sol.x[0], sol.x[1])

    logger.info(f"Projected history onto p0={p0:.6g}", extra={"props": {"method": method.value}})
    return p0
