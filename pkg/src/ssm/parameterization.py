"""
DelaySSM — Parameterization method for the two-dimensional SSM.
Solves the invariance equation A·W(p) + F(W(p)) = DW(p)·R(p) order by order in
normal-form style: monomials p^{l+1} p̄^l are resonant with the master mode and feed
γ_l; every other monomial is a plain homological solve with A − (kλ + lλ̄)I.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.chain.chain_system import ChainSystem
from src.core.config import settings
from src.core.errors import ModelDefinitionError, ResonanceError
from src.ssm.expansion import SsmExpansion, _check_order
from src.ssm.polynomial import compose_monomials, evaluate
from src.spectral.eigen import MasterMode

logger = logging.getLogger(__name__)


class _HomologicalSolver:
    """Sparse LU factorizations of A − σI (plain and bordered), cached by σ."""

    def __init__(self, cs: ChainSystem, master: MasterMode):
        self.A = cs.A.tocsc().astype(complex)
        self.eye = sp.identity(cs.dim, dtype=complex, format="csc")
        self.v = sp.csc_matrix(master.v.reshape(-1, 1))
        self.uH = sp.csc_matrix(master.u.conj().reshape(1, -1))
        self._plain: dict[complex, object] = {}
        self._bordered: dict[complex, object] = {}

    def solve(self, sigma: complex, rhs: np.ndarray) -> np.ndarray:
        if sigma not in self._plain:
            self._plain[sigma] = splu((self.A - sigma * self.eye).tocsc())
        return self._plain[sigma].solve(rhs)

    def solve_bordered(self, sigma: complex, rhs: np.ndarray) -> tuple[np.ndarray, complex]:
        """[A − σI, v; uᴴ, 0][x; η] = [rhs; 0]; returns (x, η)."""
        if sigma not in self._bordered:
            K = sp.bmat([[self.A - sigma * self.eye, self.v], [self.uH, None]], format="csc")
            self._bordered[sigma] = splu(K)
        sol = self._bordered[sigma].solve(np.concatenate([rhs, [0.0]]))
        return sol[:-1], sol[-1]


def _check_resonance(k: int, l: int, sigma: complex, eigenvalues: np.ndarray, tol: float):
    if not len(eigenvalues):
        return
    dist = np.abs(eigenvalues - sigma)
    j = int(np.argmin(dist))
    rel = dist[j] / max(1.0, abs(sigma))
    if rel < tol:
        raise ResonanceError(k, l, sigma, complex(eigenvalues[j]), float(rel))


def compute_ssm(
    cs: ChainSystem,
    master: MasterMode,
    order: int,
    resonance_tol: float | None = None,
) -> SsmExpansion:
    """Normal-form parameterization of the SSM tangent to the master pair, up to `order`."""
    _check_order(order)
    tol = settings.RESONANCE_TOL if resonance_tol is None else resonance_tol
    O, dim, n = order, cs.dim, cs.n
    sys = cs.system
    lam, lam_c = master.lam, np.conj(master.lam)

    W = np.zeros((O + 1, O + 1, dim), dtype=complex)
    W[1, 0] = master.v
    W[0, 1] = np.conj(master.v)
    gamma = np.zeros((O - 1) // 2, dtype=complex)

    solver = _HomologicalSolver(cs, master)
    spectrum = master.spectrum_values
    others = np.delete(spectrum, master.index) if len(spectrum) > master.index else spectrum
    active = cs.active

    for m in range(2, O + 1):
        # F(W) up to degree m; order-m coefficients of W are still zero here
        F = compose_monomials(
            np.moveaxis(W[:, :, active], 2, 0), sys._exps, sys._coeffs, sys._rows, m,
        ) if sys.nonlinear_terms else None

        for l in range(m // 2 + 1):
            k = m - l
            rhs = np.zeros(dim, dtype=complex)
            if F is not None:
                rhs[:n] = -F[:, k, l]
            for j in range(1, l + 1):
                kp, lp = k - j, l - j
                if kp + lp < 2:
                    continue
                rhs += (kp * gamma[j - 1] + lp * np.conj(gamma[j - 1])) * W[kp, lp]

            sigma = k * lam + l * lam_c
            if k == l + 1:
                _check_resonance(k, l, sigma, others, tol)
                W[k, l], eta = solver.solve_bordered(sigma, rhs)
                gamma[l - 1] = -eta
            else:
                _check_resonance(k, l, sigma, spectrum, tol)
                W[k, l] = solver.solve(sigma, rhs)

            if k == l:
                W[k, l] = W[k, l].real
            else:
                W[l, k] = np.conj(W[k, l])

        logger.debug(f"SSM order {m} solved", extra={"props": {"order": m}})

    if sys.is_odd and O >= 2:
        even = max(np.abs(W[k, m - k]).max() for m in range(2, O + 1, 2) for k in range(m + 1))
        odd = max(np.abs(W[k, m - k]).max() for m in range(1, O + 1, 2) for k in range(m + 1))
        if even > 1e-8 * odd:
            logger.warning(f"Odd vector field but even-degree SSM coefficients reach {even:.2e}")

    ssm = SsmExpansion(order=O, master=master, W=W, gamma=gamma)
    logger.info("SSM computed", extra={"props": {
        "order": O, "dim": dim, "lambda": f"{lam:.6g}",
        "gamma": [f"{g:.6g}" for g in gamma],
    }})
    return ssm


def nonauto_correction(ssm: SsmExpansion, cs: ChainSystem, Omega: float) -> SsmExpansion:
    """
    Leading-order forced correction at frequency Ω.

    F̂⁺ = ½F̂(Ω) is the e^{iΩt} component of the forcing; f = uᴴF̂⁺ and x⁺ solves
    (A − iΩI)x⁺ = −(F̂⁺ − f v) with uᴴx⁺ = 0. Stored x0_nonauto = 2x⁺.
    """
    if not Omega > 0:
        raise ModelDefinitionError(f"Omega must be > 0, got {Omega}")
    master = ssm.master
    F_plus = 0.5 * cs.forcing_amplitude(Omega)
    tag = cs.system.forcing.tag if cs.system.forcing is not None else ssm.forcing_tag

    if not np.any(F_plus):
        x0 = np.zeros(cs.dim, dtype=complex)
        f = 0j
    else:
        solver = _HomologicalSolver(cs, master)
        x_plus, eta = solver.solve_bordered(1j * Omega, -F_plus)
        f = complex(-eta)
        x0 = 2.0 * x_plus

    logger.info(f"Modal force at Omega={Omega:.6g}: f={f:.6g}", extra={"props": {
        "Omega": Omega, "epsilon": cs.system.epsilon, "tag": tag.value,
    }})
    return SsmExpansion(
        order=ssm.order, master=master, W=ssm.W, gamma=ssm.gamma,
        x0_nonauto=x0, modal_force=f, Omega=Omega, epsilon=cs.system.epsilon,
        forcing_tag=tag, conv_radius=ssm.conv_radius,
    )


def invariance_residual(ssm: SsmExpansion, cs: ChainSystem, p: complex) -> float:
    """‖A·W(p) + F(W(p)) − DW(p)·R(p)‖ / ‖W(p)‖ for the autonomous SSM."""
    O = ssm.order
    k, l = np.indices((O + 1, O + 1))
    Wp = evaluate(ssm.W, p).real
    W_dp = evaluate(ssm.W * k[..., None], p) / p if p != 0 else ssm.W[1, 0]
    W_dpc = evaluate(ssm.W * l[..., None], p) / np.conj(p) if p != 0 else ssm.W[0, 1]
    r2 = abs(p) ** 2
    R = ssm.master.lam * p + sum(g * p * r2 ** (j + 1) for j, g in enumerate(ssm.gamma))
    lhs = cs.A @ Wp
    if cs.system.nonlinear_terms:
        lhs[: cs.n] += cs.system.nonlinear_y(Wp[cs.active])
    res = lhs - (W_dp * R + W_dpc * np.conj(R)).real
    norm = np.linalg.norm(Wp)
    return float(np.linalg.norm(res) / norm) if norm > 0 else float(np.linalg.norm(res))
