"""
DelaySSM — ChainSystem.
Delay-free approximation of a DelaySystem by N chain links with second-order Taylor
closure. The state is z = (u0, u1..uN, w1..wN) with u_i ≈ x(t − iτ_d/N) and
w_i ≈ ẋ(t − iτ_d/N):

    u̇0 = A_u0 u0 + A_uN uN + f_nl(u0, uN) + ε g(Ωt)
    u̇i = wi
    ẇi = (2N²/τ_d²)(u_{i−1} − u_i) − (2N/τ_d) w_i
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.interpolate import CubicHermiteSpline

from src.core.config import settings
from src.core.errors import DimensionMismatchError, ModelDefinitionError
from src.model.delay_system import DelaySystem, InitialHistory, eval_autonomous

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChainSystem:
    n: int
    N: int
    dim: int
    A: sp.csr_matrix
    forcing_template: np.ndarray  # ĝ on the u0 rows, Ω-scaling not applied
    system: DelaySystem

    # ============================================
    # Index helpers
    # ============================================
    def block_slice(self, kind: str, i: int) -> slice:
        """Coordinates of u_i (0 ≤ i ≤ N) or w_i (1 ≤ i ≤ N)."""
        n, N = self.n, self.N
        if kind == "u" and 0 <= i <= N:
            return slice(i * n, (i + 1) * n)
        if kind == "w" and 1 <= i <= N:
            start = (N + 1) * n + (i - 1) * n
            return slice(start, start + n)
        raise IndexError(f"no block {kind}{i} in a chain with N={N}")

    @property
    def active(self) -> np.ndarray:
        """Indices of (u0, uN), the coordinates the nonlinearity reads."""
        n, N = self.n, self.N
        return np.concatenate([np.arange(n), np.arange(N * n, (N + 1) * n)])

    def forcing_amplitude(self, Omega: float) -> np.ndarray:
        """F̂ at frequency Ω with the forcing tag resolved."""
        if self.system.forcing is None:
            return np.zeros(self.dim, dtype=complex)
        return self.forcing_template * self.system.forcing.scale(Omega)

    def with_forcing(self, epsilon: float, Omega: float | None) -> ChainSystem:
        return replace(self, system=self.system.with_forcing(epsilon, Omega))

    @property
    def is_forced(self) -> bool:
        return self.system.is_forced


def build_chain(sys: DelaySystem, N: int) -> ChainSystem:
    """Assemble the sparse chain matrix A and re-index the DDE's forcing."""
    if N < 1:
        raise ModelDefinitionError(f"grid count N must be >= 1, got {N}", N=N)

    n, tau = sys.n, sys.tau_d
    dim = (2 * N + 1) * n
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def add_block(row0: int, col0: int, block: np.ndarray):
        r, c = np.nonzero(block)
        rows.append(r + row0)
        cols.append(c + col0)
        vals.append(block[r, c])

    # u0 rows: linear part of the DDE
    add_block(0, 0, sys.A_u0)
    add_block(0, N * n, sys.A_uN)

    # u_i rows select w_i
    idx = np.arange(N * n)
    rows.append(n + idx)
    cols.append((N + 1) * n + idx)
    vals.append(np.ones(N * n))

    # w_i rows couple u_{i-1}, u_i, w_i
    c_u = 2.0 * N**2 / tau**2
    c_w = 2.0 * N / tau
    w_rows = (N + 1) * n + idx
    rows += [w_rows, w_rows, w_rows]
    cols += [idx, n + idx, (N + 1) * n + idx]
    vals += [np.full(N * n, c_u), np.full(N * n, -c_u), np.full(N * n, -c_w)]

    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )

    template = np.zeros(dim, dtype=complex)
    if sys.forcing is not None:
        template[:n] = sys.forcing.amplitude

    cs = ChainSystem(n=n, N=N, dim=dim, A=A, forcing_template=template, system=sys)
    logger.info("Chain built", extra={"props": {
        "system": sys.name, "n": n, "N": N, "dim": dim, "nnz": A.nnz,
    }})
    return cs


# ============================================
# Evaluation
# ============================================
def _check_state(cs: ChainSystem, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (cs.dim,):
        raise DimensionMismatchError("chain state", cs.dim, z.size)
    return z


def eval_rhs(cs: ChainSystem, z: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Az + F(z) + ε·Re(F̂ e^{iΩt})."""
    z = _check_state(cs, z)
    dz = cs.A @ z
    if cs.system.nonlinear_terms:
        dz[: cs.n] += cs.system.nonlinear_y(z[cs.active])
    if cs.is_forced:
        sys = cs.system
        dz += sys.epsilon * np.real(cs.forcing_amplitude(sys.Omega) * np.exp(1j * sys.Omega * t))
    return dz


def eval_jacobian(cs: ChainSystem, z: np.ndarray) -> sp.csr_matrix:
    """Exact Jacobian A + DF(z); DF lives in the u0 rows and the (u0, uN) columns."""
    z = _check_state(cs, z)
    if not cs.system.nonlinear_terms:
        return cs.A.copy()
    J_nl = cs.system.nonlinear_jacobian_y(z[cs.active])
    r, c = np.nonzero(J_nl)
    DF = sp.csr_matrix((J_nl[r, c], (r, cs.active[c])), shape=(cs.dim, cs.dim))
    return (cs.A + DF).tocsr()


# ============================================
# Histories and export
# ============================================
def chain_state_from_history(cs: ChainSystem, hist: InitialHistory) -> np.ndarray:
    """z0 with u_i = x0(−iτ_d/N) and w_i = ẋ0(−iτ_d/N)."""
    tau = cs.system.tau_d
    hist.check_covers(tau)
    z0 = np.zeros(cs.dim)
    z0[cs.block_slice("u", 0)] = hist.value(0.0)
    for i in range(1, cs.N + 1):
        s = -i * tau / cs.N
        z0[cs.block_slice("u", i)] = hist.value(s)
        z0[cs.block_slice("w", i)] = hist.derivative(s, tau)
    return z0


def history_from_chain_state(cs: ChainSystem, z: np.ndarray) -> InitialHistory:
    """
    DDE history interpolating a chain state: cubic Hermite through (−iτ_d/N, u_i, w_i),
    with the slope at s = 0 taken from the autonomous right-hand side.
    """
    z = _check_state(cs, z)
    tau, N = cs.system.tau_d, cs.N
    s = -tau * np.arange(N, -1, -1) / N
    u = np.array([z[cs.block_slice("u", i)] for i in range(N, -1, -1)])
    slope0 = eval_autonomous(cs.system, z[cs.block_slice("u", 0)], z[cs.block_slice("u", N)])
    w = np.array([z[cs.block_slice("w", i)] for i in range(N, 0, -1)] + [slope0])
    spline = CubicHermiteSpline(s, u, w, axis=0)
    deriv = spline.derivative()
    return InitialHistory(value_fn=spline, derivative_fn=deriv, domain=(-tau, 0.0))


def export_matrix_market(cs: ChainSystem, directory: str | Path, force: bool = False) -> list[Path]:
    """Write A and the forcing template as Matrix Market files (gated by EXPORT_MATRICES)."""
    if not (force or settings.EXPORT_MATRICES):
        return []
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    a_path = out / f"chain_A_N{cs.N}.mtx"
    f_path = out / f"chain_forcing_N{cs.N}.mtx"
    scipy.io.mmwrite(str(a_path), cs.A, comment=f"{cs.system.name} chain, n={cs.n}, N={cs.N}")
    scipy.io.mmwrite(str(f_path), cs.forcing_template.reshape(-1, 1))
    logger.info(f"Chain matrices exported to {out}")
    return [a_path, f_path]
