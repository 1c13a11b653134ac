"""
DelaySSM — Chain spectrum and master-mode selection.
Dense nonsymmetric eigen-analysis of the chain matrix A with left and right
eigenvectors, sorted by descending real part. The master pair is polished by
inverse iteration on the sparse A before it seeds the SSM.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.chain.chain_system import ChainSystem
from src.core.config import settings
from src.core.errors import EigensolverError, MasterModeError

logger = logging.getLogger(__name__)

# modes checked for biorthogonality against the master pair
BIORTHOGONAL_NEIGHBOURS = 10


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None  # columns, unit norm
    left_vectors: np.ndarray | None  # columns, u_jᴴ v_j = 1 where the overlap is nonzero
    N_used: int
    matrix: sp.spmatrix | None = None  # chain matrix, for refining selected pairs

    def leading(self, k: int = 1) -> np.ndarray:
        return self.eigenvalues[:k]


@dataclass(frozen=True, eq=False)
class MasterMode:
    """Master eigenpair λ^E (Im > 0), right vector v and left vector u with uᴴv = 1."""
    lam: complex
    v: np.ndarray
    u: np.ndarray
    index: int
    spectrum_values: np.ndarray

    def rescaled(self, c: complex) -> MasterMode:
        """Same mode with v ↦ c·v and u ↦ u / c̄, so uᴴv stays 1."""
        return replace(self, v=c * self.v, u=self.u / np.conj(c))


def _sort_order(values: np.ndarray) -> np.ndarray:
    # descending Re, then descending |Im|, then positive Im first
    return np.lexsort((-(values.imag > 0).astype(int), -np.abs(values.imag), -values.real))


def _normalize_right(V: np.ndarray) -> np.ndarray:
    V = V / np.linalg.norm(V, axis=0)
    pivot = np.argmax(np.abs(V), axis=0)
    phase = V[pivot, np.arange(V.shape[1])]
    return V * (np.abs(phase) / phase)


def compute_spectrum(cs: ChainSystem, k: int | None = None, vectors: bool = True) -> Spectrum:
    """
    Full (or k-leading) spectrum of the chain matrix.

    With vectors=False only eigenvalues are computed, which is what parameter
    sweeps need. Left/right overlaps of the stiff chain tail can be tiny; they are
    normalized as they come and only the selected master pair is held to
    EIG_OVERLAP_TOL.
    """
    A = cs.A.toarray()
    try:
        if not vectors:
            w = scipy.linalg.eigvals(A, check_finite=True)
            order = _sort_order(w)[:k]
            return Spectrum(eigenvalues=w[order], right_vectors=None, left_vectors=None, N_used=cs.N)
        w, VL, VR = scipy.linalg.eig(A, left=True, right=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"dense eigensolver failed for dim={cs.dim}: {e}", N=cs.N) from e

    order = _sort_order(w)[:k]
    w = w[order]
    V = _normalize_right(VR[:, order])
    U = VL[:, order]
    overlap = np.einsum("ij,ij->j", U.conj(), V)
    U = U / np.where(overlap == 0, 1.0, overlap).conj()

    a_norm = np.linalg.norm(A, 1)
    residual = np.linalg.norm(A @ V - V * w, axis=0)
    worst = int(np.argmax(residual))
    if residual[worst] > settings.EIG_RESIDUAL_TOL * max(a_norm, 1.0):
        raise EigensolverError(
            f"eigenpair residual {residual[worst]:.2e} exceeds tolerance at lambda={w[worst]:.6g}",
            N=cs.N, eigenvalue=w[worst],
        )

    logger.info("Spectrum computed", extra={"props": {
        "N": cs.N, "dim": cs.dim, "count": len(w),
        "leading": f"{w[0]:.6g}", "max_residual": float(residual.max()),
        "min_overlap": float(np.abs(overlap).min()),
    }})
    return Spectrum(eigenvalues=w, right_vectors=V, left_vectors=U, N_used=cs.N, matrix=cs.A)


def _pair_residual(A: sp.spmatrix, lam: complex, v: np.ndarray, u: np.ndarray) -> float:
    return max(np.linalg.norm(A @ v - lam * v), np.linalg.norm(A.conj().T @ u - np.conj(lam) * u) / np.linalg.norm(u))


def refine_pair(
    A: sp.spmatrix,
    lam: complex,
    v: np.ndarray,
    u: np.ndarray,
    steps: int | None = None,
) -> tuple[complex, np.ndarray, np.ndarray]:
    """
    Inverse iteration on the sparse A for one simple eigenpair.

    Both vectors share the LU of A − λI per step; λ is then the two-sided
    Rayleigh quotient uᴴAv / uᴴv. Returns (λ, v, u) with ‖v‖ = 1 and uᴴv = 1,
    or the input when a step does not lower the residual.
    """
    steps = settings.EIG_REFINE_STEPS if steps is None else steps
    A = A.tocsc().astype(complex)
    eye = sp.identity(A.shape[0], dtype=complex, format="csc")
    best = (complex(lam), v, u, _pair_residual(A, lam, v, u))
    for _ in range(steps):
        try:
            lu = splu((A - lam * eye).tocsc())
        except RuntimeError:
            # shift hit the eigenvalue exactly
            break
        x, y = lu.solve(v.astype(complex)), lu.solve(u.astype(complex), trans="H")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            break
        v = _normalize_right((x / np.linalg.norm(x)).reshape(-1, 1))[:, 0]
        u = y / np.linalg.norm(y)
        lam = complex(np.vdot(u, A @ v) / np.vdot(u, v))
        u = u / np.conj(np.vdot(u, v))
        res = _pair_residual(A, lam, v, u)
        if res >= best[3]:
            break
        best = (lam, v, u, res)
    return best[0], best[1], best[2]


def select_master(spec: Spectrum) -> MasterMode:
    """
    Pick the complex-conjugate pair with the largest real part.

    Pairs whose real parts agree within MASTER_TIE_TOL are ranked by |Im|.
    """
    if spec.right_vectors is None:
        raise MasterModeError("spectrum was computed without eigenvectors")
    w = spec.eigenvalues
    top = w[0]
    ties = np.flatnonzero(np.abs(w.real - top.real) <= settings.MASTER_TIE_TOL)
    upper = [int(j) for j in ties if w[j].imag > 1e-10 * max(1.0, abs(w[j]))]
    if not upper:
        raise MasterModeError(
            f"leading eigenvalue {top.real:.6g} is real: one-dimensional master subspace",
            eigenvalue=top,
        )
    index = max(upper, key=lambda j: (w[j].imag, w[j].real))
    lead = w[index]
    if len({round(abs(w[j].imag), 10) for j in ties}) > 1:
        logger.warning(
            f"Master selection tie within {settings.MASTER_TIE_TOL:g} in Re; taking larger |Im| {lead:.6g}",
            extra={"props": {"candidates": [f"{w[j]:.6g}" for j in ties]}},
        )

    partner = np.flatnonzero(np.abs(w - np.conj(lead)) <= 1e-10 * max(1.0, abs(lead)))
    if not len(partner):
        raise MasterModeError(f"conjugate of {lead:.6g} missing from the spectrum", eigenvalue=lead)

    v = spec.right_vectors[:, index]
    u = spec.left_vectors[:, index]
    overlap = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    if overlap < settings.EIG_OVERLAP_TOL:
        raise EigensolverError(
            f"defective master eigenvalue {lead:.6g}: left/right overlap {overlap:.2e}",
            N=spec.N_used, eigenvalue=lead,
        )

    lam = complex(lead)
    if spec.matrix is not None:
        before = _pair_residual(spec.matrix, lam, v, u)
        lam, v, u = refine_pair(spec.matrix, lam, v, u)
        logger.debug("Master pair refined", extra={"props": {
            "residual_before": before, "residual_after": _pair_residual(spec.matrix, lam, v, u),
        }})

    nearest = np.argsort(np.abs(w - lead))[1 : BIORTHOGONAL_NEIGHBOURS + 1]
    leakage = np.abs(spec.right_vectors[:, nearest].T @ u.conj())
    if leakage.size and leakage.max() > 1e-6:
        logger.warning(f"Weak biorthogonality of master left vector: max |u*v_j| = {leakage.max():.2e}")

    logger.info(f"Master mode selected: lambda={lam:.6g}", extra={"props": {
        "index": index, "re": lam.real, "im": lam.imag,
    }})
    return MasterMode(lam=lam, v=v, u=u, index=index, spectrum_values=w.copy())
