"""
DelaySSM — Transcendental characteristic roots.
Independent oracle for the linearized DDE at the origin,

    char(λ) = det(λI − A_u0 − A_uN e^{−λτ_d}),

using argument-principle counting on rectangles, quadtree isolation, and Newton
refinement with the Jacobi formula d/dλ log det M = tr(M⁻¹M′).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.core.config import settings
from src.core.errors import RootFindingError
from src.model.delay_system import DelaySystem

logger = logging.getLogger(__name__)

INITIAL_EDGE_SAMPLES = 64
MAX_EDGE_SAMPLES = 1 << 16
MAX_TREE_DEPTH = 30
# off-centre split fractions; the next one is tried when sub-box counts do not add up
SPLIT_FRACTIONS = (0.5123, 0.4771, 0.5389)


@dataclass(frozen=True)
class CharacteristicRoot:
    value: complex
    residual: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class SearchBox:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    @classmethod
    def default(cls) -> SearchBox:
        return cls(*settings.CHAR_BOX_RE, *settings.CHAR_BOX_IM)

    def contains(self, lam: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= lam.real <= self.re_max + pad
                and self.im_min - pad <= lam.imag <= self.im_max + pad)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def size(self) -> float:
        return max(self.re_max - self.re_min, self.im_max - self.im_min)

    def grown(self, pad: float) -> SearchBox:
        return SearchBox(self.re_min - pad, self.re_max + pad, self.im_min - pad, self.im_max + pad)

    def split(self, frac: float) -> list[SearchBox]:
        re_mid = self.re_min + frac * (self.re_max - self.re_min)
        im_mid = self.im_min + frac * (self.im_max - self.im_min)
        return [
            SearchBox(self.re_min, re_mid, self.im_min, im_mid),
            SearchBox(re_mid, self.re_max, self.im_min, im_mid),
            SearchBox(self.re_min, re_mid, im_mid, self.im_max),
            SearchBox(re_mid, self.re_max, im_mid, self.im_max),
        ]


def characteristic_function(sys: DelaySystem, lam) -> np.ndarray:
    """det(λI − A_u0 − A_uN e^{−λτ_d}), vectorized over λ."""
    lam = np.asarray(lam, dtype=complex)
    eye = np.eye(sys.n)
    M = (lam[..., None, None] * eye - sys.A_u0
         - sys.A_uN * np.exp(-lam * sys.tau_d)[..., None, None])
    return np.linalg.det(M)


def refine_characteristic_root(
    sys: DelaySystem,
    guess: complex,
    tol: float | None = None,
    max_iter: int = 60,
) -> CharacteristicRoot:
    """Newton iteration on char(λ) from `guess`."""
    tol = settings.CHAR_ROOT_TOL if tol is None else tol
    eye = np.eye(sys.n)
    lam = complex(guess)
    step = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        e = np.exp(-lam * sys.tau_d)
        M = lam * eye - sys.A_u0 - sys.A_uN * e
        dM = eye + sys.tau_d * sys.A_uN * e
        try:
            trace = np.trace(np.linalg.solve(M, dM))
        except np.linalg.LinAlgError:
            # M singular: λ is a root
            return CharacteristicRoot(lam, 0.0, True, it)
        if trace == 0 or not np.isfinite(trace):
            break
        step = 1.0 / trace
        lam -= step
        if abs(step) <= 1e-14 * max(1.0, abs(lam)):
            break
    residual = float(abs(characteristic_function(sys, lam)))
    converged = np.isfinite(residual) and (residual < tol or abs(step) <= 1e-12 * max(1.0, abs(lam)))
    return CharacteristicRoot(lam, residual, bool(converged), it)


# ============================================
# Argument principle
# ============================================
def _edge_phase(sys: DelaySystem, a: complex, b: complex) -> tuple[float, float]:
    """Total phase change of char along [a, b] and the smallest |char| seen."""
    t = np.linspace(0.0, 1.0, INITIAL_EDGE_SAMPLES)
    while True:
        f = characteristic_function(sys, a + (b - a) * t)
        dphi = np.angle(f[1:] / f[:-1])
        bad = np.abs(dphi) > np.pi / 2
        if not bad.any() or t.size >= MAX_EDGE_SAMPLES:
            break
        t = np.sort(np.concatenate([t, 0.5 * (t[:-1][bad] + t[1:][bad])]))
    return float(dphi.sum()), float(np.abs(f).min())


def _vertices(box: SearchBox) -> list[complex]:
    return [
        complex(box.re_min, box.im_min),
        complex(box.re_max, box.im_min),
        complex(box.re_max, box.im_max),
        complex(box.re_min, box.im_max),
    ]


def count_roots(sys: DelaySystem, box: SearchBox) -> tuple[int, float]:
    """Number of roots inside `box` (with multiplicity) and min |char| on its boundary."""
    verts = _vertices(box)
    total, smallest = 0.0, np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        for a, b in zip(verts, verts[1:] + verts[:1], strict=True):
            phase, fmin = _edge_phase(sys, a, b)
            total += phase
            smallest = min(smallest, fmin)
    if not np.isfinite(total):
        return -1, 0.0
    return int(round(total / (2 * np.pi))), smallest


def _count_clear(sys: DelaySystem, box: SearchBox, nudges: int = 5) -> tuple[SearchBox, int]:
    """Count roots, pushing the boundary outward while it passes through a root."""
    pad = 1e-6 * box.size
    for _ in range(nudges):
        count, smallest = count_roots(sys, box)
        scale = abs(characteristic_function(sys, box.center)) + 1.0
        if count >= 0 and smallest > 1e-12 * scale:
            return box, count
        box = box.grown(pad)
        pad *= 10
    raise RootFindingError(f"boundary of {box} keeps hitting characteristic roots")


def _newton_in_box(sys: DelaySystem, box: SearchBox) -> CharacteristicRoot:
    re = np.linspace(box.re_min, box.re_max, 3)
    im = np.linspace(box.im_min, box.im_max, 3)
    starts = [box.center] + [complex(r, i) for r in re for i in im]
    best: CharacteristicRoot | None = None
    for start in starts:
        root = refine_characteristic_root(sys, start)
        if root.converged and box.contains(root.value, pad=1e-8 * max(1.0, box.size)):
            return root
        if best is None or root.residual < best.residual:
            best = root
    return best


def _isolate(sys: DelaySystem, box: SearchBox, count: int, depth: int, out: list[CharacteristicRoot]):
    if count <= 0:
        return
    if count == 1 or depth >= MAX_TREE_DEPTH or box.size < 1e-10:
        root = _newton_in_box(sys, box)
        out.extend([root] * count)
        return
    for frac in SPLIT_FRACTIONS:
        children = box.split(frac)
        counts = [count_roots(sys, child)[0] for child in children]
        if sum(counts) == count and min(counts) >= 0:
            break
    else:
        logger.warning(f"Sub-box counts inconsistent at depth {depth}; refining {count} root(s) from the box")
        root = _newton_in_box(sys, box)
        out.extend([root] * count)
        return
    for child, c in zip(children, counts, strict=True):
        _isolate(sys, child, c, depth + 1, out)


def exact_characteristic_roots(
    sys: DelaySystem,
    n_roots: int | None = None,
    search_box: SearchBox | None = None,
) -> list[CharacteristicRoot]:
    """
    Roots of the linearized DDE's characteristic function inside `search_box`
    (default Re ∈ [−10, 2], Im ∈ [0, 20]), sorted by descending real part.
    """
    box, count = _count_clear(sys, search_box or SearchBox.default())
    found: list[CharacteristicRoot] = []
    _isolate(sys, box, count, 0, found)
    found.sort(key=lambda r: (-r.value.real, -abs(r.value.imag)))
    failed = [r for r in found if not r.converged]
    for r in failed:
        logger.warning(f"Characteristic root did not converge: {r.value:.6g} (|char|={r.residual:.2e})")
    logger.info("Characteristic roots located", extra={"props": {
        "count": count, "converged": len(found) - len(failed),
        "leading": f"{found[0].value:.6g}" if found else None,
    }})
    return found[:n_roots] if n_roots is not None else found
