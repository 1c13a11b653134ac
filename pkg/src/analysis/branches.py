"""
DelaySSM — Assembly of FRC points into branches.
Columns of fixed points (one column per Ω) are chained in ρ order; saddle-node
points mark where a pair of solutions is born or dies. A chain that closes on
itself is an isola.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from src.analysis.frc import FrcPoint, FrcResult

logger = logging.getLogger(__name__)


@dataclass
class Branch:
    points: list[FrcPoint]
    closed: bool = False
    isola: bool = False


@dataclass
class BranchSet:
    branches: list[Branch] = field(default_factory=list)
    ambiguous: list[str] = field(default_factory=list)

    @property
    def isolas(self) -> list[Branch]:
        return [b for b in self.branches if b.isola]


class _Curve:
    def __init__(self, points):
        self.points: deque[FrcPoint] = deque(points)
        self.closed = False

    def attach(self, side: str, pt: FrcPoint):
        if side == "head":
            self.points.appendleft(pt)
        else:
            self.points.append(pt)


def _sn_between(sn_points: list[FrcPoint], lo: float, hi: float) -> FrcPoint | None:
    inside = [p for p in sn_points if lo <= p.Omega <= hi]
    return inside[0] if inside else None


def _pair_index(rhos: list[float], rho_sn: float) -> int:
    """Index i such that rhos[i], rhos[i+1] straddle the SN amplitude (closest pair)."""
    mids = 0.5 * (np.asarray(rhos[:-1]) + np.asarray(rhos[1:]))
    return int(np.argmin(np.abs(mids - rho_sn)))


def branch_connect(result: FrcResult) -> BranchSet:
    out = BranchSet()
    columns: dict[float, list[FrcPoint]] = {}
    for pt in result.points:
        columns.setdefault(pt.Omega, []).append(pt)
    omegas = sorted(columns)
    if not omegas:
        return out
    sn_points = sorted(result.sn_points, key=lambda p: p.Omega)

    curves: list[_Curve] = []
    # ends[i] = [curve, side] for the i-th root (ascending ρ) of the current column
    ends: list[list] = []

    def start_column(col: list[FrcPoint]) -> list[list]:
        new_ends = []
        for pt in col:
            curve = _Curve([pt])
            curves.append(curve)
            new_ends.append([curve, "tail"])
        return new_ends

    prev = None
    for w in omegas:
        col = sorted(columns[w], key=lambda p: p.rho)
        if prev is None:
            ends = start_column(col)
            prev = w
            continue

        delta = len(col) - len(ends)
        sn = _sn_between(sn_points, prev, w) if abs(delta) == 2 else None

        if delta == 0:
            for end, pt in zip(ends, col, strict=True):
                end[0].attach(end[1], pt)

        elif delta == 2 and sn is not None:
            i = _pair_index([p.rho for p in col], sn.rho)
            old = iter(ends)
            new_ends = []
            for j, pt in enumerate(col):
                if j == i:
                    curve = _Curve([pt, sn, col[i + 1]])
                    curves.append(curve)
                    new_ends += [[curve, "head"], [curve, "tail"]]
                elif j == i + 1:
                    continue
                else:
                    end = next(old)
                    end[0].attach(end[1], pt)
                    new_ends.append(end)
            ends = new_ends

        elif delta == -2 and sn is not None:
            i = _pair_index([e[0].points[0 if e[1] == "head" else -1].rho for e in ends], sn.rho)
            first, second = ends[i], ends[i + 1]
            first[0].attach(first[1], sn)
            if first[0] is second[0]:
                first[0].closed = True
            else:
                _merge(first, second, ends)
            survivors = ends[:i] + ends[i + 2:]
            for end, pt in zip(survivors, col, strict=True):
                end[0].attach(end[1], pt)
            ends = survivors
            curves[:] = [c for c in curves if c.points]

        else:
            msg = f"cannot chain {len(ends)} -> {len(col)} solutions between Omega={prev:.6g} and {w:.6g}"
            logger.warning(msg)
            out.ambiguous.append(msg)
            ends = start_column(col)
        prev = w

    for curve in curves:
        if not curve.points:
            continue
        pts = list(curve.points)
        out.branches.append(Branch(points=pts, closed=curve.closed, isola=curve.closed))

    logger.info("FRC branches assembled", extra={"props": {
        "branches": len(out.branches), "isolas": len(out.isolas), "ambiguous": len(out.ambiguous),
    }})
    return out


def _merge(first: list, second: list, ends: list[list]):
    """Join the curve of `second` onto the free end of `first`; `second`'s curve is emptied."""
    a, b = first[0], second[0]
    a_pts = list(a.points) if first[1] == "tail" else list(reversed(a.points))
    b_pts = list(b.points) if second[1] == "head" else list(reversed(b.points))
    a.points = deque(a_pts + b_pts)
    b.points = deque()
    # remaining free ends: a's far end is now the head, b's far end the tail
    for end in ends:
        if end is first or end is second:
            continue
        if end[0] is a:
            end[1] = "head"
        elif end[0] is b:
            end[0], end[1] = a, "tail"
