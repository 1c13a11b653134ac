"""
DelaySSM — Bivariate power series in (p, p̄).
A series is a complex array S[k, l] holding the coefficient of p^k p̄^l, truncated at
total degree `order`. Used to compose the polynomial nonlinearity with W(p).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d


def degree_mask(order: int) -> np.ndarray:
    k, l = np.indices((order + 1, order + 1))
    return (k + l) <= order


def series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Product of two series truncated at total degree `order`."""
    prod = convolve2d(a, b)[: order + 1, : order + 1]
    return np.where(degree_mask(order), prod, 0)


def compose_monomials(
    series: np.ndarray,
    exponents: np.ndarray,
    coeffs: np.ndarray,
    rows: np.ndarray,
    order: int,
) -> np.ndarray:
    """
    Σ_m coeffs[m] Π_j series[j]^{exponents[m, j]}, accumulated per output row.

    series: (n_vars, order+1, order+1); exponents: (n_terms, n_vars);
    rows: (n_terms, n_rows) one-hot. Returns (n_rows, order+1, order+1).
    """
    n_vars = series.shape[0]
    n_rows = rows.shape[1]
    out = np.zeros((n_rows, order + 1, order + 1), dtype=complex)
    if not len(coeffs):
        return out

    one = np.zeros((order + 1, order + 1), dtype=complex)
    one[0, 0] = 1.0
    powers: list[list[np.ndarray]] = []
    for j in range(n_vars):
        pw = [one]
        for _ in range(int(exponents[:, j].max())):
            pw.append(series_mul(pw[-1], series[j], order))
        powers.append(pw)

    for exps, c, row in zip(exponents, coeffs, rows, strict=True):
        term = one
        for j in np.flatnonzero(exps):
            term = series_mul(term, powers[j][exps[j]], order)
        out[np.argmax(row)] += c * term
    return out


def evaluate(coeffs: np.ndarray, p) -> np.ndarray:
    """Σ_{k,l} C[k, l, :] p^k p̄^l for C of shape (O+1, O+1, d); p scalar or array → (..., d)."""
    p = np.asarray(p, dtype=complex)
    powers = np.arange(coeffs.shape[0])
    pk = p[..., None] ** powers
    ql = np.conj(p)[..., None] ** powers
    return np.einsum("...k,...l,kld->...d", pk, ql, coeffs)
