"""
DelaySSM — Benchmark systems.
Builders for the delayed Duffing oscillator, two coupled oscillators with delayed
feedback, and the Galerkin-reduced diffusive Hutchinson equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import ModelDefinitionError
from src.model.delay_system import DelaySystem, Forcing, ForcingTag, Monomial

# q3² multiplier in the second coupled oscillator, taken literally as γ + 3γ
COUPLED_Q3_SQUARE_DEFAULT = 4.0


def _exponents(n: int, now: dict[int, int] | None = None, delayed: dict[int, int] | None = None) -> tuple[int, ...]:
    exps = [0] * (2 * n)
    for idx, power in (now or {}).items():
        exps[idx] += power
    for idx, power in (delayed or {}).items():
        exps[n + idx] += power
    return tuple(exps)


def _check_delay(tau_d: float):
    if not tau_d > 0:
        raise ModelDefinitionError(f"delay tau_d must be > 0, got {tau_d}", tau_d=tau_d)


# ============================================
# Delayed Duffing oscillator
# ============================================
def make_duffing(
    delta: float,
    alpha: float,
    beta: float,
    tau_d: float,
    epsilon: float = 0.0,
    Omega: float | None = None,
) -> DelaySystem:
    """ẍ + αx + βx³ = −δẋ(t − τ_d) + ε cos Ωt as a first-order system in (x, ẋ)."""
    _check_delay(tau_d)
    n = 2
    terms = []
    if beta != 0:
        terms.append(Monomial(row=1, exponents=_exponents(n, now={0: 3}), coeff=-beta))
    return DelaySystem(
        n=n,
        tau_d=tau_d,
        A_u0=[[0.0, 1.0], [-alpha, 0.0]],
        A_uN=[[0.0, 0.0], [0.0, -delta]],
        nonlinear_terms=tuple(terms),
        forcing=Forcing(amplitude=[0.0, 1.0], tag=ForcingTag.CONSTANT),
        epsilon=epsilon,
        Omega=Omega,
        name="duffing",
    )


# ============================================
# Coupled oscillators with delayed feedback
# ============================================
def make_coupled_oscillators(
    mu1: float,
    mu2: float,
    gamma: float,
    beta1: float,
    beta2: float,
    tau_d: float,
    epsilon: float = 0.0,
    Omega: float | None = None,
    q3_square_coeff: float = COUPLED_Q3_SQUARE_DEFAULT,
) -> DelaySystem:
    """
    State (q1, q̇1, q3, q̇3) of the two base-excited oscillators.

    ω1² = 1 + γ and ω2² = 1 + 3γ. The q3² term of the second oscillator carries
    −q3_square_coeff·γ (4γ by default). Forcing is εΩ²(cos Ωt, sin Ωt) on the
    velocity rows.
    """
    _check_delay(tau_d)
    n = 4
    omega1_sq = 1.0 + gamma
    omega2_sq = 1.0 + 3.0 * gamma

    A_u0 = np.zeros((n, n))
    A_u0[0, 1] = 1.0
    A_u0[1, 0] = -omega1_sq
    A_u0[1, 1] = -mu1
    A_u0[2, 3] = 1.0
    A_u0[3, 2] = -omega2_sq
    A_u0[3, 3] = -mu2

    A_uN = np.zeros((n, n))
    A_uN[1, 0] = -beta1
    A_uN[1, 1] = -beta2
    A_uN[3, 2] = -beta1
    A_uN[3, 3] = -beta2

    spec = [
        (1, {0: 1, 2: 1}, -2.0 * gamma),
        (1, {0: 1, 2: 2}, -gamma),
        (1, {0: 3}, -gamma),
        (3, {2: 2}, -q3_square_coeff * gamma),
        (3, {0: 2, 2: 1}, -gamma),
        (3, {2: 3}, -gamma),
    ]
    terms = tuple(
        Monomial(row=row, exponents=_exponents(n, now=now), coeff=coeff)
        for row, now, coeff in spec
        if coeff != 0
    )
    return DelaySystem(
        n=n,
        tau_d=tau_d,
        A_u0=A_u0,
        A_uN=A_uN,
        nonlinear_terms=terms,
        forcing=Forcing(amplitude=[0.0, 1.0, 0.0, -1.0j], tag=ForcingTag.OMEGA_SQUARED),
        epsilon=epsilon,
        Omega=Omega,
        name="coupled",
    )


# ============================================
# Hutchinson equation, Galerkin-reduced on sine modes
# ============================================
@dataclass(frozen=True)
class HutchinsonConfig:
    M: int
    d: float
    a: float

    def __post_init__(self):
        if self.M < 1:
            raise ModelDefinitionError(f"Galerkin truncation M must be >= 1, got {self.M}")
        if not self.d > 0 or not self.a > 0:
            raise ModelDefinitionError(f"d and a must be > 0, got d={self.d}, a={self.a}")


def _sine_integral(m: int) -> float:
    """∫₀^π sin(mx) dx."""
    if m == 0:
        return 0.0
    return (1 - (-1) ** (m % 2)) / m


def triple_sine_inner(i: int, j: int, k: int) -> float:
    """⟨β_i, β_j β_k⟩ with β_m(x) = √(2/π) sin(mx) on [0, π]."""
    s = (
        _sine_integral(i + j - k)
        + _sine_integral(i - j + k)
        + _sine_integral(-i + j + k)
        - _sine_integral(i + j + k)
    )
    return (2.0 / math.pi) ** 1.5 * 0.25 * s


def make_hutchinson(cfg: HutchinsonConfig) -> DelaySystem:
    """q̇_i = (1 − d i²)q_i − a q_i(t−1) − a Σ_jk ⟨β_i, β_j β_k⟩ q_j(t−1) q_k(t), τ_d = 1."""
    M = cfg.M
    modes = np.arange(1, M + 1)
    terms = []
    for i in range(M):
        for j in range(M):
            for k in range(M):
                c = triple_sine_inner(i + 1, j + 1, k + 1)
                if c == 0.0:
                    continue
                terms.append(Monomial(
                    row=i,
                    exponents=_exponents(M, now={k: 1}, delayed={j: 1}),
                    coeff=-cfg.a * c,
                ))
    return DelaySystem(
        n=M,
        tau_d=1.0,
        A_u0=np.diag(1.0 - cfg.d * modes.astype(float) ** 2),
        A_uN=-cfg.a * np.eye(M),
        nonlinear_terms=tuple(terms),
        name="hutchinson",
    )


def hutchinson_characteristic(lam: complex, k: int, a: float, d: float) -> complex:
    """Scalar characteristic function of sine mode k: λ + a e^{−λ} + d k² − 1."""
    return lam + a * np.exp(-lam) + d * k**2 - 1.0
