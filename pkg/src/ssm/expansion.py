"""
DelaySSM — SSM expansion and reduced-order model containers.

W(p) = Σ W[k, l] p^k p̄^l with W[1, 0] = v^E, and normal-form reduced dynamics

    ṗ = λ^E p + Σ_j γ_j p^{j+1} p̄^j  ⇔  ρ̇ = a(ρ),  θ̇ = b(ρ)   (p = ρ e^{iθ}),
    a(ρ) = Re(λ^E) ρ + Σ Re(γ_j) ρ^{2j+1},   b(ρ) = Im(λ^E) + Σ Im(γ_j) ρ^{2j}.

With forcing the reduced flow gains ε f_eff(Ω) e^{iΩt} in the p-equation, where
f_eff(Ω) = f · s(Ω) resolves the forcing tag.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import Polynomial

from src.core.errors import ModelDefinitionError
from src.model.delay_system import ForcingTag
from src.spectral.eigen import MasterMode


def _check_order(order: int):
    if order < 3 or order % 2 == 0:
        raise ModelDefinitionError(f"expansion order must be odd and >= 3, got {order}")


@dataclass(frozen=True, eq=False)
class SsmExpansion:
    order: int
    master: MasterMode
    W: np.ndarray  # (order+1, order+1, dim)
    gamma: np.ndarray  # γ_1 .. γ_{(order-1)/2}
    x0_nonauto: np.ndarray | None = None  # Re(x0 e^{iΩt}) convention
    modal_force: complex | None = None  # u*·F̂⁺ at Omega (tag resolved)
    Omega: float | None = None
    epsilon: float = 0.0
    forcing_tag: ForcingTag = ForcingTag.CONSTANT
    conv_radius: float | None = None

    @property
    def dim(self) -> int:
        return self.W.shape[2]

    @property
    def W_coeffs(self) -> dict[tuple[int, int], np.ndarray]:
        return {
            (k, l): self.W[k, l]
            for k in range(self.order + 1)
            for l in range(self.order + 1 - k)
            if k + l >= 1
        }

    def truncated(self, order: int) -> SsmExpansion:
        """Lower-order expansion; normal-form coefficients do not depend on the truncation."""
        _check_order(order)
        if order > self.order:
            raise ModelDefinitionError(f"cannot raise order {self.order} to {order} by truncation")
        return replace(
            self,
            order=order,
            W=self.W[: order + 1, : order + 1].copy(),
            gamma=self.gamma[: (order - 1) // 2].copy(),
        )

    def with_conv_radius(self, radius: float | None) -> SsmExpansion:
        return replace(self, conv_radius=radius)

    @property
    def base_modal_force(self) -> complex:
        """Modal force with the Ω-scaling of the forcing tag removed."""
        if self.modal_force is None:
            return 0.0
        scale = self.Omega**2 if self.forcing_tag == ForcingTag.OMEGA_SQUARED else 1.0
        return self.modal_force / scale


@dataclass(frozen=True, eq=False)
class Rom:
    """Polar reduced dynamics; coefficient arrays are in increasing powers of ρ."""
    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    modal_force: complex = 0.0  # unscaled f
    forcing_tag: ForcingTag = ForcingTag.CONSTANT
    epsilon: float = 0.0
    Omega: float | None = None
    conv_radius: float | None = None
    _a: Polynomial = field(init=False, repr=False)
    _b: Polynomial = field(init=False, repr=False)
    _c: Polynomial = field(init=False, repr=False)  # λ + Σ γ_j s^j in s = ρ²

    def __post_init__(self):
        a = np.asarray(self.a_coeffs, dtype=float)
        b = np.asarray(self.b_coeffs, dtype=float)
        object.__setattr__(self, "a_coeffs", a)
        object.__setattr__(self, "b_coeffs", b)
        object.__setattr__(self, "_a", Polynomial(a))
        object.__setattr__(self, "_b", Polynomial(b))
        re, im = a[1::2], b[0::2]
        c = np.zeros(max(len(re), len(im)), dtype=complex)
        c[: len(re)] += re
        c[: len(im)] += 1j * im
        object.__setattr__(self, "_c", Polynomial(c))

    @classmethod
    def from_gamma(cls, lam: complex, gamma: Sequence[complex], **kwargs) -> Rom:
        J = len(gamma)
        a = np.zeros(2 * J + 2)
        b = np.zeros(2 * J + 1)
        a[1] = lam.real
        b[0] = lam.imag
        for j, g in enumerate(gamma, start=1):
            a[2 * j + 1] = g.real
            b[2 * j] = g.imag
        return cls(a_coeffs=a, b_coeffs=b, **kwargs)

    @property
    def order(self) -> int:
        return len(self.a_coeffs) - 1

    @property
    def lam(self) -> complex:
        return complex(self.a_coeffs[1], self.b_coeffs[0])

    @property
    def gamma(self) -> np.ndarray:
        J = (self.order - 1) // 2
        return np.array([complex(self.a_coeffs[2 * j + 1], self.b_coeffs[2 * j]) for j in range(1, J + 1)])

    def a(self, rho):
        return self._a(rho)

    def b(self, rho):
        return self._b(rho)

    def da(self, rho):
        return self._a.deriv()(rho)

    def db(self, rho):
        return self._b.deriv()(rho)

    def f_eff(self, Omega: float) -> complex:
        scale = Omega**2 if self.forcing_tag == ForcingTag.OMEGA_SQUARED else 1.0
        return self.modal_force * scale

    def truncated(self, order: int) -> Rom:
        _check_order(order)
        return replace(self, a_coeffs=self.a_coeffs[: order + 1], b_coeffs=self.b_coeffs[:order])

    def with_forcing(self, epsilon: float, Omega: float | None = None) -> Rom:
        return replace(self, epsilon=epsilon, Omega=Omega)

    def radial_field(self, q: complex, Omega: float) -> complex:
        """Rotating-frame reduced flow q̇ = q(λ − iΩ + Σγ_j|q|^{2j}) + ε f_eff(Ω), q = ρ e^{i(θ − Ωt)}."""
        return q * (self._c(abs(q) ** 2) - 1j * Omega) + self.epsilon * self.f_eff(Omega)


def build_rom(ssm: SsmExpansion, epsilon: float | None = None, Omega: float | None = None) -> Rom:
    """Rom read from an expansion; forcing data default to the expansion's."""
    return Rom.from_gamma(
        ssm.master.lam,
        ssm.gamma,
        modal_force=ssm.base_modal_force,
        forcing_tag=ssm.forcing_tag,
        epsilon=ssm.epsilon if epsilon is None else epsilon,
        Omega=ssm.Omega if Omega is None else Omega,
        conv_radius=ssm.conv_radius,
    )
