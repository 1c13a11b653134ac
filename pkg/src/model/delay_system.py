"""
DelaySSM — DelaySystem.
A DDE with one discrete delay, polynomial nonlinearity in the current and delayed
state, and optional harmonic forcing:

    ẋ = A_u0 x(t) + A_uN x(t − τ_d) + f_nl(x(t), x(t − τ_d)) + ε g(Ωt),
    g(Ωt) = Re(ĝ e^{iΩt}) · s(Ω),   s = 1 or Ω² depending on the forcing tag.

Monomials are stored over the concatenated variable y = (x(t), x(t − τ_d)) of length 2n.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from src.core.errors import DimensionMismatchError, HistoryDomainError, ModelDefinitionError

logger = logging.getLogger(__name__)


class ForcingTag(str, Enum):
    CONSTANT = "constant"
    OMEGA_SQUARED = "omega_squared"


@dataclass(frozen=True)
class Monomial:
    """coeff · Π y_j^{exponents[j]} added to row `row` of the vector field."""
    row: int
    exponents: tuple[int, ...]
    coeff: float

    @property
    def degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True, eq=False)
class Forcing:
    """Complex amplitude per state row plus its Ω-dependence."""
    amplitude: np.ndarray
    tag: ForcingTag = ForcingTag.CONSTANT

    def __post_init__(self):
        amp = np.array(self.amplitude, dtype=complex)
        amp.setflags(write=False)
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "tag", ForcingTag(self.tag))

    def scale(self, Omega: float) -> float:
        return Omega**2 if self.tag == ForcingTag.OMEGA_SQUARED else 1.0

    def resolve(self, Omega: float) -> np.ndarray:
        """Amplitude ĝ·s(Ω) in the convention g = Re(ĝ s e^{iΩt})."""
        return self.amplitude * self.scale(Omega)


@dataclass(frozen=True, eq=False)
class DelaySystem:
    n: int
    tau_d: float
    A_u0: np.ndarray
    A_uN: np.ndarray
    nonlinear_terms: tuple[Monomial, ...] = ()
    forcing: Forcing | None = None
    epsilon: float = 0.0
    Omega: float | None = None
    name: str = "custom"

    # evaluation tables, derived in __post_init__
    _exps: np.ndarray = field(init=False, repr=False)
    _coeffs: np.ndarray = field(init=False, repr=False)
    _rows: np.ndarray = field(init=False, repr=False)
    _d_coeffs: np.ndarray = field(init=False, repr=False)
    _d_exps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ModelDefinitionError(f"state dimension must be >= 1, got {self.n}")
        if not self.tau_d > 0:
            raise ModelDefinitionError(f"delay tau_d must be > 0, got {self.tau_d}", tau_d=self.tau_d)
        if self.epsilon < 0:
            raise ModelDefinitionError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.Omega is not None and not self.Omega > 0:
            raise ModelDefinitionError(f"Omega must be > 0, got {self.Omega}")
        if self.epsilon > 0 and (self.forcing is None or self.Omega is None):
            raise ModelDefinitionError("epsilon > 0 requires a forcing descriptor and Omega")

        n = self.n
        for attr in ("A_u0", "A_uN"):
            mat = np.array(getattr(self, attr), dtype=float)
            if mat.shape != (n, n):
                raise ModelDefinitionError(f"{attr} must be {n}x{n}, got {mat.shape}")
            mat.setflags(write=False)
            object.__setattr__(self, attr, mat)

        terms = tuple(self.nonlinear_terms)
        for term in terms:
            if len(term.exponents) != 2 * n:
                raise ModelDefinitionError(f"monomial {term} needs {2 * n} exponents")
            if not 0 <= term.row < n:
                raise ModelDefinitionError(f"monomial row {term.row} outside 0..{n - 1}")
            if any(e < 0 for e in term.exponents) or term.degree < 2:
                raise ModelDefinitionError(f"monomial {term} must have non-negative exponents and degree >= 2")
        object.__setattr__(self, "nonlinear_terms", terms)

        if self.forcing is not None and self.forcing.amplitude.shape != (n,):
            raise ModelDefinitionError(f"forcing amplitude must have length {n}")

        m = len(terms)
        exps = np.array([t.exponents for t in terms], dtype=int).reshape(m, 2 * n)
        coeffs = np.array([t.coeff for t in terms], dtype=float)
        rows = np.zeros((m, n))
        rows[np.arange(m), [t.row for t in terms]] = 1.0
        # ∂/∂y_j of every monomial, as (2n, m) coefficients and (2n, m, 2n) exponents
        d_coeffs = (coeffs[None, :] * exps.T).astype(float)
        d_exps = np.clip(exps[None, :, :] - np.eye(2 * n, dtype=int)[:, None, :], 0, None)
        for name, value in (("_exps", exps), ("_coeffs", coeffs), ("_rows", rows),
                            ("_d_coeffs", d_coeffs), ("_d_exps", d_exps)):
            object.__setattr__(self, name, value)

    # ============================================
    # Evaluation
    # ============================================
    def nonlinear_y(self, y: np.ndarray) -> np.ndarray:
        """f_nl on stacked y = (x_now, x_delayed); leading batch axes allowed."""
        y = np.asarray(y)
        if not len(self.nonlinear_terms):
            return np.zeros(y.shape[:-1] + (self.n,), dtype=y.dtype)
        terms = self._coeffs * np.prod(y[..., None, :] ** self._exps, axis=-1)
        return terms @ self._rows

    def nonlinear(self, x_now: np.ndarray, x_delayed: np.ndarray) -> np.ndarray:
        return self.nonlinear_y(self._stack(x_now, x_delayed))

    def nonlinear_jacobian_y(self, y: np.ndarray) -> np.ndarray:
        """n × 2n Jacobian of f_nl with respect to y."""
        y = np.asarray(y)
        if not len(self.nonlinear_terms):
            return np.zeros((self.n, 2 * self.n))
        vals = self._d_coeffs * np.prod(y[None, None, :] ** self._d_exps, axis=-1)
        return (vals @ self._rows).T

    def nonlinear_jacobian(self, x_now: np.ndarray, x_delayed: np.ndarray) -> np.ndarray:
        return self.nonlinear_jacobian_y(self._stack(x_now, x_delayed))

    def forcing_at(self, t: float) -> np.ndarray:
        """ε·g(Ωt) as a real n-vector (zero when unforced)."""
        if self.forcing is None or self.epsilon == 0:
            return np.zeros(self.n)
        amp = self.forcing.resolve(self.Omega)
        return self.epsilon * np.real(amp * np.exp(1j * self.Omega * t))

    def _stack(self, x_now, x_delayed) -> np.ndarray:
        x_now = np.asarray(x_now, dtype=float)
        x_delayed = np.asarray(x_delayed, dtype=float)
        if x_now.shape != (self.n,):
            raise DimensionMismatchError("x_now", self.n, x_now.size)
        if x_delayed.shape != (self.n,):
            raise DimensionMismatchError("x_delayed", self.n, x_delayed.size)
        return np.concatenate([x_now, x_delayed])

    # ============================================
    # Derived systems
    # ============================================
    @property
    def is_odd(self) -> bool:
        """True when every monomial has odd total degree (f_nl(−y) = −f_nl(y))."""
        return all(t.degree % 2 == 1 for t in self.nonlinear_terms)

    @property
    def is_forced(self) -> bool:
        return self.forcing is not None and self.epsilon > 0

    def with_forcing(self, epsilon: float, Omega: float | None) -> DelaySystem:
        return replace(self, epsilon=epsilon, Omega=Omega)

    def autonomous(self) -> DelaySystem:
        return replace(self, epsilon=0.0, Omega=None)


def eval_autonomous(sys: DelaySystem, x_now: np.ndarray, x_delayed: np.ndarray) -> np.ndarray:
    """A_u0·x_now + A_uN·x_delayed + f_nl(x_now, x_delayed)."""
    y = sys._stack(x_now, x_delayed)
    n = sys.n
    return sys.A_u0 @ y[:n] + sys.A_uN @ y[n:] + sys.nonlinear_y(y)


# ============================================
# Initial history
# ============================================
@dataclass(frozen=True)
class InitialHistory:
    """x0(s) on s ∈ [−τ_d, 0], optionally with its derivative."""
    value_fn: Callable[[float], Sequence[float]]
    derivative_fn: Callable[[float], Sequence[float]] | None = None
    domain: tuple[float, float] | None = None

    @classmethod
    def constant(cls, x0: Sequence[float]) -> InitialHistory:
        x0 = np.array(x0, dtype=float)
        zero = np.zeros_like(x0)
        return cls(value_fn=lambda s: x0, derivative_fn=lambda s: zero)

    def check_covers(self, tau_d: float):
        if self.domain is None:
            return
        lo, hi = self.domain
        if lo > -tau_d + 1e-12 or hi < 0:
            raise HistoryDomainError(
                f"history defined on [{lo}, {hi}] does not cover [-{tau_d}, 0]",
                domain=self.domain, tau_d=tau_d,
            )

    def value(self, s: float) -> np.ndarray:
        return np.asarray(self.value_fn(s), dtype=float)

    def derivative(self, s: float, tau_d: float, h: float = 1e-6) -> np.ndarray:
        if self.derivative_fn is not None:
            return np.asarray(self.derivative_fn(s), dtype=float)
        # one-sided at the interval ends
        lo, hi = max(s - h, -tau_d), min(s + h, 0.0)
        return (self.value(hi) - self.value(lo)) / (hi - lo)
