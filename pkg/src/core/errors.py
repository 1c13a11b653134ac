"""
DelaySSM — Error hierarchy.
Every failure the toolkit raises derives from DelaySsmError and carries an exit code
for the command-line front end (2 = configuration problem, 3 = numerical failure).
"""

from __future__ import annotations

from typing import Any


class DelaySsmError(Exception):
    """Base class; numerical failures by default."""

    exit_code = 3

    def __init__(self, message: str, **context: Any):
        self.context = context
        super().__init__(message)


# ============================================
# Input / configuration
# ============================================
class ConfigError(DelaySsmError, ValueError):
    """Run configuration could not be parsed or validated."""

    exit_code = 2


class ModelDefinitionError(DelaySsmError, ValueError):
    """A DelaySystem (or one of its builders) received invalid parameters."""


class DimensionMismatchError(DelaySsmError, ValueError):
    """A state vector does not have the length the system expects."""

    def __init__(self, what: str, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected length {expected}, got {got}", expected=expected, got=got)


class HistoryDomainError(DelaySsmError, ValueError):
    """An initial history does not cover [-tau_d, 0]."""


class ExpansionFileError(DelaySsmError):
    """A persisted SSM expansion is missing or unreadable."""

    exit_code = 2


# ============================================
# Spectral
# ============================================
class EigensolverError(DelaySsmError):
    """The dense eigensolver failed or returned pairs with a large residual."""


class MasterModeError(DelaySsmError):
    """No admissible complex-conjugate master pair exists."""


class RootFindingError(DelaySsmError):
    """A characteristic root or polynomial root search failed."""


class HopfLocusError(DelaySsmError):
    """The leading real part does not change sign over the parameter range."""

    def __init__(self, lo: float, hi: float, re_lo: float, re_hi: float):
        self.bracket = (lo, hi)
        self.re_values = (re_lo, re_hi)
        super().__init__(
            f"no sign change of Re(lambda) on [{lo}, {hi}]: {re_lo:.3e}, {re_hi:.3e}",
            bracket=self.bracket,
        )


# ============================================
# SSM
# ============================================
class ResonanceError(DelaySsmError):
    """A homological equation is (near-)singular outside the structural resonance set."""

    def __init__(self, k: int, l: int, sigma: complex, eigenvalue: complex, distance: float):
        self.k = k
        self.l = l
        self.sigma = sigma
        self.eigenvalue = eigenvalue
        self.distance = distance
        super().__init__(
            f"outer resonance at monomial (k={k}, l={l}): "
            f"k*lambda + l*conj(lambda) = {sigma:.6g} is within {distance:.2e} of eigenvalue {eigenvalue:.6g}; "
            "internal resonances need a higher-dimensional reduction",
            k=k, l=l,
        )


# ============================================
# Analysis / simulation
# ============================================
class CycleNotFoundError(DelaySsmError):
    """The reduced flow did not settle on a limit cycle within the horizon."""


class IntegrationError(DelaySsmError):
    """A time integration diverged, blew up, or got invalid step parameters."""

    def __init__(self, message: str, t: float | None = None, **context: Any):
        self.t = t
        super().__init__(message, t=t, **context)
