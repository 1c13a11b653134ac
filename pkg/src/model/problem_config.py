"""
DelaySSM — Problem definitions from configuration documents.
Pydantic models for the `problem` block of a run configuration, discriminated on
`kind` (duffing | coupled | hutchinson | custom), and the builders that turn them
into DelaySystem instances.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.errors import ConfigError
from src.model.benchmarks import (
    COUPLED_Q3_SQUARE_DEFAULT,
    HutchinsonConfig,
    make_coupled_oscillators,
    make_duffing,
    make_hutchinson,
)
from src.model.delay_system import DelaySystem, Forcing, ForcingTag, Monomial

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ForcingConfig(_Strict):
    epsilon: float = Field(default=0.0, ge=0.0)
    Omega: float | None = Field(default=None, gt=0.0)
    tag: ForcingTag | None = None
    # custom systems only: (re, im) per state row
    amplitude: list[tuple[float, float]] | None = None


class DuffingProblem(_Strict):
    kind: Literal["duffing"]
    delta: float
    alpha: float
    beta: float
    tau_d: float = Field(gt=0.0)
    forcing: ForcingConfig = ForcingConfig()


class CoupledProblem(_Strict):
    kind: Literal["coupled"]
    mu1: float
    mu2: float
    gamma: float
    beta1: float
    beta2: float
    tau_d: float = Field(gt=0.0)
    q3_square_coeff: float = COUPLED_Q3_SQUARE_DEFAULT
    forcing: ForcingConfig = ForcingConfig()


class HutchinsonProblem(_Strict):
    kind: Literal["hutchinson"]
    M: int = Field(default=4, ge=1)
    d: float = Field(default=1.0, gt=0.0)
    a: float = Field(gt=0.0)


class MonomialConfig(_Strict):
    row: int = Field(ge=0)
    coeff: float
    now: dict[int, int] = {}
    delayed: dict[int, int] = {}


class CustomProblem(_Strict):
    kind: Literal["custom"]
    n: int = Field(ge=1)
    tau_d: float = Field(gt=0.0)
    A_u0: list[list[float]]
    A_uN: list[list[float]]
    monomials: list[MonomialConfig] = []
    forcing: ForcingConfig = ForcingConfig()

    @field_validator("A_u0", "A_uN")
    @classmethod
    def square_rows(cls, v: list[list[float]]) -> list[list[float]]:
        if any(len(row) != len(v) for row in v):
            raise ValueError("matrix must be square")
        return v


ProblemConfig = Annotated[
    DuffingProblem | CoupledProblem | HutchinsonProblem | CustomProblem,
    Field(discriminator="kind"),
]


def load_delay_system(problem: ProblemConfig) -> DelaySystem:
    """Build the DelaySystem described by a validated problem block."""
    if isinstance(problem, DuffingProblem):
        f = problem.forcing
        return make_duffing(problem.delta, problem.alpha, problem.beta, problem.tau_d, f.epsilon, f.Omega)

    if isinstance(problem, CoupledProblem):
        f = problem.forcing
        return make_coupled_oscillators(
            problem.mu1, problem.mu2, problem.gamma, problem.beta1, problem.beta2,
            problem.tau_d, f.epsilon, f.Omega, q3_square_coeff=problem.q3_square_coeff,
        )

    if isinstance(problem, HutchinsonProblem):
        return make_hutchinson(HutchinsonConfig(M=problem.M, d=problem.d, a=problem.a))

    n = problem.n
    if len(problem.A_u0) != n or len(problem.A_uN) != n:
        raise ConfigError(f"problem.A_u0/A_uN must be {n}x{n}")
    terms = []
    for mono in problem.monomials:
        exps = [0] * (2 * n)
        for idx, power in mono.now.items():
            exps[idx] += power
        for idx, power in mono.delayed.items():
            exps[n + idx] += power
        terms.append(Monomial(row=mono.row, exponents=tuple(exps), coeff=mono.coeff))
    f = problem.forcing
    forcing = None
    if f.amplitude is not None:
        forcing = Forcing(amplitude=[complex(re, im) for re, im in f.amplitude], tag=f.tag or ForcingTag.CONSTANT)
    return DelaySystem(
        n=n,
        tau_d=problem.tau_d,
        A_u0=problem.A_u0,
        A_uN=problem.A_uN,
        nonlinear_terms=tuple(terms),
        forcing=forcing,
        epsilon=f.epsilon,
        Omega=f.Omega,
    )


def problem_family(problem: ProblemConfig, parameter: str) -> Callable[[float], DelaySystem]:
    """One-parameter family of systems obtained by overriding a problem field."""
    if parameter not in type(problem).model_fields or parameter in ("kind", "forcing"):
        raise ConfigError(f"'{parameter}' is not a sweepable parameter of a {problem.kind} problem")

    def build(value: float) -> DelaySystem:
        return load_delay_system(problem.model_copy(update={parameter: value}))

    return build
