"""
DelaySSM — Run configuration.
One YAML document drives one reproducible run. Every block is a strict pydantic
model: unknown keys fail with the dotted path of the offending node and, when the
source is a file, its line and column.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.errors import ConfigError
from src.model.problem_config import ProblemConfig
from src.simulate.chain_solver import ChainMethod
from src.ssm.reduced import ProjectionMethod

logger = logging.getLogger(__name__)

PredictTaskName = Literal["backbone", "limit_cycle", "frc", "torus", "frc_convergence"]
SolverName = Literal["dde", "chain", "rom"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DiscretizationConfig(_Strict):
    N: int = Field(default=100, ge=1)


class SsmConfig(_Strict):
    order: int = 9
    resonance_tol: float | None = Field(default=None, gt=0.0)
    # backbone grid used to estimate the convergence radius
    rho_max: float | None = Field(default=None, gt=0.0)
    expansion: str | None = None  # persisted .npz to load instead of recomputing

    @field_validator("order")
    @classmethod
    def odd_order(cls, v: int) -> int:
        if v < 3 or v % 2 == 0:
            raise ValueError("order must be odd and >= 3")
        return v


class HopfSweepConfig(_Strict):
    parameter: str
    range: tuple[float, float]
    grid: int = Field(default=11, ge=2)
    tol: float | None = Field(default=None, gt=0.0)


class SpectrumTask(_Strict):
    n_eigs: int = Field(default=20, ge=1)
    convergence: list[int] | None = None
    hopf: HopfSweepConfig | None = None


class ValidateConfig(_Strict):
    periods: float = Field(default=300.0, gt=0.0)
    extensions: int = Field(default=2, ge=0)  # horizon doublings while the envelope still drifts
    dt: float | None = Field(default=None, gt=0.0)
    frc_samples: int = Field(default=5, ge=1)
    amplitude_tol: float = 0.03
    period_tol: float = 0.01


class PredictTask(_Strict):
    tasks: list[PredictTaskName]
    rho_max: float | None = Field(default=None, gt=0.0)
    n_rho: int | None = Field(default=None, ge=10)
    backbone_points: int = Field(default=400, ge=2)
    Omega_range: tuple[float, float] | None = None
    n_grid: int = Field(default=200, ge=2)
    epsilon: float | None = Field(default=None, ge=0.0)
    torus_Omega: list[float] | None = None
    observable: int | None = Field(default=None, ge=0)
    validate_: ValidateConfig = Field(default=ValidateConfig(), alias="validate")

    @model_validator(mode="after")
    def omega_range_needed(self) -> PredictTask:
        needs = {"frc", "frc_convergence"} & set(self.tasks)
        if "torus" in self.tasks and self.torus_Omega is None:
            needs.add("torus")
        if needs and self.Omega_range is None:
            raise ValueError(f"Omega_range is required by task(s) {sorted(needs)}")
        if self.Omega_range is not None and not 0 < self.Omega_range[0] < self.Omega_range[1]:
            raise ValueError("Omega_range must satisfy 0 < lo < hi")
        return self


class HistoryConfig(_Strict):
    kind: Literal["constant", "ssm"] = "constant"
    value: list[float] | None = None  # constant history
    p0: tuple[float, float] | None = None  # (re, im) point on the SSM, lifted to a chain state

    @model_validator(mode="after")
    def one_source(self) -> HistoryConfig:
        if self.kind == "constant" and self.value is None:
            raise ValueError("constant history needs 'value'")
        if self.kind == "ssm" and self.p0 is None:
            raise ValueError("ssm history needs 'p0'")
        return self


class SimulateTask(_Strict):
    history: HistoryConfig
    t_end: float = Field(gt=0.0)
    dt: float | None = Field(default=None, gt=0.0)
    solvers: list[SolverName] = ["dde"]
    tol: float = 1e-8
    method: ChainMethod = ChainMethod.RADAU
    dt_out: float | None = Field(default=None, gt=0.0)
    projection: ProjectionMethod = ProjectionMethod.ADJOINT
    observable: int | None = Field(default=None, ge=0)


class OutputConfig(_Strict):
    directory: str = "out"
    precision: int = Field(default=10, ge=3, le=17)


class RunConfig(_Strict):
    name: str = "run"
    problem: ProblemConfig
    discretization: DiscretizationConfig = DiscretizationConfig()
    ssm: SsmConfig = SsmConfig()
    spectrum: SpectrumTask | None = None
    predict: PredictTask | None = None
    simulate: SimulateTask | None = None
    output: OutputConfig = OutputConfig()


def _mark_of(node: yaml.Node | None, loc: tuple) -> yaml.Mark | None:
    """Start mark of the YAML node at a pydantic error location (best effort)."""
    mark = node.start_mark if node is not None else None
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            match = next((v for k, v in node.value if k.value == str(key)), None)
            if match is None:
                # union tags and aliases have no node of their own
                continue
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
        mark = node.start_mark
    return mark


def parse_run_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{source}: invalid YAML{where}: {getattr(e, 'problem', e)}", source=source) from e
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping", source=source)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        root = yaml.compose(text)
        lines = []
        for err in e.errors():
            path = ".".join(str(p) for p in err["loc"]) or "<root>"
            mark = _mark_of(root, err["loc"])
            where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
            lines.append(f"{path}{where}: {err['msg']}")
        raise ConfigError(f"{source}: invalid run configuration\n  " + "\n  ".join(lines),
                          source=source, errors=lines) from e


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}", source=str(path))
    config = parse_run_config(path.read_text(encoding="utf-8"), source=str(path))
    logger.info(f"Loaded run config '{config.name}' from {path}", extra={"props": {
        "problem": config.problem.kind,
        "tasks": [t for t in ("spectrum", "predict", "simulate") if getattr(config, t) is not None],
    }})
    return config
