"""
DelaySSM — Centralized Configuration.
Uses pydantic-settings to load numerical defaults from the environment / .env.
"""

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """All tool-wide defaults, overridable with DELAYSSM_<NAME> variables."""

    # === App ===
    VERSION: str = "0.1.0"
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str | None = None
    LOG_JSON: bool = False

    # === Concurrency ===
    THREADS: int = 1

    # === Spectral ===
    EIG_RESIDUAL_TOL: float = 1e-8
    MASTER_TIE_TOL: float = 1e-8
    EIG_OVERLAP_TOL: float = 1e-10
    EIG_REFINE_STEPS: int = 2
    CHAR_BOX_RE: tuple[float, float] = (-10.0, 2.0)
    CHAR_BOX_IM: tuple[float, float] = (0.0, 20.0)
    CHAR_ROOT_TOL: float = 1e-10
    HOPF_TOL: float = 1e-4

    # === SSM ===
    RESONANCE_TOL: float = 1e-6

    # === ROM analysis ===
    RHO_GRID_POINTS: int = 2000
    RHO_GRID_FACTOR: float = 1.2
    BACKBONE_AGREEMENT_TOL: float = 1e-3
    ROOT_AGREEMENT_TOL: float = 0.01
    ROOT_BOUNDARY_MARGIN: float = 0.05
    OBSERVABLE_INDEX: int = 0

    # === Simulation ===
    TRANSIENT_FRACTION: float = 0.6
    BLOWUP_NORM: float = 1e8

    # === Output ===
    EXPORT_MATRICES: bool = False

    model_config = {"env_file": ".env", "env_prefix": "DELAYSSM_", "case_sensitive": True, "extra": "ignore"}


settings = Settings()
