"""Numerical settings for the entanglement pipeline."""

from dotenv import find_dotenv, load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


# Load environment variables from .env file
load_dotenv(find_dotenv())


class Settings(BaseSettings):
    """Tolerances, budgets and defaults shared by every service."""

    # Dynamics
    near_singular_cond: float = Field(
        default=1e12,
        description="Condition number above which the frequency-domain solve is rejected",
        gt=1.0,
    )
    marginal_rtol: float = Field(
        default=1e-9,
        description="Relative width of the marginal band around the stability boundary",
        gt=0.0,
    )

    # Quadrature
    quad_abs_tol: float = Field(
        default=1e-10, description="Absolute tolerance per band-averaged moment", gt=0.0
    )
    quad_rel_tol: float = Field(
        default=1e-10, description="Relative tolerance per band-averaged moment", ge=0.0
    )
    quad_order: int = Field(default=16, description="Gauss-Legendre nodes per panel", ge=2)
    quad_initial_panels: int = Field(
        default=16,
        description="Initial panels per min(bandwidth, kappa) across the filter band",
        ge=1,
    )
    quad_max_panels: int = Field(
        default=2**16, description="Panel budget before giving up on a band integral", gt=0
    )

    # Entanglement
    bona_fide_tol: float = Field(
        default=1e-9, description="Tolerance on the uncertainty-principle check", gt=0.0
    )

    # Optimizers
    tau_scan_points: int = Field(
        default=201, description="Coarse scan points for the delay optimizer", ge=3
    )
    tau_scan_span: float = Field(
        default=10.0, description="Half-width of the delay scan in units of |tau_opt| + 1/sigma", gt=0.0
    )
    g2_grid_points: int = Field(
        default=64, description="Coarse grid points for the coupling optimizer", ge=3
    )
    golden_rtol: float = Field(
        default=1e-6, description="Relative tolerance of golden-section refinement", gt=0.0
    )
    flat_tol: float = Field(
        default=1e-12, description="Spread below which an objective counts as flat", ge=0.0
    )

    # Sweeps
    sweep_points: int = Field(default=201, description="Default points per figure curve", ge=2)
    workers: int = Field(default=1, description="Worker processes for sweeps", ge=1)

    log_level: str = Field(default="INFO", description="Default logging level")

    model_config = SettingsConfigDict(
        env_prefix="OPTOENT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )


settings = Settings()
